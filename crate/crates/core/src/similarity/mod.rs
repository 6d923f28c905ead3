//! Contraction iteration for the similarity `I + U` and the staged
//! pipelines built on it.

mod fixed_point;
mod pipeline;
mod preliminary;
mod residual;

pub use fixed_point::{fixed_point, phi_step, phi_step_zero_diag, Certificate, FixedPoint, PhiVariant, StageNorm};
pub use pipeline::{
    asymptotic_sequences, derived_spectrum, diagonal_identity_residual, AsymptoticSequences, Auto, Mt1, Mt2, Mt3, Mt4,
    Pipeline, PipelineOptions, PipelineRegistry, PipelineRun, Problem, SimilarityResult, StageReport, Weighted,
};
pub use preliminary::{preliminary_transform, select_preliminary, PreliminaryTransform};
pub use residual::{diagonal_blocks, offdiagonal_norm, similarity_defect, similarity_residual, ResidualReport};
