//! Spectra, partitions, block matrices and their norms.

mod block;
pub mod io;
mod norms;
mod partition;
mod spectrum;

pub use block::{gemm, BlockMatrix, CMatrix};
pub use norms::{
    block_norm, group_row_col_sums, hs_sigma, hs_sigma_on, norms, op_norm, shift_condition, solve_shift, NormReport,
};
pub use partition::{Group, Partition, PartitionKind, NO_LABEL};
pub use spectrum::{eta_constant, eta_of, separation_delta, separation_of, SpectralEntry, Spectrum, TruncationWindow};
