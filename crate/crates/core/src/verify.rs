//! Ground truth from the dense eigensolver and the checks run against it.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use simop_oracle::{checked_eigenvalues, OracleError};

use crate::error::{Error, Result};
use crate::opmatrix::{hs_sigma_on, op_norm, solve_shift, BlockMatrix, CMatrix, Spectrum};
use crate::similarity::{diagonal_blocks, AsymptoticSequences, Problem, SimilarityResult};
use crate::weighted::{weighted_norm, WeightSequence};

pub const DEFAULT_ORACLE_CAP: usize = 4096;
const DUAL_TOL: f64 = 1e-10;

/// Eigenvalues of a dense matrix, dual-checked at small dimension.
pub fn oracle_eigs(m: &CMatrix, cap: usize) -> Result<Vec<Complex64>> {
    if m.nrows() > cap {
        return Err(OracleError::DimensionCap { dim: m.nrows(), cap }.into());
    }
    Ok(checked_eigenvalues(m, DUAL_TOL)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pair {
    pub reference: usize,
    pub computed: usize,
    pub distance: f64,
    /// Distance is at least half the gap from the reference to its nearest neighbour.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pairing {
    /// Indexed by reference position.
    pub pairs: Vec<Pair>,
    pub max_distance: f64,
}

/// Greedy nearest pairing; equal distances go to the lower reference index,
/// then the lower computed index.
pub fn match_spectra(reference: &[Complex64], computed: &[Complex64]) -> Result<Pairing> {
    if reference.len() != computed.len() {
        return Err(Error::invalid(format!(
            "cannot pair {} reference values with {} computed values",
            reference.len(),
            computed.len()
        )));
    }
    let n = reference.len();
    let mut cand = Vec::with_capacity(n * n);
    for (i, x) in reference.iter().enumerate() {
        for (j, y) in computed.iter().enumerate() {
            cand.push(((x - y).norm(), i, j));
        }
    }
    cand.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_c = vec![false; n];
    let mut slot: Vec<Option<(usize, f64)>> = vec![None; n];
    let mut left = n;
    for (d, i, j) in cand {
        if left == 0 {
            break;
        }
        if slot[i].is_some() || used_c[j] {
            continue;
        }
        slot[i] = Some((j, d));
        used_c[j] = true;
        left -= 1;
    }
    let mut pairs = Vec::with_capacity(n);
    let mut max_distance = 0.0f64;
    for (i, s) in slot.into_iter().enumerate() {
        let (j, d) = s.expect("greedy pairing covers every reference value");
        let gap = reference
            .iter()
            .enumerate()
            .filter(|(k, z)| *k != i && **z != reference[i])
            .map(|(_, z)| (z - reference[i]).norm())
            .fold(f64::INFINITY, f64::min);
        max_distance = max_distance.max(d);
        pairs.push(Pair { reference: i, computed: j, distance: d, ambiguous: d >= 0.5 * gap });
    }
    Ok(Pairing { pairs, max_distance })
}

/// Oracle eigenvalue paired with each basis vector of the free operator.
pub fn paired_oracle(problem: &Problem) -> Result<(Vec<Complex64>, Pairing)> {
    let eig = oracle_eigs(&problem.assembled(), DEFAULT_ORACLE_CAP)?;
    let pairing = match_spectra(problem.spectrum().basis_values(), &eig)?;
    Ok((eig, pairing))
}

/// `b_n = lambda_n - mu_n` keyed by index, for simple spectra.
pub fn eigenvalue_shifts(problem: &Problem) -> Result<BTreeMap<i64, Complex64>> {
    let spec = problem.spectrum();
    if spec.entries().iter().any(|e| e.multiplicity != 1) {
        return Err(Error::NotSupported("eigenvalue shifts by index need a simple spectrum".into()));
    }
    let (eig, pairing) = paired_oracle(problem)?;
    let lambda = spec.basis_values();
    Ok(pairing
        .pairs
        .iter()
        .map(|p| (spec.label_of_basis(p.reference), lambda[p.reference] - eig[p.computed]))
        .collect())
}

/// Eigenvalues of the diagonal blocks of `A - V`, one per basis vector of the
/// original spectrum, matched inside each block to the free eigenvalues.
pub fn block_estimates(spectrum: &Spectrum, result: &SimilarityResult) -> Result<Vec<Complex64>> {
    let groups: Vec<Vec<usize>> = result.stage.partition().groups().iter().map(|g| g.basis.clone()).collect();
    let blocks = diagonal_blocks(spectrum, &groups, result.v.dense());
    let lambda = spectrum.basis_values();
    let mut out = vec![Complex64::new(0.0, 0.0); spectrum.dim()];
    for (g, block) in groups.iter().zip(blocks) {
        if g.len() == 1 {
            out[g[0]] = block[(0, 0)];
            continue;
        }
        let eig = simop_oracle::eigenvalues(&block)?;
        let reference: Vec<Complex64> = g.iter().map(|&i| lambda[i]).collect();
        let pairing = match_spectra(&reference, &eig)?;
        for p in pairing.pairs {
            out[g[p.reference]] = eig[p.computed];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub n: i64,
    /// Position of the basis vector among those carrying `n`.
    pub slot: usize,
    pub lambda: Complex64,
    pub estimate: Complex64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Complex64>,
    pub oracle: Complex64,
    pub b: Complex64,
    pub residual: f64,
    pub ambiguous: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TailStats {
    pub weighted_sum: f64,
    pub plain_sum: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub rows: Vec<SpectrumRow>,
    pub tail_stats: TailStats,
    pub matching_quality: f64,
}

/// `w(n) = alpha_n^{-2}` on labels with nonzero weight.
pub fn inverse_square_weights(w: &WeightSequence) -> BTreeMap<i64, f64> {
    w.alpha_map().iter().filter(|(_, &a)| a > 0.0).map(|(&n, &a)| (n, 1.0 / (a * a))).collect()
}

/// `(sum |b_n|^2 w(n), sum |b_n|^2)`; labels missing from `w` get weight 1.
pub fn tail_weight_check(b: &BTreeMap<i64, Complex64>, w: &BTreeMap<i64, f64>) -> TailStats {
    let mut t = TailStats::default();
    for (n, z) in b {
        let s = z.norm_sqr();
        t.plain_sum += s;
        t.weighted_sum += s * w.get(n).copied().unwrap_or(1.0);
    }
    t
}

/// One row per interior basis vector comparing the block estimates of
/// `A - V` with the oracle.
pub fn spectrum_report(
    problem: &Problem,
    result: &SimilarityResult,
    asym: Option<&AsymptoticSequences>,
) -> Result<SpectrumReport> {
    let spec = problem.spectrum();
    let (eig, pairing) = paired_oracle(problem)?;
    let estimates = block_estimates(spec, result)?;
    let lambda = spec.basis_values();
    let window = spec.window();
    let mut rows = Vec::new();
    let mut quality = 0.0f64;
    let mut last_label = None;
    let mut slot = 0;
    let mut shifts = BTreeMap::new();
    for p in &pairing.pairs {
        let i = p.reference;
        let n = spec.label_of_basis(i);
        slot = if last_label == Some(n) { slot + 1 } else { 0 };
        last_label = Some(n);
        if !window.is_interior(n) {
            continue;
        }
        quality = quality.max(p.distance);
        let oracle = eig[p.computed];
        let b = lambda[i] - oracle;
        if slot == 0 {
            shifts.insert(n, b);
        }
        rows.push(SpectrumRow {
            n,
            slot,
            lambda: lambda[i],
            estimate: estimates[i],
            p: asym.and_then(|a| a.p.get(&n).copied()),
            q: asym.and_then(|a| a.q.get(&n).copied()),
            oracle,
            b,
            residual: (estimates[i] - oracle).norm(),
            ambiguous: p.ambiguous,
        });
    }
    let w = result.weights.as_ref().map(inverse_square_weights).unwrap_or_default();
    Ok(SpectrumReport { rows, tail_stats: tail_weight_check(&shifts, &w), matching_quality: quality })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionComparison {
    /// `||P' - P||_Sigma` from `(I+U) P (I+U)^{-1} - P`.
    pub lhs: f64,
    /// Same quantity from `(U P - P U)(I+U)^{-1}`.
    pub lhs_alt: f64,
    pub rhs: f64,
    pub alpha_sigma: f64,
    pub u_sigma: f64,
    pub u_weighted: f64,
    pub lemma_lhs: f64,
    pub lemma_rhs: f64,
    pub ok: bool,
    pub lemma_ok: bool,
}

/// Compare the perturbed projection of a union of groups with its bound.
///
/// `sigma` lists group positions in the weight partition. On a trivial
/// partition the factor `1/(1 - ||U||)` is replaced by `||(I+U)^{-1}||`.
pub fn projection_compare(u: &BlockMatrix, w: &WeightSequence, sigma: &[usize]) -> Result<ProjectionComparison> {
    let part = w.partition();
    if !u.partition().same_spectrum(part) {
        return Err(Error::mismatch("U and the weight live on different spectra"));
    }
    let groups = part.groups();
    let mut diag = vec![0.0; part.dim()];
    let mut alpha_sigma = 0.0f64;
    for &g in sigma {
        let grp = groups.get(g).ok_or_else(|| Error::invalid(format!("group {g} outside partition")))?;
        alpha_sigma = alpha_sigma.max(w.alpha(grp.label));
        for &i in &grp.basis {
            diag[i] = 1.0;
        }
    }
    let id = BlockMatrix::identity(u.partition());
    let p = id.scale_rows_cols(Some(&diag), None);
    let inv = solve_shift(u)?;
    let shifted = &id + u;
    let direct = &(&(&shifted * &p) * &inv) - &p;
    let up = u * &p;
    let pu = &p * u;
    let alt = &(&up - &pu) * &inv;
    let lhs = hs_sigma_on(&direct, part)?;
    let lhs_alt = hs_sigma_on(&alt, part)?;
    let u_sigma = hs_sigma_on(u, part)?;
    let u_weighted = weighted_norm(u, w)?;
    let factor = if part.is_scalar() {
        op_norm(inv.dense())
    } else if u_sigma < 1.0 {
        1.0 / (1.0 - u_sigma)
    } else {
        return Err(Error::ConditionViolation { lhs: u_sigma, rhs: 1.0 });
    };
    let rhs = 2.0 * u_weighted * alpha_sigma * factor;
    let lemma_lhs = hs_sigma_on(&up, part)?.max(hs_sigma_on(&pu, part)?);
    let lemma_rhs = alpha_sigma * u_weighted;
    Ok(ProjectionComparison {
        lhs,
        lhs_alt,
        rhs,
        alpha_sigma,
        u_sigma,
        u_weighted,
        lemma_lhs,
        lemma_rhs,
        ok: lhs <= rhs + 1e-12,
        lemma_ok: lemma_lhs <= lemma_rhs * (1.0 + 1e-12) + 1e-14,
    })
}

/// Groups of the weight partition with `|label| >= n`.
pub fn tail_groups(w: &WeightSequence, n: i64) -> Vec<usize> {
    w.partition().groups().iter().enumerate().filter(|(_, g)| g.label.abs() >= n).map(|(i, _)| i).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantGate {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl InvariantGate {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        InvariantGate { name: name.into(), value, threshold, pass: value <= threshold }
    }
}

/// Post-hoc checks every accepted pipeline run must satisfy.
pub fn invariant_gates(problem: &Problem, result: &SimilarityResult) -> Result<Vec<InvariantGate>> {
    let spec = problem.spectrum();
    let mut gates = Vec::new();
    let scale = result.residual.scale.max(1.0);
    gates.push(InvariantGate::at_most("similarity_residual", result.residual_similarity, 1e-9 * scale));
    let hv = result.v.hs();
    gates.push(InvariantGate::at_most("offdiagonal_v", result.residual_offdiag_v, 1e-10 * hv.max(f64::MIN_POSITIVE)));
    let eig = oracle_eigs(&problem.assembled(), DEFAULT_ORACLE_CAP)?;
    let est = block_estimates(spec, result)?;
    let dist = simop_oracle::pairing_distance(&eig, &est);
    gates.push(InvariantGate::at_most("spectrum_preservation", dist, 1e-8 * (1.0 + spec.max_modulus())));
    for s in result.stages.iter().filter(|s| s.accepted) {
        if let (Some(c), Some(q)) = (s.contraction_q, s.certificate_q) {
            gates.push(InvariantGate::at_most(&format!("{}_contraction", s.name), c, q + 0.05));
        }
        if let Some(b) = s.ball_ratio {
            gates.push(InvariantGate::at_most(&format!("{}_ball", s.name), b, 3.0));
        }
    }
    if let Some(w) = &result.weights {
        if !w.context().spectrum().is_derived() && w.partition().same_spectrum(result.u.partition()) {
            let n = (spec.window().interior_half_width() as i64 / 2).max(1);
            let cmp = projection_compare(&result.u, w, &tail_groups(w, n))?;
            gates.push(InvariantGate::at_most(
                "projection_lemma",
                cmp.lemma_lhs,
                cmp.lemma_rhs * (1.0 + 1e-12) + 1e-14,
            ));
            gates.push(InvariantGate::at_most("projection_bound", cmp.lhs, cmp.rhs + 1e-12));
        }
    }
    Ok(gates)
}
