//! Weighted Hilbert–Schmidt space built from the decay of a perturbation
//! along block rows and columns.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::opmatrix::{eta_constant, group_row_col_sums, hs_sigma_on, BlockMatrix, Partition, NO_LABEL};
use crate::transforms::TransformContext;

#[derive(Debug, Clone)]
pub struct WeightSequence {
    ctx: TransformContext,
    alpha: BTreeMap<i64, f64>,
    alpha_prime: BTreeMap<i64, f64>,
    alpha_tilde: BTreeMap<i64, f64>,
    row_tails: BTreeMap<i64, f64>,
    col_tails: BTreeMap<i64, f64>,
    prime_tail: BTreeMap<i64, f64>,
    source_norm: f64,
    sqrt_eta: f64,
    finite_support: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightRow {
    pub n: i64,
    pub alpha: f64,
    pub alpha_prime: Option<f64>,
    pub alpha_tilde: Option<f64>,
}

impl WeightSequence {
    pub fn context(&self) -> &TransformContext {
        &self.ctx
    }

    pub fn partition(&self) -> &Arc<Partition> {
        self.ctx.partition()
    }

    /// `alpha_n`; zero for labels beyond the window.
    pub fn alpha(&self, n: i64) -> f64 {
        self.alpha.get(&n).copied().unwrap_or(0.0)
    }

    pub fn alpha_map(&self) -> &BTreeMap<i64, f64> {
        &self.alpha
    }

    pub fn alpha_prime(&self) -> &BTreeMap<i64, f64> {
        &self.alpha_prime
    }

    pub fn alpha_tilde(&self) -> &BTreeMap<i64, f64> {
        &self.alpha_tilde
    }

    /// Row and column tail sums keyed by `|n|`, before normalisation.
    pub fn tails(&self) -> (&BTreeMap<i64, f64>, &BTreeMap<i64, f64>) {
        (&self.row_tails, &self.col_tails)
    }

    /// Bound on the part of `alpha'_n` coming from indices outside the window,
    /// assuming eigenvalues keep moving away beyond the window edge.
    pub fn prime_tail_estimate(&self) -> &BTreeMap<i64, f64> {
        &self.prime_tail
    }

    /// `||B||_Sigma` of the matrix the sequence was built from.
    pub fn source_norm(&self) -> f64 {
        self.source_norm
    }

    pub fn sqrt_eta(&self) -> f64 {
        self.sqrt_eta
    }

    /// Some `alpha_n` vanishes inside the window.
    pub fn finite_support(&self) -> bool {
        self.finite_support
    }

    /// Largest label with a defined `alpha`.
    pub fn max_label(&self) -> i64 {
        self.alpha.keys().next_back().copied().unwrap_or(0)
    }

    /// `alpha` of the group containing each basis vector.
    pub fn basis_weights(&self) -> Vec<f64> {
        let p = self.ctx.partition();
        p.basis_groups().iter().map(|&g| self.alpha(p.groups()[g].label)).collect()
    }

    pub fn rows(&self) -> Vec<WeightRow> {
        self.alpha
            .iter()
            .map(|(&n, &a)| WeightRow {
                n,
                alpha: a,
                alpha_prime: self.alpha_prime.get(&n).copied(),
                alpha_tilde: self.alpha_tilde.get(&n).copied(),
            })
            .collect()
    }
}

/// Decay sequences of `b` relative to the partition of `ctx`.
pub fn alpha_sequence(b: &BlockMatrix, ctx: &TransformContext) -> Result<WeightSequence> {
    let part = ctx.partition();
    if part.groups().iter().any(|g| g.label == NO_LABEL) {
        return Err(Error::invalid("weight sequences need a partition whose groups carry indices"));
    }
    let (rows, cols) = group_row_col_sums(b, part)?;
    let total: f64 = rows.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("weight sequence of the zero matrix is undefined"));
    }
    let source_norm = total.sqrt();
    let labels: Vec<i64> = part.groups().iter().map(|g| g.label).collect();
    let max_abs = labels.iter().map(|l| l.abs()).max().unwrap_or(0);

    let mut row_by_abs = vec![0.0; max_abs as usize + 1];
    let mut col_by_abs = vec![0.0; max_abs as usize + 1];
    for (g, &l) in labels.iter().enumerate() {
        row_by_abs[l.unsigned_abs() as usize] += rows[g];
        col_by_abs[l.unsigned_abs() as usize] += cols[g];
    }
    let mut row_tails = BTreeMap::new();
    let mut col_tails = BTreeMap::new();
    let (mut rt, mut ct) = (0.0, 0.0);
    for a in (0..=max_abs as usize).rev() {
        rt += row_by_abs[a];
        ct += col_by_abs[a];
        row_tails.insert(a as i64, rt);
        col_tails.insert(a as i64, ct);
    }
    let scale = source_norm.powf(-0.5);
    let mut alpha = BTreeMap::new();
    let mut finite_support = false;
    for n in -max_abs..=max_abs {
        let a = n.abs();
        let r = row_tails[&a].max(0.0).sqrt().sqrt();
        let c = col_tails[&a].max(0.0).sqrt().sqrt();
        let v = (scale * r.max(c)).min(1.0);
        if v == 0.0 {
            finite_support = true;
        }
        alpha.insert(n, v);
    }

    // alpha'_{n+1} = sup { alpha_l max(d_jl, d_lj) : |l| <= n < |j| }
    let g = labels.len();
    let mut coupling = vec![0.0; g * g];
    for j in 0..g {
        for l in 0..g {
            if j != l {
                let djl = crate::transforms::coupling_d(ctx, j, l)?;
                let dlj = crate::transforms::coupling_d(ctx, l, j)?;
                coupling[j * g + l] = djl.max(dlj);
            }
        }
    }
    let sqrt_eta = eta_constant(ctx.spectrum())?.sqrt();
    let entries = ctx.spectrum().entries();
    let edge: Vec<usize> = (0..entries.len()).filter(|&p| entries[p].index.abs() == max_abs).collect();
    let mut alpha_prime = BTreeMap::new();
    let mut alpha_tilde = BTreeMap::new();
    let mut prime_tail = BTreeMap::new();
    for n in 0..max_abs {
        let mut best = 0.0f64;
        let mut tail = 0.0f64;
        for l in 0..g {
            if labels[l].abs() > n {
                continue;
            }
            let al = alpha[&labels[l]];
            for j in 0..g {
                if labels[j].abs() > n {
                    best = best.max(al * coupling[j * g + l]);
                }
            }
            for &pl in &part.groups()[l].entries {
                let lam = entries[pl].value;
                let dist = edge.iter().map(|&e| (entries[e].value - lam).norm()).fold(f64::INFINITY, f64::min);
                if dist > 0.0 && dist.is_finite() {
                    tail = tail.max(al / dist);
                }
            }
        }
        alpha_prime.insert(n + 1, best);
        alpha_tilde.insert(n + 1, sqrt_eta * alpha[&(n + 1)] + best);
        prime_tail.insert(n + 1, tail);
    }
    Ok(WeightSequence {
        ctx: ctx.clone(),
        alpha,
        alpha_prime,
        alpha_tilde,
        row_tails,
        col_tails,
        prime_tail,
        source_norm,
        sqrt_eta,
        finite_support,
    })
}

/// `f(A) = sum_n alpha_n P_n` on `partition`.
pub fn weight_operator(w: &WeightSequence, partition: &Arc<Partition>) -> Result<BlockMatrix> {
    if !partition.same_spectrum(w.partition()) {
        return Err(Error::mismatch("weight operator requested on another spectrum"));
    }
    let diag: Vec<_> = w.basis_weights().into_iter().map(|a| num_complex::Complex64::new(a, 0.0)).collect();
    BlockMatrix::from_diagonal(partition, &diag)
}

#[derive(Debug, Clone)]
pub struct WeightedFactorization {
    pub x_left: BlockMatrix,
    pub x_right: BlockMatrix,
    pub weighted_norm: f64,
}

fn inverse_weights(w: &WeightSequence) -> Result<Vec<f64>> {
    let part = w.partition();
    let weights = w.basis_weights();
    for (i, &a) in weights.iter().enumerate() {
        if a == 0.0 {
            return Err(Error::DegenerateWeight { label: part.groups()[part.group_of_basis(i)].label });
        }
    }
    Ok(weights.into_iter().map(|a| 1.0 / a).collect())
}

/// `X = X_l f(A) = f(A) X_r`.
pub fn factorize(x: &BlockMatrix, w: &WeightSequence) -> Result<WeightedFactorization> {
    if !x.partition().same_spectrum(w.partition()) {
        return Err(Error::mismatch("matrix and weight live on different spectra"));
    }
    let inv = inverse_weights(w)?;
    let x_left = x.scale_rows_cols(None, Some(&inv));
    let x_right = x.scale_rows_cols(Some(&inv), None);
    let weighted_norm = hs_sigma_on(&x_left, w.partition())?.max(hs_sigma_on(&x_right, w.partition())?);
    Ok(WeightedFactorization { x_left, x_right, weighted_norm })
}

/// `||X||_{B,Sigma}` without keeping the factors.
pub fn weighted_norm(x: &BlockMatrix, w: &WeightSequence) -> Result<f64> {
    Ok(factorize(x, w)?.weighted_norm)
}

/// `sum_n (||X P_n||^2 + ||P_n X||^2) / alpha_n^2` over the groups of the weight.
pub fn weighted_tail_sum(x: &BlockMatrix, w: &WeightSequence) -> Result<f64> {
    let part = w.partition();
    let (rows, cols) = group_row_col_sums(x, part)?;
    let mut s = 0.0;
    for (g, grp) in part.groups().iter().enumerate() {
        let a = w.alpha(grp.label);
        if a == 0.0 {
            return Err(Error::DegenerateWeight { label: grp.label });
        }
        s += (rows[g] + cols[g]) / (a * a);
    }
    Ok(s)
}

/// `gamma_m = alpha~_{m+1}` for every `m` the window supports.
pub fn gamma_m_sequence(w: &WeightSequence) -> BTreeMap<usize, f64> {
    w.alpha_tilde.iter().map(|(&n, &v)| ((n - 1) as usize, v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoarseningChoice {
    pub m: usize,
    pub gamma: f64,
    pub weighted_norm: f64,
    /// `4 gamma_m ||B||_{B,Sigma}`.
    pub product: f64,
}

/// Smallest `m >= min_m` with `4 gamma_m ||B||_{B,Sigma} <= margin`.
pub fn select_coarsening_from(
    b: &BlockMatrix,
    w: &WeightSequence,
    margin: f64,
    min_m: usize,
) -> Result<CoarseningChoice> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::invalid(format!("contraction margin {margin} not in (0,1)")));
    }
    let norm = weighted_norm(b, w)?;
    let mut best = f64::INFINITY;
    for (m, gamma) in gamma_m_sequence(w) {
        if m < min_m {
            continue;
        }
        let product = 4.0 * gamma * norm;
        best = best.min(product);
        if product <= margin {
            return Ok(CoarseningChoice { m, gamma, weighted_norm: norm, product });
        }
    }
    Err(Error::WindowTooSmall { what: "coarsening m", best })
}

pub fn select_coarsening(b: &BlockMatrix, w: &WeightSequence, margin: f64) -> Result<CoarseningChoice> {
    select_coarsening_from(b, w, margin, 0)
}
