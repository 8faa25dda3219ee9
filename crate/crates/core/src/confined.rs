//! The confined column set and sparsity-level estimation.
//!
//! Rows whose measurement is within `epsilon` of zero cannot touch the
//! support of a confined signal, so every column with a one in such a row is
//! excluded. What remains is the confined set `Gamma`.

use crate::combmat::{CombMatrix, OpCounter};
use crate::error::{param, Result};
use crate::theory::expected_nu_closed;

/// Threshold used in the noiseless pipeline.
pub const DEFAULT_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfinedSet {
    pub epsilon: f64,
    /// Rows with `|y_i| <= epsilon`, ascending.
    pub e_rows: Vec<usize>,
    /// Columns with no one in any row of `e_rows`, ascending.
    pub gamma: Vec<usize>,
}

impl ConfinedSet {
    /// Number of rows of `y` above the threshold.
    pub fn nonzero_rows(&self, m: usize) -> usize {
        m - self.e_rows.len()
    }

    pub fn contains_all(&self, idx: &[usize]) -> bool {
        idx.iter().all(|j| self.gamma.binary_search(j).is_ok())
    }
}

pub fn compute_confined_set(a: &CombMatrix, y: &[f64], epsilon: f64) -> Result<ConfinedSet> {
    compute_confined_set_counted(a, y, epsilon, &mut OpCounter::default())
}

/// Builds `Gamma`, charging `n` preprocessing flops and `m` threshold tests.
pub fn compute_confined_set_counted(
    a: &CombMatrix,
    y: &[f64],
    epsilon: f64,
    counter: &mut OpCounter,
) -> Result<ConfinedSet> {
    if y.len() != a.m() {
        return param(format!("y has length {}, expected m = {}", y.len(), a.m()));
    }
    if !(epsilon >= 0.0) {
        return param(format!("epsilon = {epsilon} must be >= 0"));
    }
    let e_rows: Vec<usize> = (0..a.m()).filter(|&i| y[i].abs() <= epsilon).collect();
    let mut excluded = vec![false; a.n()];
    for &i in &e_rows {
        for &j in a.row(i) {
            excluded[j] = true;
        }
    }
    let gamma = (0..a.n()).filter(|&j| !excluded[j]).collect();
    counter.preprocessing_flops += a.n() as u64;
    counter.threshold_tests += a.m() as u64;
    Ok(ConfinedSet { epsilon, e_rows, gamma })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparsityEstimate {
    pub k_hat: usize,
    /// The observed count was below `d`, which no `K >= 1` can produce.
    pub below_min_support: bool,
}

/// Sparsity level whose expected number of nonzero measurements is closest to
/// `nonzero_count`; ties go to the smaller `K`.
pub fn estimate_sparsity(nonzero_count: usize, m: usize, d: usize, k_max: usize) -> Result<SparsityEstimate> {
    if k_max == 0 {
        return param("K_max must be >= 1");
    }
    if d == 0 || d > m {
        return param(format!("column degree d = {d} must satisfy 1 <= d <= m = {m}"));
    }
    if nonzero_count < d {
        return Ok(SparsityEstimate {
            k_hat: 1,
            below_min_support: true,
        });
    }
    let target = nonzero_count as f64;
    let mut best = (1, f64::INFINITY);
    for k in 1..=k_max {
        let gap = (target - expected_nu_closed(m, d, k)?).abs();
        if gap < best.1 {
            best = (k, gap);
        }
    }
    Ok(SparsityEstimate {
        k_hat: best.0,
        below_min_support: false,
    })
}

/// `round(||y||_1 / (d |theta|))`, exact for noiseless flat signals since the
/// positive entries of `y` sum to `theta K d`.
pub fn flat_sparsity_exact(y: &[f64], d: usize, theta: f64) -> usize {
    let l1: f64 = y.iter().map(|v| v.abs()).sum();
    (l1 / (d as f64 * theta.abs())).round() as usize
}
