//! Least squares on a column submatrix via Householder QR.

use crate::combmat::CombMatrix;
use crate::error::{param, Error, Result};

/// Smallest allowed `|R_kk| / max |R_ii|` before a fit is declared rank
/// deficient.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LeastSquares {
    /// Coefficients aligned with the requested column order.
    pub coef: Vec<f64>,
    pub residual: Vec<f64>,
    pub residual_norm: f64,
}

/// Minimises `||y - A_cols x||_2`.
pub fn least_squares(a: &CombMatrix, cols: &[usize], y: &[f64]) -> Result<LeastSquares> {
    let m = a.m();
    if y.len() != m {
        return param(format!("y has length {}, expected m = {m}", y.len()));
    }
    if cols.is_empty() {
        return param("least squares needs at least one column");
    }
    if let Some(&j) = cols.iter().find(|&&j| j >= a.n()) {
        return param(format!("column index {j} out of range (n = {})", a.n()));
    }
    let k = cols.len();
    if k > m {
        return Err(Error::RankDeficient { columns: k, ratio: 0.0 });
    }

    // column-major m x k, overwritten by R above the diagonal and the
    // Householder vectors below it
    let mut q = a.dense_columns(cols);
    let mut rhs = y.to_vec();
    let mut diag = vec![0.0; k];

    for c in 0..k {
        let col = &mut q[c * m..(c + 1) * m];
        let norm = col[c..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            diag[c] = 0.0;
            continue;
        }
        let alpha = if col[c] > 0.0 { -norm } else { norm };
        col[c] -= alpha;
        let vnorm2: f64 = col[c..].iter().map(|v| v * v).sum();
        diag[c] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        let (head, tail) = q.split_at_mut((c + 1) * m);
        let v = &head[c * m + c..c * m + m];
        for other in tail.chunks_exact_mut(m) {
            reflect(v, &mut other[c..], vnorm2);
        }
        reflect(v, &mut rhs[c..], vnorm2);
    }

    let max_diag = diag.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let min_diag = diag.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    if max_diag == 0.0 || min_diag < RANK_TOL * max_diag {
        let ratio = if max_diag == 0.0 { 0.0 } else { min_diag / max_diag };
        return Err(Error::RankDeficient { columns: k, ratio });
    }

    let mut coef = vec![0.0; k];
    for r in (0..k).rev() {
        let mut s = rhs[r];
        for c in r + 1..k {
            s -= q[c * m + r] * coef[c];
        }
        coef[r] = s / diag[r];
    }

    let mut residual = y.to_vec();
    for (&j, &x) in cols.iter().zip(&coef) {
        for &i in a.col(j) {
            residual[i] -= x;
        }
    }
    let residual_norm = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(LeastSquares {
        coef,
        residual,
        residual_norm,
    })
}

fn reflect(v: &[f64], x: &mut [f64], vnorm2: f64) {
    let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let s = 2.0 * dot / vnorm2;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}
