//! Greedy solvers: OMP, generalized OMP and their confined variants.
//!
//! All four share one pursuit loop. Each iteration scans its candidate pool
//! (`[n]` or the confined set), picks the column(s) most correlated with the
//! residual, refits by least squares on the augmented support and updates the
//! residual. Every column of the pool is correlated each iteration so that the
//! counters follow the classic accounting: `|pool| (d - 1)` additions and
//! `|pool| - 1` comparisons per selected index.

use crate::combmat::{CombMatrix, OpCounter};
use crate::confined::{compute_confined_set_counted, ConfinedSet, DEFAULT_EPSILON};
use crate::error::{param, Result};
use crate::lstsq::least_squares;
use crate::signals::SparseSignal;

/// Relative error at or below which a recovery counts as perfect.
pub const PERFECT_RECOVERY_THRESHOLD: f64 = 1e-3;

/// Default residual stopping threshold.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Among equal correlation magnitudes the smallest column index wins.
    #[default]
    LowestIndex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Target sparsity `K`, the iteration budget.
    pub sparsity: usize,
    /// Confinement threshold on `|y_i|`.
    pub epsilon: f64,
    /// Stop once `||r||_2 <= residual_tol`.
    pub residual_tol: f64,
    /// Indices selected per iteration by the gOMP variants.
    pub batch: usize,
    pub tie_break: TieBreak,
}

impl SolverConfig {
    pub fn new(sparsity: usize) -> Self {
        Self {
            sparsity,
            epsilon: DEFAULT_EPSILON,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            batch: 1,
            tie_break: TieBreak::LowestIndex,
        }
    }

    pub fn with_batch(mut self, batch: usize) -> Self {
        self.batch = batch;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_residual_tol(mut self, tol: f64) -> Self {
        self.residual_tol = tol;
        self
    }

    fn validate(&self, a: &CombMatrix, y: &[f64]) -> Result<()> {
        if self.sparsity == 0 || self.sparsity > a.m() {
            return param(format!("K = {} must satisfy 1 <= K <= m = {}", self.sparsity, a.m()));
        }
        if self.batch == 0 {
            return param("batch size N must be >= 1");
        }
        if !(self.residual_tol >= 0.0) {
            return param("residual tolerance must be >= 0");
        }
        if !(self.epsilon >= 0.0) {
            return param("epsilon must be >= 0");
        }
        if y.len() != a.m() {
            return param(format!("y has length {}, expected m = {}", y.len(), a.m()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The confined set was small enough to solve directly.
    ConfinedExact,
    ResidualThreshold,
    MaxIterations,
    /// Every candidate of the pool has been selected.
    GammaExhausted,
}

#[derive(Debug, Clone)]
pub struct GreedyResult {
    pub x_hat: Vec<f64>,
    /// Estimated support, ascending.
    pub support: Vec<usize>,
    /// `||r^(k)||_2` for `k = 0..=iterations`, starting at `||y||_2`.
    pub residual_norms: Vec<f64>,
    pub iterations: usize,
    pub counters: OpCounter,
    pub stop: StopReason,
    /// Order in which indices entered the support.
    pub selection_order: Vec<usize>,
    pub confined: Option<ConfinedSet>,
}

impl GreedyResult {
    pub fn final_residual_norm(&self) -> f64 {
        *self.residual_norms.last().expect("history starts with ||y||")
    }
}

pub fn omp(a: &CombMatrix, y: &[f64], cfg: &SolverConfig) -> Result<GreedyResult> {
    cfg.validate(a, y)?;
    let pool: Vec<usize> = (0..a.n()).collect();
    pursue(a, y, cfg, &pool, 1, cfg.sparsity, OpCounter::default(), None)
}

pub fn confined_omp(a: &CombMatrix, y: &[f64], cfg: &SolverConfig) -> Result<GreedyResult> {
    cfg.validate(a, y)?;
    let mut counters = OpCounter::default();
    let set = compute_confined_set_counted(a, y, cfg.epsilon, &mut counters)?;
    if set.gamma.len() <= cfg.sparsity {
        return solve_on_gamma(a, y, set, counters);
    }
    let pool = set.gamma.clone();
    pursue(a, y, cfg, &pool, 1, cfg.sparsity, counters, Some(set))
}

pub fn gomp(a: &CombMatrix, y: &[f64], cfg: &SolverConfig) -> Result<GreedyResult> {
    cfg.validate(a, y)?;
    let pool: Vec<usize> = (0..a.n()).collect();
    let max_iter = cfg.sparsity.min(a.m() / cfg.batch);
    pursue(a, y, cfg, &pool, cfg.batch, max_iter, OpCounter::default(), None)
}

pub fn confined_gomp(a: &CombMatrix, y: &[f64], cfg: &SolverConfig) -> Result<GreedyResult> {
    cfg.validate(a, y)?;
    let mut counters = OpCounter::default();
    let set = compute_confined_set_counted(a, y, cfg.epsilon, &mut counters)?;
    if set.gamma.len() <= cfg.sparsity.max(cfg.batch) {
        return solve_on_gamma(a, y, set, counters);
    }
    let pool = set.gamma.clone();
    let max_iter = cfg.sparsity.min(a.m() / cfg.batch);
    pursue(a, y, cfg, &pool, cfg.batch, max_iter, counters, Some(set))
}

/// Least squares directly on the confined set, skipping identification.
fn solve_on_gamma(a: &CombMatrix, y: &[f64], set: ConfinedSet, counters: OpCounter) -> Result<GreedyResult> {
    let y_norm = norm(y);
    let mut x_hat = vec![0.0; a.n()];
    let final_norm = if set.gamma.is_empty() {
        y_norm
    } else {
        let ls = least_squares(a, &set.gamma, y)?;
        for (&j, &v) in set.gamma.iter().zip(&ls.coef) {
            x_hat[j] = v;
        }
        ls.residual_norm
    };
    Ok(GreedyResult {
        x_hat,
        support: set.gamma.clone(),
        residual_norms: vec![y_norm, final_norm],
        iterations: 0,
        counters,
        stop: StopReason::ConfinedExact,
        selection_order: set.gamma.clone(),
        confined: Some(set),
    })
}

#[allow(clippy::too_many_arguments)]
fn pursue(
    a: &CombMatrix,
    y: &[f64],
    cfg: &SolverConfig,
    pool: &[usize],
    batch: usize,
    max_iter: usize,
    mut counters: OpCounter,
    confined: Option<ConfinedSet>,
) -> Result<GreedyResult> {
    let n = a.n();
    let mut selected = vec![false; n];
    let mut order: Vec<usize> = Vec::new();
    let mut residual = y.to_vec();
    let mut norms = vec![norm(y)];
    let mut x_hat = vec![0.0; n];
    let mut corr: Vec<(usize, f64)> = Vec::with_capacity(pool.len());
    let mut k = 0;

    let stop = loop {
        if *norms.last().unwrap() <= cfg.residual_tol {
            break StopReason::ResidualThreshold;
        }
        if k >= max_iter {
            break StopReason::MaxIterations;
        }
        let remaining = pool.len() - order.len();
        if remaining == 0 {
            break StopReason::GammaExhausted;
        }
        k += 1;

        if remaining < batch {
            order.extend(pool.iter().copied().filter(|&j| !selected[j]));
        } else {
            corr.clear();
            for &j in pool {
                let c = a.correlation_unchecked(j, &residual);
                if !selected[j] {
                    corr.push((j, c.abs()));
                }
            }
            counters.inner_products += pool.len() as u64;
            counters.additions += (pool.len() * (a.d() - 1)) as u64;
            counters.comparisons += (batch * (pool.len() - 1)) as u64;
            pick_top(&mut corr, batch, cfg.tie_break);
            order.extend(corr[..batch].iter().map(|&(j, _)| j));
        }
        for &j in &order {
            selected[j] = true;
        }

        let ls = least_squares(a, &order, y)?;
        x_hat.iter_mut().for_each(|v| *v = 0.0);
        for (&j, &v) in order.iter().zip(&ls.coef) {
            x_hat[j] = v;
        }
        residual = ls.residual;
        // LS on a superset can only lower the residual; clamp rounding noise
        let prev = *norms.last().unwrap();
        norms.push(ls.residual_norm.min(prev));
    };

    let mut support = order.clone();
    support.sort_unstable();
    Ok(GreedyResult {
        x_hat,
        support,
        residual_norms: norms,
        iterations: k,
        counters,
        stop,
        selection_order: order,
        confined,
    })
}

/// Moves the `batch` best candidates to the front, in selection order.
fn pick_top(corr: &mut [(usize, f64)], batch: usize, tie: TieBreak) {
    let TieBreak::LowestIndex = tie;
    let better = |a: &(usize, f64), b: &(usize, f64)| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    };
    if batch < corr.len() {
        corr.select_nth_unstable_by(batch - 1, better);
    }
    corr[..batch].sort_by(better);
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `||x - x_hat||_2 / ||x||_2`.
pub fn relative_error(x: &SparseSignal, x_hat: &[f64]) -> Result<f64> {
    if x_hat.len() != x.n() {
        return param(format!("x_hat has length {}, expected n = {}", x_hat.len(), x.n()));
    }
    let dense = x.to_dense();
    let denom = norm(&dense);
    if denom == 0.0 {
        return param("relative error of a zero signal is undefined");
    }
    let diff: f64 = dense.iter().zip(x_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(diff.sqrt() / denom)
}

pub fn is_perfect(x: &SparseSignal, x_hat: &[f64]) -> Result<bool> {
    Ok(relative_error(x, x_hat)? <= PERFECT_RECOVERY_THRESHOLD)
}
