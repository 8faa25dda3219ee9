//! Expectations and recovery-probability bounds.
//!
//! `nu` is the number of rows of `y = A x` that are nonzero when `x` has `K`
//! nonzero entries of a confined law. Its distribution follows a Markov chain
//! over the number of covered rows: adding a column with `d` ones to `z`
//! covered rows reaches `v` covered rows when exactly `v - z` of its ones fall
//! outside the covered set.

use std::f64::consts::E;
use std::fmt;

use crate::error::{param, Result};
use crate::signals::SignalModel;
use crate::special::{choose_ratio, pow_complement, LnFactorials};

fn check_md(m: usize, d: usize) -> Result<()> {
    if d == 0 || d > m {
        return param(format!("column degree d = {d} must satisfy 1 <= d <= m = {m}"));
    }
    Ok(())
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return param("sparsity K must be >= 1");
    }
    Ok(())
}

fn check_kn(k: usize, n: usize) -> Result<()> {
    check_k(k)?;
    if k > n {
        return param(format!("sparsity K = {k} exceeds n = {n}"));
    }
    Ok(())
}

/// Exact law of `nu^(K)` over `[d, min(K d, m)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NuDistribution {
    pub m: usize,
    pub d: usize,
    pub k: usize,
    pub support_lo: usize,
    pub support_hi: usize,
    /// `probs[i] = P{nu = support_lo + i}`.
    pub probs: Vec<f64>,
}

impl NuDistribution {
    pub fn prob(&self, v: usize) -> f64 {
        if v < self.support_lo || v > self.support_hi {
            0.0
        } else {
            self.probs[v - self.support_lo]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().enumerate().map(|(i, &p)| (self.support_lo + i, p))
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, p)| v as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.iter().map(|(v, p)| (v as f64 - mu).powi(2) * p).sum()
    }

    /// `E[f(nu)]`.
    pub fn expect(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.iter().map(|(v, p)| if p == 0.0 { 0.0 } else { p * f(v) }).sum()
    }
}

pub fn nu_distribution(m: usize, d: usize, k: usize) -> Result<NuDistribution> {
    check_md(m, d)?;
    check_k(k)?;
    let lf = LnFactorials::new(m);
    let ln_total = lf.ln_choose(m, d);
    // dense over 0..=m; only [d, min(k d, m)] is ever populated
    let mut cur = vec![0.0; m + 1];
    cur[d] = 1.0;
    let mut hi = d;
    for step in 2..=k {
        let new_hi = (step * d).min(m);
        let mut next = vec![0.0; m + 1];
        for (z, &pz) in cur.iter().enumerate().take(hi + 1).skip(d) {
            if pz == 0.0 {
                continue;
            }
            // `fresh` ones land outside the z covered rows, d - fresh inside;
            // each row is renormalised so rounding cannot leak mass
            let lo = d.saturating_sub(z);
            let hi = d.min(m - z);
            let row: Vec<f64> = (lo..=hi)
                .map(|fresh| (lf.ln_choose(z, d - fresh) + lf.ln_choose(m - z, fresh) - ln_total).exp())
                .collect();
            let total: f64 = row.iter().sum();
            for (fresh, p) in (lo..=hi).zip(row) {
                next[z + fresh] += pz * p / total;
            }
        }
        cur = next;
        hi = new_hi;
    }
    Ok(NuDistribution {
        m,
        d,
        k,
        support_lo: d,
        support_hi: hi,
        probs: cur[d..=hi].to_vec(),
    })
}

/// `E[nu^(K)] = m (1 - (1 - d/m)^K)`.
pub fn expected_nu_closed(m: usize, d: usize, k: usize) -> Result<f64> {
    check_md(m, d)?;
    check_k(k)?;
    let keep = 1.0 - d as f64 / m as f64;
    Ok(m as f64 * (1.0 - keep.powi(k as i32)))
}

/// `E[|Gamma|] = K + (n - K) E[C(nu, d) / C(m, d)]`.
pub fn expected_gamma_size(m: usize, n: usize, d: usize, k: usize) -> Result<f64> {
    check_kn(k, n)?;
    let nu = nu_distribution(m, d, k)?;
    let outside = nu.expect(|v| choose_ratio(v, m, d));
    Ok(k as f64 + (n - k) as f64 * outside)
}

/// Premises a bound rests on but does not verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Premise {
    /// Every `K` columns of `A` are linearly independent.
    SparkExceedsK,
    /// `K d <= m`, needed by the closed-form `pi_bar` factor.
    KTimesDAtMostM,
}

impl fmt::Display for Premise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Premise::SparkExceedsK => "spark_exceeds_K",
            Premise::KTimesDAtMostM => "K_le_m_over_d",
        })
    }
}

/// A probability bound with its validity flags.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// Bound value, clamped to `[0, 1]`.
    pub value: f64,
    /// Unclamped formula value.
    pub raw: f64,
    /// False when the parameters fall outside the regime the bound is stated
    /// for.
    pub valid: bool,
    pub clamped: bool,
    pub assumptions: Vec<Premise>,
}

impl BoundReport {
    fn new(raw: f64, valid: bool, assumptions: Vec<Premise>) -> Self {
        let value = raw.clamp(0.0, 1.0);
        Self {
            value,
            raw,
            valid,
            clamped: value != raw,
            assumptions,
        }
    }
}

/// Binomial pmf `C(K, l) p^l (1 - p)^(K - l)` evaluated in log space.
fn binomial_pmf(lf: &LnFactorials, k: usize, l: usize, p: f64) -> f64 {
    if p <= 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if l == k { 1.0 } else { 0.0 };
    }
    (lf.ln_choose(k, l) + l as f64 * p.ln() + (k - l) as f64 * (-p).ln_1p()).exp()
}

/// Lower bound on `P{Omega in Gamma}` in the noiseless case.
pub fn conf_prob_lower_bound(m: usize, d: usize, k: usize, epsilon: f64, model: &SignalModel) -> Result<BoundReport> {
    check_md(m, d)?;
    check_k(k)?;
    if !(epsilon >= 0.0) {
        return param("epsilon must be >= 0");
    }
    let lf = LnFactorials::new(k);
    let p = d as f64 / m as f64;
    let mut per_row = 0.0;
    for ell in 1..=k {
        let w = binomial_pmf(&lf, k, ell, p);
        if w == 0.0 {
            continue;
        }
        per_row += w * model.sum_mass_within(ell, epsilon)?;
    }
    Ok(BoundReport::new(1.0 - m as f64 * per_row, true, vec![]))
}

/// Lower bound on the exact-recovery probability of confined OMP; equals
/// `P{|Gamma| = K}`.
pub fn recovery_prob_lower_bound(m: usize, n: usize, d: usize, k: usize) -> Result<BoundReport> {
    check_kn(k, n)?;
    if k == n {
        check_md(m, d)?;
        return Ok(BoundReport::new(1.0, true, vec![Premise::SparkExceedsK]));
    }
    let nu = nu_distribution(m, d, k)?;
    let value = nu.expect(|v| pow_complement(choose_ratio(v, m, d), n - k));
    Ok(BoundReport::new(value, true, vec![Premise::SparkExceedsK]))
}

/// `(1 - (K d / m)^d)^(n - K)` for real `d`.
pub fn pi_bar_real(m: usize, n: usize, d: f64, k: usize) -> f64 {
    let base = (k as f64 * d / m as f64).powf(d);
    if base >= 1.0 {
        return 0.0;
    }
    pow_complement(base, n - k)
}

/// Closed-form looser bound `pi_bar_K`, valid for `K <= m / d`.
pub fn pi_bar(m: usize, n: usize, d: usize, k: usize) -> Result<BoundReport> {
    check_md(m, d)?;
    check_kn(k, n)?;
    let base = (k as f64 * d as f64 / m as f64).powi(d as i32);
    let raw = if base > 1.0 {
        // the formula is meaningless here; report the negative base so the
        // clamp is visible
        1.0 - base
    } else {
        pow_complement(base, n - k)
    };
    Ok(BoundReport::new(
        raw,
        k * d <= m,
        vec![Premise::SparkExceedsK, Premise::KTimesDAtMostM],
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalDegree {
    /// Real maximiser `m / (K e)`.
    pub d_star: f64,
    /// Better of `floor(d_star)` and `ceil(d_star)` (at least 1).
    pub d_int: usize,
    /// `(1 - exp(-m / (K e)))^(n - K)`.
    pub pi_max: f64,
    /// `d_star < 1`: no integer degree reaches the analytic optimum.
    pub below_one: bool,
}

pub fn pi_bar_optimal_d(m: usize, k: usize, n: usize) -> Result<OptimalDegree> {
    check_kn(k, n)?;
    if m == 0 {
        return param("m must be >= 1");
    }
    let d_star = m as f64 / (k as f64 * E);
    let lo = (d_star.floor() as usize).clamp(1, m);
    let hi = (d_star.ceil() as usize).clamp(1, m);
    let d_int = if pi_bar_real(m, n, hi as f64, k) > pi_bar_real(m, n, lo as f64, k) {
        hi
    } else {
        lo
    };
    Ok(OptimalDegree {
        d_star,
        d_int,
        pi_max: pow_complement((-d_star).exp(), n - k),
        below_one: d_star < 1.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementPlan {
    pub m: usize,
    pub prob_bound: f64,
    /// `m >= n`, outside the compressive regime the guarantee assumes.
    pub exceeds_dimension: bool,
}

/// `m = ceil(c K ln(n - K) / ln beta)` with `P >= 1 - (n - K)^(1 - c / beta)`.
pub fn sufficient_measurements(n: usize, k: usize, beta: f64, c: f64) -> Result<MeasurementPlan> {
    check_k(k)?;
    if k >= n {
        return param(format!("need K < n, got K = {k}, n = {n}"));
    }
    if !(beta > 1.0) || !(c > beta) || !c.is_finite() {
        return param(format!("need 1 < beta < c, got beta = {beta}, c = {c}"));
    }
    let span = (n - k) as f64;
    let m = (c * k as f64 * span.ln() / beta.ln()).ceil() as usize;
    Ok(MeasurementPlan {
        m,
        prob_bound: 1.0 - span.powf(1.0 - c / beta),
        exceeds_dimension: m >= n,
    })
}

/// `m = ceil(2 e K ln(n - K))` with `P >= 1 - 1 / (n - K)`.
pub fn min_measurements(n: usize, k: usize) -> Result<MeasurementPlan> {
    sufficient_measurements(n, k, E, 2.0 * E)
}

/// `(1 / gamma) e^(-tau / gamma) m / ln m`, the strict sparsity ceiling when
/// `n = m^tau` and `d = gamma ln m`.
pub fn asymptotic_max_sparsity(m: usize, tau: f64, gamma: f64) -> Result<f64> {
    if m < 3 || !(tau > 1.0) || !(gamma > 1.0) {
        return param("need m >= 3, tau > 1, gamma > 1");
    }
    let mf = m as f64;
    Ok((-tau / gamma).exp() / gamma * mf / mf.ln())
}

/// `floor(m / (tau e ln m))`, the ceiling at its maximiser `gamma = tau`.
pub fn asymptotic_optimal_sparsity(m: usize, tau: f64) -> Result<usize> {
    asymptotic_max_sparsity(m, tau, tau)?;
    let mf = m as f64;
    Ok((mf / (tau * E * mf.ln())).floor() as usize)
}

fn max_mass_within(model: &SignalModel, k: usize, half_width: f64) -> Result<f64> {
    (1..=k).try_fold(0.0f64, |acc, ell| Ok(acc.max(model.sum_mass_within(ell, half_width)?)))
}

/// Lower bound on `P{Omega in Gamma}` from `y = A x + v` with
/// `||v||_inf <= eta`.
pub fn noisy_conf_prob_lower_bound(
    m: usize,
    d: usize,
    k: usize,
    epsilon: f64,
    eta: f64,
    model: &SignalModel,
) -> Result<BoundReport> {
    if !(epsilon >= 0.0) || !(eta >= 0.0) {
        return param("epsilon and eta must be >= 0");
    }
    let e_nu = expected_nu_closed(m, d, k)?;
    let worst = max_mass_within(model, k, epsilon + eta)?;
    Ok(BoundReport::new(1.0 - e_nu * worst, true, vec![]))
}

/// Lower bound on exact support recovery by confined OMP from noisy
/// measurements with `epsilon = eta`.
pub fn noisy_support_recovery_bound(
    m: usize,
    n: usize,
    d: usize,
    k: usize,
    eta: f64,
    model: &SignalModel,
) -> Result<BoundReport> {
    if !(eta >= 0.0) {
        return param("eta must be >= 0");
    }
    let pb = pi_bar(m, n, d, k)?;
    let e_nu = expected_nu_closed(m, d, k)?;
    let worst = max_mass_within(model, k, 2.0 * eta)?;
    let confinement = (1.0 - e_nu * worst).clamp(0.0, 1.0);
    let raw = pb.value * confinement;
    let mut report = BoundReport::new(raw, pb.valid, pb.assumptions);
    report.clamped = pb.clamped || confinement != 1.0 - e_nu * worst;
    report.raw = pb.raw * (1.0 - e_nu * worst);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// The exact `P{|Gamma| = K}` bound.
    Theorem4,
    PiBar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeChoice {
    pub d: usize,
    pub report: BoundReport,
}

/// Integer column degree in `(ln m, m / 2]` maximising the chosen bound;
/// lowest `d` wins ties.
pub fn optimize_d(m: usize, n: usize, k: usize, kind: BoundKind) -> Result<DegreeChoice> {
    check_kn(k, n)?;
    let lo = (m as f64).ln().floor() as usize + 1;
    let hi = m / 2;
    if lo > hi {
        return param(format!("no integer d with ln m < d <= m/2 for m = {m}"));
    }
    let mut best: Option<DegreeChoice> = None;
    for d in lo..=hi {
        let report = match kind {
            BoundKind::Theorem4 => recovery_prob_lower_bound(m, n, d, k)?,
            BoundKind::PiBar => pi_bar(m, n, d, k)?,
        };
        if best.as_ref().is_none_or(|b| report.value > b.report.value) {
            best = Some(DegreeChoice { d, report });
        }
    }
    Ok(best.expect("domain is nonempty"))
}
