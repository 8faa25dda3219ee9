//! Small numeric helpers: the standard normal CDF and log-space binomials.

use std::f64::consts::SQRT_2;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `Phi(hi) - Phi(lo)` for `lo <= hi`, evaluated without cancellation in
/// either tail.
pub fn normal_interval(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let (a, b) = (lo / SQRT_2, hi / SQRT_2);
    let mass = if a >= 0.0 {
        0.5 * (libm::erfc(a) - libm::erfc(b))
    } else if b <= 0.0 {
        0.5 * (libm::erfc(-b) - libm::erfc(-a))
    } else {
        0.5 * (libm::erf(b) - libm::erf(a))
    };
    mass.max(0.0)
}

/// Table of `ln k!` for `k = 0..=max`.
#[derive(Debug, Clone)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for k in 1..=max {
            acc += (k as f64).ln();
            table.push(acc);
        }
        Self { table }
    }

    /// `ln C(n, k)`; `-inf` when `k > n`.
    pub fn ln_choose(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.table[n] - self.table[k] - self.table[n - k]
    }
}

/// `C(v, d) / C(m, d)` as the telescoping product `prod (v - z) / (m - z)`.
pub fn choose_ratio(v: usize, m: usize, d: usize) -> f64 {
    if v < d {
        return 0.0;
    }
    (0..d).fold(1.0, |acc, z| acc * (v - z) as f64 / (m - z) as f64)
}

/// `(1 - p)^e` for `p` in `[0, 1]`, stable for small `p` and large `e`.
pub fn pow_complement(p: f64, e: usize) -> f64 {
    if e == 0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    ((e as f64) * (-p).ln_1p()).exp()
}
