//! Sparse test signals, bounded noise and `l`-fold CDF self-convolutions.

use std::fmt;
use std::sync::Arc;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{param, Result};
use crate::special::{normal_cdf, normal_interval};

/// A user-supplied CDF for the nonzero components, convolved numerically.
#[derive(Clone)]
pub struct CustomCdf {
    cdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Number of grid points for the single-variable discretisation.
    pub grid_points: usize,
    /// Tail mass cut from each side when choosing the grid span.
    pub tail: f64,
}

impl CustomCdf {
    pub const DEFAULT_GRID_POINTS: usize = 1 << 14;
    pub const DEFAULT_TAIL: f64 = 1e-9;

    pub fn new(cdf: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            cdf: Arc::new(cdf),
            grid_points: Self::DEFAULT_GRID_POINTS,
            tail: Self::DEFAULT_TAIL,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.cdf)(x)
    }

    /// Smallest `x` (to bisection precision) with `F(x) >= p`.
    fn quantile(&self, p: f64) -> Result<f64> {
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        let mut expand = 0;
        while self.eval(lo) > p || self.eval(hi) < p {
            lo *= 2.0;
            hi *= 2.0;
            expand += 1;
            if expand > 1100 || !lo.is_finite() {
                return param("custom CDF does not reach its limits 0 and 1");
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if self.eval(mid) >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

impl fmt::Debug for CustomCdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomCdf")
            .field("grid_points", &self.grid_points)
            .field("tail", &self.tail)
            .finish_non_exhaustive()
    }
}

/// Law of the nonzero components of a sparse signal.
#[derive(Debug, Clone)]
pub enum SignalModel {
    Gaussian { mean: f64, std_dev: f64 },
    /// Every nonzero entry equals `amplitude`.
    Flat { amplitude: f64 },
    Custom(CustomCdf),
}

impl Default for SignalModel {
    fn default() -> Self {
        Self::standard_gaussian()
    }
}

impl SignalModel {
    pub fn standard_gaussian() -> Self {
        SignalModel::Gaussian { mean: 0.0, std_dev: 1.0 }
    }

    pub fn gaussian(mean: f64, std_dev: f64) -> Result<Self> {
        let model = SignalModel::Gaussian { mean, std_dev };
        model.validate()?;
        Ok(model)
    }

    pub fn flat(amplitude: f64) -> Result<Self> {
        let model = SignalModel::Flat { amplitude };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SignalModel::Gaussian { mean, std_dev } => {
                if !(*std_dev > 0.0 && std_dev.is_finite() && mean.is_finite()) {
                    return param(format!("Gaussian model needs sigma > 0, got {std_dev}"));
                }
            }
            SignalModel::Flat { amplitude } => {
                if *amplitude == 0.0 || !amplitude.is_finite() {
                    return param("flat model amplitude must be finite and nonzero");
                }
            }
            SignalModel::Custom(c) => {
                if c.grid_points < 2 || !(c.tail > 0.0 && c.tail < 0.5) {
                    return param("custom model needs >= 2 grid points and tail in (0, 0.5)");
                }
            }
        }
        Ok(())
    }

    /// One draw of a nonzero component.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SignalModel::Gaussian { mean, std_dev } => Normal::new(*mean, *std_dev)
                .expect("validated model")
                .sample(rng),
            SignalModel::Flat { amplitude } => *amplitude,
            SignalModel::Custom(c) => {
                let u: f64 = rng.random();
                let p = u.clamp(c.tail, 1.0 - c.tail);
                c.quantile(p).unwrap_or(0.0)
            }
        }
    }

    /// The CDF of the sum of `ell` i.i.d. components.
    pub fn convolved(&self, ell: usize) -> Result<ConvolvedCdf> {
        if ell == 0 {
            return param("convolution order must be >= 1");
        }
        self.validate()?;
        Ok(match self {
            SignalModel::Gaussian { mean, std_dev } => ConvolvedCdf::Gaussian {
                mean: ell as f64 * mean,
                std_dev: std_dev * (ell as f64).sqrt(),
            },
            SignalModel::Flat { amplitude } => ConvolvedCdf::Point(ell as f64 * amplitude),
            SignalModel::Custom(c) => ConvolvedCdf::Grid(GridCdf::new(c, ell)?),
        })
    }

    /// `F^{*ell}(a) - F^{*ell}(-a)`: probability that a sum of `ell`
    /// components lands in `(-a, a]`.
    pub fn sum_mass_within(&self, ell: usize, half_width: f64) -> Result<f64> {
        if half_width < 0.0 {
            return param("half width must be non-negative");
        }
        Ok(self.convolved(ell)?.interval(-half_width, half_width))
    }
}

/// An `l`-fold convolved CDF ready for repeated evaluation.
#[derive(Debug, Clone)]
pub enum ConvolvedCdf {
    Gaussian { mean: f64, std_dev: f64 },
    /// Point mass.
    Point(f64),
    Grid(GridCdf),
}

impl ConvolvedCdf {
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            ConvolvedCdf::Gaussian { mean, std_dev } => normal_cdf((x - mean) / std_dev),
            ConvolvedCdf::Point(at) => {
                if x >= *at {
                    1.0
                } else {
                    0.0
                }
            }
            ConvolvedCdf::Grid(g) => g.cdf(x),
        }
    }

    /// `F(hi) - F(lo)`.
    pub fn interval(&self, lo: f64, hi: f64) -> f64 {
        match self {
            ConvolvedCdf::Gaussian { mean, std_dev } => {
                normal_interval((lo - mean) / std_dev, (hi - mean) / std_dev)
            }
            _ => (self.cdf(hi) - self.cdf(lo)).max(0.0),
        }
    }
}

/// Lattice approximation of a convolved custom CDF.
///
/// The single-variable law is discretised to cell masses on a uniform grid
/// spanning its `tail` quantiles; the `ell`-fold sum is an FFT power of that
/// mass vector, and the CDF is linearly interpolated between cell edges.
#[derive(Debug, Clone)]
pub struct GridCdf {
    start: f64,
    step: f64,
    cumulative: Vec<f64>,
}

impl GridCdf {
    fn new(c: &CustomCdf, ell: usize) -> Result<Self> {
        let q_lo = c.quantile(c.tail)?;
        let q_hi = c.quantile(1.0 - c.tail)?;
        let points = c.grid_points;
        let step = if q_hi > q_lo {
            (q_hi - q_lo) / (points - 1) as f64
        } else {
            1e-9
        };
        let mut mass = Vec::with_capacity(points);
        let mut prev = 0.0;
        for i in 0..points {
            let edge = if i + 1 == points {
                1.0
            } else {
                c.eval(q_lo + (i as f64 + 0.5) * step).clamp(0.0, 1.0)
            };
            mass.push((edge - prev).max(0.0));
            prev = edge.max(prev);
        }

        let len = ell * (points - 1) + 1;
        let summed = if ell == 1 {
            mass
        } else {
            let size = len.next_power_of_two();
            let mut planner = FftPlanner::<f64>::new();
            let mut buf: Vec<Complex<f64>> = mass.iter().map(|&p| Complex::new(p, 0.0)).collect();
            buf.resize(size, Complex::new(0.0, 0.0));
            planner.plan_fft_forward(size).process(&mut buf);
            for v in buf.iter_mut() {
                *v = v.powu(ell as u32);
            }
            planner.plan_fft_inverse(size).process(&mut buf);
            buf[..len].iter().map(|v| (v.re / size as f64).max(0.0)).collect()
        };

        let mut acc = 0.0;
        let cumulative = summed
            .iter()
            .map(|p| {
                acc += p;
                acc.min(1.0)
            })
            .collect();
        Ok(Self {
            start: ell as f64 * q_lo,
            step,
            cumulative,
        })
    }

    fn cdf(&self, x: f64) -> f64 {
        // lattice point j sits at start + j*step; its mass is spread over
        // the cell [start + (j - 1/2) step, start + (j + 1/2) step]
        let t = (x - self.start) / self.step + 0.5;
        if t <= 0.0 {
            return 0.0;
        }
        let last = self.cumulative.len();
        if t >= last as f64 {
            return *self.cumulative.last().unwrap();
        }
        let j = t.floor() as usize;
        let frac = t - j as f64;
        let below = if j == 0 { 0.0 } else { self.cumulative[j - 1] };
        below + frac * (self.cumulative[j] - below)
    }
}

/// `F_X^{*ell}(x)` for the given model.
pub fn cdf_conv(model: &SignalModel, ell: usize, x: f64) -> Result<f64> {
    Ok(model.convolved(ell)?.cdf(x))
}

/// A signal with exactly `K` nonzero entries.
#[derive(Debug, Clone)]
pub struct SparseSignal {
    n: usize,
    support: Vec<usize>,
    values: Vec<f64>,
    model: SignalModel,
}

impl SparseSignal {
    pub fn new(n: usize, support: Vec<usize>, values: Vec<f64>, model: SignalModel) -> Result<Self> {
        if support.len() != values.len() {
            return param("support and values differ in length");
        }
        let mut pairs: Vec<(usize, f64)> = support.into_iter().zip(values).collect();
        pairs.sort_by_key(|p| p.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return param("support indices must be distinct");
        }
        if pairs.iter().any(|&(i, v)| i >= n || v == 0.0) {
            return param("support indices must be < n and values nonzero");
        }
        let (support, values) = pairs.into_iter().unzip();
        Ok(Self { n, support, values, model })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn model(&self) -> &SignalModel {
        &self.model
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            x[i] = v;
        }
        x
    }
}

/// Draws a `K`-sparse signal: uniform support, i.i.d. values from `model`.
pub fn sample_signal<R: Rng + ?Sized>(n: usize, k: usize, model: &SignalModel, rng: &mut R) -> Result<SparseSignal> {
    if k == 0 || k > n {
        return param(format!("sparsity K = {k} must satisfy 1 <= K <= n = {n}"));
    }
    model.validate()?;
    let mut support = index::sample(rng, n, k).into_vec();
    support.sort_unstable();
    let mut values = Vec::with_capacity(k);
    while values.len() < k {
        let v = model.sample(rng);
        // a Gaussian draw of exactly 0.0 has probability zero, but keep the
        // nonzero invariant unconditional
        if v != 0.0 {
            values.push(v);
        }
    }
    Ok(SparseSignal {
        n,
        support,
        values,
        model: model.clone(),
    })
}

pub fn gen_signal(n: usize, k: usize, model: &SignalModel, seed: u64) -> Result<SparseSignal> {
    sample_signal(n, k, model, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Noise vector with i.i.d. entries uniform on `[-eta, eta]`.
pub fn sample_noise<R: Rng + ?Sized>(m: usize, eta: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return param(format!("noise level eta = {eta} must be finite and >= 0"));
    }
    if eta == 0.0 {
        return Ok(vec![0.0; m]);
    }
    Ok((0..m).map(|_| rng.random_range(-eta..=eta)).collect())
}

pub fn gen_noise(m: usize, eta: f64, seed: u64) -> Result<Vec<f64>> {
    sample_noise(m, eta, &mut ChaCha8Rng::seed_from_u64(seed))
}
