//! Confined orthogonal matching pursuit over sparse random combinatorial
//! binary matrices.
//!
//! The crate is organised around the recovery pipeline:
//!
//! * [`combmat`] generates `m x n` binary matrices with exactly `d` ones per
//!   column and performs the addition-only arithmetic they need.
//! * [`signals`] draws `K`-sparse test signals and bounded noise, and
//!   evaluates the `l`-fold CDF self-convolutions used by the bounds.
//! * [`confined`] builds the confined column set from the near-zero rows of a
//!   measurement vector and estimates the sparsity level.
//! * [`greedy`] holds OMP, gOMP and their confined variants with exact
//!   operation counting.
//! * [`theory`] evaluates the expectations and recovery-probability bounds.

pub mod combmat;
pub mod confined;
mod error;
pub mod greedy;
pub mod lstsq;
pub mod signals;
pub mod special;
pub mod theory;

pub use combmat::{gen_comb_matrix, CombMatrix, OpCounter};
pub use confined::{
    compute_confined_set, estimate_sparsity, flat_sparsity_exact, ConfinedSet, SparsityEstimate,
    DEFAULT_EPSILON,
};
pub use error::{Error, Result};
pub use greedy::{
    confined_gomp, confined_omp, gomp, is_perfect, omp, relative_error, GreedyResult, SolverConfig,
    StopReason, TieBreak, PERFECT_RECOVERY_THRESHOLD,
};
pub use lstsq::{least_squares, LeastSquares};
pub use signals::{cdf_conv, gen_noise, gen_signal, CustomCdf, SignalModel, SparseSignal};
pub use theory::{
    asymptotic_max_sparsity, asymptotic_optimal_sparsity, conf_prob_lower_bound,
    expected_gamma_size, expected_nu_closed, min_measurements, noisy_conf_prob_lower_bound,
    noisy_support_recovery_bound, nu_distribution, optimize_d, pi_bar, pi_bar_optimal_d,
    pi_bar_real, recovery_prob_lower_bound, sufficient_measurements, BoundKind, BoundReport,
    DegreeChoice, MeasurementPlan, NuDistribution, OptimalDegree, Premise,
};
