//! The Monte-Carlo experiments.
//!
//! Every experiment walks the cartesian grid `m x n x d x K x amplitude x eta`
//! of its configuration. Each grid point runs `trials` independent trials on
//! a fresh matrix, signal and noise draw; all algorithms of a trial see the
//! same draw. Trials run in parallel but are aggregated in trial order, so the
//! output is identical for any worker count.

use confined_omp::{
    compute_confined_set, confined_gomp, confined_omp, estimate_sparsity, expected_gamma_size, expected_nu_closed,
    gen_comb_matrix, gen_noise, gen_signal, gomp, is_perfect, noisy_conf_prob_lower_bound,
    noisy_support_recovery_bound, nu_distribution, omp, pi_bar, recovery_prob_lower_bound, CombMatrix, Error,
    GreedyResult, OpCounter, SignalModel, SolverConfig, SparseSignal,
};
use rayon::prelude::*;

use crate::config::{Algorithm, Experiment, ExperimentConfig};
use crate::error::{BenchError, Result};
use crate::seed::{stream_seed, trial_seed};
use crate::table::{Table, Value};

#[derive(Debug, Clone)]
pub struct Point {
    pub index: usize,
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub amplitude: f64,
    pub model: SignalModel,
    pub eta: f64,
}

pub fn grid(cfg: &ExperimentConfig) -> Vec<Point> {
    let mut points = Vec::new();
    for &m in &cfg.m {
        for &n in &cfg.n {
            for d in cfg.d.for_m(m) {
                for &k in &cfg.k {
                    for (amplitude, model) in cfg.models() {
                        for eta in cfg.etas() {
                            points.push(Point {
                                index: points.len(),
                                m,
                                n,
                                d,
                                k,
                                amplitude,
                                model: model.clone(),
                                eta,
                            });
                        }
                    }
                }
            }
        }
    }
    points
}

/// One trial's random instance.
pub struct Draw {
    pub a: CombMatrix,
    pub x: SparseSignal,
    pub y: Vec<f64>,
}

pub fn draw(cfg: &ExperimentConfig, p: &Point, trial: usize) -> Result<Draw> {
    let s = trial_seed(cfg.seed, p.index, trial);
    let a = gen_comb_matrix(p.m, p.n, p.d, stream_seed(s, 0))?;
    let x = gen_signal(p.n, p.k, &p.model, stream_seed(s, 1))?;
    let mut y = a.matvec(&x.to_dense())?;
    if p.eta > 0.0 {
        let v = gen_noise(p.m, p.eta, stream_seed(s, 2))?;
        y.iter_mut().zip(v).for_each(|(yi, vi)| *yi += vi);
    }
    Ok(Draw { a, x, y })
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BenchError::Config(format!("cannot start worker pool: {e}")))
}

fn run_trials<T, F>(pool: &rayon::ThreadPool, cfg: &ExperimentConfig, p: &Point, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Draw) -> Result<T> + Sync,
{
    pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| f(draw(cfg, p, t)?))
            .collect()
    })
}

/// Sample mean and its standard error.
fn mean_se(xs: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let xs: Vec<f64> = xs.into_iter().collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Empirical frequency and its binomial standard error.
fn rate_se(hits: usize, trials: usize) -> (f64, f64) {
    let p = hits as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

fn solve(alg: Algorithm, a: &CombMatrix, y: &[f64], cfg: &SolverConfig) -> confined_omp::Result<GreedyResult> {
    match alg {
        Algorithm::Omp => omp(a, y, cfg),
        Algorithm::ConfinedOmp => confined_omp(a, y, cfg),
        Algorithm::Gomp => gomp(a, y, cfg),
        Algorithm::ConfinedGomp => confined_gomp(a, y, cfg),
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Outcome {
    perfect: bool,
    support_exact: bool,
    rank_deficient: bool,
    counters: OpCounter,
}

fn evaluate(alg: Algorithm, draw: &Draw, scfg: &SolverConfig) -> Result<Outcome> {
    match solve(alg, &draw.a, &draw.y, scfg) {
        Ok(r) => Ok(Outcome {
            perfect: is_perfect(&draw.x, &r.x_hat)?,
            support_exact: r.support == draw.x.support(),
            rank_deficient: false,
            counters: r.counters,
        }),
        Err(Error::RankDeficient { .. }) => Ok(Outcome {
            rank_deficient: true,
            ..Outcome::default()
        }),
        Err(e) => Err(e.into()),
    }
}

fn solver_config(cfg: &ExperimentConfig, p: &Point, k: usize) -> SolverConfig {
    SolverConfig::new(k.clamp(1, p.m))
        .with_batch(cfg.batch)
        .with_epsilon(cfg.epsilon_for(p.eta))
}

fn base_columns(cfg: &ExperimentConfig) -> Vec<String> {
    let mut c: Vec<String> = ["m", "n", "d", "K", "model", "amplitude", "sigma"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if cfg.experiment.is_noisy() {
        c.push("eta".into());
        c.push("epsilon".into());
    }
    c.push("trials".into());
    c
}

fn base_values(cfg: &ExperimentConfig, p: &Point) -> Vec<Value> {
    let sigma = match p.model {
        SignalModel::Gaussian { std_dev, .. } => std_dev,
        _ => 0.0,
    };
    let mut v: Vec<Value> = vec![
        p.m.into(),
        p.n.into(),
        p.d.into(),
        p.k.into(),
        cfg.model_name().into(),
        p.amplitude.into(),
        sigma.into(),
    ];
    if cfg.experiment.is_noisy() {
        v.push(p.eta.into());
        v.push(cfg.epsilon_for(p.eta).into());
    }
    v.push(cfg.trials.into());
    v
}

fn with_base(cfg: &ExperimentConfig, extra: &[String]) -> Vec<String> {
    let mut c = base_columns(cfg);
    c.extend_from_slice(extra);
    c
}

fn names(prefix: &str, algs: &[Algorithm], suffix: &str) -> Vec<String> {
    algs.iter().map(|a| format!("{prefix}{}{suffix}", a.name())).collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Table> {
    cfg.validate()?;
    let pool = thread_pool(cfg.workers)?;
    let points = grid(cfg);
    match cfg.experiment {
        Experiment::NuVsK => nu_vs_k(cfg, &pool, &points),
        Experiment::GammaVsK => gamma_vs_k(cfg, &pool, &points),
        Experiment::RecoveryVsK | Experiment::RecoveryVsM => recovery(cfg, &pool, &points),
        Experiment::OpcountVsK | Experiment::OpcountVsM => opcount(cfg, &pool, &points),
        Experiment::KhatSensitivity => khat_sensitivity(cfg, &pool, &points),
        Experiment::NoisyConfProb => noisy_conf_prob(cfg, &pool, &points),
        Experiment::NoisySupport => noisy_support(cfg, &pool, &points),
        Experiment::DOptimization => d_optimization(cfg, &pool, &points),
    }
}

fn nu_vs_k(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, points: &[Point]) -> Result<Table> {
    let extra: Vec<String> = ["mean_nu", "se_nu", "expected_nu", "expected_nu_recursion"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut table = Table::new(with_base(cfg, &extra));
    for p in points {
        let nus = run_trials(pool, cfg, p, |dr| {
            Ok(compute_confined_set(&dr.a, &dr.y, cfg.epsilon)?.nonzero_rows(p.m) as f64)
        })?;
        let (mean, se) = mean_se(nus);
        let mut row = base_values(cfg, p);
        row.extend([
            mean.into(),
            se.into(),
            expected_nu_closed(p.m, p.d, p.k)?.into(),
            nu_distribution(p.m, p.d, p.k)?.mean().into(),
        ]);
        table.push(row);
    }
    Ok(table)
}

fn gamma_vs_k(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, points: &[Point]) -> Result<Table> {
    let extra: Vec<String> = [
        "mean_gamma",
        "se_gamma",
        "expected_gamma",
        "freq_gamma_eq_K",
        "se_freq_gamma_eq_K",
        "gamma_eq_K_bound",
        "freq_support_confined",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut table = Table::new(with_base(cfg, &extra));
    for p in points {
        let stats = run_trials(pool, cfg, p, |dr| {
            let s = compute_confined_set(&dr.a, &dr.y, cfg.epsilon)?;
            Ok((s.gamma.len(), s.contains_all(dr.x.support())))
        })?;
        let (mean, se) = mean_se(stats.iter().map(|s| s.0 as f64));
        let (tight, tight_se) = rate_se(stats.iter().filter(|s| s.0 == p.k).count(), cfg.trials);
        let (conf, _) = rate_se(stats.iter().filter(|s| s.1).count(), cfg.trials);
        let mut row = base_values(cfg, p);
        row.extend([
            mean.into(),
            se.into(),
            expected_gamma_size(p.m, p.n, p.d, p.k)?.into(),
            tight.into(),
            tight_se.into(),
            recovery_prob_lower_bound(p.m, p.n, p.d, p.k)?.value.into(),
            conf.into(),
        ]);
        table.push(row);
    }
    Ok(table)
}

/// Runs every configured algorithm on each trial and records `|Gamma|`.
fn paired_outcomes(
    cfg: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    p: &Point,
) -> Result<Vec<(Vec<Outcome>, usize, bool)>> {
    let scfg = solver_config(cfg, p, p.k);
    run_trials(pool, cfg, p, |dr| {
        let outcomes = cfg
            .algorithms
            .iter()
            .map(|&alg| evaluate(alg, &dr, &scfg))
            .collect::<Result<Vec<_>>>()?;
        let s = compute_confined_set(&dr.a, &dr.y, scfg.epsilon)?;
        Ok((outcomes, s.gamma.len(), s.contains_all(dr.x.support())))
    })
}

fn recovery(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, points: &[Point]) -> Result<Table> {
    let algs = &cfg.algorithms;
    let mut extra = vec!["N".to_string()];
    for a in algs {
        extra.push(format!("rate_{}", a.name()));
        extra.push(format!("se_{}", a.name()));
    }
    extra.extend(
        ["freq_gamma_eq_K", "gamma_eq_K_bound", "pi_bar", "pi_bar_valid", "rank_deficient"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut table = Table::new(with_base(cfg, &extra));
    for p in points {
        let res = paired_outcomes(cfg, pool, p)?;
        let mut row = base_values(cfg, p);
        row.push(cfg.batch.into());
        for i in 0..algs.len() {
            let (r, se) = rate_se(res.iter().filter(|t| t.0[i].perfect).count(), cfg.trials);
            row.push(r.into());
            row.push(se.into());
        }
        let tight = rate_se(res.iter().filter(|t| t.1 == p.k).count(), cfg.trials).0;
        let pb = pi_bar(p.m, p.n, p.d, p.k)?;
        let rank_def: usize = res.iter().map(|t| t.0.iter().filter(|o| o.rank_deficient).count()).sum();
        row.extend([
            tight.into(),
            recovery_prob_lower_bound(p.m, p.n, p.d, p.k)?.value.into(),
            pb.value.into(),
            pb.valid.into(),
            rank_def.into(),
        ]);
        table.push(row);
    }
    Ok(table)
}

fn opcount(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, points: &[Point]) -> Result<Table> {
    let algs = &cfg.algorithms;
    let mut extra = vec!["N".to_string()];
    extra.extend(names("inner_products_", algs, ""));
    extra.extend(names("ident_flops_", algs, ""));
    extra.extend(names("total_flops_", algs, ""));
    extra.extend(names("rate_", algs, ""));
    extra.push("mean_gamma".into());
    extra.push("expected_gamma".into());
    let mut table = Table::new(with_base(cfg, &extra));
    for p in points {
        let res = paired_outcomes(cfg, pool, p)?;
        let mut row = base_values(cfg, p);
        row.push(cfg.batch.into());
        let mean_of = |f: &dyn Fn(&Outcome) -> u64, i: usize| -> f64 {
            mean_se(res.iter().map(|t| f(&t.0[i]) as f64)).0
        };
        for i in 0..algs.len() {
            row.push(mean_of(&|o| o.counters.inner_products, i).into());
        }
        for i in 0..algs.len() {
            row.push(mean_of(&|o| o.counters.identification_flops(), i).into());
        }
        for i in 0..algs.len() {
            row.push(mean_of(&|o| o.counters.total_flops(), i).into());
        }
        for i in 0..algs.len() {
            row.push(rate_se(res.iter().filter(|t| t.0[i].perfect).count(), cfg.trials).0.into());
        }
        row.push(mean_se(res.iter().map(|t| t.1 as f64)).0.into());
        row.push(expected_gamma_size(p.m, p.n, p.d, p.k)?.into());
        table.push(row);
    }
    Ok(table)
}

fn khat_sensitivity(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, points: &[Point]) -> Result<Table> {
    let algs = &cfg.algorithms;
    let mut extra = vec!["N".to_string(), "margin".to_string()];
    for a in algs {
        for suffix in ["true", "khat", "khat_margin"] {
            extra.push(format!("rate_{}_{suffix}", a.name()));
        }
    }
    extra.extend(
        ["mean_khat", "se_khat", "freq_khat_eq_K", "freq_khat_below_K", "freq_khat_above_K"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut table = Table::new(with_base(cfg, &extra));
    for p in points {
        let k_max = cfg.k_max.unwrap_or(p.m).max(1);
        let exact = solver_config(cfg, p, p.k);
        let res = run_trials(pool, cfg, p, |dr| {
            let s = compute_confined_set(&dr.a, &dr.y, exact.epsilon)?;
            let k_hat = estimate_sparsity(s.nonzero_rows(p.m), p.m, p.d, k_max)?.k_hat;
            let est = solver_config(cfg, p, k_hat);
            let padded = solver_config(cfg, p, k_hat + cfg.margin);
            let mut hits = Vec::with_capacity(3 * algs.len());
            for &alg in algs {
                for sc in [&exact, &est, &padded] {
                    hits.push(evaluate(alg, &dr, sc)?.perfect);
                }
            }
            Ok((hits, k_hat))
        })?;
        let mut row = base_values(cfg, p);
        row.push(cfg.batch.into());
        row.push(cfg.margin.into());
        for i in 0..3 * algs.len() {
            row.push(rate_se(res.iter().filter(|t| t.0[i]).count(), cfg.trials).0.into());
        }
        let (mean, se) = mean_se(res.iter().map(|t| t.1 as f64));
        row.push(mean.into());
        row.push(se.into());
        for pred in [|a: usize, b: usize| a == b, |a, b| a < b, |a, b| a > b] {
            row.push(rate_se(res.iter().filter(|t| pred(t.1, p.k)).count(), cfg.trials).0.into());
        }
        table.push(row);
    }
    Ok(table)
}

fn noisy_conf_prob(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, points: &[Point]) -> Result<Table> {
    let extra: Vec<String> = [
        "freq_support_confined",
        "se_support_confined",
        "mean_gamma",
        "conf_prob_bound",
        "conf_prob_bound_raw",
        "conf_prob_bound_clamped",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut table = Table::new(with_base(cfg, &extra));
    for p in points {
        let eps = cfg.epsilon_for(p.eta);
        let res = run_trials(pool, cfg, p, |dr| {
            let s = compute_confined_set(&dr.a, &dr.y, eps)?;
            Ok((s.contains_all(dr.x.support()), s.gamma.len()))
        })?;
        let (freq, se) = rate_se(res.iter().filter(|t| t.0).count(), cfg.trials);
        let bound = noisy_conf_prob_lower_bound(p.m, p.d, p.k, eps, p.eta, &p.model)?;
        let mut row = base_values(cfg, p);
        row.extend([
            freq.into(),
            se.into(),
            mean_se(res.iter().map(|t| t.1 as f64)).0.into(),
            bound.value.into(),
            bound.raw.into(),
            bound.clamped.into(),
        ]);
        table.push(row);
    }
    Ok(table)
}

fn noisy_support(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, points: &[Point]) -> Result<Table> {
    let algs = &cfg.algorithms;
    let mut extra = Vec::new();
    for a in algs {
        extra.push(format!("rate_support_{}", a.name()));
        extra.push(format!("se_support_{}", a.name()));
    }
    extra.extend(
        ["freq_support_confined", "support_bound", "support_bound_valid", "support_bound_clamped"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut table = Table::new(with_base(cfg, &extra));
    for p in points {
        let res = paired_outcomes(cfg, pool, p)?;
        let mut row = base_values(cfg, p);
        for i in 0..algs.len() {
            let (r, se) = rate_se(res.iter().filter(|t| t.0[i].support_exact).count(), cfg.trials);
            row.push(r.into());
            row.push(se.into());
        }
        let bound = noisy_support_recovery_bound(p.m, p.n, p.d, p.k, p.eta, &p.model)?;
        row.extend([
            rate_se(res.iter().filter(|t| t.2).count(), cfg.trials).0.into(),
            bound.value.into(),
            bound.valid.into(),
            bound.clamped.into(),
        ]);
        table.push(row);
    }
    Ok(table)
}

fn d_optimization(cfg: &ExperimentConfig, pool: &rayon::ThreadPool, points: &[Point]) -> Result<Table> {
    let algs = &cfg.algorithms;
    let mut extra = Vec::new();
    for a in algs {
        extra.push(format!("rate_{}", a.name()));
        extra.push(format!("se_{}", a.name()));
    }
    extra.extend(
        ["freq_gamma_eq_K", "gamma_eq_K_bound", "pi_bar", "pi_bar_valid", "bound_argmax"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut table = Table::new(with_base(cfg, &extra));
    let mut bounds = Vec::with_capacity(points.len());
    for p in points {
        let res = paired_outcomes(cfg, pool, p)?;
        let mut row = base_values(cfg, p);
        for i in 0..algs.len() {
            let (r, se) = rate_se(res.iter().filter(|t| t.0[i].perfect).count(), cfg.trials);
            row.push(r.into());
            row.push(se.into());
        }
        let t4 = recovery_prob_lower_bound(p.m, p.n, p.d, p.k)?.value;
        let pb = pi_bar(p.m, p.n, p.d, p.k)?;
        row.extend([
            rate_se(res.iter().filter(|t| t.1 == p.k).count(), cfg.trials).0.into(),
            t4.into(),
            pb.value.into(),
            pb.valid.into(),
            false.into(),
        ]);
        bounds.push(t4);
        table.push(row);
    }
    // mark the lowest-d maximiser within each (m, n, K, amplitude) group
    let flag = table.columns.len() - 1;
    let key = |p: &Point| (p.m, p.n, p.k, p.amplitude.to_bits());
    for (i, p) in points.iter().enumerate() {
        let best = points
            .iter()
            .enumerate()
            .filter(|(_, q)| key(q) == key(p))
            .fold(None::<(usize, f64)>, |acc, (j, _)| match acc {
                Some((_, v)) if v >= bounds[j] => acc,
                _ => Some((j, bounds[j])),
            });
        table.rows[i][flag] = (best.map(|b| b.0) == Some(i)).into();
    }
    Ok(table)
}
