//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails or exceeds its time budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use confined_omp::{
    compute_confined_set, confined_omp, estimate_sparsity, expected_nu_closed, flat_sparsity_exact, gen_comb_matrix,
    gen_signal, min_measurements, noisy_support_recovery_bound, nu_distribution, omp, optimize_d, pi_bar,
    pi_bar_optimal_d, recovery_prob_lower_bound, BoundKind, SignalModel, SolverConfig, StopReason,
};
use confined_omp_bench::seed::{mix64, stream_seed, trial_seed};
use confined_omp_bench::{run_experiment, Experiment, ExperimentConfig, Table};

/// Monte-Carlo agreement is judged at this many standard errors.
const SE_MULTIPLE: f64 = 3.0;
const ORACLE_TOL: f64 = 1e-12;
const CLOSED_FORM_REL_TOL: f64 = 1e-9;
/// Absolute slack for comparing two bounds that can coincide to rounding.
const BOUND_SLACK: f64 = 1e-12;
const SPOT_TOL: f64 = 1e-3;
const SUFFICIENCY_SLACK: f64 = 0.01;
const FLAT_GAIN_AT_14: f64 = 0.05;
const WORK_RATIO_MAX: f64 = 0.15;
const NOISY_COLLAPSE_BELOW: f64 = 0.5;
const SMALL_GAMMA_EXCESS: f64 = 0.5;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(e: Experiment, pairs: &[(&str, &str)]) -> Result<Table, String> {
    let cfg = ExperimentConfig::from_pairs(e, pairs).map_err(|err| err.to_string())?;
    run_experiment(&cfg).map_err(|err| err.to_string())
}

fn col(t: &Table, name: &str) -> Result<Vec<f64>, String> {
    t.column(name).ok_or_else(|| format!("missing column {name}"))
}

/// Standard error floored at the resolution of a `trials`-sample mean, so a
/// sample with no spread does not demand exact equality.
fn se_floor(se: f64, trials: usize) -> f64 {
    se.max(1.0 / trials as f64)
}

fn exact_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for (m, d, k) in [(4usize, 2usize, 2usize), (5, 2, 3), (6, 3, 2)] {
        let subs: Vec<u32> = (0u32..1 << m).filter(|s| s.count_ones() as usize == d).collect();
        let mut counts = vec![0u64; m + 1];
        let total = (subs.len() as u64).pow(k as u32);
        for code in 0..total {
            let mut c = code;
            let mut union = 0u32;
            for _ in 0..k {
                union |= subs[(c % subs.len() as u64) as usize];
                c /= subs.len() as u64;
            }
            counts[union.count_ones() as usize] += 1;
        }
        let nu = nu_distribution(m, d, k).map_err(|e| e.to_string())?;
        for (v, &c) in counts.iter().enumerate() {
            worst = worst.max((nu.prob(v) - c as f64 / total as f64).abs());
        }
    }
    ensure(worst <= ORACLE_TOL, || format!("max deviation {worst:e}"))?;
    Ok(format!("max abs deviation {worst:.1e} <= {ORACLE_TOL:e}"))
}

fn closed_form() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for m in (20..=200).step_by(20) {
        for d in 2..=20usize.min(m) {
            for k in 1..=20 {
                let rec = nu_distribution(m, d, k).map_err(|e| e.to_string())?.mean();
                let closed = expected_nu_closed(m, d, k).map_err(|e| e.to_string())?;
                worst = worst.max((rec - closed).abs() / closed);
                cases += 1;
            }
        }
    }
    ensure(worst <= CLOSED_FORM_REL_TOL, || format!("max rel error {worst:e}"))?;
    Ok(format!("{cases} cases, max rel error {worst:.1e}"))
}

fn mean_nu_curve() -> Outcome {
    let t = run(Experiment::NuVsK, &[("m", "100"), ("n", "256"), ("d", "8,12,16"), ("K", "1:20"), ("trials", "1000")])?;
    let (mean, se, exp) = (col(&t, "mean_nu")?, col(&t, "se_nu")?, col(&t, "expected_nu")?);
    let mut worst = 0.0f64;
    for i in 0..mean.len() {
        worst = worst.max((mean[i] - exp[i]).abs() / se_floor(se[i], 1000));
    }
    ensure(worst <= SE_MULTIPLE, || format!("worst deviation {worst:.2} standard errors"))?;
    Ok(format!("{} points, worst {worst:.2} SE", mean.len()))
}

fn mean_gamma_curve() -> Outcome {
    let t = run(Experiment::GammaVsK, &[("m", "100"), ("n", "256"), ("d", "8,12,16"), ("K", "1:20"), ("trials", "1000")])?;
    let (mean, se, exp) = (col(&t, "mean_gamma")?, col(&t, "se_gamma")?, col(&t, "expected_gamma")?);
    let (ds, ks) = (col(&t, "d")?, col(&t, "K")?);
    let mut worst = 0.0f64;
    let mut excess = 0.0f64;
    for i in 0..mean.len() {
        worst = worst.max((mean[i] - exp[i]).abs() / se_floor(se[i], 1000));
        if ds[i] == 12.0 && ks[i] <= 4.0 {
            excess = excess.max(mean[i] - ks[i]);
        }
    }
    ensure(worst <= SE_MULTIPLE, || format!("worst deviation {worst:.2} standard errors"))?;
    ensure(excess < SMALL_GAMMA_EXCESS, || format!("mean |Gamma| - K = {excess} at d = 12"))?;
    Ok(format!("worst {worst:.2} SE; max mean|Gamma|-K for K<=4, d=12: {excess:.3}"))
}

fn tight_gamma_exactness() -> Outcome {
    let trials = 10_000usize;
    let t = run(Experiment::GammaVsK, &[("m", "100"), ("n", "256"), ("d", "12"), ("K", "2,5,10"), ("trials", "10000")])?;
    let (freq, bound, ks) = (col(&t, "freq_gamma_eq_K")?, col(&t, "gamma_eq_K_bound")?, col(&t, "K")?);
    let mut parts = Vec::new();
    for i in 0..freq.len() {
        let se = (bound[i] * (1.0 - bound[i]) / trials as f64).sqrt();
        let z = (freq[i] - bound[i]).abs() / se_floor(se, trials);
        ensure(z <= SE_MULTIPLE, || format!("K={}: freq {} vs bound {} ({z:.2} SE)", ks[i], freq[i], bound[i]))?;
        parts.push(format!("K={}: {:.4} vs {:.4}", ks[i], freq[i], bound[i]));
    }
    Ok(parts.join("; "))
}

fn degree_optimum() -> Outcome {
    let choice = optimize_d(100, 256, 5, BoundKind::Theorem4).map_err(|e| e.to_string())?;
    let mut best = (0, f64::MIN);
    for d in 5..=50 {
        let v = recovery_prob_lower_bound(100, 256, d, 5).map_err(|e| e.to_string())?.value;
        if v > best.1 {
            best = (d, v);
        }
    }
    ensure(choice.d == 12 && best.0 == 12, || format!("argmax {} / sweep {}", choice.d, best.0))?;
    Ok(format!("argmax d = {} (bound {:.4})", choice.d, choice.report.value))
}

fn bound_ordering() -> Outcome {
    let mut violations = 0;
    let mut state = 0x0dd_ba11u64;
    let mut next = |lo: usize, hi: usize| {
        state = mix64(state.wrapping_add(1));
        lo + (state % (hi - lo + 1) as u64) as usize
    };
    for _ in 0..200 {
        let m = next(10, 300);
        let d = next(1, m / 2);
        let k = next(1, m / d);
        let n = next(k, 4 * m + k);
        let t4 = recovery_prob_lower_bound(m, n, d, k).map_err(|e| e.to_string())?.value;
        let pb = pi_bar(m, n, d, k).map_err(|e| e.to_string())?.value;
        if t4 + BOUND_SLACK < pb {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    Ok("200 points, 0 violations".into())
}

fn pi_bar_spot() -> Outcome {
    // independent evaluation: repeated multiplication of the base
    let base = (8.0f64 * 10.0 / 128.0).powi(10);
    let reference = (0..248).fold(1.0f64, |acc, _| acc * (1.0 - base));
    let got = pi_bar(128, 256, 10, 8).map_err(|e| e.to_string())?.value;
    ensure((got - reference).abs() <= SPOT_TOL && (got - 0.1037).abs() <= SPOT_TOL, || {
        format!("pi_bar = {got}, reference {reference}")
    })?;
    let o = pi_bar_optimal_d(128, 8, 256).map_err(|e| e.to_string())?;
    let mut sweep = (0.0, 0.0);
    for i in 1..=100_000 {
        let d = i as f64 * 1e-4 * 16.0;
        let v = (1.0 - (8.0 * d / 128.0).powf(d)).max(0.0).powi(248);
        if v > sweep.1 {
            sweep = (d, v);
        }
    }
    ensure((o.d_star - 5.886).abs() <= SPOT_TOL && (o.d_star - sweep.0).abs() <= SPOT_TOL, || {
        format!("d* = {} (sweep {})", o.d_star, sweep.0)
    })?;
    ensure((o.pi_max - 0.5014).abs() <= SPOT_TOL && (o.pi_max - sweep.1).abs() <= SPOT_TOL, || {
        format!("pi_max = {} (sweep {})", o.pi_max, sweep.1)
    })?;
    Ok(format!("pi_bar {got:.5} (ref {reference:.5}); d* {:.4}; pi_max {:.4}", o.d_star, o.pi_max))
}

fn sufficiency() -> Outcome {
    let plan = min_measurements(256, 8).map_err(|e| e.to_string())?;
    let target = 1.0 - 1.0 / 248.0;
    ensure(plan.m == 240, || format!("m = {}", plan.m))?;
    ensure((plan.prob_bound - target).abs() < 1e-12, || format!("bound {}", plan.prob_bound))?;
    let d_real = plan.m as f64 / (8.0 * std::f64::consts::E);
    let mut parts = vec![format!("m = {}, bound {:.5}", plan.m, plan.prob_bound)];
    for d in [d_real.floor() as usize, d_real.ceil() as usize] {
        let v = recovery_prob_lower_bound(plan.m, 256, d, 8).map_err(|e| e.to_string())?.value;
        ensure(v >= target - SUFFICIENCY_SLACK, || format!("recovery bound {v} at d = {d}"))?;
        parts.push(format!("d={d}: {v:.5}"));
    }
    Ok(parts.join("; "))
}

fn recovery_trend() -> Outcome {
    let mut parts = Vec::new();
    for model in ["gaussian", "flat"] {
        let t = run(
            Experiment::RecoveryVsK,
            &[
                ("m", "128"),
                ("n", "256"),
                ("d", "10"),
                ("K", "2:14"),
                ("model", model),
                ("algorithms", "omp,confined_omp"),
                ("trials", "1000"),
            ],
        )?;
        let (o, c, ks) = (col(&t, "rate_omp")?, col(&t, "rate_confined_omp")?, col(&t, "K")?);
        for i in 0..ks.len() {
            ensure(c[i] >= o[i], || format!("{model} K={}: confined {} < omp {}", ks[i], c[i], o[i]))?;
        }
        let gain = c[ks.len() - 1] - o[ks.len() - 1];
        if model == "flat" {
            ensure(gain > FLAT_GAIN_AT_14, || format!("flat gain at K=14 is {gain}"))?;
        }
        parts.push(format!("{model}: gain at K=14 {:.1} pp", 100.0 * gain));
    }
    Ok(parts.join("; "))
}

fn table_one() -> Outcome {
    let (m, n, d, k) = (128usize, 256usize, 10usize, 8usize);
    let model = SignalModel::standard_gaussian();
    let mut forced = None;
    let mut tight = None;
    for seed in 0..200u64 {
        let a = gen_comb_matrix(m, n, d, seed).map_err(|e| e.to_string())?;
        let x = gen_signal(n, k, &model, !seed).map_err(|e| e.to_string())?;
        let y = a.matvec(&x.to_dense()).map_err(|e| e.to_string())?;
        let cfg = SolverConfig::new(k).with_residual_tol(0.0);
        if forced.is_none() {
            if let Ok(r) = omp(&a, &y, &cfg) {
                if r.iterations == k {
                    forced = Some(r.counters.identification_flops());
                }
            }
        }
        if tight.is_none() {
            if let Ok(r) = confined_omp(&a, &y, &SolverConfig::new(k)) {
                if r.stop == StopReason::ConfinedExact && r.support.len() == k {
                    tight = Some((r.counters.inner_products, r.counters.preprocessing_flops));
                }
            }
        }
    }
    let flops = forced.ok_or("no K-iteration OMP run found")?;
    let expected = (k * n * d - k) as u64;
    ensure(flops == expected, || format!("OMP identification {flops} != Knd-K = {expected}"))?;
    let (ip, pre) = tight.ok_or("no |Gamma| = K instance found")?;
    ensure(ip == 0 && pre == n as u64, || format!("|Gamma|=K run: {ip} inner products, {pre} preprocessing"))?;

    let t = run(
        Experiment::OpcountVsK,
        &[("m", "128"), ("n", "256"), ("d", "10"), ("K", "6"), ("algorithms", "omp,confined_omp"), ("trials", "1000")],
    )?;
    let ident = col(&t, "ident_flops_confined_omp")?[0] / col(&t, "ident_flops_omp")?[0];
    let total = col(&t, "total_flops_confined_omp")?[0] / col(&t, "total_flops_omp")?[0];
    ensure(total <= WORK_RATIO_MAX, || format!("work ratio {total}"))?;
    Ok(format!(
        "Knd-K = {expected} exact; |Gamma|=K: 0 inner products, n = {pre} preprocessing; K=6 work ratio {:.2}% \
         (identification only {:.3}%)",
        100.0 * total,
        100.0 * ident
    ))
}

fn noisy_flat() -> Outcome {
    let t = run(
        Experiment::NoisyConfProb,
        &[
            ("m", "128"),
            ("n", "256"),
            ("d", "10"),
            ("K", "8"),
            ("model", "flat"),
            ("theta", "1"),
            ("eta", "0.1:0.05:0.45,0.55,0.6"),
            ("trials", "1000"),
        ],
    )?;
    let (etas, freq) = (col(&t, "eta")?, col(&t, "freq_support_confined")?);
    for i in 0..etas.len() {
        if etas[i] <= 0.45 {
            ensure(freq[i] == 1.0, || format!("eta {}: P = {}", etas[i], freq[i]))?;
        } else {
            ensure(freq[i] < NOISY_COLLAPSE_BELOW, || format!("eta {}: P = {}", etas[i], freq[i]))?;
        }
    }
    let flat = SignalModel::flat(1.0).map_err(|e| e.to_string())?;
    for eta in [0.5, 0.6] {
        let b = noisy_support_recovery_bound(128, 256, 10, 8, eta, &flat).map_err(|e| e.to_string())?;
        ensure(b.value == 0.0, || format!("support bound {} at eta {eta}", b.value))?;
    }
    Ok(format!(
        "P = 1.000 for eta <= 0.45; P = {:.3} at 0.55, {:.3} at 0.6; bound 0 at eta 0.5, 0.6",
        freq[freq.len() - 2],
        freq[freq.len() - 1]
    ))
}

fn khat() -> Outcome {
    let mut misses = 0;
    for t in 0..1000usize {
        let s = trial_seed(99, 0, t);
        let k = 1 + t % 20;
        let theta = [0.4, 0.8, 1.0, -1.0][t % 4];
        let a = gen_comb_matrix(128, 256, 10, stream_seed(s, 0)).map_err(|e| e.to_string())?;
        let x = gen_signal(256, k, &SignalModel::flat(theta).map_err(|e| e.to_string())?, stream_seed(s, 1))
            .map_err(|e| e.to_string())?;
        let y = a.matvec(&x.to_dense()).map_err(|e| e.to_string())?;
        if flat_sparsity_exact(&y, 10, theta) != k {
            misses += 1;
        }
        // the confined set of a noiseless flat draw always holds the support
        let set = compute_confined_set(&a, &y, 1e-12).map_err(|e| e.to_string())?;
        ensure(set.contains_all(x.support()), || format!("trial {t}: support outside Gamma"))?;
    }
    ensure(misses == 0, || format!("{misses} of 1000 flat trials misestimated"))?;
    let one = estimate_sparsity(10, 100, 10, 20).map_err(|e| e.to_string())?.k_hat;
    let two = estimate_sparsity(19, 100, 10, 20).map_err(|e| e.to_string())?.k_hat;
    ensure(one == 1 && two == 2, || format!("estimate_sparsity gave {one}, {two}"))?;
    Ok("1000/1000 flat trials exact; 10 -> 1, 19 -> 2".into())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for e in Experiment::ALL {
        let mut pairs = vec![("trials", "3"), ("m", "40"), ("n", "64"), ("K", "2,3")];
        pairs.push(("d", if e == Experiment::DOptimization { "auto" } else { "4" }));
        let mut bytes = Vec::new();
        for (run_no, workers) in ["1", "2"].iter().enumerate() {
            let mut p = pairs.clone();
            p.push(("workers", workers));
            let cfg = ExperimentConfig::from_pairs(e, &p).map_err(|err| err.to_string())?;
            let table = run_experiment(&cfg).map_err(|err| err.to_string())?;
            let path = dir.path().join(format!("{e}-{run_no}.csv"));
            table.emit_csv(&path).map_err(|err| err.to_string())?;
            bytes.push(std::fs::read(&path).map_err(|err| err.to_string())?);
        }
        ensure(bytes[0] == bytes[1], || format!("{e}: CSV differs between runs"))?;
    }
    Ok("10 experiments byte-identical across reruns".into())
}

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    check: fn() -> Outcome,
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { name: "exact combinatorial oracle", budget: secs(1), check: exact_oracle },
        Criterion { name: "closed-form consistency", budget: secs(10), check: closed_form },
        Criterion { name: "mean nu vs K", budget: secs(30), check: mean_nu_curve },
        Criterion { name: "mean |Gamma| vs K", budget: secs(60), check: mean_gamma_curve },
        Criterion { name: "P{|Gamma| = K} exactness", budget: secs(60), check: tight_gamma_exactness },
        Criterion { name: "column degree optimum", budget: secs(5), check: degree_optimum },
        Criterion { name: "bound ordering", budget: None, check: bound_ordering },
        Criterion { name: "pi_bar spot values", budget: None, check: pi_bar_spot },
        Criterion { name: "measurement sufficiency spot value", budget: None, check: sufficiency },
        Criterion { name: "confined vs plain recovery trend", budget: secs(300), check: recovery_trend },
        Criterion { name: "operation counters", budget: None, check: table_one },
        Criterion { name: "noisy flat thresholds", budget: None, check: noisy_flat },
        Criterion { name: "sparsity estimation", budget: None, check: khat },
        Criterion { name: "determinism", budget: None, check: determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.check)();
        let elapsed = start.elapsed();
        let over = c.budget.is_some_and(|b| elapsed > b);
        let budget = c.budget.map(|b| format!(" / {}s", b.as_secs())).unwrap_or_default();
        let (tag, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over time budget")),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("{tag} {:<36} {detail} [{:.2}s{budget}]", c.name, elapsed.as_secs_f64());
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
