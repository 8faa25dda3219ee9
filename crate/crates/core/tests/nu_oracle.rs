//! `nu_distribution` against exhaustive enumeration of ordered column tuples.

use confined_omp::{expected_nu_closed, nu_distribution};

fn subsets(m: usize, d: usize) -> Vec<u64> {
    (0u64..1 << m).filter(|s| s.count_ones() as usize == d).collect()
}

/// Exact counts of `|union|` over all `C(m,d)^k` ordered tuples.
fn enumerate(m: usize, d: usize, k: usize) -> (Vec<u64>, u64) {
    let subs = subsets(m, d);
    let mut counts = vec![0u64; m + 1];
    let mut idx = vec![0usize; k];
    let mut total = 0u64;
    loop {
        let union = idx.iter().fold(0u64, |acc, &i| acc | subs[i]);
        counts[union.count_ones() as usize] += 1;
        total += 1;
        let mut pos = 0;
        loop {
            if pos == k {
                return (counts, total);
            }
            idx[pos] += 1;
            if idx[pos] < subs.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

fn check(m: usize, d: usize, k: usize) {
    let (counts, total) = enumerate(m, d, k);
    let nu = nu_distribution(m, d, k).unwrap();
    let mut worst = 0.0f64;
    for (v, &c) in counts.iter().enumerate() {
        let exact = c as f64 / total as f64;
        worst = worst.max((nu.prob(v) - exact).abs());
    }
    assert!(worst <= 1e-12, "m={m} d={d} K={k}: max deviation {worst:e}");
}

#[test]
fn matches_enumeration_on_listed_cases() {
    for (m, d, k) in [(4, 2, 2), (5, 2, 3), (6, 3, 2)] {
        check(m, d, k);
    }
}

#[test]
fn matches_enumeration_for_small_pairs() {
    for m in 2..=6 {
        for k in 1..=3 {
            check(m, 2, k);
        }
    }
    for (m, d, k) in [(5, 1, 4), (6, 4, 2), (5, 5, 2), (6, 3, 3)] {
        check(m, d, k);
    }
}

#[test]
fn masses_sum_to_one_and_mean_matches_closed_form() {
    for m in (20..=200).step_by(20) {
        for d in 2..=20.min(m) {
            for k in 1..=20 {
                let nu = nu_distribution(m, d, k).unwrap();
                let total: f64 = nu.probs.iter().sum();
                assert!((total - 1.0).abs() < 1e-12, "m={m} d={d} K={k}: sum {total}");
                assert!(nu.probs.iter().all(|&p| p >= 0.0));
                let closed = expected_nu_closed(m, d, k).unwrap();
                let rel = (nu.mean() - closed).abs() / closed;
                assert!(rel < 1e-9, "m={m} d={d} K={k}: rel {rel:e}");
            }
        }
    }
}

#[test]
fn support_bounds() {
    let nu = nu_distribution(30, 4, 5).unwrap();
    assert_eq!((nu.support_lo, nu.support_hi), (4, 20));
    let sat = nu_distribution(10, 4, 5).unwrap();
    assert_eq!(sat.support_hi, 10);
    assert!(nu_distribution(10, 0, 1).is_err());
    assert!(nu_distribution(10, 11, 1).is_err());
    assert!(nu_distribution(10, 2, 0).is_err());
}
