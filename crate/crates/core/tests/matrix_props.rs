use confined_omp::{gen_comb_matrix, CombMatrix, OpCounter};
use proptest::prelude::*;

fn dense(a: &CombMatrix) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; a.n()]; a.m()];
    for j in 0..a.n() {
        for &i in a.col(j) {
            out[i][j] = 1.0;
        }
    }
    out
}

#[test]
fn column_supports_are_uniform() {
    // chi-square over the 10 supports of C(5,2); 27.877 is the 0.999 quantile
    // for 9 degrees of freedom
    let a = gen_comb_matrix(5, 100_000, 2, 2024).unwrap();
    let mut counts = std::collections::BTreeMap::new();
    for col in a.cols() {
        *counts.entry(col.clone()).or_insert(0u64) += 1;
    }
    assert_eq!(counts.len(), 10);
    let expected = 10_000.0;
    let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < 27.877, "chi2 = {chi2}");
}

#[test]
fn three_of_six_is_uniform() {
    // 20 supports, 19 dof, 0.999 quantile 43.820
    let a = gen_comb_matrix(6, 200_000, 3, 7).unwrap();
    let mut counts = std::collections::BTreeMap::new();
    for col in a.cols() {
        *counts.entry(col.clone()).or_insert(0u64) += 1;
    }
    assert_eq!(counts.len(), 20);
    let expected = 10_000.0;
    let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < 43.820, "chi2 = {chi2}");
}

#[test]
fn full_size_matrix_shape() {
    let a = gen_comb_matrix(128, 256, 10, 1).unwrap();
    assert_eq!(a.cols().len(), 256);
    for col in a.cols() {
        assert_eq!(col.len(), 10);
        assert!(col.windows(2).all(|w| w[0] < w[1]));
        assert!(*col.last().unwrap() < 128);
    }
    assert!(!a.exceeds_half_density());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matvec_matches_dense_reference(
        m in 1usize..30, n in 1usize..40, dfrac in 0.0f64..1.0, seed in any::<u64>(),
        xs in proptest::collection::vec(-100i32..100, 40)
    ) {
        let d = 1 + ((m - 1) as f64 * dfrac) as usize;
        let a = gen_comb_matrix(m, n, d, seed).unwrap();
        // quarter-integers keep every partial sum exact
        let x: Vec<f64> = xs[..n].iter().map(|&v| v as f64 / 4.0).collect();
        let y = a.matvec(&x).unwrap();
        let reference: Vec<f64> = dense(&a)
            .iter()
            .map(|row| row.iter().zip(&x).map(|(r, v)| r * v).sum())
            .collect();
        prop_assert_eq!(y, reference);
    }

    #[test]
    fn correlation_matches_dense_dot(
        m in 1usize..30, n in 1usize..20, seed in any::<u64>(),
        rs in proptest::collection::vec(-50i32..50, 30)
    ) {
        let d = 1 + (seed as usize % m);
        let a = gen_comb_matrix(m, n, d, seed).unwrap();
        let r: Vec<f64> = rs[..m].iter().map(|&v| v as f64 / 8.0).collect();
        let dm = dense(&a);
        for j in 0..n {
            let reference: f64 = (0..m).map(|i| dm[i][j] * r[i]).sum();
            prop_assert_eq!(a.col_correlation(j, &r).unwrap(), reference);
        }
    }

    #[test]
    fn matvec_is_linear(
        seed in any::<u64>(), alpha in -10.0f64..10.0, beta in -10.0f64..10.0,
        xs in proptest::collection::vec(-1.0f64..1.0, 50),
        zs in proptest::collection::vec(-1.0f64..1.0, 50)
    ) {
        let a = gen_comb_matrix(20, 50, 4, seed).unwrap();
        let combo: Vec<f64> = xs.iter().zip(&zs).map(|(x, z)| alpha * x + beta * z).collect();
        let lhs = a.matvec(&combo).unwrap();
        let ax = a.matvec(&xs).unwrap();
        let az = a.matvec(&zs).unwrap();
        for i in 0..20 {
            let rhs = alpha * ax[i] + beta * az[i];
            let scale = alpha.abs() * ax[i].abs().max(1.0) + beta.abs() * az[i].abs().max(1.0);
            prop_assert!((lhs[i] - rhs).abs() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn unit_vector_gives_column_indicator(seed in any::<u64>(), j in 0usize..30) {
        let a = gen_comb_matrix(25, 30, 6, seed).unwrap();
        let mut e = vec![0.0; 30];
        e[j] = 1.0;
        let y = a.matvec(&e).unwrap();
        prop_assert_eq!(y.iter().filter(|&&v| v == 1.0).count(), 6);
        for (i, v) in y.iter().enumerate() {
            prop_assert_eq!(*v == 1.0, a.col(j).contains(&i));
        }
    }

    #[test]
    fn counted_matvec_charges_per_nonzero(seed in any::<u64>(), nz in 0usize..30) {
        let a = gen_comb_matrix(40, 30, 7, seed).unwrap();
        let x: Vec<f64> = (0..30).map(|j| if j < nz { 1.5 } else { 0.0 }).collect();
        let mut c = OpCounter::default();
        a.matvec_counted(&x, &mut c).unwrap();
        prop_assert_eq!(c.additions, 6 * nz as u64);
    }

    #[test]
    fn text_roundtrip(seed in any::<u64>()) {
        let a = gen_comb_matrix(12, 9, 3, seed).unwrap();
        let back = CombMatrix::read_text(a.to_text().as_bytes()).unwrap();
        prop_assert_eq!(back, a);
    }
}
