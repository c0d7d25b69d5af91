//! Exact eigenvalue counting against dense oracles and the non-backtracking
//! spectrum.

mod common;

use bethe::detect::estimate_counts;
use bethe::eig::{count_below, count_below_detailed, smallest_eigs};
use bethe::operators::{bethe_hessian, reduced_nb};
use common::{dense_count_below, general_spectrum, random_graph, sbm};
use proptest::prelude::*;

#[test]
fn sbm_draws_match_dense_counts() {
    for trial in 0..50u64 {
        let n = 50 + (trial as usize * 37) % 451;
        let (p11, p12) = if trial % 2 == 0 { (9.0, 2.0) } else { (2.0, 7.0) };
        let g = sbm(p11, p12, n, trial).graph;
        let s = g.mean_degree().sqrt();
        for t in [0.0, s, -s, 2.0, -2.0] {
            let h = bethe_hessian(&g, t);
            let dense = h.to_dense();
            for eps in [0.0, 1.0 / (n as f64).ln()] {
                assert_eq!(
                    count_below(&h, eps).unwrap(),
                    dense_count_below(dense.clone(), -eps),
                    "trial {trial} n={n} t={t} ε={eps}"
                );
            }
        }
    }
}

#[test]
fn counts_agree_with_lanczos() {
    let g = sbm(10.0, 2.0, 1500, 8).graph;
    let h = bethe_hessian(&g, g.mean_degree().sqrt());
    let k = count_below(&h, 0.0).unwrap();
    assert_eq!(k, 2);
    let pairs = smallest_eigs(&h, k + 1, 1e-9, 1).unwrap();
    assert!(pairs.values[k - 1] < 0.0 && pairs.values[k] >= 0.0);
    // Margins just around the computed eigenvalues split the count.
    for (i, &v) in pairs.values.iter().take(k).enumerate() {
        assert_eq!(count_below(&h, -v + 1e-6).unwrap(), i);
        assert_eq!(count_below(&h, -v - 1e-6).unwrap(), i + 1);
    }
}

#[test]
fn exact_zero_pivot_is_handled() {
    // H(1) = D − A on a path is the Laplacian: a single zero eigenvalue.
    let g = bethe::graph::SparseGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
    let h = bethe_hessian(&g, 1.0);
    assert_eq!(count_below(&h, 0.0).unwrap(), 0);
    assert_eq!(count_below(&h, -1e-9).unwrap(), 1);
    let detail = count_below_detailed(&h, 0.0).unwrap();
    assert_eq!(detail.count, 0);
}

fn real_above(spec: &[nalgebra::Complex<f64>], t: f64) -> usize {
    spec.iter().filter(|z| z.im.abs() <= 1e-7 * (1.0 + z.norm()) && z.re > t).count()
}

fn real_below(spec: &[nalgebra::Complex<f64>], t: f64) -> usize {
    spec.iter().filter(|z| z.im.abs() <= 1e-7 * (1.0 + z.norm()) && z.re < t).count()
}

fn adjacency_norm(g: &bethe::graph::SparseGraph) -> f64 {
    common::dense_spectrum(common::adjacency(g)).iter().fold(0.0, |m, v| m.max(v.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn count_matches_dense(n in 1usize..200, d in 0.0f64..12.0, seed in any::<u64>(), t in -4.0f64..4.0, thr in -3.0f64..3.0) {
        let g = random_graph(n, d, seed);
        let h = bethe_hessian(&g, t);
        prop_assert_eq!(count_below(&h, thr).unwrap(), dense_count_below(h.to_dense(), -thr));
    }

    #[test]
    fn count_is_monotone_in_margin(n in 2usize..300, seed in any::<u64>(), a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let g = random_graph(n, 5.0, seed);
        let h = bethe_hessian(&g, g.mean_degree().max(1.0).sqrt());
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(count_below(&h, lo).unwrap() >= count_below(&h, hi).unwrap());
    }

    #[test]
    fn negatives_bounded_by_real_nb_eigenvalues(n in 2usize..40, d in 1.0f64..6.0, seed in any::<u64>(), t in 0.05f64..4.0) {
        let g = random_graph(n, d, seed);
        let spec = general_spectrum(reduced_nb(&g).to_dense());
        // Away from t = ±1, where B̃ may have defective eigenvalues.
        prop_assume!((t - 1.0).abs() > 1e-3);
        let pos = count_below(&bethe_hessian(&g, t), 0.0).unwrap();
        prop_assert!(pos <= real_above(&spec, t), "t={t}: {pos} > {}", real_above(&spec, t));
        let neg = count_below(&bethe_hessian(&g, -t), 0.0).unwrap();
        prop_assert!(neg <= real_below(&spec, -t), "t=-{t}: {neg} > {}", real_below(&spec, -t));
    }

    #[test]
    fn isolated_vertices_at_zero(n in 2usize..40, d in 0.3f64..4.0, seed in any::<u64>()) {
        let g = random_graph(n, d, seed);
        let isolated = (0..n).filter(|&i| g.degree(i) == 0).count();
        prop_assert_eq!(count_below(&bethe_hessian(&g, 0.0), 0.0).unwrap(), isolated);
        // Each isolated vertex contributes a −1 eigenvalue to B̃.
        let spec = general_spectrum(reduced_nb(&g).to_dense());
        let near = spec.iter().filter(|z| (**z + 1.0).norm() < 1e-3).count();
        prop_assert!(isolated <= near);
    }

    #[test]
    fn margin_counts_bounded_by_nb_outliers(n in 8usize..50, seed in any::<u64>(), eps in 0.01f64..0.9) {
        let g = random_graph(n, 4.0, seed);
        let d = g.mean_degree();
        prop_assume!(d > 1.0);
        let spec = general_spectrum(reduced_nb(&g).to_dense());
        let a_norm = adjacency_norm(&g);
        let margin = (3.0 * d.sqrt() + a_norm) * eps;
        let s = d.sqrt();
        let plus = count_below(&bethe_hessian(&g, s), margin).unwrap();
        prop_assert!(plus <= real_above(&spec, s + eps));
        let minus = count_below(&bethe_hessian(&g, -s), margin).unwrap();
        prop_assert!(minus <= real_below(&spec, -s - eps));
    }

    #[test]
    fn estimate_is_monotone_in_epsilon(seed in 0u64..1000, e1 in 0.0f64..1.5, e2 in 0.0f64..1.5) {
        let g = sbm(9.0, 2.0, 400, seed).graph;
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let a = estimate_counts(&g, Some(lo)).unwrap();
        let b = estimate_counts(&g, Some(hi)).unwrap();
        prop_assert!(b.r_plus <= a.r_plus && b.r_minus <= a.r_minus);
    }
}
