//! Algebraic identities between the graph operators, on random graphs.

mod common;

use bethe::graph::SparseGraph;
use bethe::operators::{
    bethe_hessian, deformed_difference_check, full_nb, ihara_bass_residual, reduced_nb,
    weighted_bethe_hessian,
};
use common::{adjacency, connected_graph, random_graph};
use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;
use rand::Rng;

fn z_samples(seed: u64, count: usize) -> Vec<Complex<f64>> {
    let mut rng = common::rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let z = Complex::new(rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0);
        if (z * z - 1.0).norm() > 0.1 {
            out.push(z);
        }
    }
    out
}

#[test]
fn ihara_bass_on_many_connected_graphs() {
    let mut worst: f64 = 0.0;
    for trial in 0..100u64 {
        let n = 2 + (trial as usize % 7);
        let max_extra = (n * (n - 1) / 2 - (n - 1)).min(20 - (n - 1));
        let g = connected_graph(n, trial as usize % (max_extra + 1), trial);
        worst = worst.max(ihara_bass_residual(&g, &z_samples(trial + 1000, 5)).unwrap());
    }
    assert!(worst <= 1e-8, "worst relative residual {worst:e}");
}

#[test]
fn bethe_hessian_dense_form() {
    for seed in 0..10 {
        let g = random_graph(30, 4.0, seed);
        let a = adjacency(&g);
        for t in [-2.5, -1.0, 0.0, 0.7, 3.0] {
            let mut expect = a.map(|x| -t * x);
            for i in 0..g.n() {
                expect[(i, i)] = t * t + g.degree(i) as f64 - 1.0;
            }
            assert_eq!(bethe_hessian(&g, t).to_dense(), expect);
        }
    }
}

#[test]
fn non_backtracking_row_sums_are_excess_degrees() {
    for seed in 0..10 {
        let g = random_graph(25, 3.0, seed);
        let b = full_nb(&g).to_dense();
        let oriented = g.oriented_edges();
        for (row, &(_, v)) in oriented.edges().iter().enumerate() {
            assert_eq!(b.row(row).sum(), g.degree(v) as f64 - 1.0);
        }
        // B̃ = [[0, D − I], [−I, A]].
        let n = g.n();
        let bt = reduced_nb(&g).to_dense();
        assert_eq!(bt.view((n, n), (n, n)).into_owned(), adjacency(&g));
        assert_eq!(bt.view((n, 0), (n, n)).into_owned(), -DMatrix::<f64>::identity(n, n));
    }
}

#[test]
fn reduced_nb_eigenvector_relations() {
    // Every real eigenvalue of B̃ away from ±1 makes H(λ) singular.
    let g = connected_graph(9, 6, 77);
    let n = g.n();
    let bt = reduced_nb(&g).to_dense();
    let eig = common::general_spectrum(bt.clone());
    for lambda in eig.iter().filter(|l| l.im.abs() < 1e-9 && (l.re.abs() - 1.0).abs() > 1e-6) {
        let h = bethe_hessian(&g, lambda.re).to_dense();
        let smallest = common::dense_spectrum(h).iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        assert!(smallest < 1e-7 * (1.0 + lambda.re * lambda.re), "λ={lambda} min |eig H|={smallest:e}");
    }
    assert_eq!(bt.nrows(), 2 * n);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ihara_bass_holds(n in 2usize..=8, extra in 0usize..10, seed in any::<u64>()) {
        let g = connected_graph(n, extra, seed);
        prop_assume!(g.num_edges() <= 20);
        let r = ihara_bass_residual(&g, &z_samples(seed ^ 0xABCD, 3)).unwrap();
        prop_assert!(r <= 1e-8, "residual {r:e}");
    }

    #[test]
    fn deformed_difference_is_exact(
        n in 2usize..60,
        d in 0.5f64..8.0,
        seed in any::<u64>(),
        t in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
        t_prime in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
    ) {
        let g = random_graph(n, d, seed);
        let r = deformed_difference_check(&g, t, t_prime).unwrap();
        prop_assert!(r <= 1e-12, "residual {r:e}");
    }

    #[test]
    fn unit_weights_normalize_to_bethe_hessian(
        n in 2usize..50,
        d in 0.5f64..6.0,
        seed in any::<u64>(),
        t in prop_oneof![-4.0f64..-1.2, -0.8f64..-0.1, 0.1f64..0.8, 1.2f64..4.0],
    ) {
        let g = random_graph(n, d, seed);
        let edges: Vec<(usize, usize, f64)> = g.edges().map(|(u, v, _)| (u, v, 1.0)).collect();
        let weighted = SparseGraph::from_weighted_edges(n, &edges).unwrap();
        let expect = bethe_hessian(&g, t).to_dense() / (t * t - 1.0);
        for graph in [&g, &weighted] {
            let got = weighted_bethe_hessian(graph, t).unwrap().to_dense();
            let err = (&got - &expect).amax();
            prop_assert!(err <= 1e-12 * expect.amax().max(1.0), "error {err:e}");
        }
    }

    #[test]
    fn bethe_hessian_is_symmetric(n in 1usize..80, d in 0.0f64..10.0, seed in any::<u64>(), t in -5.0f64..5.0) {
        let g = random_graph(n, d, seed);
        let h = bethe_hessian(&g, t);
        prop_assert_eq!(h.matrix().asymmetry(), 0.0);
        let (lo, hi) = h.gershgorin();
        let spec = common::dense_spectrum(h.to_dense());
        prop_assert!(lo <= spec[0] + 1e-9 && spec[spec.len() - 1] <= hi + 1e-9);
    }
}
