//! Randomized identities tying the three Gram computation routes, the
//! distance↔similarity correspondence, and the spectral structure together.

use adamant_core::data::DataMatrix;
use adamant_core::kernels::{
    double_center, gram, squared_distance_matrix, svd_thin_default, GramPath, KernelSpec,
};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn randn_centered(n: usize, p: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = DMatrix::from_iterator(n, p, (0..n * p).map(|_| rng.sample(StandardNormal)));
    DataMatrix::from_raw(values).unwrap().center_columns().unwrap()
}

fn max_rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = a.amax().max(b.amax()).max(1e-300);
    (a - b).amax() / scale
}

#[test]
fn three_paths_agree_across_shapes() {
    let mut seed = 0;
    for n in 3..=10usize {
        for p in [1usize, 2, 5, 8, 12] {
            seed += 1;
            let x = randn_centered(n, p, seed);
            for lambda in [0.01, 1.0, 37.5] {
                let spec = KernelSpec::Ridge(lambda);
                let direct = gram(&x, &spec, GramPath::Direct).unwrap();
                let svd = gram(&x, &spec, GramPath::Svd).unwrap();
                let dual = gram(&x, &spec, GramPath::Dual).unwrap();
                assert!(
                    max_rel_diff(direct.values(), svd.values()) <= 1e-10,
                    "direct vs svd at n={n} p={p} lambda={lambda}"
                );
                assert!(
                    max_rel_diff(direct.values(), dual.values()) <= 1e-10,
                    "direct vs dual at n={n} p={p} lambda={lambda}"
                );
            }
            // The λ = 0 and λ = ∞ ends share the direct and SVD routes.
            for spec in [KernelSpec::Projection, KernelSpec::Linear] {
                let direct = gram(&x, &spec, GramPath::Direct).unwrap();
                let svd = gram(&x, &spec, GramPath::Svd).unwrap();
                assert!(max_rel_diff(direct.values(), svd.values()) <= 1e-10);
            }
        }
    }
}

#[test]
fn double_centering_recovers_every_similarity() {
    for (seed, (n, p)) in [(1u64, (4usize, 2usize)), (2, (6, 3)), (3, (5, 9)), (4, (8, 8))] {
        let x = randn_centered(n, p, 100 + seed);
        for spec in [
            KernelSpec::Projection,
            KernelSpec::Ridge(0.5),
            KernelSpec::Ridge(20.0),
            KernelSpec::Linear,
        ] {
            let d2 = squared_distance_matrix(&x, &spec).unwrap();
            let recovered = double_center(&d2);
            let h = gram(&x, &spec, GramPath::Auto).unwrap();
            assert!(
                max_rel_diff(recovered.values(), h.values()) <= 1e-10,
                "A.1 identity failed for {spec:?} at n={n} p={p}"
            );
        }
    }
}

#[test]
fn projection_gram_is_an_orthogonal_projector() {
    for seed in 0..10u64 {
        let n = 5 + (seed as usize % 4);
        let p = 1 + (seed as usize % 5);
        let x = randn_centered(n, p, 200 + seed);
        let h = gram(&x, &KernelSpec::Projection, GramPath::Auto).unwrap();
        let rank = svd_thin_default(&x).unwrap().rank();
        let eig = SymmetricEigen::new(h.values().clone());
        let mut ones = 0;
        for &e in eig.eigenvalues.iter() {
            if (e - 1.0).abs() <= 1e-8 {
                ones += 1;
            } else {
                assert!(e.abs() <= 1e-8, "projection eigenvalue {e} not in {{0,1}}");
            }
        }
        assert_eq!(ones, rank);
        assert!((h.values().trace() - rank as f64).abs() <= 1e-8);
    }
}

#[test]
fn ridge_eigenvalues_follow_the_shrinkage_law() {
    let x = randn_centered(7, 4, 300);
    let f = svd_thin_default(&x).unwrap();
    let mut previous: Option<Vec<f64>> = None;
    for lambda in [0.1, 1.0, 10.0, 100.0] {
        let h = gram(&x, &KernelSpec::Ridge(lambda), GramPath::Auto).unwrap();
        let mut eig: Vec<f64> = SymmetricEigen::new(h.values().clone())
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let expected: Vec<f64> = f
            .singular_values()
            .iter()
            .map(|&d| d * d / (d * d + lambda))
            .collect();
        for (j, &w) in expected.iter().enumerate() {
            assert!((eig[j] - w).abs() <= 1e-10, "eigenvalue law at λ={lambda}, j={j}");
        }
        // Strictly decreasing in λ for each j.
        if let Some(prev) = &previous {
            for j in 0..expected.len() {
                assert!(expected[j] < prev[j]);
            }
        }
        previous = Some(expected);
    }
}

#[test]
fn scaled_ridge_gram_converges_to_linear() {
    let x = randn_centered(6, 3, 400);
    let d1 = svd_thin_default(&x).unwrap().singular_values()[0];
    let linear = gram(&x, &KernelSpec::Linear, GramPath::Auto).unwrap();
    for factor in [100.0, 1e4, 1e6] {
        let lambda = factor * d1 * d1;
        let ridge = gram(&x, &KernelSpec::Ridge(lambda), GramPath::Auto).unwrap();
        let scaled = ridge.values() * lambda;
        let rel = (scaled - linear.values()).amax() / linear.values().amax();
        assert!(
            rel <= 10.0 * d1 * d1 / lambda,
            "λ={lambda}: relative error {rel}"
        );
    }
}

#[test]
fn augmented_data_projection_reproduces_the_ridge_gram() {
    // Stacking √λ·I_p under X makes the plain projection of the augmented
    // matrix carry the ridge similarity in its top-left n×n block.
    for (seed, (n, p, lambda)) in [
        (0u64, (5usize, 3usize, 2.0f64)),
        (1, (4, 6, 0.7)),
        (2, (8, 2, 40.0)),
    ] {
        let x = randn_centered(n, p, 500 + seed);
        let mut augmented = DMatrix::zeros(n + p, p);
        augmented.view_mut((0, 0), (n, p)).copy_from(x.values());
        for j in 0..p {
            augmented[(n + j, j)] = lambda.sqrt();
        }
        // X̃^T X̃ = X^T X + λI is positive definite; invert via Cholesky.
        let gtg = augmented.transpose() * &augmented;
        let chol = nalgebra::Cholesky::new(gtg).unwrap();
        let projector = &augmented * chol.solve(&augmented.transpose());
        let block = projector.view((0, 0), (n, n)).clone_owned();
        let ridge = gram(&x, &KernelSpec::Ridge(lambda), GramPath::Auto).unwrap();
        assert!(
            max_rel_diff(&block, ridge.values()) <= 1e-10,
            "augmented identity failed at n={n} p={p} λ={lambda}"
        );
    }
}

#[test]
fn grams_are_positive_semidefinite() {
    for seed in 0..6u64 {
        let x = randn_centered(6, 4, 600 + seed);
        for spec in [KernelSpec::Projection, KernelSpec::Ridge(3.0), KernelSpec::Linear] {
            let h = gram(&x, &spec, GramPath::Auto).unwrap();
            let eig = SymmetricEigen::new(h.values().clone());
            let max = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
            let min = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
            assert!(min >= -1e-8 * max.max(0.0), "PSD violated for {spec:?}");
        }
    }
}
