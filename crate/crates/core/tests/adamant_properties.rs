//! Behavioral contracts of the adaptive test: determinism under threading,
//! p-value structure, consistency with single Mantel tests, and type-I
//! calibration on null generators.

use adamant_core::adamant::{
    adamant, permute_gram, single_mantel_test, MetricPairList, PermutationPlan,
};
use adamant_core::data::DataMatrix;
use adamant_core::kernels::{gram, GramPath, KernelSpec};
use adamant_core::simgen::{
    gen_design, gen_snp_groups, gen_univariate, EegGeneticsConfig, EegGenerator, UnivariateModel,
    UnivariateSimConfig, WeightScheme,
};
use adamant_core::spectral::{band_coherence, vectorize_upper, BandSpec};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn randn_centered(n: usize, p: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = DMatrix::from_iterator(n, p, (0..n * p).map(|_| rng.sample(StandardNormal)));
    DataMatrix::from_raw(values).unwrap().center_columns().unwrap()
}

fn ridge_grid_pairs() -> MetricPairList {
    MetricPairList::new(vec![
        (KernelSpec::Ridge(10.0), KernelSpec::Ridge(10.0)),
        (KernelSpec::Ridge(100.0), KernelSpec::Ridge(100.0)),
        (KernelSpec::Linear, KernelSpec::Linear),
    ])
    .unwrap()
}

#[test]
fn results_are_identical_across_thread_counts() {
    let x = randn_centered(20, 6, 1);
    let y = randn_centered(20, 4, 2);
    let metrics = ridge_grid_pairs();
    let plan = PermutationPlan::sampled(200, 7).unwrap();

    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| adamant(&x, &y, &metrics, &plan).unwrap())
    };
    let single = run(1);
    let four = run(4);
    assert_eq!(single, four);
    // And across repeated invocations on the default pool.
    let again = adamant(&x, &y, &metrics, &plan).unwrap();
    assert_eq!(single, again);
}

#[test]
fn p_values_are_multiples_of_the_grid() {
    let x = randn_centered(15, 5, 3);
    let y = randn_centered(15, 3, 4);
    let metrics = ridge_grid_pairs();
    let b = 137;
    let plan = PermutationPlan::sampled(b, 11).unwrap();
    let res = adamant(&x, &y, &metrics, &plan).unwrap();
    let grid = (b + 1) as f64;
    let is_on_grid = |p: f64| {
        let k = p * grid;
        (k - k.round()).abs() < 1e-9 && k.round() >= 1.0 && k.round() <= grid
    };
    assert!(res.per_metric_p.iter().all(|&p| is_on_grid(p)));
    assert!(is_on_grid(res.adaptive_p));
    assert!(res.adaptive_p >= 1.0 / grid);
    for b_i in 0..res.p_table.nrows() {
        for m in 0..res.p_table.ncols() {
            assert!(is_on_grid(res.p_table[(b_i, m)]));
        }
    }
    let min_p = res.per_metric_p.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(res.per_metric_p[res.selected_metric], min_p);
}

#[test]
fn per_metric_p_values_match_single_mantel_tests() {
    let x = randn_centered(12, 4, 5);
    let y = randn_centered(12, 3, 6);
    let metrics = ridge_grid_pairs();
    let plan = PermutationPlan::sampled(99, 13).unwrap();
    let res = adamant(&x, &y, &metrics, &plan).unwrap();
    for (m, (sx, sy)) in metrics.pairs().iter().enumerate() {
        let h = gram(&x, sx, GramPath::Auto).unwrap();
        let k = gram(&y, sy, GramPath::Auto).unwrap();
        let (stat, p) = single_mantel_test(&h, &k, &plan).unwrap();
        assert_eq!(res.per_metric_stat[m], stat);
        assert_eq!(res.per_metric_p[m], p);
    }
}

#[test]
fn permuting_data_reproduces_the_statistic_table() {
    let x = randn_centered(9, 3, 7);
    let y = randn_centered(9, 2, 8);
    let metrics = ridge_grid_pairs();
    let plan = PermutationPlan::sampled(25, 17).unwrap();
    let res = adamant(&x, &y, &metrics, &plan).unwrap();
    let perms = plan.generate(9).unwrap();
    for (m, (sx, sy)) in metrics.pairs().iter().enumerate() {
        let h = gram(&x, sx, GramPath::Auto).unwrap();
        let k = gram(&y, sy, GramPath::Auto).unwrap();
        for (bi, perm) in perms.iter().enumerate() {
            // Route 1: permute the Gram matrix and sum elementwise products
            // in storage order (the library's canonical accumulation order).
            let hp = permute_gram(&h, perm).unwrap();
            let t_gram: f64 = hp
                .values()
                .iter()
                .zip(k.values().iter())
                .map(|(a, b)| a * b)
                .sum();
            // Route 2: permute the rows of X and rebuild the Gram.
            let xp = DataMatrix::from_centered(DMatrix::from_fn(9, x.n_features(), |i, j| {
                x.values()[(perm[i], j)]
            }))
            .unwrap();
            let hp_data = gram(&xp, sx, GramPath::Auto).unwrap();
            let t_data: f64 = hp_data
                .values()
                .iter()
                .zip(k.values().iter())
                .map(|(a, b)| a * b)
                .sum();
            let table_t = res.stat_table[(bi + 1, m)];
            assert_eq!(table_t, t_gram);
            assert!((t_data - table_t).abs() <= 1e-10 * table_t.abs().max(1.0));
        }
    }
}

#[test]
fn null_univariate_generator_keeps_type_i_error() {
    // σ_b² = 0 makes y pure noise; the rejection rate at α = 0.05 must stay
    // inside the 99% binomial band for 400 replicates.
    let alpha = 0.05;
    let replicates = 400;
    let config = UnivariateSimConfig {
        n: 60,
        p: 10,
        model: UnivariateModel::Random { sigma_b2: 0.0 },
        sigma2: 1.0,
        design_rho: 0.1,
    };
    let metrics = ridge_grid_pairs();
    let rejections: usize = (0..replicates)
        .filter(|&r| {
            let x = gen_design(config.n, config.p, config.design_rho, 9000 + r as u64).unwrap();
            let y_raw = gen_univariate(&x, &config, 19000 + r as u64).unwrap();
            let y = DataMatrix::from_column(y_raw.iter().cloned().collect())
                .unwrap()
                .center_columns()
                .unwrap();
            let plan = PermutationPlan::sampled(99, 29000 + r as u64).unwrap();
            let res = adamant(&x, &y, &metrics, &plan).unwrap();
            res.adaptive_p <= alpha
        })
        .count();
    let rate = rejections as f64 / replicates as f64;
    assert!(
        (0.023..=0.083).contains(&rate),
        "null rejection rate {rate} outside [0.023, 0.083]"
    );
}

#[test]
fn null_eeg_generator_keeps_type_i_error() {
    // σ_g² = 0 severs the SNP → mixing-weight link; testing SNPs against
    // coherence features through the full pipeline must stay calibrated.
    let alpha = 0.05;
    let replicates = 400;
    let config = EegGeneticsConfig {
        n: 30,
        p: 20,
        q: 4,
        n_trials: 5,
        series_length: 256,
        burn_in: 100,
        weight_scheme: WeightScheme::vc(0.0),
        ..Default::default()
    };
    let band = BandSpec::named("theta").unwrap();
    let metrics = MetricPairList::new(vec![
        (KernelSpec::Linear, KernelSpec::Linear),
        (KernelSpec::Ridge(10.0), KernelSpec::Ridge(10.0)),
    ])
    .unwrap();
    let rejections: usize = (0..replicates)
        .filter(|&r| {
            let x = gen_snp_groups(&config, 41000 + r as u64).unwrap();
            let generator = EegGenerator::new(config, &x, 51000 + r as u64).unwrap();
            let features: Vec<Vec<f64>> = (0..config.n)
                .map(|i| {
                    let trials = generator.subject_trials(i);
                    let bc = band_coherence(&trials, &band).unwrap();
                    vectorize_upper(&bc.coherence)
                })
                .collect();
            let q = features[0].len();
            let y = DataMatrix::from_raw(DMatrix::from_fn(config.n, q, |i, j| features[i][j]))
                .unwrap()
                .center_columns()
                .unwrap();
            let plan = PermutationPlan::sampled(99, 61000 + r as u64).unwrap();
            let res = adamant(&x, &y, &metrics, &plan).unwrap();
            res.adaptive_p <= alpha
        })
        .count();
    let rate = rejections as f64 / replicates as f64;
    assert!(
        (0.023..=0.083).contains(&rate),
        "null EEG rejection rate {rate} outside [0.023, 0.083]"
    );
}
