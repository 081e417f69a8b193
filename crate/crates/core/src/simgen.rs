//! Seeded generators for every synthetic design used in the power and
//! calibration studies.
//!
//! All generators draw from ChaCha8 streams: a fixed seed gives bit-identical
//! output, and per-subject work uses the stream feature so subjects can be
//! generated independently (and in parallel) without changing results. Draw
//! orders are fixed and documented per generator.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, StandardNormal};
use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kernels::svd_thin_default;
use crate::spectral::TrialEpoch;

/// Outcome model for the univariate designs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnivariateModel {
    /// y = Xβ + ε with alternating-sign coefficients β_j = (−1)^j·magnitude.
    Fixed { beta_magnitude: f64 },
    /// y = Xb + ε with b_j iid N(0, σ_b²).
    Random { sigma_b2: f64 },
}

/// Configuration of the univariate (q = 1) simulation designs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnivariateSimConfig {
    pub n: usize,
    pub p: usize,
    pub model: UnivariateModel,
    /// Error variance σ².
    pub sigma2: f64,
    /// Compound-symmetry correlation of the design covariance.
    pub design_rho: f64,
}

/// Configuration of the multivariate variance-components design:
/// vec(Y) ~ N(0, Σ_A ⊗ XX^T/p + I_q ⊗ I_n) with compound-symmetric Σ_A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultivariateVcConfig {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    /// Diagonal of Σ_A.
    pub sigma_a2: f64,
    /// Off-diagonal entries of Σ_A as a fraction of σ_A².
    pub offdiag_factor: f64,
}

impl MultivariateVcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigma_a2 < 0.0 {
            return Err(Error::InvalidParameter("sigma_a2 must be nonnegative".into()));
        }
        if !(0.0..=1.0).contains(&self.offdiag_factor) {
            return Err(Error::InvalidParameter(
                "offdiag_factor must lie in [0, 1] for a PSD Sigma_A".into(),
            ));
        }
        Ok(())
    }
}

/// How the AR-mixture weights of the genetically affected channels are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    /// Group-level scaled Bernoulli weights plus a per-subject log-normal
    /// perturbation; within-group similarity scales with `w_scale`.
    Bernoulli {
        w_scale: f64,
        bern_p: f64,
        mu_omega: f64,
        sigma_omega: f64,
    },
    /// Variance-components weights W ~ N(0, σ_g² XX^T) shared across the
    /// full sample.
    Vc { sigma_g2: f64 },
}

impl WeightScheme {
    pub fn bernoulli_default() -> Self {
        WeightScheme::Bernoulli {
            w_scale: 1.0,
            bern_p: 0.1,
            mu_omega: 0.5,
            sigma_omega: 0.5,
        }
    }

    pub fn vc(sigma_g2: f64) -> Self {
        WeightScheme::Vc { sigma_g2 }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            WeightScheme::Bernoulli { bern_p, sigma_omega, .. } => {
                if !(0.0..=1.0).contains(&bern_p) {
                    return Err(Error::InvalidParameter("bern_p must lie in [0, 1]".into()));
                }
                if sigma_omega < 0.0 {
                    return Err(Error::InvalidParameter("sigma_omega must be nonnegative".into()));
                }
                Ok(())
            }
            WeightScheme::Vc { sigma_g2 } => {
                if sigma_g2 < 0.0 {
                    return Err(Error::InvalidParameter("sigma_g2 must be nonnegative".into()));
                }
                Ok(())
            }
        }
    }
}

/// Configuration of the two-group SNP + AR(2)-mixture EEG design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EegGeneticsConfig {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub peaks_hz: (f64, f64),
    /// Second AR coefficient φ₂; the modulus of the characteristic roots is √(−φ₂).
    pub ar2_coef2: f64,
    pub sample_rate_hz: f64,
    pub series_length: usize,
    /// Samples discarded before each retained series (near-unit-root transient).
    pub burn_in: usize,
    pub n_trials: usize,
    /// Standard deviation of the subject-specific SNP noise (test hook).
    pub snp_noise_sd: f64,
    pub weight_scheme: WeightScheme,
}

impl Default for EegGeneticsConfig {
    fn default() -> Self {
        Self {
            n: 200,
            p: 300,
            q: 20,
            peaks_hz: (5.12, 12.8),
            ar2_coef2: -0.99,
            sample_rate_hz: 256.0,
            series_length: 1000,
            burn_in: 500,
            n_trials: 100,
            snp_noise_sd: 1.0,
            weight_scheme: WeightScheme::bernoulli_default(),
        }
    }
}

impl EegGeneticsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n % 2 != 0 {
            return Err(Error::InvalidParameter(
                "n must be even (two balanced groups)".into(),
            ));
        }
        if self.q < 2 {
            return Err(Error::InvalidParameter("need at least two channels".into()));
        }
        if self.ar2_coef2.abs() >= 1.0 {
            return Err(Error::InvalidParameter(
                "|ar2_coef2| must be below 1 for stationarity".into(),
            ));
        }
        let nyquist = self.sample_rate_hz / 2.0;
        if self.peaks_hz.0 >= nyquist || self.peaks_hz.1 >= nyquist {
            return Err(Error::InvalidParameter(
                "spectral peaks must lie below the Nyquist frequency".into(),
            ));
        }
        if self.series_length < 2 {
            return Err(Error::InvalidParameter("series length must be at least 2".into()));
        }
        self.weight_scheme.validate()
    }

    /// Channels with no genetic effect: the first half.
    fn n_unaffected(&self) -> usize {
        self.q / 2
    }
}

/// Configuration of the rotated-kernel illustration (n = 100, p = 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationDemoConfig {
    pub theta: f64,
    pub sigma_b2: f64,
    pub sigma2: f64,
}

pub const ROTATION_DEMO_N: usize = 100;
pub const ROTATION_DEMO_P: usize = 2;

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Design matrix with rows iid N(0, Σ_X), Σ_X compound symmetric(1, ρ),
/// column-centered afterwards.
///
/// Draw order: one row at a time, p standard normals per row; the
/// compound-symmetric square root is applied in closed form.
pub fn gen_design(n: usize, p: usize, rho: f64, seed: u64) -> Result<DataMatrix> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!(
            "design correlation must lie in [0, 1), got {rho}"
        )));
    }
    if n < 2 || p == 0 {
        return Err(Error::InsufficientObservations { needed: 2, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Σ^{1/2} = a·I + c·11^T with eigenvalues √(1−ρ) and √(1+(p−1)ρ).
    let a = (1.0 - rho).sqrt();
    let c = ((1.0 + (p as f64 - 1.0) * rho).sqrt() - a) / p as f64;
    let mut values = DMatrix::zeros(n, p);
    let mut z = vec![0.0; p];
    for i in 0..n {
        for zj in z.iter_mut() {
            *zj = standard_normal(&mut rng);
        }
        let zsum: f64 = z.iter().sum();
        for j in 0..p {
            values[(i, j)] = a * z[j] + c * zsum;
        }
    }
    DataMatrix::from_raw(values)?.center_columns()
}

/// Univariate outcome under the fixed- or random-effects model.
///
/// Draw order: coefficients first (random model only, p draws), then the n
/// error draws. The returned vector is raw; center before testing.
pub fn gen_univariate(x: &DataMatrix, config: &UnivariateSimConfig, seed: u64) -> Result<DVector<f64>> {
    if x.n_observations() != config.n || x.n_features() != config.p {
        return Err(Error::DimensionMismatch {
            context: "design matrix shape must match the config",
            expected: config.n,
            got: x.n_observations(),
        });
    }
    if config.sigma2 < 0.0 {
        return Err(Error::InvalidParameter("sigma2 must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: DVector<f64> = match config.model {
        UnivariateModel::Fixed { beta_magnitude } => DVector::from_fn(config.p, |j, _| {
            // β_j = (−1)^j·magnitude with 1-based j: odd positions negative.
            if (j + 1) % 2 == 1 {
                -beta_magnitude
            } else {
                beta_magnitude
            }
        }),
        UnivariateModel::Random { sigma_b2 } => {
            if sigma_b2 < 0.0 {
                return Err(Error::InvalidParameter("sigma_b2 must be nonnegative".into()));
            }
            let sd = sigma_b2.sqrt();
            DVector::from_iterator(
                config.p,
                (0..config.p).map(|_| sd * standard_normal(&mut rng)),
            )
        }
    };
    let mut y = x.values() * coeffs;
    let noise_sd = config.sigma2.sqrt();
    for v in y.iter_mut() {
        *v += noise_sd * standard_normal(&mut rng);
    }
    Ok(y)
}

/// Square root of the compound-symmetric matrix s²[(1−f)I + f·11^T] applied
/// on the right of a matrix, in closed form.
fn apply_cs_sqrt_right(m: &DMatrix<f64>, s2: f64, f: f64) -> DMatrix<f64> {
    let q = m.ncols();
    let s = s2.sqrt();
    let a = s * (1.0 - f).sqrt();
    let c = (s * (1.0 + (q as f64 - 1.0) * f).sqrt() - a) / q as f64;
    let row_sums: Vec<f64> = (0..m.nrows()).map(|i| m.row(i).sum()).collect();
    DMatrix::from_fn(m.nrows(), q, |i, j| a * m[(i, j)] + c * row_sums[i])
}

/// Multivariate outcome Y = G + ε with matrix-normal G (row covariance
/// XX^T/p, column covariance Σ_A) and iid standard normal ε.
///
/// Draw order: the p×q coefficient block column by column, then the n×q error
/// block column by column. The returned matrix is raw; center before testing.
pub fn gen_multivariate_vc(
    x: &DataMatrix,
    config: &MultivariateVcConfig,
    seed: u64,
) -> Result<DataMatrix> {
    config.validate()?;
    if x.n_observations() != config.n || x.n_features() != config.p {
        return Err(Error::DimensionMismatch {
            context: "design matrix shape must match the config",
            expected: config.n,
            got: x.n_observations(),
        });
    }
    let (p, q) = (config.p, config.q);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DMatrix::from_iterator(p, q, (0..p * q).map(|_| standard_normal(&mut rng)));
    // G = X · (B Σ_A^{1/2}) / √p has vec-covariance Σ_A ⊗ XX^T/p.
    let scaled = apply_cs_sqrt_right(&b, config.sigma_a2, config.offdiag_factor) / (p as f64).sqrt();
    let mut y = x.values() * scaled;
    for v in y.iter_mut() {
        *v += standard_normal(&mut rng);
    }
    DataMatrix::from_raw(y)
}

/// Two balanced groups of SNP rows: a shared group vector sampled uniformly
/// from {−1, 0, 1} plus per-subject N(0, noise²) noise, column-centered.
///
/// Subjects 0..n/2 form group 0, the rest group 1. Draw order: the two group
/// vectors, then each subject's noise row.
pub fn gen_snp_groups(config: &EegGeneticsConfig, seed: u64) -> Result<DataMatrix> {
    config.validate()?;
    let (n, p) = (config.n, config.p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups = [vec![0.0; p], vec![0.0; p]];
    for g in groups.iter_mut() {
        for v in g.iter_mut() {
            *v = rng.gen_range(-1..=1) as f64;
        }
    }
    let mut values = DMatrix::zeros(n, p);
    for i in 0..n {
        let g = &groups[usize::from(i >= n / 2)];
        for j in 0..p {
            values[(i, j)] = g[j] + config.snp_noise_sd * standard_normal(&mut rng);
        }
    }
    DataMatrix::from_raw(values)?.center_columns()
}

/// AR(2) coefficients with conjugate roots of modulus √(−coef2) at the peak
/// frequency: φ₁ = 2√(−φ₂)·cos(2π f₀/rate), φ₂ = coef2.
pub fn ar2_coefficients(peak_hz: f64, sample_rate_hz: f64, coef2: f64) -> (f64, f64) {
    let r = (-coef2).sqrt();
    let phi1 = 2.0 * r * (2.0 * std::f64::consts::PI * peak_hz / sample_rate_hz).cos();
    (phi1, coef2)
}

/// Simulates an AR(2) series with standard normal innovations, discarding
/// `burn_in` initial samples.
pub fn simulate_ar2(phi1: f64, phi2: f64, len: usize, burn_in: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let total = burn_in + len;
    let mut out = Vec::with_capacity(total);
    let (mut prev1, mut prev2) = (0.0, 0.0);
    for _ in 0..total {
        let next = phi1 * prev1 + phi2 * prev2 + standard_normal(rng);
        prev2 = prev1;
        prev1 = next;
        out.push(next);
    }
    out.split_off(burn_in)
}

/// The simulated EEG study: per-subject trials plus the mixing weights that
/// produced them.
#[derive(Debug, Clone)]
pub struct EegSimulation {
    /// `subjects[i][t]` is trial t of subject i.
    pub subjects: Vec<Vec<TrialEpoch>>,
    /// Final (normalized) mixing weights: `weights[i][j] = [w₁, w₂]`.
    pub mixing_weights: Vec<Vec<[f64; 2]>>,
}

/// Streaming generator for the AR(2)-mixture EEG design.
///
/// Mixing weights are drawn once at construction (the global stream); each
/// subject's latent series come from the subject's own stream, so subjects
/// can be materialized in any order — or in parallel — without changing
/// values. At the default configuration the full data set is ~3 GB, so
/// prefer per-subject materialization over [`gen_ar2_mixture_eeg`].
pub struct EegGenerator {
    config: EegGeneticsConfig,
    weights: Vec<Vec<[f64; 2]>>,
    seed: u64,
}

impl EegGenerator {
    /// Draws the mixing weights. Order: first the unaffected channels
    /// (channel-major, two N(0,1) per subject), then the affected channels
    /// per scheme, then square-and-normalize.
    pub fn new(config: EegGeneticsConfig, x: &DataMatrix, seed: u64) -> Result<Self> {
        config.validate()?;
        if x.n_observations() != config.n || x.n_features() != config.p {
            return Err(Error::DimensionMismatch {
                context: "SNP matrix shape must match the config",
                expected: config.n,
                got: x.n_observations(),
            });
        }
        let (n, q) = (config.n, config.q);
        let unaffected = config.n_unaffected();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut raw = vec![vec![[0.0f64; 2]; q]; n];

        for j in 0..unaffected {
            for subject in raw.iter_mut() {
                for m in 0..2 {
                    subject[j][m] = standard_normal(&mut rng);
                }
            }
        }

        match config.weight_scheme {
            WeightScheme::Bernoulli {
                w_scale,
                bern_p,
                mu_omega,
                sigma_omega,
            } => {
                // Group-level weights first, then per-subject perturbations.
                let mut group_weights = vec![[[0.0f64; 2]; 2]; q]; // [channel][group][component]
                for k in 0..2 {
                    for gw in group_weights.iter_mut().take(q).skip(unaffected) {
                        for m in 0..2 {
                            let hit = rng.gen_bool(bern_p);
                            gw[k][m] = w_scale * f64::from(u8::from(hit));
                        }
                    }
                }
                let log_normal = LogNormal::new(mu_omega, sigma_omega)
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                for (i, subject) in raw.iter_mut().enumerate() {
                    let k = usize::from(i >= n / 2);
                    for j in unaffected..q {
                        for m in 0..2 {
                            subject[j][m] = group_weights[j][k][m] + rng.sample(log_normal);
                        }
                    }
                }
            }
            WeightScheme::Vc { sigma_g2 } => {
                let sd = sigma_g2.sqrt();
                for j in unaffected..q {
                    for m in 0..2 {
                        let v = DVector::from_iterator(
                            config.p,
                            (0..config.p).map(|_| standard_normal(&mut rng)),
                        );
                        let w = x.values() * v * sd;
                        for (i, subject) in raw.iter_mut().enumerate() {
                            subject[j][m] = w[i];
                        }
                    }
                }
            }
        }

        // Square and normalize to the simplex; an all-zero pair (σ_g² = 0)
        // degenerates to uniform mixing.
        for subject in raw.iter_mut() {
            for pair in subject.iter_mut() {
                let (s1, s2) = (pair[0] * pair[0], pair[1] * pair[1]);
                let total = s1 + s2;
                *pair = if total > 0.0 {
                    [s1 / total, s2 / total]
                } else {
                    [0.5, 0.5]
                };
            }
        }

        Ok(Self {
            config,
            weights: raw,
            seed,
        })
    }

    pub fn mixing_weights(&self) -> &[Vec<[f64; 2]>] {
        &self.weights
    }

    pub fn config(&self) -> &EegGeneticsConfig {
        &self.config
    }

    /// All trials of one subject. Per trial, the two latent AR(2) series are
    /// drawn from the subject's stream (component 1 then component 2), and
    /// every channel mixes the same pair.
    pub fn subject_trials(&self, subject: usize) -> Vec<TrialEpoch> {
        let cfg = &self.config;
        let (phi1_a, phi2) = ar2_coefficients(cfg.peaks_hz.0, cfg.sample_rate_hz, cfg.ar2_coef2);
        let (phi1_b, _) = ar2_coefficients(cfg.peaks_hz.1, cfg.sample_rate_hz, cfg.ar2_coef2);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(subject as u64 + 1);
        let t = cfg.series_length;
        (0..cfg.n_trials)
            .map(|_| {
                let z1 = simulate_ar2(phi1_a, phi2, t, cfg.burn_in, &mut rng);
                let z2 = simulate_ar2(phi1_b, phi2, t, cfg.burn_in, &mut rng);
                let samples = DMatrix::from_fn(cfg.q, t, |ch, tt| {
                    let w = &self.weights[subject][ch];
                    w[0] * z1[tt] + w[1] * z2[tt]
                });
                TrialEpoch::new(samples, cfg.sample_rate_hz).expect("generated epoch is valid")
            })
            .collect()
    }
}

/// Materializes the whole EEG study at once. Prefer [`EegGenerator`] for
/// default-sized configurations.
pub fn gen_ar2_mixture_eeg(
    config: &EegGeneticsConfig,
    x: &DataMatrix,
    seed: u64,
) -> Result<EegSimulation> {
    let generator = EegGenerator::new(*config, x, seed)?;
    let subjects: Vec<Vec<TrialEpoch>> = (0..config.n)
        .into_par_iter()
        .map(|i| generator.subject_trials(i))
        .collect();
    Ok(EegSimulation {
        subjects,
        mixing_weights: generator.weights,
    })
}

/// The rotated rank-2 kernel K^(θ) = U Θ Δ² Θ^T U^T from the SVD of X.
pub fn rotation_kernel(x: &DataMatrix, theta: f64) -> Result<DMatrix<f64>> {
    let f = svd_thin_default(x)?;
    if f.rank() != 2 {
        return Err(Error::InvalidParameter(format!(
            "rotation kernel needs rank 2, got {}",
            f.rank()
        )));
    }
    let (c, s) = (theta.cos(), theta.sin());
    let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    let d2 = DMatrix::from_diagonal(&DVector::from_vec(vec![
        f.singular_values()[0] * f.singular_values()[0],
        f.singular_values()[1] * f.singular_values()[1],
    ]));
    let core = &rot * d2 * rot.transpose();
    Ok(f.u() * core * f.u().transpose())
}

/// The rotated-kernel demonstration: X is 100×2 iid standard normal
/// (centered) and y ~ N(0, σ_b² K^(θ) + σ² I).
///
/// Draw order: the design (column-major), then the 2-vector driving the
/// kernel component, then the 100 error draws.
pub fn gen_rotation_demo(config: &RotationDemoConfig, seed: u64) -> Result<(DataMatrix, DVector<f64>)> {
    if config.sigma_b2 < 0.0 || config.sigma2 < 0.0 {
        return Err(Error::InvalidParameter("variances must be nonnegative".into()));
    }
    let (n, p) = (ROTATION_DEMO_N, ROTATION_DEMO_P);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DataMatrix::from_raw(DMatrix::from_iterator(
        n,
        p,
        (0..n * p).map(|_| standard_normal(&mut rng)),
    ))?
    .center_columns()?;

    let f = svd_thin_default(&x)?;
    let (c, s) = (config.theta.cos(), config.theta.sin());
    let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    let delta = DMatrix::from_diagonal(&DVector::from_vec(vec![
        f.singular_values()[0],
        f.singular_values()[1],
    ]));
    // y = σ_b·UΘΔ z₁ + σ z₂ has covariance σ_b² K^(θ) + σ² I.
    let z1 = DVector::from_iterator(2, (0..2).map(|_| standard_normal(&mut rng)));
    let mut y = f.u() * (&rot * (&delta * z1)) * config.sigma_b2.sqrt();
    let noise_sd = config.sigma2.sqrt();
    for v in y.iter_mut() {
        *v += noise_sd * standard_normal(&mut rng);
    }
    Ok((x, y))
}
