//! The `simulate` subcommand: write synthetic data sets to CSV.

use std::fs;
use std::path::PathBuf;

use adamant_core::simgen::{
    gen_design, gen_multivariate_vc, gen_rotation_demo, gen_snp_groups, gen_univariate,
    EegGenerator, EegGeneticsConfig, MultivariateVcConfig, RotationDemoConfig, UnivariateModel,
    UnivariateSimConfig, WeightScheme,
};
use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use nalgebra::DMatrix;

use crate::commands::sub_seed;
use crate::io::{default_names, write_epochs, write_matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Design {
    /// Univariate outcome from the random-effects model.
    UnivariateRandom,
    /// Univariate outcome from the alternating fixed-effects model.
    UnivariateFixed,
    /// Multivariate variance-components outcome.
    Mvvc,
    /// Two-group SNPs plus AR(2)-mixture EEG epochs.
    SnpEeg,
    /// The rotated rank-2 kernel illustration.
    Rotation,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub design: Design,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 40)]
    pub p: usize,
    #[arg(long, default_value_t = 20)]
    pub q: usize,
    /// Compound-symmetry correlation of the design matrix.
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    /// Error variance σ².
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Random-effects coefficient variance σ_b².
    #[arg(long, default_value_t = 0.001225)]
    pub sigma_b2: f64,
    /// Fixed-effects coefficient magnitude.
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,
    /// Variance-components scale σ_A².
    #[arg(long, default_value_t = 0.02)]
    pub sigma_a2: f64,
    /// Off-diagonal factor of Σ_A.
    #[arg(long, default_value_t = 0.1)]
    pub offdiag_factor: f64,
    /// EEG weight scheme: bernoulli or vc.
    #[arg(long, default_value = "bernoulli")]
    pub weight_scheme: String,
    /// σ_g² for the vc weight scheme.
    #[arg(long, default_value_t = 5e-6)]
    pub sigma_g2: f64,
    /// W_scale for the bernoulli weight scheme.
    #[arg(long, default_value_t = 1.0)]
    pub w_scale: f64,
    /// Trials per subject (snp-eeg design).
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Samples per trial (snp-eeg design).
    #[arg(long, default_value_t = 1000)]
    pub series_length: usize,
    #[arg(long, default_value_t = 256.0)]
    pub sample_rate: f64,
    /// Rotation angle θ in radians (rotation design).
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out_x: PathBuf,
    /// Outcome CSV (univariate, mvvc, rotation designs).
    #[arg(long)]
    pub out_y: Option<PathBuf>,
    /// Directory for per-subject epoch files (snp-eeg design).
    #[arg(long)]
    pub out_epochs: Option<PathBuf>,
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let x_seed = sub_seed(args.seed, &[1]);
    let y_seed = sub_seed(args.seed, &[2]);
    match args.design {
        Design::UnivariateRandom | Design::UnivariateFixed => {
            let out_y = require_y(args)?;
            let model = if args.design == Design::UnivariateRandom {
                UnivariateModel::Random {
                    sigma_b2: args.sigma_b2,
                }
            } else {
                UnivariateModel::Fixed {
                    beta_magnitude: args.beta,
                }
            };
            let config = UnivariateSimConfig {
                n: args.n,
                p: args.p,
                model,
                sigma2: args.sigma2,
                design_rho: args.rho,
            };
            let x = gen_design(args.n, args.p, args.rho, x_seed)?;
            let y = gen_univariate(&x, &config, y_seed)?;
            write_matrix(&args.out_x, x.values(), &default_names("x", args.p))?;
            let ym = DMatrix::from_column_slice(args.n, 1, y.as_slice());
            write_matrix(out_y, &ym, &["y".to_string()])?;
        }
        Design::Mvvc => {
            let out_y = require_y(args)?;
            let config = MultivariateVcConfig {
                n: args.n,
                p: args.p,
                q: args.q,
                sigma_a2: args.sigma_a2,
                offdiag_factor: args.offdiag_factor,
            };
            let x = gen_design(args.n, args.p, args.rho, x_seed)?;
            let y = gen_multivariate_vc(&x, &config, y_seed)?;
            write_matrix(&args.out_x, x.values(), &default_names("x", args.p))?;
            write_matrix(out_y, y.values(), &default_names("y", args.q))?;
        }
        Design::SnpEeg => {
            let Some(out_epochs) = &args.out_epochs else {
                bail!("--out-epochs is required for the snp-eeg design");
            };
            let scheme = match args.weight_scheme.as_str() {
                "bernoulli" => WeightScheme::Bernoulli {
                    w_scale: args.w_scale,
                    bern_p: 0.1,
                    mu_omega: 0.5,
                    sigma_omega: 0.5,
                },
                "vc" => WeightScheme::vc(args.sigma_g2),
                other => bail!("unknown weight scheme {other:?} (use bernoulli or vc)"),
            };
            let config = EegGeneticsConfig {
                n: args.n,
                p: args.p,
                q: args.q,
                n_trials: args.trials,
                series_length: args.series_length,
                sample_rate_hz: args.sample_rate,
                weight_scheme: scheme,
                ..Default::default()
            };
            let x = gen_snp_groups(&config, x_seed)?;
            write_matrix(&args.out_x, x.values(), &default_names("snp", args.p))?;
            fs::create_dir_all(out_epochs)
                .with_context(|| format!("cannot create {}", out_epochs.display()))?;
            let generator = EegGenerator::new(config, &x, y_seed)?;
            // One file per subject, generated and dropped in turn.
            let width = args.n.to_string().len().max(4);
            for i in 0..args.n {
                let trials = generator.subject_trials(i);
                let path = out_epochs.join(format!("subject_{:0width$}.csv", i + 1));
                write_epochs(&path, &trials)?;
            }
        }
        Design::Rotation => {
            let out_y = require_y(args)?;
            let config = RotationDemoConfig {
                theta: args.theta,
                sigma_b2: args.sigma_b2,
                sigma2: args.sigma2,
            };
            let (x, y) = gen_rotation_demo(&config, x_seed)?;
            write_matrix(&args.out_x, x.values(), &default_names("x", 2))?;
            let ym = DMatrix::from_column_slice(y.len(), 1, y.as_slice());
            write_matrix(out_y, &ym, &["y".to_string()])?;
        }
    }
    Ok(())
}

fn require_y(args: &SimulateArgs) -> Result<&PathBuf> {
    args.out_y
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("--out-y is required for this design"))
}
