//! The `power` subcommand: replicate a generator + adaptive test loop and
//! tabulate rejection rates for AdaMant and each single-kernel Mantel test.

use std::fs;
use std::path::PathBuf;

use adamant_core::adamant::{adamant, MetricPairList, PermutationPlan};
use adamant_core::simgen::{
    gen_design, gen_multivariate_vc, gen_univariate, MultivariateVcConfig, UnivariateModel,
    UnivariateSimConfig,
};
use adamant_core::DataMatrix;
use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;

use crate::commands::sub_seed;
use crate::io::format_f64;
use crate::tokens::{format_lambda, parse_lambda_grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PowerDesign {
    UnivariateRandom,
    UnivariateFixed,
    Mvvc,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long, value_enum)]
    pub design: PowerDesign,
    #[arg(long)]
    pub replicates: usize,
    /// Comma-separated effect sizes: σ_b² (univariate-random), β magnitude
    /// (univariate-fixed), or σ_A² (mvvc).
    #[arg(long)]
    pub effect_sizes: String,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 40)]
    pub p: usize,
    #[arg(long, default_value_t = 20)]
    pub q: usize,
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 0.1)]
    pub offdiag_factor: f64,
    #[arg(long, default_value = "10,100,inf")]
    pub lambda_x: String,
    #[arg(long, default_value = "10,100,500,1000,inf")]
    pub lambda_y: String,
    #[arg(long, default_value_t = 500)]
    pub permutations: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Per-replicate rejection indicators for one method at one effect size.
#[derive(Debug, Clone)]
pub struct MethodPower {
    pub method: String,
    pub rejections: Vec<bool>,
}

impl MethodPower {
    pub fn power(&self) -> f64 {
        self.rejections.iter().filter(|&&r| r).count() as f64 / self.rejections.len() as f64
    }

    pub fn mc_se(&self) -> f64 {
        let pw = self.power();
        (pw * (1.0 - pw) / self.rejections.len() as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct EffectOutcome {
    pub effect_size: f64,
    /// AdaMant first, then one entry per kernel pair.
    pub methods: Vec<MethodPower>,
}

pub fn run(args: &PowerArgs) -> Result<Vec<EffectOutcome>> {
    if args.replicates == 0 {
        bail!("power study needs at least one replicate");
    }
    if !(0.0 < args.alpha && args.alpha < 1.0) {
        bail!("alpha must lie in (0, 1)");
    }
    let effect_sizes: Vec<f64> = args
        .effect_sizes
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| anyhow::anyhow!("bad effect size {s:?}")))
        .collect::<Result<_>>()?;
    if effect_sizes.is_empty() {
        bail!("no effect sizes given");
    }
    let lambda_x = parse_lambda_grid(&args.lambda_x)?;
    let lambda_y = if matches!(args.design, PowerDesign::Mvvc) {
        parse_lambda_grid(&args.lambda_y)?
    } else {
        // Univariate outcomes: K = yy^T, the linear kernel.
        vec![adamant_core::KernelSpec::Linear]
    };
    let metrics = MetricPairList::cross_product(&lambda_x, &lambda_y)?;

    let outcomes = effect_sizes
        .iter()
        .enumerate()
        .map(|(ei, &effect)| run_effect(args, &metrics, ei, effect))
        .collect::<Result<Vec<_>>>()?;

    write_table(args, &outcomes)?;
    Ok(outcomes)
}

fn run_effect(
    args: &PowerArgs,
    metrics: &MetricPairList,
    effect_index: usize,
    effect: f64,
) -> Result<EffectOutcome> {
    let per_replicate: Vec<(bool, Vec<bool>)> = (0..args.replicates)
        .into_par_iter()
        .map(|r| replicate_rejections(args, metrics, effect_index as u64, effect, r as u64))
        .collect::<Result<_>>()?;

    let mut methods = Vec::with_capacity(metrics.len() + 1);
    methods.push(MethodPower {
        method: "adamant".to_string(),
        rejections: per_replicate.iter().map(|(a, _)| *a).collect(),
    });
    for (m, (sx, sy)) in metrics.pairs().iter().enumerate() {
        methods.push(MethodPower {
            method: format!("single:{}:{}", format_lambda(sx), format_lambda(sy)),
            rejections: per_replicate.iter().map(|(_, per)| per[m]).collect(),
        });
    }
    Ok(EffectOutcome {
        effect_size: effect,
        methods,
    })
}

fn replicate_rejections(
    args: &PowerArgs,
    metrics: &MetricPairList,
    effect_index: u64,
    effect: f64,
    replicate: u64,
) -> Result<(bool, Vec<bool>)> {
    let x_seed = sub_seed(args.seed, &[3, effect_index, replicate, 0]);
    let y_seed = sub_seed(args.seed, &[3, effect_index, replicate, 1]);
    let plan_seed = sub_seed(args.seed, &[3, effect_index, replicate, 2]);

    let x = gen_design(args.n, args.p, args.rho, x_seed)?;
    let y: DataMatrix = match args.design {
        PowerDesign::UnivariateRandom | PowerDesign::UnivariateFixed => {
            let model = if matches!(args.design, PowerDesign::UnivariateRandom) {
                UnivariateModel::Random { sigma_b2: effect }
            } else {
                UnivariateModel::Fixed {
                    beta_magnitude: effect,
                }
            };
            let config = UnivariateSimConfig {
                n: args.n,
                p: args.p,
                model,
                sigma2: args.sigma2,
                design_rho: args.rho,
            };
            let y = gen_univariate(&x, &config, y_seed)?;
            DataMatrix::from_column(y.iter().copied().collect())?.center_columns()?
        }
        PowerDesign::Mvvc => {
            let config = MultivariateVcConfig {
                n: args.n,
                p: args.p,
                q: args.q,
                sigma_a2: effect,
                offdiag_factor: args.offdiag_factor,
            };
            gen_multivariate_vc(&x, &config, y_seed)?.center_columns()?
        }
    };

    let plan = PermutationPlan::sampled(args.permutations, plan_seed)?;
    let result = adamant(&x, &y, metrics, &plan)?;
    let per_pair = result.per_metric_p.iter().map(|&p| p <= args.alpha).collect();
    Ok((result.adaptive_p <= args.alpha, per_pair))
}

fn write_table(args: &PowerArgs, outcomes: &[EffectOutcome]) -> Result<()> {
    let mut out = String::from("effect_size,method,power,replicates,mc_se\n");
    for outcome in outcomes {
        for method in &outcome.methods {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                format_f64(outcome.effect_size),
                method.method,
                format_f64(method.power()),
                method.rejections.len(),
                format_f64(method.mc_se()),
            ));
        }
    }
    fs::write(&args.out, out).with_context(|| format!("cannot write {}", args.out.display()))?;
    Ok(())
}
