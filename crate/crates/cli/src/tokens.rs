//! Penalty tokens and kernel-pair grids.
//!
//! "0" maps to the projection kernel, "inf" to the linear kernel, and any
//! finite positive number to a ridge kernel.

use adamant_core::adamant::MetricPairList;
use adamant_core::KernelSpec;
use anyhow::{bail, Result};

/// Parses one λ token.
pub fn parse_lambda(token: &str) -> Result<KernelSpec> {
    let trimmed = token.trim();
    let value: f64 = trimmed
        .parse()
        .map_err(|_| anyhow::anyhow!("bad penalty token {trimmed:?}"))?;
    if value == 0.0 {
        Ok(KernelSpec::Projection)
    } else if value == f64::INFINITY {
        Ok(KernelSpec::Linear)
    } else if value.is_finite() && value > 0.0 {
        Ok(KernelSpec::Ridge(value))
    } else {
        bail!("penalty must be 0, a positive number, or inf; got {trimmed:?}")
    }
}

/// Canonical token for a kernel spec ("0", "inf", or the penalty value).
pub fn format_lambda(spec: &KernelSpec) -> String {
    spec.label()
}

/// Parses a comma-separated λ grid.
pub fn parse_lambda_grid(tokens: &str) -> Result<Vec<KernelSpec>> {
    let specs: Vec<KernelSpec> = tokens
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_lambda)
        .collect::<Result<_>>()?;
    if specs.is_empty() {
        bail!("empty penalty grid");
    }
    Ok(specs)
}

/// Parses explicit pairs "lx:ly,lx:ly,...".
pub fn parse_pairs(tokens: &str) -> Result<Vec<(KernelSpec, KernelSpec)>> {
    let mut pairs = Vec::new();
    for item in tokens.split(',').filter(|s| !s.trim().is_empty()) {
        let Some((lx, ly)) = item.split_once(':') else {
            bail!("pair {item:?} must look like LAMBDA_X:LAMBDA_Y");
        };
        pairs.push((parse_lambda(lx)?, parse_lambda(ly)?));
    }
    if pairs.is_empty() {
        bail!("empty pair list");
    }
    Ok(pairs)
}

/// Builds the metric list: explicit pairs if given, otherwise the cross
/// product of the x grid (plus heritability-derived penalties) with the y grid.
pub fn build_metrics(
    lambda_x: &[KernelSpec],
    lambda_y: &[KernelSpec],
    heritability_grid: Option<&[f64]>,
    p_features: usize,
    explicit_pairs: Option<&[(KernelSpec, KernelSpec)]>,
) -> Result<MetricPairList> {
    if let Some(pairs) = explicit_pairs {
        return Ok(MetricPairList::new(pairs.to_vec())?);
    }
    let mut xs = lambda_x.to_vec();
    if let Some(h2) = heritability_grid {
        let derived = adamant_core::adamant::lambda_grid_from_heritability(p_features, h2)?;
        for lambda in derived {
            let spec = KernelSpec::Ridge(lambda);
            if !xs.contains(&spec) {
                xs.push(spec);
            }
        }
    }
    Ok(MetricPairList::cross_product(&xs, lambda_y)?)
}
