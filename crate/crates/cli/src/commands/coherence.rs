//! The `coherence` subcommand: per-subject epoch files → band-averaged
//! squared-coherence feature matrix, one CSV per band.

use std::fs;
use std::path::{Path, PathBuf};

use adamant_core::spectral::{band_coherence, vectorize_upper, BandSpec};
use anyhow::{bail, Context, Result};
use clap::Args;
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::io::{load_epochs, write_matrix};

#[derive(Debug, Args)]
pub struct CoherenceArgs {
    /// Directory of per-subject epoch CSVs (one file per subject).
    #[arg(long)]
    pub epochs_dir: PathBuf,
    /// Band as NAME:LOW:HIGH in Hz, or a named band (theta, alpha, beta,
    /// gamma). Repeatable.
    #[arg(long = "band", required = true)]
    pub bands: Vec<String>,
    #[arg(long, default_value_t = 256.0)]
    pub sample_rate: f64,
    /// Output CSV; with several bands the band name is inserted before the
    /// extension.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn parse_band(spec: &str) -> Result<BandSpec> {
    if let Some(band) = BandSpec::named(spec.trim()) {
        return Ok(band);
    }
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("band {spec:?} must be a named band or NAME:LOW:HIGH");
    }
    let low: f64 = parts[1].trim().parse().map_err(|_| anyhow::anyhow!("bad band low {:?}", parts[1]))?;
    let high: f64 = parts[2].trim().parse().map_err(|_| anyhow::anyhow!("bad band high {:?}", parts[2]))?;
    Ok(BandSpec::new(parts[0].trim(), low, high)?)
}

fn band_out_path(base: &Path, band: &BandSpec, multi: bool) -> PathBuf {
    if !multi {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_default();
    let ext = base.extension().map(|s| s.to_string_lossy().to_string()).unwrap_or_else(|| "csv".into());
    base.with_file_name(format!("{stem}.{}.{ext}", band.name))
}

pub fn run(args: &CoherenceArgs) -> Result<Vec<PathBuf>> {
    let bands: Vec<BandSpec> = args.bands.iter().map(|b| parse_band(b)).collect::<Result<_>>()?;
    let mut files: Vec<PathBuf> = fs::read_dir(&args.epochs_dir)
        .with_context(|| format!("cannot read {}", args.epochs_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "csv").unwrap_or(false))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .csv epoch files in {}", args.epochs_dir.display());
    }

    // Subject order is the sorted file order; recordings load in parallel.
    let recordings = files
        .par_iter()
        .map(|path| load_epochs(path, args.sample_rate))
        .collect::<Result<Vec<_>>>()?;
    let channel_ids = recordings[0].channel_ids.clone();
    let q = channel_ids.len();
    for (path, rec) in files.iter().zip(&recordings) {
        if rec.channel_ids != channel_ids {
            bail!(
                "{}: channel ids differ from the first subject",
                path.display()
            );
        }
        if rec.trials[0].n_samples() != recordings[0].trials[0].n_samples() {
            bail!("{}: trial length differs from the first subject", path.display());
        }
    }

    let mut names = Vec::with_capacity(q * (q - 1) / 2);
    for i in 0..q {
        for j in (i + 1)..q {
            names.push(format!("ch_{}:ch_{}", channel_ids[i], channel_ids[j]));
        }
    }

    let multi = bands.len() > 1;
    let mut written = Vec::new();
    for band in &bands {
        let rows = recordings
            .par_iter()
            .map(|rec| {
                let bc = band_coherence(&rec.trials, band)?;
                Ok((vectorize_upper(&bc.coherence), bc.degenerate_average))
            })
            .collect::<Result<Vec<_>, adamant_core::Error>>()?;
        if rows.iter().any(|(_, degenerate)| *degenerate) {
            eprintln!(
                "warning: band {:?} averages a single (trial, frequency) pair; \
                 coherence is identically 1 and carries no information",
                band.name
            );
        }
        let matrix = DMatrix::from_fn(rows.len(), names.len(), |i, j| rows[i].0[j]);
        let path = band_out_path(&args.out, band, multi);
        write_matrix(&path, &matrix, &names)?;
        written.push(path);
    }
    Ok(written)
}
