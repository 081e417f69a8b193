//! Strict CSV formats: feature matrices (header row, numeric cells) and
//! per-subject epoch files (trial id, channel id, then samples; no header).
//!
//! Numeric output is written with 17 significant digits, which round-trips
//! every f64 exactly.

use std::fs;
use std::path::Path;

use adamant_core::spectral::TrialEpoch;
use adamant_core::DataMatrix;
use anyhow::{bail, Context, Result};
use nalgebra::DMatrix;

/// 17-significant-digit decimal form (exact f64 round trip).
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Loads a rectangular numeric CSV with a header row of feature names.
/// Rows are observations. Errors carry the offending row/column.
pub fn load_matrix(path: &Path) -> Result<(DataMatrix, Vec<String>)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read matrix file {}", path.display()))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        bail!("{}: empty file", path.display());
    };
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let p = names.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != p {
            bail!(
                "{}: row {} has {} cells, expected {}",
                path.display(),
                lineno + 1,
                cells.len(),
                p
            );
        }
        let mut row = Vec::with_capacity(p);
        for (col, cell) in cells.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| {
                anyhow::anyhow!(
                    "{}: non-numeric cell at row {}, column {} ({:?})",
                    path.display(),
                    lineno + 1,
                    col + 1,
                    cell.trim()
                )
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    let n = rows.len();
    let values = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let matrix = DataMatrix::from_raw(values)
        .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    Ok((matrix, names))
}

/// Writes a matrix as CSV with the given header names.
pub fn write_matrix(path: &Path, values: &DMatrix<f64>, names: &[String]) -> Result<()> {
    assert_eq!(names.len(), values.ncols());
    let mut out = String::new();
    out.push_str(&names.join(","));
    out.push('\n');
    for i in 0..values.nrows() {
        let row: Vec<String> = (0..values.ncols())
            .map(|j| format_f64(values[(i, j)]))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Default feature names f1..fp for generated matrices.
pub fn default_names(prefix: &str, p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("{prefix}{j}")).collect()
}

/// One subject's recording parsed from an epoch file: sorted channel ids and
/// one Q×T epoch per trial.
pub struct SubjectRecording {
    pub channel_ids: Vec<u32>,
    pub trials: Vec<TrialEpoch>,
}

/// Reads a per-subject epoch CSV: each row is `trial,channel,s1,...,sT`
/// (no header). Channels must be consistent across trials.
pub fn load_epochs(path: &Path, sample_rate_hz: f64) -> Result<SubjectRecording> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read epoch file {}", path.display()))?;
    // (trial, channel) -> samples
    let mut rows: Vec<(u32, u32, Vec<f64>)> = Vec::new();
    let mut t_len: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() < 4 {
            bail!(
                "{}: row {} needs trial, channel, and at least two samples",
                path.display(),
                lineno + 1
            );
        }
        let trial: u32 = cells[0].trim().parse().map_err(|_| {
            anyhow::anyhow!("{}: bad trial id at row {}", path.display(), lineno + 1)
        })?;
        let channel: u32 = cells[1].trim().parse().map_err(|_| {
            anyhow::anyhow!("{}: bad channel id at row {}", path.display(), lineno + 1)
        })?;
        let samples: Vec<f64> = cells[2..]
            .iter()
            .enumerate()
            .map(|(k, c)| {
                c.trim().parse().map_err(|_| {
                    anyhow::anyhow!(
                        "{}: non-numeric sample at row {}, column {}",
                        path.display(),
                        lineno + 1,
                        k + 3
                    )
                })
            })
            .collect::<Result<_>>()?;
        match t_len {
            None => t_len = Some(samples.len()),
            Some(t) if t != samples.len() => bail!(
                "{}: row {} has {} samples, expected {}",
                path.display(),
                lineno + 1,
                samples.len(),
                t
            ),
            _ => {}
        }
        rows.push((trial, channel, samples));
    }
    if rows.is_empty() {
        bail!("{}: empty epoch file", path.display());
    }
    let t = t_len.unwrap();
    let mut trial_ids: Vec<u32> = rows.iter().map(|r| r.0).collect();
    trial_ids.sort_unstable();
    trial_ids.dedup();
    let mut channel_ids: Vec<u32> = rows.iter().map(|r| r.1).collect();
    channel_ids.sort_unstable();
    channel_ids.dedup();
    let q = channel_ids.len();

    let mut trials = Vec::with_capacity(trial_ids.len());
    for &trial in &trial_ids {
        let mut samples = DMatrix::zeros(q, t);
        let mut seen = vec![false; q];
        for (tr, ch, row) in rows.iter().filter(|r| r.0 == trial) {
            debug_assert_eq!(*tr, trial);
            let idx = channel_ids.binary_search(ch).unwrap();
            if seen[idx] {
                bail!(
                    "{}: duplicate channel {} in trial {}",
                    path.display(),
                    ch,
                    trial
                );
            }
            seen[idx] = true;
            for (j, &v) in row.iter().enumerate() {
                samples[(idx, j)] = v;
            }
        }
        if seen.iter().any(|s| !s) {
            bail!(
                "{}: trial {} is missing channels (expected {:?})",
                path.display(),
                trial,
                channel_ids
            );
        }
        trials.push(
            TrialEpoch::new(samples, sample_rate_hz)
                .map_err(|e| anyhow::anyhow!("{}: trial {}: {e}", path.display(), trial))?,
        );
    }
    Ok(SubjectRecording {
        channel_ids,
        trials,
    })
}

/// Writes a subject's trials in the epoch CSV layout (1-based ids).
pub fn write_epochs(path: &Path, trials: &[TrialEpoch]) -> Result<()> {
    let mut out = String::new();
    for (t_idx, trial) in trials.iter().enumerate() {
        for ch in 0..trial.n_channels() {
            out.push_str(&format!("{},{}", t_idx + 1, ch + 1));
            for j in 0..trial.n_samples() {
                out.push(',');
                out.push_str(&format_f64(trial.samples()[(ch, j)]));
            }
            out.push('\n');
        }
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}
