//! Coherence feature extraction for multi-channel time series.
//!
//! Pipeline: per-trial DFT with 1/√T normalization → rank-one cross-spectral
//! matrices per frequency → arithmetic mean over in-band positive frequencies
//! and over trials → squared coherence r_mn = |S_mn|²/(S_mm S_nn) → vectorized
//! upper triangle. A plain periodogram is used throughout (no tapering), and
//! frequencies above the 45 Hz cutoff never enter a band.

use nalgebra::DMatrix;
use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Hard upper cutoff for band frequencies, in Hz.
pub const FREQUENCY_CUTOFF_HZ: f64 = 45.0;

/// One trial of a Q-channel recording: Q×T samples at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialEpoch {
    samples: DMatrix<f64>,
    sample_rate_hz: f64,
}

impl TrialEpoch {
    pub fn new(samples: DMatrix<f64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.ncols() < 2 {
            return Err(Error::InvalidParameter(
                "epoch needs at least two time points".into(),
            ));
        }
        if samples.nrows() == 0 {
            return Err(Error::InvalidParameter("epoch needs at least one channel".into()));
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::InvalidParameter("sample rate must be positive".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("epoch contains non-finite samples".into()));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    /// Q×T matrix: one row per channel.
    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn n_channels(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.ncols()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }
}

/// What frequency content a [`SpectralMatrix`] summarizes.
#[derive(Debug, Clone, PartialEq)]
pub enum FrequencyLabel {
    /// A single standardized frequency ω_j = j/T.
    Standardized(f64),
    /// A band average.
    Band(String),
}

/// A Q×Q Hermitian cross-spectral matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMatrix {
    pub values: DMatrix<Complex<f64>>,
    pub frequency_label: FrequencyLabel,
}

impl SpectralMatrix {
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }
}

/// A named frequency band [low, high) in Hz.
///
/// `high` may exceed the 45 Hz cutoff (the published gamma band does); bins
/// above the cutoff are simply never selected.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpec {
    pub name: String,
    pub low_hz: f64,
    pub high_hz: f64,
}

impl BandSpec {
    pub fn new(name: impl Into<String>, low_hz: f64, high_hz: f64) -> Result<Self> {
        if !(low_hz > 0.0 && low_hz < high_hz) {
            return Err(Error::InvalidParameter(format!(
                "band must satisfy 0 < low < high, got [{low_hz}, {high_hz})"
            )));
        }
        if low_hz >= FREQUENCY_CUTOFF_HZ {
            return Err(Error::InvalidParameter(format!(
                "band starts at {low_hz} Hz, above the {FREQUENCY_CUTOFF_HZ} Hz cutoff"
            )));
        }
        Ok(Self {
            name: name.into(),
            low_hz,
            high_hz,
        })
    }

    /// The four conventional EEG bands; gamma is clipped by the cutoff.
    pub fn named(name: &str) -> Option<Self> {
        let (low, high) = match name {
            "theta" => (4.0, 8.0),
            "alpha" => (8.0, 12.0),
            "beta" => (12.0, 30.0),
            "gamma" => (30.0, 50.0),
            _ => return None,
        };
        Some(Self::new(name, low, high).expect("named bands are valid"))
    }

    fn contains_hz(&self, hz: f64) -> bool {
        hz >= self.low_hz && hz < self.high_hz && hz <= FREQUENCY_CUTOFF_HZ
    }
}

/// A Q×Q matrix of band-averaged squared coherences in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMatrix {
    values: DMatrix<f64>,
}

impl CoherenceMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }
}

/// Per-channel DFT coefficients d_q(ω_j) = T^{-1/2} Σ_{t=1..T} x_q(t) e^{-2πi ω_j t},
/// for j = 0..T−1; rows are channels, columns frequencies.
///
/// The sum starts at t = 1, so bin j of the standard FFT picks up the extra
/// phase e^{-2πi j/T}.
pub fn dft(epoch: &TrialEpoch) -> DMatrix<Complex<f64>> {
    let q = epoch.n_channels();
    let t = epoch.n_samples();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(t);
    let norm = 1.0 / (t as f64).sqrt();
    let mut out = DMatrix::zeros(q, t);
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(t);
    for ch in 0..q {
        buf.clear();
        buf.extend(epoch.samples().row(ch).iter().map(|&v| Complex::new(v, 0.0)));
        fft.process(&mut buf);
        for (j, &c) in buf.iter().enumerate() {
            let phase = Complex::from_polar(1.0, -2.0 * std::f64::consts::PI * j as f64 / t as f64);
            out[(ch, j)] = c * phase * norm;
        }
    }
    out
}

/// Cross-spectral matrices S(ω_j)[m][n] = d_m(ω_j)·conj(d_n(ω_j)) for every
/// DFT frequency; each single-frequency matrix is Hermitian of rank one.
pub fn cross_spectra(epoch: &TrialEpoch) -> Vec<SpectralMatrix> {
    let coeffs = dft(epoch);
    let q = epoch.n_channels();
    let t = epoch.n_samples();
    (0..t)
        .map(|j| {
            let d = coeffs.column(j);
            let values = DMatrix::from_fn(q, q, |m, n| d[m] * d[n].conj());
            SpectralMatrix {
                values,
                frequency_label: FrequencyLabel::Standardized(j as f64 / t as f64),
            }
        })
        .collect()
}

/// DFT bin indices whose frequency falls inside the band.
///
/// Only positive frequencies 0 < ω_j ≤ 1/2 are candidates (the DC bin and the
/// redundant conjugate half are excluded); the bin must satisfy
/// low ≤ ω_j·rate < high and ω_j·rate ≤ 45 Hz.
pub fn in_band_bins(t: usize, sample_rate_hz: f64, band: &BandSpec) -> Vec<usize> {
    (1..=t / 2)
        .filter(|&j| {
            let omega = j as f64 / t as f64;
            band.contains_hz(omega * sample_rate_hz)
        })
        .collect()
}

/// Arithmetic mean of per-trial cross-spectral matrices over the in-band
/// positive frequencies, then over trials.
///
/// Trials are lists of per-frequency matrices as produced by
/// [`cross_spectra`]; all trials must share Q and T. Both averages are means
/// over a fixed index set, so their order is interchangeable; summation runs
/// trial-ascending then frequency-ascending for reproducibility.
pub fn band_trial_average(
    spectra_per_trial: &[Vec<SpectralMatrix>],
    band: &BandSpec,
    sample_rate_hz: f64,
) -> Result<SpectralMatrix> {
    if spectra_per_trial.is_empty() {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let t = spectra_per_trial[0].len();
    let q = spectra_per_trial[0][0].dim();
    let bins = in_band_bins(t, sample_rate_hz, band);
    if bins.is_empty() {
        return Err(Error::BandUnresolved(band.name.clone()));
    }
    let mut sum: DMatrix<Complex<f64>> = DMatrix::zeros(q, q);
    for trial in spectra_per_trial {
        if trial.len() != t || trial.iter().any(|s| s.dim() != q) {
            return Err(Error::DimensionMismatch {
                context: "all trials must share channel count and length",
                expected: t,
                got: trial.len(),
            });
        }
        for &j in &bins {
            sum += &trial[j].values;
        }
    }
    let count = (bins.len() * spectra_per_trial.len()) as f64;
    Ok(SpectralMatrix {
        values: sum / Complex::new(count, 0.0),
        frequency_label: FrequencyLabel::Band(band.name.clone()),
    })
}

/// Squared coherence r_mn = |S_mn|²/(S_mm·S_nn); the diagonal is exactly 1.
pub fn coherence(s: &SpectralMatrix) -> Result<CoherenceMatrix> {
    let q = s.dim();
    let power: Vec<f64> = (0..q).map(|m| s.values[(m, m)].re).collect();
    for (m, &p) in power.iter().enumerate() {
        if !(p > 0.0) {
            return Err(Error::ZeroPowerChannel(m));
        }
    }
    let values = DMatrix::from_fn(q, q, |m, n| {
        if m == n {
            1.0
        } else {
            s.values[(m, n)].norm_sqr() / (power[m] * power[n])
        }
    });
    Ok(CoherenceMatrix { values })
}

/// Row-major upper triangle excluding the diagonal: Q(Q−1)/2 features.
pub fn vectorize_upper(coh: &CoherenceMatrix) -> Vec<f64> {
    let q = coh.dim();
    let mut out = Vec::with_capacity(q * (q - 1) / 2);
    for i in 0..q {
        for j in (i + 1)..q {
            out.push(coh.values()[(i, j)]);
        }
    }
    out
}

/// Band coherence of one subject's trials, with averaging diagnostics.
#[derive(Debug, Clone)]
pub struct BandCoherence {
    pub band: BandSpec,
    pub spectral: SpectralMatrix,
    pub coherence: CoherenceMatrix,
    /// Number of (trial, frequency-bin) pairs averaged.
    pub averaged_count: usize,
    /// A single averaged pair makes every off-diagonal coherence identically
    /// one (the spectral matrix is rank one); such output is meaningless.
    pub degenerate_average: bool,
}

/// Full per-subject pipeline for one band: DFT → in-band accumulation →
/// trial average → coherence.
///
/// Mathematically identical to [`cross_spectra`] + [`band_trial_average`] +
/// [`coherence`], but only in-band bins are accumulated, keeping memory flat
/// across long epochs.
pub fn band_coherence(trials: &[TrialEpoch], band: &BandSpec) -> Result<BandCoherence> {
    if trials.is_empty() {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let q = trials[0].n_channels();
    let t = trials[0].n_samples();
    let rate = trials[0].sample_rate_hz();
    let bins = in_band_bins(t, rate, band);
    if bins.is_empty() {
        return Err(Error::BandUnresolved(band.name.clone()));
    }
    let mut sum: DMatrix<Complex<f64>> = DMatrix::zeros(q, q);
    for trial in trials {
        if trial.n_channels() != q || trial.n_samples() != t || trial.sample_rate_hz() != rate {
            return Err(Error::DimensionMismatch {
                context: "all trials must share channel count, length, and rate",
                expected: q,
                got: trial.n_channels(),
            });
        }
        let coeffs = dft(trial);
        for &j in &bins {
            let d = coeffs.column(j);
            for n in 0..q {
                for m in 0..q {
                    sum[(m, n)] += d[m] * d[n].conj();
                }
            }
        }
    }
    let averaged_count = bins.len() * trials.len();
    let spectral = SpectralMatrix {
        values: sum / Complex::new(averaged_count as f64, 0.0),
        frequency_label: FrequencyLabel::Band(band.name.clone()),
    };
    let coh = coherence(&spectral)?;
    Ok(BandCoherence {
        band: band.clone(),
        spectral,
        coherence: coh,
        averaged_count,
        degenerate_average: averaged_count == 1,
    })
}
