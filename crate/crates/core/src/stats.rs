//! Scalar association statistics between two feature sets.
//!
//! Everything here reduces to traces of Gram-matrix products: the Mantel
//! trace tr(HK), its normalized RV form, the fixed-effects (projection) and
//! random-effects (linear) score statistics, and the spectral form of the
//! ridge statistic Σ w_j Z_j² over principal correlations Z = U^T y.
//!
//! Statistics are reported unnormalized: permutation inference is invariant
//! to positive scaling, so proportionality constants are dropped.

use nalgebra::DVector;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::kernels::{gram, GramMatrix, GramPath, KernelSpec, SvdFactor};

/// Which statistic an [`AssociationValue`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssociationKind {
    MantelTrace,
    Rv,
    FixedScore,
    RandomScore,
    RidgeScore,
}

/// A scalar association statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationValue {
    pub statistic: f64,
    pub kind: AssociationKind,
}

/// Principal correlations z = U^T y paired with the singular values of X.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalCorrelation {
    pub z: DVector<f64>,
    pub d: Vec<f64>,
}

/// Elementwise product sum in flat column-major order.
///
/// This is the crate's canonical accumulation order for Gram traces; the
/// permutation machinery relies on it being identical everywhere.
pub(crate) fn flat_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_same_dim(h: &GramMatrix, k: &GramMatrix) -> Result<()> {
    if h.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            context: "Gram matrices must share the observation count",
            expected: h.dim(),
            got: k.dim(),
        });
    }
    Ok(())
}

/// Mantel statistic tr(HK) = Σ_ij H_ij K_ij (by symmetry of both arguments).
pub fn mantel_trace(h: &GramMatrix, k: &GramMatrix) -> Result<AssociationValue> {
    check_same_dim(h, k)?;
    Ok(AssociationValue {
        statistic: flat_dot(h.values().as_slice(), k.values().as_slice()),
        kind: AssociationKind::MantelTrace,
    })
}

/// RV coefficient tr(HK)/√(tr(H²)tr(K²)): the cosine of the vectorized
/// matrices, in [0, 1] for PSD inputs.
pub fn rv_coefficient(h: &GramMatrix, k: &GramMatrix) -> Result<AssociationValue> {
    check_same_dim(h, k)?;
    let hh = flat_dot(h.values().as_slice(), h.values().as_slice());
    let kk = flat_dot(k.values().as_slice(), k.values().as_slice());
    if hh <= 0.0 || kk <= 0.0 {
        return Err(Error::DegenerateSimilarity);
    }
    let hk = flat_dot(h.values().as_slice(), k.values().as_slice());
    Ok(AssociationValue {
        statistic: hk / (hh * kk).sqrt(),
        kind: AssociationKind::Rv,
    })
}

/// Fixed-effects score statistic tr(H₀K₀); equals Pillai's trace, the sum of
/// squared canonical correlations.
pub fn fixed_effects_score(x: &DataMatrix, y: &DataMatrix) -> Result<AssociationValue> {
    if x.values().amax() == 0.0 || y.values().amax() == 0.0 {
        return Err(Error::RankZero);
    }
    let h = gram(x, &KernelSpec::Projection, GramPath::Auto)?;
    let k = gram(y, &KernelSpec::Projection, GramPath::Auto)?;
    let t = mantel_trace(&h, &k)?;
    Ok(AssociationValue {
        statistic: t.statistic,
        kind: AssociationKind::FixedScore,
    })
}

/// Random-effects (variance components) score statistic tr(XX^T YY^T).
pub fn random_effects_score(x: &DataMatrix, y: &DataMatrix) -> Result<AssociationValue> {
    let h = gram(x, &KernelSpec::Linear, GramPath::Auto)?;
    let k = gram(y, &KernelSpec::Linear, GramPath::Auto)?;
    let t = mantel_trace(&h, &k)?;
    Ok(AssociationValue {
        statistic: t.statistic,
        kind: AssociationKind::RandomScore,
    })
}

fn check_vector(f: &SvdFactor, y: &DVector<f64>) -> Result<()> {
    if y.len() != f.u().nrows() {
        return Err(Error::DimensionMismatch {
            context: "outcome length must match observation count",
            expected: f.u().nrows(),
            got: y.len(),
        });
    }
    if y.mean().abs() > 1e-10 * y.amax().max(1.0) {
        return Err(Error::NotCentered);
    }
    Ok(())
}

/// Univariate score statistic Σ_j w_j Z_j² with the spec's spectral weights;
/// equals tr(H_spec · yy^T).
pub fn ridge_score_univariate(
    f: &SvdFactor,
    y: &DVector<f64>,
    spec: &KernelSpec,
) -> Result<AssociationValue> {
    spec.validate()?;
    check_vector(f, y)?;
    let z = f.u().transpose() * y;
    let statistic = z
        .iter()
        .zip(f.singular_values())
        .map(|(zj, &dj)| spec.spectral_weight(dj) * zj * zj)
        .sum();
    Ok(AssociationValue {
        statistic,
        kind: AssociationKind::RidgeScore,
    })
}

/// The principal correlation vector z = U^T y with its singular values.
pub fn principal_correlations(f: &SvdFactor, y: &DVector<f64>) -> Result<PrincipalCorrelation> {
    check_vector(f, y)?;
    Ok(PrincipalCorrelation {
        z: f.u().transpose() * y,
        d: f.singular_values().to_vec(),
    })
}
