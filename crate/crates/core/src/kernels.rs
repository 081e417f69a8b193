//! The ridge kernel family and its Gram matrices.
//!
//! A weight matrix W on feature space induces the similarity X W X^T and the
//! squared distance (x_i − x_j)^T W (x_i − x_j). Three members are supported:
//! the column-space projection (W = (X^T X)^−), the ridge kernel
//! (W = (X^T X + λI)^{-1}), and the linear kernel (W = I). The same Gram
//! matrix can be computed by three routes — direct weight-matrix algebra, the
//! SVD spectral form, and the dual n×n identity — which must agree to
//! rounding; `auto` picks the cheapest by shape.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Singular values ≤ this multiple of the largest are treated as zero.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-12;

/// Relative tolerance for Gram-matrix symmetry validation.
const SYMMETRY_TOL: f64 = 1e-10;

/// One member of the ridge kernel family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// λ → 0 limit: projection onto the column space (Mahalanobis similarity).
    Projection,
    /// Finite λ > 0: X (X^T X + λ I_p)^{-1} X^T.
    Ridge(f64),
    /// λ → ∞ limit: the linear kernel X X^T (Euclidean similarity).
    Linear,
}

impl KernelSpec {
    /// Ridge spec with a validated penalty.
    pub fn ridge(lambda: f64) -> Result<Self> {
        let spec = KernelSpec::Ridge(lambda);
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Ridge(lambda) if !(lambda.is_finite() && lambda > 0.0) => {
                Err(Error::InvalidLambda(lambda))
            }
            _ => Ok(()),
        }
    }

    /// Weight this kernel assigns to a singular value d of X: 1, d²/(d²+λ), or d².
    pub fn spectral_weight(&self, d: f64) -> f64 {
        match *self {
            KernelSpec::Projection => 1.0,
            KernelSpec::Ridge(lambda) => d * d / (d * d + lambda),
            KernelSpec::Linear => d * d,
        }
    }

    /// Canonical token: "0" for projection, "inf" for linear, the penalty otherwise.
    pub fn label(&self) -> String {
        match *self {
            KernelSpec::Projection => "0".to_string(),
            KernelSpec::Linear => "inf".to_string(),
            KernelSpec::Ridge(lambda) => format!("{lambda}"),
        }
    }
}

/// Which computation route `gram` takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GramPath {
    /// SVD when n ≥ p, dual when p > n for ridge kernels, direct otherwise.
    #[default]
    Auto,
    /// Weight-matrix algebra in feature space (p×p inverse or pseudoinverse).
    Direct,
    /// Spectral form U diag(w_j) U^T from the thin SVD of X.
    Svd,
    /// (XX^T + λI_n)^{-1} XX^T; ridge kernels only.
    Dual,
}

/// An n×n symmetric positive semi-definite similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    values: DMatrix<f64>,
}

impl GramMatrix {
    /// Validates squareness and symmetry (1e-10 × max-abs); PSD-ness is a
    /// property of the construction routes and is asserted in tests.
    pub fn try_new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::DimensionMismatch {
                context: "Gram matrix must be square",
                expected: values.nrows(),
                got: values.ncols(),
            });
        }
        let tol = SYMMETRY_TOL * values.amax();
        for i in 0..values.nrows() {
            for j in (i + 1)..values.ncols() {
                if (values[(i, j)] - values[(j, i)]).abs() > tol {
                    return Err(Error::NotSymmetric);
                }
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }
}

/// Thin SVD X = U diag(d) V^T restricted to singular values above tolerance.
#[derive(Debug, Clone)]
pub struct SvdFactor {
    u: DMatrix<f64>,
    d: Vec<f64>,
    v: DMatrix<f64>,
    rank_tolerance: f64,
}

impl SvdFactor {
    /// n×r matrix of left singular vectors (the principal directions).
    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    /// Retained singular values, strictly positive and descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.d
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn rank(&self) -> usize {
        self.d.len()
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    /// Gram matrix U diag(w_j) U^T with the spec's spectral weights.
    pub fn weighted_gram(&self, spec: &KernelSpec) -> Result<GramMatrix> {
        spec.validate()?;
        let mut scaled = self.u.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= spec.spectral_weight(self.d[j]);
        }
        GramMatrix::try_new(scaled * self.u.transpose())
    }
}

/// Weighted squared distances between observation pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredDistanceMatrix {
    values: DMatrix<f64>,
}

impl SquaredDistanceMatrix {
    /// Validates symmetry, zero diagonal, and nonnegativity up to rounding.
    pub fn try_new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::DimensionMismatch {
                context: "distance matrix must be square",
                expected: values.nrows(),
                got: values.ncols(),
            });
        }
        let tol = SYMMETRY_TOL * values.amax();
        for i in 0..values.nrows() {
            if values[(i, i)] != 0.0 {
                return Err(Error::InvalidParameter(
                    "distance matrix diagonal must be zero".into(),
                ));
            }
            for j in (i + 1)..values.ncols() {
                if (values[(i, j)] - values[(j, i)]).abs() > tol {
                    return Err(Error::NotSymmetric);
                }
                if values[(i, j)] < -1e-10 {
                    return Err(Error::InvalidParameter(
                        "squared distances must be nonnegative".into(),
                    ));
                }
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }
}

/// Moore–Penrose pseudoinverse of a symmetric PSD matrix.
///
/// The cutoff mirrors the singular-value rank rule (eigenvalues are squared
/// singular values), floored at dims×ε of the largest eigenvalue — below that
/// level the eigenvalues of a normal matrix are pure rounding noise.
pub(crate) fn sym_pseudoinverse(m: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let e_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if e_max <= 0.0 {
        return DMatrix::zeros(m.nrows(), m.ncols());
    }
    let noise_floor = m.nrows() as f64 * f64::EPSILON;
    let cutoff = (rtol * rtol).max(noise_floor) * e_max;
    let mut scaled = eig.eigenvectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        if eig.eigenvalues[j] > cutoff {
            col /= eig.eigenvalues[j];
        } else {
            col.fill(0.0);
        }
    }
    scaled * eig.eigenvectors.transpose()
}

/// Thin SVD of a centered matrix, keeping singular values > tolerance × the
/// largest and at most min(n−1, p) of them (centering removes one dimension).
pub fn svd_thin(x: &DataMatrix, rank_tolerance: f64) -> Result<SvdFactor> {
    if !x.is_centered() {
        return Err(Error::NotCentered);
    }
    let (n, p) = (x.n_observations(), x.n_features());
    let svd = x.values().clone().svd(true, true);
    let sv = &svd.singular_values;
    let d1 = sv[0];
    if !(d1 > 0.0) {
        return Err(Error::RankZero);
    }
    let cap = (n - 1).min(p);
    let r = sv
        .iter()
        .take(cap)
        .take_while(|&&d| d > rank_tolerance * d1)
        .count();
    if r == 0 {
        return Err(Error::RankZero);
    }
    let u = svd.u.as_ref().expect("u requested").columns(0, r).into();
    let v = svd
        .v_t
        .as_ref()
        .expect("v_t requested")
        .rows(0, r)
        .transpose();
    Ok(SvdFactor {
        u,
        d: sv.iter().take(r).cloned().collect(),
        v,
        rank_tolerance,
    })
}

/// `svd_thin` with the default rank tolerance.
pub fn svd_thin_default(x: &DataMatrix) -> Result<SvdFactor> {
    svd_thin(x, DEFAULT_RANK_TOLERANCE)
}

/// Gram matrix of centered data under one kernel spec via the chosen path.
pub fn gram(x: &DataMatrix, spec: &KernelSpec, path: GramPath) -> Result<GramMatrix> {
    spec.validate()?;
    if !x.is_centered() {
        return Err(Error::NotCentered);
    }
    let (n, p) = (x.n_observations(), x.n_features());
    if x.values().amax() == 0.0 {
        // Every family maps zero data to the zero similarity.
        return GramMatrix::try_new(DMatrix::zeros(n, n));
    }
    match path {
        GramPath::Auto => {
            if n >= p {
                gram(x, spec, GramPath::Svd)
            } else if matches!(spec, KernelSpec::Ridge(_)) {
                gram(x, spec, GramPath::Dual)
            } else {
                gram(x, spec, GramPath::Direct)
            }
        }
        GramPath::Direct => {
            let xv = x.values();
            let values = match *spec {
                KernelSpec::Linear => xv * xv.transpose(),
                KernelSpec::Projection => {
                    let pinv = sym_pseudoinverse(&(xv.transpose() * xv), DEFAULT_RANK_TOLERANCE);
                    xv * pinv * xv.transpose()
                }
                KernelSpec::Ridge(lambda) => {
                    let a = xv.transpose() * xv + DMatrix::identity(p, p) * lambda;
                    let chol = Cholesky::new(a).ok_or(Error::InvalidLambda(lambda))?;
                    xv * chol.solve(&xv.transpose())
                }
            };
            GramMatrix::try_new(values)
        }
        GramPath::Svd => svd_thin_default(x)?.weighted_gram(spec),
        GramPath::Dual => {
            let KernelSpec::Ridge(lambda) = *spec else {
                return Err(Error::InvalidParameter(
                    "dual path applies to ridge kernels only".into(),
                ));
            };
            let g = x.values() * x.values().transpose();
            let chol = Cholesky::new(&g + DMatrix::identity(n, n) * lambda)
                .ok_or(Error::InvalidLambda(lambda))?;
            GramMatrix::try_new(chol.solve(&g))
        }
    }
}

/// Gram matrices for several specs on the same data, sharing the SVD (n ≥ p)
/// or the n×n outer product (p > n) across the family.
pub fn gram_family(x: &DataMatrix, specs: &[KernelSpec], path: GramPath) -> Result<Vec<GramMatrix>> {
    for spec in specs {
        spec.validate()?;
    }
    if !x.is_centered() {
        return Err(Error::NotCentered);
    }
    let (n, p) = (x.n_observations(), x.n_features());
    if path != GramPath::Auto || x.values().amax() == 0.0 {
        return specs.iter().map(|s| gram(x, s, path)).collect();
    }
    if n >= p {
        let f = svd_thin_default(x)?;
        specs.iter().map(|s| f.weighted_gram(s)).collect()
    } else {
        let g = x.values() * x.values().transpose();
        specs
            .iter()
            .map(|spec| match *spec {
                KernelSpec::Linear => GramMatrix::try_new(g.clone()),
                KernelSpec::Ridge(lambda) => {
                    let chol = Cholesky::new(&g + DMatrix::identity(n, n) * lambda)
                        .ok_or(Error::InvalidLambda(lambda))?;
                    GramMatrix::try_new(chol.solve(&g))
                }
                KernelSpec::Projection => gram(x, spec, GramPath::Direct),
            })
            .collect()
    }
}

/// Weighted squared distances D²_ij = (x_i − x_j)^T W (x_i − x_j), computed
/// from the weight matrix itself (not from a Gram matrix).
pub fn squared_distance_matrix(x: &DataMatrix, spec: &KernelSpec) -> Result<SquaredDistanceMatrix> {
    spec.validate()?;
    if !x.is_centered() {
        return Err(Error::NotCentered);
    }
    let xv = x.values();
    let (n, p) = (xv.nrows(), xv.ncols());
    // A = X W so that D²_ij reduces to a row-difference dot product.
    let a = match *spec {
        KernelSpec::Linear => xv.clone(),
        KernelSpec::Projection => xv * sym_pseudoinverse(&(xv.transpose() * xv), DEFAULT_RANK_TOLERANCE),
        KernelSpec::Ridge(lambda) => {
            let w = xv.transpose() * xv + DMatrix::identity(p, p) * lambda;
            let chol = Cholesky::new(w).ok_or(Error::InvalidLambda(lambda))?;
            chol.solve(&xv.transpose()).transpose()
        }
    };
    let mut d2 = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for k in 0..p {
                acc += (xv[(i, k)] - xv[(j, k)]) * (a[(i, k)] - a[(j, k)]);
            }
            d2[(i, j)] = acc;
            d2[(j, i)] = acc;
        }
    }
    SquaredDistanceMatrix::try_new(d2)
}

/// Double centering −½ C D² C with C = I − 11^T/n, converting squared
/// distances of centered data back into the matching similarity matrix.
pub fn double_center(d2: &SquaredDistanceMatrix) -> GramMatrix {
    let d = d2.values();
    let n = d.nrows();
    let row_means: Vec<f64> = (0..n).map(|i| d.row(i).mean()).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let values = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (d[(i, j)] - row_means[i] - row_means[j] + grand)
    });
    GramMatrix::try_new(values).expect("double-centered matrix is symmetric by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataMatrix;
    use approx::assert_abs_diff_eq;
    use nalgebra::dmatrix;

    fn centered(values: DMatrix<f64>) -> DataMatrix {
        DataMatrix::from_raw(values).unwrap().center_columns().unwrap()
    }

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax()
    }

    #[test]
    fn linear_gram_is_outer_product() {
        let x = centered(dmatrix![-1.0; 1.0]);
        let h = gram(&x, &KernelSpec::Linear, GramPath::Auto).unwrap();
        let expected = dmatrix![1.0, -1.0; -1.0, 1.0];
        assert!(max_abs_diff(h.values(), &expected) < 1e-12);
    }

    #[test]
    fn projection_gram_of_rank_one_data() {
        let x = centered(dmatrix![-1.0; 1.0]);
        let h = gram(&x, &KernelSpec::Projection, GramPath::Auto).unwrap();
        let expected = dmatrix![0.5, -0.5; -0.5, 0.5];
        assert!(max_abs_diff(h.values(), &expected) < 1e-12);
    }

    #[test]
    fn ridge_rejects_nonpositive_lambda() {
        let x = centered(dmatrix![-1.0; 1.0]);
        assert!(matches!(
            gram(&x, &KernelSpec::Ridge(0.0), GramPath::Auto),
            Err(Error::InvalidLambda(_))
        ));
        assert!(matches!(
            gram(&x, &KernelSpec::Ridge(-3.0), GramPath::Auto),
            Err(Error::InvalidLambda(_))
        ));
        assert!(KernelSpec::ridge(f64::INFINITY).is_err());
    }

    #[test]
    fn gram_rejects_raw_input() {
        let raw = DataMatrix::from_raw(dmatrix![1.0; 2.0; 4.0]).unwrap();
        assert!(matches!(
            gram(&raw, &KernelSpec::Linear, GramPath::Auto),
            Err(Error::NotCentered)
        ));
    }

    #[test]
    fn three_paths_agree_on_ridge() {
        let x = centered(DMatrix::from_fn(4, 3, |i, j| ((i * 5 + j * 2) as f64).sin()));
        let spec = KernelSpec::Ridge(2.0);
        let direct = gram(&x, &spec, GramPath::Direct).unwrap();
        let svd = gram(&x, &spec, GramPath::Svd).unwrap();
        let dual = gram(&x, &spec, GramPath::Dual).unwrap();
        let scale = direct.values().amax();
        assert!(max_abs_diff(direct.values(), svd.values()) <= 1e-10 * scale);
        assert!(max_abs_diff(direct.values(), dual.values()) <= 1e-10 * scale);
    }

    #[test]
    fn svd_thin_drops_centering_dimension() {
        let x = centered(dmatrix![1.0, 0.0; 0.0, 1.0]);
        let f = svd_thin_default(&x).unwrap();
        assert_eq!(f.rank(), 1);
    }

    #[test]
    fn svd_thin_rank_unchanged_by_duplicated_columns() {
        let base = DMatrix::from_fn(5, 2, |i, j| ((i + 2 * j) as f64 * 0.7).cos());
        let mut doubled = DMatrix::zeros(5, 4);
        doubled.view_mut((0, 0), (5, 2)).copy_from(&base);
        doubled.view_mut((0, 2), (5, 2)).copy_from(&base);
        let r1 = svd_thin_default(&centered(base)).unwrap().rank();
        let r2 = svd_thin_default(&centered(doubled)).unwrap().rank();
        assert_eq!(r1, r2);
    }

    #[test]
    fn svd_thin_reconstructs_input() {
        let x = centered(DMatrix::from_fn(5, 3, |i, j| ((i * 3 + j) as f64 * 0.41).sin()));
        let f = svd_thin_default(&x).unwrap();
        let mut rebuilt = DMatrix::zeros(5, 3);
        for j in 0..f.rank() {
            rebuilt += f.u().column(j) * f.v().column(j).transpose() * f.singular_values()[j];
        }
        assert!(max_abs_diff(&rebuilt, x.values()) <= 1e-8 * x.values().amax());
    }

    #[test]
    fn svd_thin_errors_on_zero_matrix() {
        let x = DataMatrix::from_centered(DMatrix::zeros(3, 2)).unwrap();
        assert!(matches!(svd_thin_default(&x), Err(Error::RankZero)));
    }

    #[test]
    fn euclidean_distance_recovers_pythagoras() {
        let x = centered(dmatrix![0.0, 0.0; 3.0, 4.0]);
        let d2 = squared_distance_matrix(&x, &KernelSpec::Linear).unwrap();
        assert_abs_diff_eq!(d2.values()[(0, 1)], 25.0, epsilon = 1e-12);
        assert_eq!(d2.values()[(0, 0)], 0.0);
        assert_eq!(d2.values()[(1, 1)], 0.0);
    }

    #[test]
    fn distance_matches_gram_polarization() {
        let x = centered(DMatrix::from_fn(4, 2, |i, j| ((i * 2 + j) as f64 * 1.3).cos()));
        let spec = KernelSpec::Ridge(1.0);
        let d2 = squared_distance_matrix(&x, &spec).unwrap();
        let h = gram(&x, &spec, GramPath::Auto).unwrap();
        let hv = h.values();
        for i in 0..4 {
            for j in 0..4 {
                let expected = hv[(i, i)] - 2.0 * hv[(i, j)] + hv[(j, j)];
                assert_abs_diff_eq!(d2.values()[(i, j)], expected, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn double_center_of_zeros_is_zero() {
        let d2 = SquaredDistanceMatrix::try_new(DMatrix::zeros(4, 4)).unwrap();
        let g = double_center(&d2);
        assert_eq!(g.values().amax(), 0.0);
    }

    #[test]
    fn double_center_inverts_distance_for_linear_and_ridge() {
        let x = centered(DMatrix::from_fn(5, 3, |i, j| ((i + j * j) as f64 * 0.29).sin()));
        for spec in [KernelSpec::Linear, KernelSpec::Ridge(3.0)] {
            let d2 = squared_distance_matrix(&x, &spec).unwrap();
            let recovered = double_center(&d2);
            let h = gram(&x, &spec, GramPath::Auto).unwrap();
            let scale = h.values().amax().max(1.0);
            assert!(max_abs_diff(recovered.values(), h.values()) <= 1e-10 * scale);
        }
    }

    #[test]
    fn gram_family_matches_individual_grams() {
        let specs = [
            KernelSpec::Projection,
            KernelSpec::Ridge(0.5),
            KernelSpec::Ridge(50.0),
            KernelSpec::Linear,
        ];
        // Both shapes: n ≥ p and p > n.
        for (n, p) in [(6, 3), (3, 6)] {
            let x = centered(DMatrix::from_fn(n, p, |i, j| ((i * 7 + j * 3) as f64 * 0.17).sin()));
            let family = gram_family(&x, &specs, GramPath::Auto).unwrap();
            for (spec, fam) in specs.iter().zip(&family) {
                let single = gram(&x, spec, GramPath::Auto).unwrap();
                let scale = single.values().amax().max(1e-300);
                assert!(max_abs_diff(fam.values(), single.values()) <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn gram_matrix_rejects_asymmetry() {
        assert!(matches!(
            GramMatrix::try_new(dmatrix![1.0, 0.5; 0.0, 1.0]),
            Err(Error::NotSymmetric)
        ));
    }
}
