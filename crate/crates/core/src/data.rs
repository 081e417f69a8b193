//! Observations-by-features matrices with tracked centering state.
//!
//! Every kernel in this crate assumes column-centered data; carrying the
//! state in the type lets downstream operations reject raw input instead of
//! silently re-centering it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Centering state of the columns of a [`DataMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnState {
    Raw,
    Centered,
    /// Centered and scaled to unit sample variance (constant columns stay zero).
    Standardized,
}

/// An n×p matrix of n observations (rows) on p features (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    column_state: ColumnState,
}

/// Relative tolerance for the centered-column invariant.
const CENTER_TOL: f64 = 1e-10;

impl DataMatrix {
    /// Wraps raw (un-centered) data. Rejects empty or non-finite input.
    pub fn from_raw(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::InvalidParameter(
                "data matrix must have at least one row and one column".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "data matrix contains non-finite values".into(),
            ));
        }
        Ok(Self {
            values,
            column_state: ColumnState::Raw,
        })
    }

    /// Wraps data the caller asserts is centered; the invariant is verified.
    pub fn from_centered(values: DMatrix<f64>) -> Result<Self> {
        let m = Self::from_raw(values)?;
        if !columns_are_centered(&m.values) {
            return Err(Error::NotCentered);
        }
        Ok(Self {
            values: m.values,
            column_state: ColumnState::Centered,
        })
    }

    /// Single-column matrix from a vector of observations.
    pub fn from_column(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        Self::from_raw(DMatrix::from_vec(n, 1, values))
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column_state(&self) -> ColumnState {
        self.column_state
    }

    pub fn n_observations(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    /// True once columns have been centered (standardization implies centering).
    pub fn is_centered(&self) -> bool {
        matches!(
            self.column_state,
            ColumnState::Centered | ColumnState::Standardized
        )
    }

    /// Subtracts the column means. Idempotent; requires n ≥ 2.
    pub fn center_columns(&self) -> Result<DataMatrix> {
        let n = self.n_observations();
        if n < 2 {
            return Err(Error::InsufficientObservations { needed: 2, got: n });
        }
        let mut values = self.values.clone();
        for mut col in values.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        Ok(DataMatrix {
            values,
            column_state: if self.column_state == ColumnState::Standardized {
                ColumnState::Standardized
            } else {
                ColumnState::Centered
            },
        })
    }

    /// Centers, then scales each column to unit sample variance (n−1
    /// denominator). Constant columns are left at zero rather than divided.
    pub fn standardize_columns(&self) -> Result<DataMatrix> {
        let centered = self.center_columns()?;
        let n = centered.n_observations();
        let mut values = centered.values;
        for mut col in values.column_iter_mut() {
            let ss: f64 = col.iter().map(|v| v * v).sum();
            let var = ss / (n as f64 - 1.0);
            if var > 0.0 {
                col /= var.sqrt();
            }
        }
        Ok(DataMatrix {
            values,
            column_state: ColumnState::Standardized,
        })
    }

    /// Replaces each column of `self` with its residual after least-squares
    /// regression on the columns of `covariates` (pseudoinverse fit).
    ///
    /// The returned state is re-derived by inspection: residualizing centered
    /// data on centered covariates keeps columns centered, and regressing on
    /// an intercept column centers raw data.
    pub fn residualize(&self, covariates: &DataMatrix) -> Result<DataMatrix> {
        let n = self.n_observations();
        if covariates.n_observations() != n {
            return Err(Error::DimensionMismatch {
                context: "covariate rows must match observation rows",
                expected: n,
                got: covariates.n_observations(),
            });
        }
        if covariates.n_features() >= n {
            return Err(Error::InvalidParameter(format!(
                "covariate count {} must be below the observation count {}",
                covariates.n_features(),
                n
            )));
        }
        let c = covariates.values();
        // X - C (C^T C)^- C^T X, with the pseudoinverse rank rule on C^T C.
        let ctc = c.transpose() * c;
        let pinv = crate::kernels::sym_pseudoinverse(&ctc, crate::kernels::DEFAULT_RANK_TOLERANCE);
        let fitted = c * (pinv * (c.transpose() * &self.values));
        let values = &self.values - fitted;
        // Scaling does not survive residualization; only centering can.
        let column_state = if columns_are_centered(&values) {
            ColumnState::Centered
        } else {
            ColumnState::Raw
        };
        Ok(DataMatrix {
            values,
            column_state,
        })
    }
}

/// Columns count as centered when each mean is ≤ 1e-10 × the column max-abs.
fn columns_are_centered(values: &DMatrix<f64>) -> bool {
    values.column_iter().all(|col| {
        let max_abs = col.amax();
        let mean = col.mean();
        mean.abs() <= CENTER_TOL * max_abs.max(1.0)
    })
}

/// Centers a bare vector (mean removal); used for univariate outcomes.
pub fn center_vector(y: &DVector<f64>) -> DVector<f64> {
    let mean = y.mean();
    y.map(|v| v - mean)
}
