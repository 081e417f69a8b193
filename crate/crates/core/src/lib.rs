//! Adaptive Mantel testing for two high-dimensional feature sets.
//!
//! The crate provides the ridge kernel family bridging Euclidean and
//! Mahalanobis similarity ([`kernels`]), scalar association statistics
//! ([`stats`]), the shared-permutation adaptive Mantel test ([`adamant`]),
//! EEG-style coherence feature extraction ([`spectral`]), and seeded
//! generators for synthetic imaging-genetics data ([`simgen`]).

pub mod adamant;
pub mod data;
pub mod error;
pub mod kernels;
pub mod simgen;
pub mod spectral;
pub mod stats;

pub use data::{ColumnState, DataMatrix};
pub use error::{Error, Result};
pub use kernels::{GramMatrix, GramPath, KernelSpec, SquaredDistanceMatrix, SvdFactor};
