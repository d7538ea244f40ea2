use serde::{Deserialize, Serialize};

/// Numerical thresholds shared across the toolkit.
///
/// All values are relative unless the field name says otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Biorthogonality / completeness defect allowed for eigensystems.
    pub bio: f64,
    /// Hermiticity defect, relative to the operator norm.
    pub herm: f64,
    /// Smallest admissible eigenvalue of a metric operator.
    pub pd: f64,
    /// Real-spectrum and unit-circle tests (scaled by max(1, spectral radius)).
    pub spec: f64,
    /// Largest admissible condition number of an eigenvector frame.
    pub kappa_max: f64,
    /// Eigenpair residual bound relative to the operator norm.
    pub residual: f64,
    /// Relative eigenvalue gap below which a spectrum counts as degenerate.
    pub gap: f64,
    /// Largest matrix dimension produced by `kron`.
    pub kron_cap: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            bio: 1e-10,
            herm: 1e-9,
            pd: 1e-12,
            spec: 1e-8,
            kappa_max: 1e8,
            residual: 1e-10,
            gap: 1e-6,
            kron_cap: 4096,
        }
    }
}
