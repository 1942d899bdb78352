//! Numeric tolerances and capacity limits shared by the library, the tests and the CLI.

use serde::{Deserialize, Serialize};

/// One record holding every tolerance the pipelines use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NumericPolicy {
    /// Relative Frobenius distance between `h` and `h†` accepted as Hermitian.
    pub hermiticity: f64,
    /// Eigenstate residual accepted by verification.
    pub residual: f64,
    /// Orthonormality of eigenvector bases.
    pub orthonormality: f64,
    /// Relative residual accepted for operator identities (algebra checks).
    pub algebra: f64,
    /// Band around `|b_k| = 1` treated as singular.
    pub singular_band: f64,
    /// Threshold for counting degenerate eigenvalues.
    pub degeneracy: f64,
    /// Relative distance of a root to the unit circle declared gapless.
    pub circle_proximity: f64,
    /// Largest Hilbert dimension for dense matrices.
    pub max_matrix_dim: usize,
    /// Largest Hilbert dimension for state-vector pipelines.
    pub max_state_dim: usize,
    /// Largest dimension for dense conjugation checks of the transformed Hamiltonian.
    pub max_conjugation_dim: usize,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        NumericPolicy {
            hermiticity: 1e-10,
            residual: 1e-8,
            orthonormality: 1e-10,
            algebra: 1e-9,
            singular_band: 1e-8,
            degeneracy: 1e-8,
            circle_proximity: 1e-6,
            max_matrix_dim: 20_000,
            max_state_dim: 300_000,
            max_conjugation_dim: 4096,
        }
    }
}
