use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by validation, classification and fidelity routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Absolute tolerance on `|V - Vᵀ|`.
    pub symmetry: f64,
    /// Absolute tolerance on `|SΩSᵀ - Ω|`.
    pub symplectic: f64,
    /// States are accepted when every symplectic eigenvalue is at least `1 - uncertainty`.
    pub uncertainty: f64,
    /// Singular values below `rank * max(σ_max, 1)` count as zero.
    pub rank: f64,
    /// `|det T - 1|` at or below this value is treated as exactly one.
    pub unit_transmissivity: f64,
    /// States whose symplectic eigenvalues all lie within this distance of one are
    /// treated as pure by the fidelity routines.
    pub purity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-12,
            symplectic: 1e-10,
            uncertainty: 1e-9,
            rank: 1e-10,
            unit_transmissivity: 1e-9,
            purity: 1e-10,
        }
    }
}

impl Tolerances {
    /// Bundle with every validation tolerance (symmetry, symplectic, uncertainty) set to `tol`.
    /// Rank, unit-transmissivity and purity thresholds keep their defaults.
    pub fn with_validation(tol: f64) -> Self {
        Self {
            symmetry: tol,
            symplectic: tol,
            uncertainty: tol,
            ..Self::default()
        }
    }

    /// Rank threshold for a matrix whose largest singular value is `sigma_max`.
    pub fn rank_threshold(&self, sigma_max: f64) -> f64 {
        self.rank * sigma_max.max(1.0)
    }
}
