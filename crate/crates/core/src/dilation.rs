//! Single-mode symplectic dilations `{M, ρ_e}` of the canonical forms.

use nalgebra::{DMatrix, Matrix2, Vector2};

use crate::channels::{canonical_matrices, CanonicalClass, CanonicalForm, GaussianChannel};
use crate::error::{Result, TelesimError};
use crate::symplectic::{pauli_z, thermal_state, GaussianState, SymplecticMatrix};

/// A 4×4 symplectic `M` acting on (system, environment) plus the environment state.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleModeDilation {
    m: SymplecticMatrix,
    env: GaussianState,
}

fn block(m: [[Matrix2<f64>; 2]; 2]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(4, 4);
    for (bi, row) in m.iter().enumerate() {
        for (bj, b) in row.iter().enumerate() {
            out.view_mut((2 * bi, 2 * bj), (2, 2)).copy_from(b);
        }
    }
    out
}

impl SingleModeDilation {
    /// Validated constructor: `m` must be a 4×4 symplectic matrix and `env` a single-mode state.
    pub fn new(m: SymplecticMatrix, env: GaussianState) -> Result<Self> {
        if m.modes() != 2 {
            return Err(TelesimError::DimensionMismatch {
                expected: 4,
                got: m.matrix().nrows(),
            });
        }
        if env.modes() != 1 {
            return Err(TelesimError::DimensionMismatch {
                expected: 2,
                got: env.cm().nrows(),
            });
        }
        Ok(Self { m, env })
    }

    pub fn m(&self) -> &SymplecticMatrix {
        &self.m
    }

    pub fn env(&self) -> &GaussianState {
        &self.env
    }

    /// Block `(i, j)` of `M`, with index 0 for the system and 1 for the environment.
    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        let v = self.m.matrix().view((2 * i, 2 * j), (2, 2));
        Matrix2::new(v[(0, 0)], v[(0, 1)], v[(1, 0)], v[(1, 1)])
    }

    pub fn m1(&self) -> Matrix2<f64> {
        self.block(0, 0)
    }

    pub fn m2(&self) -> Matrix2<f64> {
        self.block(0, 1)
    }

    pub fn m3(&self) -> Matrix2<f64> {
        self.block(1, 0)
    }

    pub fn m4(&self) -> Matrix2<f64> {
        self.block(1, 1)
    }

    /// Same unitary with a different environment state.
    pub fn with_environment(&self, env: GaussianState) -> Result<Self> {
        Self::new(self.m.clone(), env)
    }

    /// The channel `(m₁, m₂ V_e m₂ᵀ, m₂ x̄_e)` realized on the system mode.
    pub fn induced_channel(&self) -> GaussianChannel {
        let (m1, m2) = (self.m1(), self.m2());
        let ve = self.env.cm();
        let ve = Matrix2::new(ve[(0, 0)], ve[(0, 1)], ve[(1, 0)], ve[(1, 1)]);
        let xe = Vector2::new(self.env.mean()[0], self.env.mean()[1]);
        let n = m2 * ve * m2.transpose();
        GaussianChannel::raw(m1, 0.5 * (n + n.transpose()), m2 * xe)
    }
}

/// Dilation of a non-additive canonical form with a thermal environment `(2n̄+1)I`.
///
/// The B1 unitary routes the environment into the `p` quadrature so that the induced
/// noise matches `N_c = diag(0, 1)`.
pub fn dilation_of(form: &CanonicalForm) -> Result<SingleModeDilation> {
    let eye = Matrix2::identity();
    let zero = Matrix2::zeros();
    let z = pauli_z();
    let tau = form.tau;
    let m = match form.class {
        CanonicalClass::CAtt => {
            let (a, b) = (tau.sqrt(), (1.0 - tau).sqrt());
            block([[eye * a, eye * b], [-eye * b, eye * a]])
        }
        CanonicalClass::CAmp => {
            let (a, b) = (tau.sqrt(), (tau - 1.0).sqrt());
            block([[eye * a, z * b], [z * b, eye * a]])
        }
        CanonicalClass::D => {
            let (a, b) = ((-tau).sqrt(), (1.0 - tau).sqrt());
            block([[z * a, eye * b], [-eye * b, -z * a]])
        }
        CanonicalClass::A1 => block([[zero, eye], [eye, zero]]),
        CanonicalClass::A2 => block([[(eye + z) * 0.5, eye], [eye, (z - eye) * 0.5]]),
        CanonicalClass::B1 => block([[eye, (eye - z) * 0.5], [(eye + z) * 0.5, -eye]]),
        CanonicalClass::B2 | CanonicalClass::B2Id => {
            return Err(TelesimError::Unsupported(format!(
                "{} has no single-mode dilation; use the asymptotic construction",
                form.class
            )))
        }
    };
    SingleModeDilation::new(
        SymplecticMatrix::from_unchecked(m),
        thermal_state(form.environment_variance())?,
    )
}

/// `Tr_e{M [V ⊕ V_e] Mᵀ}` for a single-mode input.
pub fn apply_via_dilation(dil: &SingleModeDilation, input: &GaussianState) -> Result<GaussianState> {
    if input.modes() != 1 {
        return Err(TelesimError::DimensionMismatch {
            expected: 2,
            got: input.cm().nrows(),
        });
    }
    let joint = input.tensor(&dil.env);
    let m = dil.m.matrix();
    let cm = m * joint.cm() * m.transpose();
    let mean = m * joint.mean();
    let cm = cm.view((0, 0), (2, 2)).into_owned();
    Ok(GaussianState::from_parts_unchecked(
        mean.rows(0, 2).into_owned(),
        0.5 * (&cm + cm.transpose()),
    ))
}

/// Beam splitter of transmissivity `tau` with a thermal environment of variance
/// `ξ'/(1−τ)`; the induced channel tends to `V ↦ V + ξ'I` as `τ → 1`.
pub fn asymptotic_b2(xi_prime: f64, tau: f64) -> Result<SingleModeDilation> {
    if !(xi_prime > 0.0 && xi_prime.is_finite()) {
        return Err(TelesimError::domain("xi_prime", xi_prime, "(0, ∞)"));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(TelesimError::domain("tau", tau, "(0, 1)"));
    }
    let omega = xi_prime / (1.0 - tau);
    if omega < 1.0 {
        return Err(TelesimError::domain(
            "xi_prime / (1 - tau)",
            omega,
            "[1, ∞) (environment occupation must be non-negative)",
        ));
    }
    let loss = CanonicalForm::thermal_loss(tau, (omega - 1.0) / 2.0)?;
    let dil = dilation_of(&loss)?;
    dil.with_environment(thermal_state(omega)?)
}

/// Checks that the dilation realizes `(T_c, N_c)` of `form` through its blocks.
pub fn matches_canonical(dil: &SingleModeDilation, form: &CanonicalForm, tol: f64) -> bool {
    let (tc, nc) = canonical_matrices(form);
    let w = form.environment_variance();
    let m2 = dil.m2();
    (dil.m1().transpose() - tc).abs().max() <= tol && (m2 * m2.transpose() * w - nc).abs().max() <= tol
}
