//! Single-mode Gaussian channels `(T, N, d)` and their canonical forms.

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TelesimError};
use crate::symplectic::{pauli_z, GaussianState};
use crate::tolerance::Tolerances;

/// Gaussian channel acting as `x ↦ Tx + d`, `V ↦ TVTᵀ + N`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    t: Matrix2<f64>,
    n: Matrix2<f64>,
    d: Vector2<f64>,
}

impl GaussianChannel {
    /// Validated constructor (default channel tolerance).
    pub fn new(t: Matrix2<f64>, n: Matrix2<f64>, d: Vector2<f64>) -> Result<Self> {
        let ch = Self::raw(t, n, d);
        ch.checked(default_channel_tol())
    }

    /// Unvalidated constructor; see [`validate_channel`].
    pub fn raw(t: Matrix2<f64>, n: Matrix2<f64>, d: Vector2<f64>) -> Self {
        Self { t, n, d }
    }

    pub fn identity() -> Self {
        Self::raw(Matrix2::identity(), Matrix2::zeros(), Vector2::zeros())
    }

    pub fn from_canonical(form: &CanonicalForm) -> Self {
        let (t, n) = canonical_matrices(form);
        Self::raw(t, n, Vector2::zeros())
    }

    /// Returns `self` if valid within `tol`, otherwise an invalid-channel error.
    pub fn checked(self, tol: f64) -> Result<Self> {
        if validate_channel(&self, tol) {
            Ok(self)
        } else {
            Err(TelesimError::InvalidChannel(self.violation(tol)))
        }
    }

    fn violation(&self, tol: f64) -> String {
        if !all_finite(self) {
            return "non-finite entries".into();
        }
        if (self.n - self.n.transpose()).abs().max() > tol {
            return "noise matrix is not symmetric".into();
        }
        let (det_n, bound) = (self.n.determinant(), (self.tau() - 1.0).powi(2));
        format!("det N = {det_n} but (det T - 1)^2 = {bound}, or N is not positive semidefinite")
    }

    pub fn t(&self) -> &Matrix2<f64> {
        &self.t
    }

    pub fn n(&self) -> &Matrix2<f64> {
        &self.n
    }

    pub fn d(&self) -> &Vector2<f64> {
        &self.d
    }

    /// Transmissivity `τ = det T`.
    pub fn tau(&self) -> f64 {
        self.t.determinant()
    }
}

pub(crate) fn default_channel_tol() -> f64 {
    Tolerances::default().uncertainty
}

fn all_finite(ch: &GaussianChannel) -> bool {
    ch.t.iter().chain(ch.n.iter()).chain(ch.d.iter()).all(|x| x.is_finite())
}

/// Complete positivity: `N = Nᵀ ≥ 0` and `det N ≥ (det T − 1)²`.
///
/// The determinant condition is checked relative to the magnitude of its two sides, so
/// large conjugated channels are judged on the same footing as canonical ones.
pub fn validate_channel(ch: &GaussianChannel, tol: f64) -> bool {
    if !all_finite(ch) {
        return false;
    }
    if (ch.n - ch.n.transpose()).abs().max() > tol {
        return false;
    }
    let n_sym = 0.5 * (ch.n + ch.n.transpose());
    let scale = n_sym.abs().max().max(1.0);
    if n_sym.symmetric_eigenvalues().iter().any(|&l| l < -tol * scale) {
        return false;
    }
    let det_n = n_sym.determinant();
    let bound = (ch.tau() - 1.0).powi(2);
    det_n >= bound - tol * det_n.abs().max(bound).max(1.0)
}

/// Applies a single-mode channel to mode `target_mode` of a one- or two-mode state.
pub fn apply_channel(ch: &GaussianChannel, state: &GaussianState, target_mode: usize) -> Result<GaussianState> {
    let ch = ch.clone().checked(default_channel_tol())?;
    let modes = state.modes();
    if target_mode >= modes {
        return Err(TelesimError::InvalidDimension(format!(
            "target mode {target_mode} out of range for a {modes}-mode state"
        )));
    }
    let dim = 2 * modes;
    let o = 2 * target_mode;
    let mut t = DMatrix::identity(dim, dim);
    t.view_mut((o, o), (2, 2)).copy_from(&ch.t);
    let mut n = DMatrix::zeros(dim, dim);
    n.view_mut((o, o), (2, 2)).copy_from(&ch.n);
    let mut d = DVector::zeros(dim);
    d.rows_mut(o, 2).copy_from(&ch.d);

    let cm = &t * state.cm() * t.transpose() + n;
    let cm = 0.5 * (&cm + cm.transpose());
    Ok(GaussianState::from_parts_unchecked(&t * state.mean() + d, cm))
}

/// `ch2 ∘ ch1`: first `ch1`, then `ch2`.
pub fn compose(ch2: &GaussianChannel, ch1: &GaussianChannel) -> Result<GaussianChannel> {
    let tol = default_channel_tol();
    let ch1 = ch1.clone().checked(tol)?;
    let ch2 = ch2.clone().checked(tol)?;
    let n = ch2.t * ch1.n * ch2.t.transpose() + ch2.n;
    Ok(GaussianChannel::raw(
        ch2.t * ch1.t,
        0.5 * (n + n.transpose()),
        ch2.t * ch1.d + ch2.d,
    ))
}

/// Canonical classes of single-mode Gaussian channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CanonicalClass {
    A1,
    A2,
    B1,
    #[serde(rename = "B2_Id")]
    B2Id,
    B2,
    #[serde(rename = "C_Att")]
    CAtt,
    #[serde(rename = "C_Amp")]
    CAmp,
    D,
}

impl CanonicalClass {
    pub const ALL: [CanonicalClass; 8] = [
        Self::A1,
        Self::A2,
        Self::B1,
        Self::B2Id,
        Self::B2,
        Self::CAtt,
        Self::CAmp,
        Self::D,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::A1 => "A1",
            Self::A2 => "A2",
            Self::B1 => "B1",
            Self::B2Id => "B2_Id",
            Self::B2 => "B2",
            Self::CAtt => "C_Att",
            Self::CAmp => "C_Amp",
            Self::D => "D",
        }
    }

    /// Channel rank `r = rank(T)·rank(N)/2` of the class.
    pub fn rank(self) -> u8 {
        match self {
            Self::A1 | Self::B2Id => 0,
            Self::A2 | Self::B1 => 1,
            Self::B2 | Self::CAtt | Self::CAmp | Self::D => 2,
        }
    }

    /// Whether the noise parameter is an added-noise variance `ξ` (rather than `n̄`).
    pub fn is_additive(self) -> bool {
        matches!(self, Self::B2 | Self::B2Id)
    }
}

impl fmt::Display for CanonicalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CanonicalClass {
    type Err = TelesimError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| TelesimError::Validation(format!("unknown channel class {s:?}")))
    }
}

/// Canonical form `C[τ, r, n̄]` (or `ξ` for the additive class).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalForm {
    pub class: CanonicalClass,
    pub tau: f64,
    pub r: u8,
    /// `n̄` for A1, A2, C and D forms; `ξ` for B2; zero for B1 and the identity.
    pub noise_param: f64,
}

impl CanonicalForm {
    /// Checked constructor; `tau` is only read for the C and D classes.
    pub fn new(class: CanonicalClass, tau: f64, noise_param: f64) -> Result<Self> {
        if !noise_param.is_finite() || noise_param < 0.0 {
            return Err(TelesimError::domain("noise parameter", noise_param, "[0, ∞)"));
        }
        let tau = match class {
            CanonicalClass::A1 | CanonicalClass::A2 => 0.0,
            CanonicalClass::B1 | CanonicalClass::B2Id | CanonicalClass::B2 => 1.0,
            CanonicalClass::CAtt if tau > 0.0 && tau < 1.0 => tau,
            CanonicalClass::CAtt => return Err(TelesimError::domain("tau", tau, "(0, 1)")),
            CanonicalClass::CAmp if tau > 1.0 && tau.is_finite() => tau,
            CanonicalClass::CAmp => return Err(TelesimError::domain("tau", tau, "(1, ∞)")),
            CanonicalClass::D if tau < 0.0 && tau.is_finite() => tau,
            CanonicalClass::D => return Err(TelesimError::domain("tau", tau, "(-∞, 0)")),
        };
        let noise_param = match class {
            CanonicalClass::B1 | CanonicalClass::B2Id => 0.0,
            CanonicalClass::B2 if noise_param == 0.0 => {
                return Err(TelesimError::domain("xi", noise_param, "(0, ∞)"))
            }
            _ => noise_param,
        };
        Ok(Self {
            class,
            tau,
            r: class.rank(),
            noise_param,
        })
    }

    /// Thermal-loss channel (C form with `0 < τ < 1`).
    pub fn thermal_loss(tau: f64, nbar: f64) -> Result<Self> {
        Self::new(CanonicalClass::CAtt, tau, nbar)
    }

    /// Thermal amplifier (C form with `τ > 1`).
    pub fn amplifier(tau: f64, nbar: f64) -> Result<Self> {
        Self::new(CanonicalClass::CAmp, tau, nbar)
    }

    /// Conjugate of an amplifier (D form, `τ < 0`).
    pub fn conjugate_amplifier(tau: f64, nbar: f64) -> Result<Self> {
        Self::new(CanonicalClass::D, tau, nbar)
    }

    /// Additive-noise channel `V ↦ V + ξI`.
    pub fn additive(xi: f64) -> Result<Self> {
        Self::new(CanonicalClass::B2, 1.0, xi)
    }

    pub fn identity() -> Self {
        Self {
            class: CanonicalClass::B2Id,
            tau: 1.0,
            r: 0,
            noise_param: 0.0,
        }
    }

    /// Variance `2n̄ + 1` of the thermal environment of a non-additive form.
    pub fn environment_variance(&self) -> f64 {
        2.0 * self.noise_param + 1.0
    }
}

/// `(T_c, N_c)` of a canonical form.
pub fn canonical_matrices(form: &CanonicalForm) -> (Matrix2<f64>, Matrix2<f64>) {
    let eye = Matrix2::identity();
    let z = pauli_z();
    let tau = form.tau;
    let w = form.environment_variance();
    match form.class {
        CanonicalClass::A1 => (Matrix2::zeros(), eye * w),
        CanonicalClass::A2 => ((eye + z) * 0.5, eye * w),
        CanonicalClass::B1 => (eye, (eye - z) * 0.5),
        CanonicalClass::B2Id => (eye, Matrix2::zeros()),
        CanonicalClass::B2 => (eye, eye * form.noise_param),
        CanonicalClass::CAtt | CanonicalClass::CAmp => (eye * tau.sqrt(), eye * ((1.0 - tau).abs() * w)),
        CanonicalClass::D => (z * (-tau).sqrt(), eye * ((1.0 - tau) * w)),
    }
}

pub(crate) fn numeric_rank(m: &Matrix2<f64>, tol: &Tolerances) -> u8 {
    let sv = m.singular_values();
    let threshold = tol.rank_threshold(sv.max());
    sv.iter().filter(|&&s| s > threshold).count() as u8
}

/// `rank(T)·rank(N)/2`.
pub fn channel_rank(ch: &GaussianChannel) -> f64 {
    let tol = Tolerances::default();
    f64::from(numeric_rank(&ch.t, &tol)) * f64::from(numeric_rank(&ch.n, &tol)) / 2.0
}

/// Reduces a valid channel to its canonical form using symplectic invariants only.
pub fn classify(ch: &GaussianChannel, tol: &Tolerances) -> Result<CanonicalForm> {
    if !validate_channel(ch, tol.uncertainty) {
        return Err(TelesimError::InvalidChannel(ch.violation(tol.uncertainty)));
    }
    let rank_t = numeric_rank(&ch.t, tol);
    let rank_n = numeric_rank(&ch.n, tol);
    let tau = ch.tau();
    let det_n = ch.n.determinant().max(0.0);
    let diag = || format!("tau = {tau}, rank T = {rank_t}, rank N = {rank_n}, det N = {det_n}");

    // occupations within the purity tolerance are rounding residue of a pure environment
    let thermal = |tau: f64| {
        let nbar = (det_n.sqrt() / (1.0 - tau).abs() - 1.0) / 2.0;
        if 2.0 * nbar <= tol.purity {
            0.0
        } else {
            nbar
        }
    };
    let form = |class: CanonicalClass, tau: f64, noise_param: f64| CanonicalForm {
        class,
        tau,
        r: class.rank(),
        noise_param,
    };

    if rank_t < 2 {
        if rank_n < 2 {
            return Err(TelesimError::Ambiguous(diag()));
        }
        let class = if rank_t == 0 { CanonicalClass::A1 } else { CanonicalClass::A2 };
        return Ok(form(class, 0.0, thermal(0.0)));
    }
    if (tau - 1.0).abs() <= tol.unit_transmissivity {
        return Ok(match rank_n {
            0 => form(CanonicalClass::B2Id, 1.0, 0.0),
            1 => form(CanonicalClass::B1, 1.0, 0.0),
            _ => form(CanonicalClass::B2, 1.0, det_n.sqrt()),
        });
    }
    if rank_n < 2 {
        return Err(TelesimError::Ambiguous(diag()));
    }
    let class = if tau < 0.0 {
        CanonicalClass::D
    } else if tau < 1.0 {
        CanonicalClass::CAtt
    } else {
        CanonicalClass::CAmp
    };
    if tau == 0.0 {
        return Err(TelesimError::Ambiguous(diag()));
    }
    Ok(form(class, tau, thermal(tau)))
}
