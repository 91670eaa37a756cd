//! Uhlmann fidelity of Gaussian states and the closed forms used by the convergence
//! analysis.
//!
//! `F` here is the root fidelity `Tr√(√ρ σ √ρ)`, so the trace-distance sandwich reads
//! `2(1 − F) ≤ ‖ρ − σ‖₁ ≤ 2√(1 − F²)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dd::{self, Dd, DdMatrix};
use crate::error::{Result, TelesimError};
use crate::symplectic::{symplectic_eigenvalues, GaussianState};
use crate::teleport::bk_added_noise;
use crate::tolerance::Tolerances;

/// Lower and upper bounds on the trace distance `‖ρ − σ‖₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsPair {
    pub lower: f64,
    pub upper: f64,
}

fn is_pure(cm: &DMatrix<f64>, tol: f64) -> bool {
    symplectic_eigenvalues(cm)
        .map(|nus| nus.iter().all(|nu| (nu - 1.0).abs() <= tol))
        .unwrap_or(false)
}

/// Fidelity between two Gaussian states of one or two modes.
///
/// States whose symplectic spectrum lies within the purity tolerance of one are
/// treated as pure, which removes the square-root singularity of the general
/// formula at pure inputs.
pub fn gaussian_fidelity(s1: &GaussianState, s2: &GaussianState) -> Result<f64> {
    gaussian_fidelity_with(s1, s2, &Tolerances::default())
}

pub fn gaussian_fidelity_with(s1: &GaussianState, s2: &GaussianState, tol: &Tolerances) -> Result<f64> {
    if s1.modes() != s2.modes() {
        return Err(TelesimError::DimensionMismatch {
            expected: s1.modes(),
            got: s2.modes(),
        });
    }
    if s1.modes() > 2 {
        return Err(TelesimError::Unsupported("fidelity is implemented for one and two modes".into()));
    }
    if s1 == s2 {
        return Ok(1.0);
    }
    let delta: Vec<f64> = (s1.mean() - s2.mean()).iter().cloned().collect();
    let pure = is_pure(s1.cm(), tol.purity) || is_pure(s2.cm(), tol.purity);
    fidelity_kernel(s1.cm(), s2.cm(), &delta, pure)
}

/// Fidelity of two zero-mean states given by their CMs, bypassing state validation.
pub(crate) fn fidelity_of_cms(v1: &DMatrix<f64>, v2: &DMatrix<f64>) -> Result<f64> {
    let tol = Tolerances::default().purity;
    let pure = is_pure(v1, tol) || is_pure(v2, tol);
    fidelity_kernel(v1, v2, &vec![0.0; v1.nrows()], pure)
}

fn fidelity_kernel(v1: &DMatrix<f64>, v2: &DMatrix<f64>, delta: &[f64], pure: bool) -> Result<f64> {
    let dim = v1.nrows();
    let modes = dim / 2;
    let a = DdMatrix::from_f64(v1);
    let b = DdMatrix::from_f64(v2);
    let sum = a.add(&b);
    let det_sum = sum.det();
    if det_sum.to_f64() <= 0.0 {
        return Err(TelesimError::Numerical("V1 + V2 is singular".into()));
    }
    let mean_term = if delta.iter().all(|&x| x == 0.0) {
        Dd::ZERO
    } else {
        sum.inverse_quadratic_form(delta)
            .ok_or_else(|| TelesimError::Numerical("V1 + V2 is singular".into()))?
    };
    let scale = f64::from(1u32 << (2 * modes));

    // F⁴ without the displacement factor
    let f4 = if pure {
        // pure overlap: F² = 2ⁿ / √det(V1 + V2)
        Dd::new(scale) / det_sum
    } else {
        // aux spectrum w_k: eigenvalues ±i w_k of (V1+V2)⁻¹(Ω + V2ΩV1)
        let om = DdMatrix::omega(dim);
        let p = om.add(&b.mul(&om).mul(&a));
        let x = sum
            .solve(&p)
            .ok_or_else(|| TelesimError::Numerical("V1 + V2 is singular".into()))?;
        let q = p.det() / det_sum;
        let w2 = if modes == 1 {
            vec![q]
        } else {
            let pp = -(x.mul(&x).trace() * 0.5);
            dd::quadratic_roots(pp, q).to_vec()
        };
        let prod = w2.iter().fold(Dd::ONE, |acc, &w2k| {
            let w2k = if w2k.to_f64() < 1.0 { Dd::ONE } else { w2k };
            acc * (w2k.sqrt() + (w2k - Dd::ONE).max0().sqrt())
        });
        Dd::new(scale) * prod * prod / det_sum
    };
    let f = f4.to_f64().sqrt().sqrt() * (-0.25 * mean_term.to_f64()).exp();
    if !f.is_finite() {
        return Err(TelesimError::Numerical("fidelity evaluation overflowed".into()));
    }
    Ok(f.clamp(0.0, 1.0))
}

/// `d_B = √(2(1 − F))`.
pub fn bures_distance(s1: &GaussianState, s2: &GaussianState) -> Result<f64> {
    let f = gaussian_fidelity(s1, s2)?;
    Ok((2.0 * (1.0 - f)).max(0.0).sqrt())
}

/// Trace-distance sandwich `(2(1 − F), 2√(1 − F²))`.
pub fn fuchs_vdg(f: f64) -> Result<BoundsPair> {
    if !(0.0..=1.0).contains(&f) {
        return Err(TelesimError::domain("fidelity", f, "[0, 1]"));
    }
    Ok(BoundsPair {
        lower: 2.0 * (1.0 - f),
        upper: 2.0 * ((1.0 - f) * (1.0 + f)).sqrt(),
    })
}

fn check_at_least_one(name: &'static str, x: f64) -> Result<()> {
    if x >= 1.0 && x.is_finite() {
        Ok(())
    } else {
        Err(TelesimError::domain(name, x, "[1, ∞)"))
    }
}

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(TelesimError::domain(name, x, "(0, ∞)"))
    }
}

/// Fidelity between a TMSV input of variance `μ̃` and its image under teleportation
/// with a resource of variance `μ`.
///
/// Equals `(1 + μ̃ξ/2)^(−1/2)` with `ξ = ξ(μ)`, the exact fidelity of the output CM
/// `[[μ̃I, √(μ̃²−1)Z], [√(μ̃²−1)Z, (μ̃+ξ)I]]` against the input TMSV.
pub fn fid_output_identity(mu_tilde: f64, mu: f64) -> Result<f64> {
    check_at_least_one("mu_tilde", mu_tilde)?;
    let xi = bk_added_noise(mu)?;
    Ok(1.0 / (1.0 + 0.5 * mu_tilde * xi).sqrt())
}

/// An environmental fidelity together with `1 − F²`, which is what the upper
/// sandwich needs and which float64 cannot resolve once `F` is within 1e-16 of 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvFidelity {
    pub fidelity: f64,
    pub complement: f64,
}

impl EnvFidelity {
    const EXACT: EnvFidelity = EnvFidelity {
        fidelity: 1.0,
        complement: 0.0,
    };

    /// `F² = num/den`, with the complement formed before rounding.
    fn from_ratio(num: Dd, den: Dd) -> Self {
        let complement = ((den - num) / den).max0().to_f64().min(1.0);
        let f2 = (num / den).to_f64().clamp(0.0, 1.0);
        EnvFidelity {
            fidelity: f2.sqrt(),
            complement,
        }
    }

    /// `2√(1 − F²)`.
    pub fn trace_upper(&self) -> f64 {
        2.0 * self.complement.sqrt()
    }
}

fn d(x: f64) -> Dd {
    Dd::new(x)
}

/// `F² = 2k(√X + √Y)/(X − Y)` with `X − Y` supplied in factored form.
fn rationalized(k: Dd, x: Dd, y: Dd, x_minus_y: Dd) -> EnvFidelity {
    EnvFidelity::from_ratio(k * 2.0 * (x.sqrt() + y.max0().sqrt()), x_minus_y)
}

/// Fidelity between the thermal environment `ωI` and `ωI + γ·diag(r², r⁻²)`
/// (C-form environmental states).
pub fn fid_env_c(gamma: f64, omega: f64, r: f64) -> Result<f64> {
    Ok(fid_env_c_full(gamma, omega, r)?.fidelity)
}

pub fn fid_env_c_full(gamma: f64, omega: f64, r: f64) -> Result<EnvFidelity> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(TelesimError::domain("gamma", gamma, "[0, ∞)"));
    }
    check_at_least_one("omega", omega)?;
    check_positive("r", r)?;
    if gamma == 0.0 {
        return Ok(EnvFidelity::EXACT);
    }
    let (g, w, r) = (d(gamma), d(omega), d(r));
    let (w2, r2) = (w * w, r * r);
    let r4 = r2 * r2;
    let one = Dd::ONE;
    let wm = (w - one) * (w + one);
    let x = (g * r2 * w + w2 + one) * (g * w + r2 * (w2 + one));
    let y = wm * (g * w * (one + r4) + r2 * (g * g + wm));
    let diff = r2 * g * g + g * w * (one + r4) * 2.0 + r2 * w2 * 4.0;
    Ok(rationalized(r, x, y, diff))
}

/// D-form environmental fidelity, `ωI` versus `ωI − κ·diag(r², r⁻²)` with `κ ≤ 0`.
pub fn fid_env_d(kappa: f64, omega: f64, r: f64) -> Result<f64> {
    Ok(fid_env_d_full(kappa, omega, r)?.fidelity)
}

pub fn fid_env_d_full(kappa: f64, omega: f64, r: f64) -> Result<EnvFidelity> {
    if !(kappa <= 0.0 && kappa.is_finite()) {
        return Err(TelesimError::domain("kappa", kappa, "(-∞, 0]"));
    }
    fid_env_c_full(-kappa, omega, r)
}

/// A2-form environmental fidelity, `ωI` versus `diag(ξ(a²+c²) + ω, ω)`.
pub fn fid_env_a2(xi: f64, omega: f64, a: f64, c: f64) -> Result<f64> {
    Ok(fid_env_a2_full(xi, omega, a, c)?.fidelity)
}

pub fn fid_env_a2_full(xi: f64, omega: f64, a: f64, c: f64) -> Result<EnvFidelity> {
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(TelesimError::domain("xi", xi, "[0, ∞)"));
    }
    check_at_least_one("omega", omega)?;
    if !(a.is_finite() && c.is_finite()) {
        return Err(TelesimError::Validation("a and c must be finite".into()));
    }
    if xi == 0.0 || (a == 0.0 && c == 0.0) {
        return Ok(EnvFidelity::EXACT);
    }
    let one = Dd::ONE;
    let w = d(omega);
    let s = d(xi) * w * (d(a) * d(a) + d(c) * d(c));
    let w2 = w * w;
    let wm = (w - one) * (w + one);
    let x = (w2 + one) * (s + w2 + one);
    let y = wm * (s + wm);
    Ok(rationalized(one, x, y, s * 2.0 + w2 * 4.0))
}

/// Leading coefficient of `F⁴ ≃ γ/μ̃` for the B1 witness with input row `(a, c)` and
/// teleportation noise `ξ`: `γ = 8(s + ξ)/(ξ(2s + ξ)²)`, `s = a² + c²`.
pub fn b1_gamma(a: f64, c: f64, xi: f64) -> Result<f64> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(TelesimError::domain("xi", xi, "(0, ∞) (the coefficient diverges at 0)"));
    }
    let s = a * a + c * c;
    if !(s > 0.0 && s.is_finite()) {
        return Err(TelesimError::Validation(
            "(a, c) = (0, 0) cannot be the first row of a symplectic matrix".into(),
        ));
    }
    Ok(8.0 * (s + xi) / (xi * (2.0 * s + xi).powi(2)))
}

/// `τ → 1` limit of the environmental fidelity for the additive form `B2(ξ′)` under
/// teleportation noise `ξ` and input squeezing `r`.
pub fn fid_b2_asymptotic(xi: f64, xi_prime: f64, r: f64) -> Result<f64> {
    Ok(fid_b2_asymptotic_full(xi, xi_prime, r)?.fidelity)
}

pub fn fid_b2_asymptotic_full(xi: f64, xi_prime: f64, r: f64) -> Result<EnvFidelity> {
    check_positive("xi", xi)?;
    check_positive("xi_prime", xi_prime)?;
    check_positive("r", r)?;
    let (x, xp, r) = (d(xi), d(xi_prime), d(r));
    let r2 = r * r;
    let r4 = r2 * r2;
    let one = Dd::ONE;
    let num = r * xp * (x * xp * (one + r4) + r2 * (x * x + xp * xp)).sqrt();
    let den = x * xp * (one + r4) * 2.0 + r2 * (x * x + xp * xp * 4.0);
    Ok(EnvFidelity::from_ratio(num * 4.0, den))
}
