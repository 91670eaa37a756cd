//! Teleportation simulation of Gaussian channels through a finite-energy resource.
//!
//! Teleporting with a TMSV resource of variance `μ` acts, on the second moments, as
//! an additive-noise channel with `ξ(μ) = 2[μ − √(μ²−1)]`. Simulating a channel `E` by
//! teleportation therefore realizes `E ∘ I^μ`, whose noise matrix is `N + ξTTᵀ`.

use nalgebra::{Matrix2, Vector2};

use crate::channels::{apply_channel, compose, default_channel_tol, CanonicalClass, CanonicalForm, GaussianChannel};
use crate::error::{Result, TelesimError};
use crate::symplectic::{pauli_z, thermal_state, tmsv_state, GaussianState};

/// Resource variance `μ` and the induced added noise `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BkParameters {
    pub mu: f64,
    pub xi: f64,
}

impl BkParameters {
    pub fn new(mu: f64) -> Result<Self> {
        Ok(Self {
            mu,
            xi: bk_added_noise(mu)?,
        })
    }
}

/// `ξ(μ) = 2[μ − √(μ²−1)]`, evaluated as `2/(μ + √(μ²−1))`.
pub fn bk_added_noise(mu: f64) -> Result<f64> {
    if !(mu >= 1.0) || mu.is_nan() {
        return Err(TelesimError::domain("mu", mu, "[1, ∞)"));
    }
    if mu.is_infinite() {
        return Ok(0.0);
    }
    Ok(2.0 / (mu + ((mu - 1.0) * (mu + 1.0)).sqrt()))
}

/// The additive-noise channel `V ↦ V + ξ(μ)I` realized by teleportation.
pub fn bk_channel(mu: f64) -> Result<GaussianChannel> {
    let xi = bk_added_noise(mu)?;
    Ok(GaussianChannel::raw(
        Matrix2::identity(),
        Matrix2::identity() * xi,
        Vector2::zeros(),
    ))
}

/// `N + ξTTᵀ`.
pub fn modified_noise(base: &GaussianChannel, xi: f64) -> Matrix2<f64> {
    let n = base.n() + base.t() * base.t().transpose() * xi;
    0.5 * (n + n.transpose())
}

/// A channel together with its teleportation simulation at resource variance `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedChannel {
    pub base: GaussianChannel,
    pub params: BkParameters,
    pub effective: GaussianChannel,
}

/// `E^μ = E ∘ I^μ`.
pub fn simulate_channel(base: &GaussianChannel, mu: f64) -> Result<SimulatedChannel> {
    let params = BkParameters::new(mu)?;
    let effective = compose(base, &bk_channel(mu)?)?;
    let direct = modified_noise(base, params.xi);
    let scale = direct.abs().max().max(1.0);
    if (effective.n() - direct).abs().max() > 1e-12 * scale {
        return Err(TelesimError::Numerical(
            "composed noise disagrees with N + ξTTᵀ".into(),
        ));
    }
    Ok(SimulatedChannel {
        base: base.clone(),
        params,
        effective,
    })
}

/// `(I ⊗ E)(Φ^μ)`: the channel applied to the second mode of a TMSV state.
pub fn quasi_choi(base: &GaussianChannel, mu: f64) -> Result<GaussianState> {
    let base = base.clone().checked(default_channel_tol())?;
    apply_channel(&base, &tmsv_state(mu)?, 1)
}

/// Environment states of a dilation with and without teleportation noise.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentalPair {
    /// Thermal environment of the exact channel.
    pub rho_e: GaussianState,
    /// Environment reproducing the simulated channel through the same unitary.
    pub rho_e_mu: GaussianState,
    pub dilation_class: CanonicalClass,
}

fn supported(form: &CanonicalForm) -> Result<()> {
    match form.class {
        CanonicalClass::A2 | CanonicalClass::CAtt | CanonicalClass::CAmp | CanonicalClass::D => Ok(()),
        other => Err(TelesimError::Unsupported(format!(
            "environmental pair is defined for A2, C and D forms, not {other}"
        ))),
    }
}

/// Noise ratio `γ = ξτ/|1−τ|` of the C form (its negative `κ` for the D form).
pub fn environment_noise_ratio(form: &CanonicalForm, xi: f64) -> f64 {
    xi * form.tau / (1.0 - form.tau).abs()
}

/// Environment CM `W̃` that, fed to the canonical dilation of `form`, realizes the
/// simulated channel `C ∘ U_A ∘ I^μ ∘ U_A⁻¹`, where `s_a` is the input symplectic `S_A`.
pub fn simulated_environment_cm(form: &CanonicalForm, xi: f64, s_a: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    supported(form)?;
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(TelesimError::domain("xi", xi, "[0, ∞)"));
    }
    let w = form.environment_variance();
    let ss = s_a * s_a.transpose();
    let z = pauli_z();
    let ratio = environment_noise_ratio(form, xi);
    let extra = match form.class {
        CanonicalClass::CAtt => ss * ratio,
        CanonicalClass::CAmp | CanonicalClass::D => z * ss * z * ratio.abs(),
        CanonicalClass::A2 => Matrix2::new(ss[(0, 0)] * xi, 0.0, 0.0, 0.0),
        _ => unreachable!(),
    };
    Ok(Matrix2::identity() * w + extra)
}

/// Environmental pair in the frame where `W̃` is diagonal.
///
/// For C and D forms `S_A` enters only through its Bloch-Messiah squeezing `squeeze_r`;
/// for the A2 form only through the first-row entries `a`, `c`.
pub fn environmental_pair(
    form: &CanonicalForm,
    mu: f64,
    squeeze_r: f64,
    a: f64,
    c: f64,
) -> Result<EnvironmentalPair> {
    supported(form)?;
    let xi = bk_added_noise(mu)?;
    let w = form.environment_variance();
    let cm = match form.class {
        CanonicalClass::A2 => {
            if !(a.is_finite() && c.is_finite()) {
                return Err(TelesimError::Validation("a and c must be finite".into()));
            }
            Matrix2::new(xi * (a * a + c * c) + w, 0.0, 0.0, w)
        }
        _ => {
            if !(squeeze_r > 0.0 && squeeze_r.is_finite()) {
                return Err(TelesimError::domain("squeeze_r", squeeze_r, "(0, ∞)"));
            }
            let g = environment_noise_ratio(form, xi).abs();
            let r2 = squeeze_r * squeeze_r;
            Matrix2::new(w + g * r2, 0.0, 0.0, w + g / r2)
        }
    };
    let rho_e_mu = GaussianState::centered(nalgebra::DMatrix::from_iterator(2, 2, cm.iter().cloned()))?;
    Ok(EnvironmentalPair {
        rho_e: thermal_state(w)?,
        rho_e_mu,
        dilation_class: form.class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{classify, numeric_rank};
    use crate::dilation::dilation_of;
    use crate::symplectic::SymplecticMatrix;
    use crate::tolerance::Tolerances;

    #[test]
    fn added_noise_examples() {
        assert_eq!(bk_added_noise(1.0).unwrap(), 2.0);
        assert_eq!(bk_added_noise(1.25).unwrap(), 1.0);
        let xi = bk_added_noise(1e6).unwrap();
        assert!((xi / 1e-6 - 1.0).abs() < 1e-12);
        assert!(bk_added_noise(0.99).is_err());
        assert!(bk_added_noise(f64::NAN).is_err());
    }

    #[test]
    fn bk_channel_is_additive() {
        let f = classify(&bk_channel(2.0).unwrap(), &Tolerances::default()).unwrap();
        assert_eq!(f.class, CanonicalClass::B2);
        let f = classify(&bk_channel(1.25).unwrap(), &Tolerances::default()).unwrap();
        assert_eq!(f.noise_param, 1.0);
    }

    #[test]
    fn simulated_noise() {
        let s = simulate_channel(&GaussianChannel::identity(), 1.25).unwrap();
        assert_eq!(s.effective.n(), &Matrix2::identity());

        let b1 = GaussianChannel::raw(Matrix2::identity(), Matrix2::new(0.0, 0.0, 0.0, 1.0), Vector2::zeros());
        let s = simulate_channel(&b1, 3.0).unwrap();
        let xi = s.params.xi;
        assert!((s.effective.n() - Matrix2::new(xi, 0.0, 0.0, 1.0 + xi)).abs().max() < 1e-15);
        assert_eq!(numeric_rank(s.effective.n(), &Tolerances::default()), 2);

        let loss = CanonicalForm::thermal_loss(0.3, 0.8).unwrap();
        let s = simulate_channel(&GaussianChannel::from_canonical(&loss), 2.0).unwrap();
        let want = 0.7 * 2.6 + s.params.xi * 0.3;
        assert!((s.effective.n() - Matrix2::identity() * want).abs().max() < 1e-14);
    }

    #[test]
    fn quasi_choi_blocks() {
        let t = quasi_choi(&GaussianChannel::identity(), 3.0).unwrap();
        assert_eq!(t, tmsv_state(3.0).unwrap());

        let (tau, mu) = (0.4, 3.0);
        let loss = GaussianChannel::from_canonical(&CanonicalForm::thermal_loss(tau, 0.0).unwrap());
        let q = quasi_choi(&loss, mu).unwrap();
        assert!((q.cm()[(2, 2)] - (tau * mu + 1.0 - tau)).abs() < 1e-14);
        let cross = tau.sqrt() * (mu * mu - 1.0f64).sqrt();
        assert!((q.cm()[(0, 2)] - cross).abs() < 1e-14);
        assert!((q.cm()[(1, 3)] + cross).abs() < 1e-14);

        let a1 = GaussianChannel::from_canonical(&CanonicalForm::new(CanonicalClass::A1, 0.0, 0.0).unwrap());
        let q = quasi_choi(&a1, mu).unwrap();
        assert!(q.cm().view((0, 2), (2, 2)).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn environmental_pair_examples() {
        let loss = CanonicalForm::thermal_loss(0.5, 0.0).unwrap();
        let p = environmental_pair(&loss, 1.25, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(p.rho_e_mu.cm(), &(nalgebra::DMatrix::identity(2, 2) * 2.0));
        assert!((p.rho_e_mu.symplectic_spectrum()[0] - 2.0).abs() < 1e-15);

        let p = environmental_pair(&loss, f64::INFINITY, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(p.rho_e_mu, p.rho_e);

        // ξ = 0.5 needs μ with 2/(μ+√(μ²−1)) = 0.5, i.e. μ = 17/8
        let a2 = CanonicalForm::new(CanonicalClass::A2, 0.0, 0.0).unwrap();
        let p = environmental_pair(&a2, 17.0 / 8.0, 1.0, 1.0, 0.0).unwrap();
        assert!((p.rho_e_mu.cm()[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((p.rho_e_mu.symplectic_spectrum()[0] - 1.5f64.sqrt()).abs() < 1e-15);

        assert!(environmental_pair(&CanonicalForm::identity(), 2.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn same_unitary_different_environment() {
        let s_a = SymplecticMatrix::rotation(0.4)
            .then_after(&SymplecticMatrix::squeezer(1.7).unwrap())
            .then_after(&SymplecticMatrix::rotation(-0.9));
        let s_a = Matrix2::from_iterator(s_a.matrix().iter().cloned());
        let forms = [
            CanonicalForm::thermal_loss(0.3, 0.5).unwrap(),
            CanonicalForm::amplifier(1.8, 0.2).unwrap(),
            CanonicalForm::conjugate_amplifier(-0.6, 1.1).unwrap(),
            CanonicalForm::new(CanonicalClass::A2, 0.0, 0.4).unwrap(),
        ];
        let xi = 0.37;
        for form in forms {
            let w = simulated_environment_cm(&form, xi, &s_a).unwrap();
            let env = GaussianState::centered(nalgebra::DMatrix::from_iterator(2, 2, w.iter().cloned())).unwrap();
            let via = dilation_of(&form).unwrap().with_environment(env).unwrap().induced_channel();
            let (t, n) = crate::channels::canonical_matrices(&form);
            let want = n + t * s_a * s_a.transpose() * t.transpose() * xi;
            assert!((via.n() - want).abs().max() < 1e-12, "{form:?}");
        }
    }
}
