//! Secret-key capacity bounds and their finite-size, finite-energy corrections.
//!
//! All rates are in bits per channel use.

use serde::{Serialize, Serializer};

use crate::channels::{classify, CanonicalClass, GaussianChannel};
use crate::error::{Result, TelesimError};
use crate::peeling::{epsilon_tp_bound, EpsilonParams, Topology};
use crate::tolerance::Tolerances;

/// `h(x) = (x+1) log₂(x+1) − x log₂ x`, with `h(0) = 0`.
pub fn entropic_h(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(TelesimError::domain("x", x, "[0, ∞)"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((x + 1.0) * (x + 1.0).log2() - x * x.log2())
}

/// Which capacity formula a report evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    ThermalLoss,
    Amplifier,
    AdditiveNoise,
    /// Capacity bound plus the finite-size correction.
    StrongConverse,
}

fn serialize_value<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

/// Parameters a bound was evaluated at; absent entries do not apply to the formula.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BoundInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<Topology>,
}

/// Intermediate quantities of [`corrected_key_bound`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub class: CanonicalClass,
    #[serde(serialize_with = "serialize_value")]
    pub phi: f64,
    pub phi_threshold_active: bool,
    pub delta: f64,
    /// `n δ / 2` before clamping.
    pub epsilon_tp_raw: f64,
    pub epsilon_tp: f64,
    pub overall_error: f64,
    #[serde(serialize_with = "serialize_value")]
    pub c_epsilon: f64,
    /// Strong-converse bound at the same `n` and `ε` without teleportation error.
    #[serde(serialize_with = "serialize_value")]
    pub clean_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// `null` in JSON when `unbounded`.
    #[serde(serialize_with = "serialize_value")]
    pub value: f64,
    pub formula: Formula,
    pub inputs: BoundInputs,
    /// The bound vanishes because the noise reaches the threshold.
    pub threshold_active: bool,
    /// The bound is `+∞`.
    pub unbounded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl BoundReport {
    fn new(value: f64, formula: Formula, inputs: BoundInputs, threshold_active: bool) -> Self {
        Self {
            value,
            formula,
            inputs,
            threshold_active,
            unbounded: value.is_infinite(),
            provenance: None,
        }
    }
}

fn check_nbar(nbar: f64) -> Result<()> {
    if nbar >= 0.0 && nbar.is_finite() {
        Ok(())
    } else {
        Err(TelesimError::domain("nbar", nbar, "[0, ∞)"))
    }
}

/// Thermal-loss bound `−log₂[(1−τ) τ^n̄] − h(n̄)` for `n̄ < τ/(1−τ)`, else 0.
pub fn phi_loss(tau: f64, nbar: f64) -> Result<BoundReport> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(TelesimError::domain("tau", tau, "[0, 1]"));
    }
    check_nbar(nbar)?;
    let inputs = BoundInputs {
        tau: Some(tau),
        nbar: Some(nbar),
        ..Default::default()
    };
    if nbar >= tau / (1.0 - tau) {
        return Ok(BoundReport::new(0.0, Formula::ThermalLoss, inputs, true));
    }
    let value = if nbar == 0.0 {
        -(-tau).ln_1p() / std::f64::consts::LN_2
    } else {
        -(1.0 - tau).log2() - nbar * tau.log2() - entropic_h(nbar)?
    };
    Ok(BoundReport::new(value.max(0.0), Formula::ThermalLoss, inputs, false))
}

/// Amplifier bound `log₂[τ^{n̄+1}/(τ−1)] − h(n̄)` for `n̄ < 1/(τ−1)`, else 0.
pub fn phi_amp(tau: f64, nbar: f64) -> Result<BoundReport> {
    if !(tau > 1.0) || !tau.is_finite() {
        return Err(TelesimError::domain("tau", tau, "(1, ∞)"));
    }
    check_nbar(nbar)?;
    let inputs = BoundInputs {
        tau: Some(tau),
        nbar: Some(nbar),
        ..Default::default()
    };
    if nbar >= 1.0 / (tau - 1.0) {
        return Ok(BoundReport::new(0.0, Formula::Amplifier, inputs, true));
    }
    let value = (nbar + 1.0) * tau.log2() - (tau - 1.0).log2() - entropic_h(nbar)?;
    Ok(BoundReport::new(value.max(0.0), Formula::Amplifier, inputs, false))
}

/// Additive-noise bound `(ξ−1)/ln 2 − log₂ ξ` for `ξ < 1`, else 0; `ξ = 0` is unbounded.
pub fn phi_add(xi: f64) -> Result<BoundReport> {
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(TelesimError::domain("xi", xi, "[0, ∞)"));
    }
    let inputs = BoundInputs {
        xi: Some(xi),
        ..Default::default()
    };
    if xi >= 1.0 {
        return Ok(BoundReport::new(0.0, Formula::AdditiveNoise, inputs, true));
    }
    let value = if xi == 0.0 {
        f64::INFINITY
    } else {
        ((xi - 1.0) / std::f64::consts::LN_2 - xi.log2()).max(0.0)
    };
    Ok(BoundReport::new(value, Formula::AdditiveNoise, inputs, false))
}

/// `C(ε) = log₂ 6 + 2 log₂[(1+ε)/(1−ε)]` for `ε ∈ (0, 1)`; `+∞` at `ε = 1`.
pub fn c_epsilon(eps: f64) -> Result<f64> {
    if eps == 1.0 {
        return Ok(f64::INFINITY);
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(TelesimError::domain("eps", eps, "(0, 1)"));
    }
    Ok(6f64.log2() + 2.0 * (eps.ln_1p() - (-eps).ln_1p()) / std::f64::consts::LN_2)
}

/// `min{1, (√ε + √ε_TP)²}`.
pub fn overall_error(eps: f64, eps_tp: f64) -> Result<f64> {
    for (name, v) in [("eps", eps), ("eps_tp", eps_tp)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(TelesimError::domain(name, v, "[0, 1]"));
        }
    }
    if eps_tp == 0.0 {
        return Ok(eps);
    }
    let s = eps.sqrt() + eps_tp.sqrt();
    Ok((s * s).min(1.0))
}

/// `Φ + √(V / (n(1−ε))) + C(ε)/n`.
pub fn strong_converse_bound(phi: f64, variance: f64, rounds: u64, eps: f64) -> Result<f64> {
    if !(phi >= 0.0) {
        return Err(TelesimError::domain("phi", phi, "[0, ∞]"));
    }
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(TelesimError::domain("variance", variance, "[0, ∞)"));
    }
    if rounds == 0 {
        return Err(TelesimError::Validation("rounds must be at least 1".into()));
    }
    let c = c_epsilon(eps)?;
    if c.is_infinite() || phi.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let n = rounds as f64;
    Ok(phi + (variance / (n * (1.0 - eps))).sqrt() + c / n)
}

fn capacity_of(class: CanonicalClass, tau: f64, noise: f64) -> Result<BoundReport> {
    match class {
        CanonicalClass::CAtt => phi_loss(tau, noise),
        CanonicalClass::CAmp => phi_amp(tau, noise),
        CanonicalClass::B2 => phi_add(noise),
        CanonicalClass::B2Id => phi_add(0.0),
        other => Err(TelesimError::Unsupported(format!(
            "no capacity bound is available for {other} channels"
        ))),
    }
}

/// Finite-size key bound for `n` uses of a teleportation-simulated channel.
///
/// The teleportation error `ε_TP ≤ nδ/2` is clamped at 1 before it enters the overall
/// error; an overall error of 1 makes `C(ε)` and hence the bound infinite.
pub fn corrected_key_bound(
    ch: &GaussianChannel,
    rounds: u64,
    eps: f64,
    mu: f64,
    variance: f64,
    topology: Topology,
    params: &EpsilonParams,
) -> Result<BoundReport> {
    let form = classify(ch, &Tolerances::default())?;
    let phi = capacity_of(form.class, form.tau, form.noise_param)?;
    let clean_bound = strong_converse_bound(phi.value, variance, rounds, eps)?;
    let epsilon_tp_raw = epsilon_tp_bound(rounds, mu, ch, topology, params)?;
    let delta = 2.0 * epsilon_tp_raw / rounds as f64;
    let epsilon_tp = epsilon_tp_raw.min(1.0);
    let total_error = overall_error(eps, epsilon_tp)?;
    let c = c_epsilon(total_error)?;
    let value = if total_error >= 1.0 {
        f64::INFINITY
    } else {
        strong_converse_bound(phi.value, variance, rounds, total_error)?
    };
    let inputs = BoundInputs {
        tau: Some(form.tau),
        nbar: phi.inputs.nbar,
        xi: phi.inputs.xi,
        rounds: Some(rounds),
        eps: Some(eps),
        mu: Some(mu),
        variance: Some(variance),
        topology: Some(topology),
    };
    Ok(BoundReport {
        value,
        formula: Formula::StrongConverse,
        inputs,
        threshold_active: phi.threshold_active,
        unbounded: value.is_infinite(),
        provenance: Some(Provenance {
            class: form.class,
            phi: phi.value,
            phi_threshold_active: phi.threshold_active,
            delta,
            epsilon_tp_raw,
            epsilon_tp,
            overall_error: total_error,
            c_epsilon: c,
            clean_bound,
        }),
    })
}
