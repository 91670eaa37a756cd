//! Error propagation through adaptive protocols.
//!
//! Replacing each of `n` channel uses by its teleportation simulation costs at most
//! `δ` per use in trace distance, so the final states differ by at most `nδ`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::channels::{apply_channel, GaussianChannel};
use crate::convergence::{decide_uniform, diamond_upper_bound, InputFrame};
use crate::error::{Result, TelesimError};
use crate::fidelity::{fuchs_vdg, gaussian_fidelity};
use crate::symplectic::{apply_affine, tmsv_state, GaussianState, SymplecticMatrix};
use crate::teleport::{quasi_choi, simulate_channel};

/// How closely the simulated channel must track the true one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Energy-constrained diamond distance.
    BoundedUniform,
    /// Unconstrained diamond distance; needs a full-rank noise matrix.
    Uniform,
    /// Pointwise on the protocol states.
    Strong,
}

impl Topology {
    pub const ALL: [Topology; 3] = [Topology::BoundedUniform, Topology::Uniform, Topology::Strong];

    pub fn name(self) -> &'static str {
        match self {
            Topology::BoundedUniform => "bounded_uniform",
            Topology::Uniform => "uniform",
            Topology::Strong => "strong",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Topology {
    type Err = TelesimError;

    fn from_str(s: &str) -> Result<Self> {
        Topology::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| TelesimError::Validation(format!("unknown topology '{s}'")))
    }
}

/// An `n`-round protocol over one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveProtocolSpec {
    pub rounds: u64,
    pub channel: GaussianChannel,
    /// Mean total photon number allowed at the channel inputs.
    pub energy_bound: Option<f64>,
    pub topology: Topology,
}

impl AdaptiveProtocolSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(TelesimError::Validation("a protocol needs at least one round".into()));
        }
        if let Some(e) = self.energy_bound {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(TelesimError::domain("energy_bound", e, "[0, ∞)"));
            }
        }
        match self.topology {
            Topology::BoundedUniform if self.energy_bound.is_none() => Err(TelesimError::Validation(
                "the bounded-uniform topology needs an energy bound".into(),
            )),
            Topology::Uniform if !decide_uniform(&self.channel)?.uniform => Err(TelesimError::NoUniformBound(
                "uniform topology requires a full-rank noise matrix".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeelingBound {
    pub rounds: u64,
    pub per_use_delta: f64,
    pub total: f64,
    pub topology: Topology,
}

/// `n δ`, with `δ ∈ [0, 2]` the per-use distance.
pub fn peel_bound(rounds: u64, delta: f64, topology: Topology) -> Result<PeelingBound> {
    if rounds == 0 {
        return Err(TelesimError::Validation("rounds must be at least 1".into()));
    }
    if !(0.0..=2.0).contains(&delta) {
        return Err(TelesimError::domain("delta", delta, "[0, 2]"));
    }
    Ok(PeelingBound {
        rounds,
        per_use_delta: delta,
        total: rounds as f64 * delta,
        topology,
    })
}

/// Extra inputs to [`epsilon_tp_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonParams {
    pub frame: InputFrame,
    /// Recorded as metadata for the bounded-uniform topology; sets the probe energy for
    /// the strong topology when no probe is given.
    pub energy_bound: Option<f64>,
    /// TMSV variance of the probe state for the strong topology.
    pub probe_mu_tilde: Option<f64>,
}

impl Default for EpsilonParams {
    fn default() -> Self {
        Self {
            frame: InputFrame::Derived,
            energy_bound: None,
            probe_mu_tilde: None,
        }
    }
}

/// Per-use distance `δ` under the chosen topology.
///
/// The uniform and bounded-uniform topologies use the channel-level diamond bound. The
/// strong topology uses a per-state bound: the Fuchs-van de Graaf upper bound between
/// the true and simulated outputs for a TMSV probe.
pub fn per_use_delta(ch: &GaussianChannel, mu: f64, topology: Topology, params: &EpsilonParams) -> Result<f64> {
    match topology {
        Topology::Uniform => diamond_upper_bound(ch, mu, params.frame),
        Topology::BoundedUniform => {
            if params.energy_bound.is_none() {
                return Err(TelesimError::Validation(
                    "the bounded-uniform topology needs an energy bound".into(),
                ));
            }
            diamond_upper_bound(ch, mu, params.frame)
        }
        Topology::Strong => {
            let probe = match (params.probe_mu_tilde, params.energy_bound) {
                (Some(mt), _) => mt,
                (None, Some(e)) => 2.0 * e + 1.0,
                (None, None) => {
                    return Err(TelesimError::Validation(
                        "the strong topology needs a probe variance or an energy bound".into(),
                    ))
                }
            };
            let sim = simulate_channel(ch, mu)?;
            let f = gaussian_fidelity(&quasi_choi(&sim.effective, probe)?, &quasi_choi(ch, probe)?)?;
            Ok(fuchs_vdg(f)?.upper)
        }
    }
}

/// `ε_TP ≤ n δ / 2`; may exceed 1, in which case it carries no information.
pub fn epsilon_tp_bound(
    rounds: u64,
    mu: f64,
    ch: &GaussianChannel,
    topology: Topology,
    params: &EpsilonParams,
) -> Result<f64> {
    let delta = per_use_delta(ch, mu, topology, params)?;
    Ok(peel_bound(rounds, delta, topology)?.total / 2.0)
}

/// Parameters of the two-round protocol: TMSV input of variance `input_mu` on
/// (reference, channel mode), channel, two-mode squeezer, channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoConfig {
    pub mu: f64,
    /// Squeezing parameter `s` of the interleaved two-mode squeezer (variance `cosh 2s`).
    pub squeeze: f64,
    pub input_mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoReport {
    pub mu: f64,
    pub squeeze: f64,
    pub input_mu: f64,
    /// Fidelity between the true and simulated two-round outputs.
    pub fidelity: f64,
    /// `2√(1 − F²)` for the two-round outputs.
    pub trace_upper: f64,
    /// Per-use diamond bound.
    pub delta: f64,
    /// Purified-distance bounds `2√(1 − F²)` of the two single-use replacements.
    pub step_bounds: [f64; 2],
    /// `trace_upper ≤ 2δ`.
    pub holds: bool,
    /// `trace_upper ≤ step_bounds[0] + step_bounds[1]`.
    pub chain_holds: bool,
}

/// Slack for comparing square-root distances that are evaluated in floating point.
const DEMO_SLACK: f64 = 1e-7;

/// Runs the two-round protocol with the true and the simulated channel and compares
/// the final distance with the peeling bound `2δ`.
pub fn two_round_demo(ch: &GaussianChannel, cfg: &DemoConfig) -> Result<DemoReport> {
    if !cfg.squeeze.is_finite() {
        return Err(TelesimError::domain("squeeze", cfg.squeeze, "finite"));
    }
    let delta = diamond_upper_bound(ch, cfg.mu, InputFrame::Derived)?;
    let sim = simulate_channel(ch, cfg.mu)?.effective;
    let locc = SymplecticMatrix::two_mode_squeezer(cfg.squeeze);
    let zero = DVector::zeros(4);
    let input = tmsv_state(cfg.input_mu)?;

    let round = |first: &GaussianChannel, second: &GaussianChannel| -> Result<GaussianState> {
        let s = apply_channel(first, &input, 1)?;
        let s = apply_affine(&s, &locc, &zero)?;
        apply_channel(second, &s, 1)
    };
    let distance = |a: &GaussianState, b: &GaussianState| -> Result<(f64, f64)> {
        let f = gaussian_fidelity(a, b)?;
        Ok((f, fuchs_vdg(f)?.upper))
    };

    let exact = round(ch, ch)?;
    let simulated = round(&sim, &sim)?;
    // hybrid: simulated first use, true second use
    let hybrid = round(&sim, ch)?;
    let (fidelity, trace_upper) = distance(&exact, &simulated)?;
    let step_bounds = [distance(&simulated, &hybrid)?.1, distance(&hybrid, &exact)?.1];
    Ok(DemoReport {
        mu: cfg.mu,
        squeeze: cfg.squeeze,
        input_mu: cfg.input_mu,
        fidelity,
        trace_upper,
        delta,
        step_bounds,
        holds: trace_upper <= 2.0 * delta + DEMO_SLACK,
        chain_holds: trace_upper <= step_bounds[0] + step_bounds[1] + DEMO_SLACK,
    })
}
