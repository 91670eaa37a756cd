//! JSON input and output formats for channels, states and tolerances.

use std::io::Read;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use telesim::channels::{CanonicalClass, CanonicalForm, GaussianChannel};
use telesim::nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use telesim::symplectic::GaussianState;
use telesim::Tolerances;

/// Reads an argument that is inline JSON, `@path` or `-` for stdin.
pub fn read_source(arg: &str) -> Result<String> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
        Ok(s)
    } else if let Some(path) = arg.strip_prefix('@') {
        std::fs::read_to_string(path).with_context(|| format!("reading {path}"))
    } else {
        Ok(arg.to_string())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    t: [[f64; 2]; 2],
    n: [[f64; 2]; 2],
    #[serde(default)]
    d: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalChannel {
    class: String,
    tau: Option<f64>,
    nbar: Option<f64>,
    xi: Option<f64>,
}

/// Channel as emitted by the CLI; re-parses to the identical channel.
#[derive(Debug, Serialize)]
pub struct RawChannelOut {
    pub t: [[f64; 2]; 2],
    pub n: [[f64; 2]; 2],
    pub d: [f64; 2],
}

fn matrix2(rows: [[f64; 2]; 2]) -> Matrix2<f64> {
    Matrix2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
}

fn rows2(m: &Matrix2<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

pub fn channel_to_json(ch: &GaussianChannel) -> RawChannelOut {
    RawChannelOut {
        t: rows2(ch.t()),
        n: rows2(ch.n()),
        d: [ch.d()[0], ch.d()[1]],
    }
}

fn canonical_form(spec: CanonicalChannel) -> Result<CanonicalForm> {
    let class: CanonicalClass = spec.class.parse()?;
    let (takes_tau, takes_nbar, takes_xi) = match class {
        CanonicalClass::CAtt | CanonicalClass::CAmp | CanonicalClass::D => (true, true, false),
        CanonicalClass::A1 | CanonicalClass::A2 => (false, true, false),
        CanonicalClass::B2 => (false, false, true),
        CanonicalClass::B1 | CanonicalClass::B2Id => (false, false, false),
    };
    for (key, given, allowed) in [
        ("tau", spec.tau.is_some(), takes_tau),
        ("nbar", spec.nbar.is_some(), takes_nbar),
        ("xi", spec.xi.is_some(), takes_xi),
    ] {
        if given && !allowed {
            bail!("key \"{key}\" does not apply to class {class}");
        }
    }
    let noise = if takes_xi {
        spec.xi.context("class B2 needs \"xi\"")?
    } else {
        spec.nbar.unwrap_or(0.0)
    };
    let tau = if takes_tau {
        spec.tau.with_context(|| format!("class {class} needs \"tau\""))?
    } else {
        0.0
    };
    Ok(CanonicalForm::new(class, tau, noise)?)
}

/// Parses a raw `{"t", "n", "d"}` or canonical `{"class", ...}` channel and validates it.
pub fn parse_channel(text: &str, tol: &Tolerances) -> Result<GaussianChannel> {
    let value: Value = serde_json::from_str(text).context("channel is not valid JSON")?;
    let ch = if value.get("class").is_some() {
        let spec: CanonicalChannel = serde_json::from_value(value).context("invalid canonical channel")?;
        GaussianChannel::from_canonical(&canonical_form(spec)?)
    } else {
        let raw: RawChannel = serde_json::from_value(value).context("invalid raw channel")?;
        GaussianChannel::raw(matrix2(raw.t), matrix2(raw.n), Vector2::new(raw.d[0], raw.d[1]))
    };
    Ok(ch.checked(tol.uncertainty)?)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateJson {
    pub mean: Vec<f64>,
    pub cm: Vec<Vec<f64>>,
}

pub fn parse_state(text: &str, tol: &Tolerances) -> Result<GaussianState> {
    let s: StateJson = serde_json::from_str(text).context("invalid state JSON")?;
    let dim = s.cm.len();
    if s.cm.iter().any(|row| row.len() != dim) {
        bail!("covariance matrix must be square");
    }
    if s.mean.len() != dim {
        bail!("mean has length {} but the covariance matrix is {dim}×{dim}", s.mean.len());
    }
    let cm = DMatrix::from_fn(dim, dim, |i, j| s.cm[i][j]);
    Ok(GaussianState::with_tolerances(DVector::from_vec(s.mean), cm, tol)?)
}

pub fn state_to_json(state: &GaussianState) -> StateJson {
    let cm = state.cm();
    StateJson {
        mean: state.mean().iter().copied().collect(),
        cm: (0..cm.nrows()).map(|i| cm.row(i).iter().copied().collect()).collect(),
    }
}

/// Tolerance override: a single number sets the validation tolerances, otherwise a
/// comma-separated list of `field=value` pairs.
pub fn parse_tolerances(text: &str) -> Result<Tolerances> {
    let text = text.trim();
    if let Ok(v) = text.parse::<f64>() {
        if !(v > 0.0 && v.is_finite()) {
            bail!("tolerance must be positive, got {v}");
        }
        return Ok(Tolerances::with_validation(v));
    }
    let mut map = serde_json::Map::new();
    for pair in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (key, value) = pair
            .split_once('=')
            .with_context(|| format!("expected key=value in tolerance list, got {pair:?}"))?;
        let v: f64 = value.trim().parse().with_context(|| format!("tolerance {key} is not a number"))?;
        if !(v > 0.0 && v.is_finite()) {
            bail!("tolerance {key} must be positive, got {v}");
        }
        map.insert(key.trim().to_string(), Value::from(v));
    }
    serde_json::from_value(Value::Object(map)).context("unknown tolerance field")
}
