//! Convergence scan configuration and table output.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use serde_json::Value;
use telesim::convergence::{convergence_scan, logspace, ScanAxis, ScanRow, WitnessParams};
use telesim::Tolerances;

use crate::spec::parse_channel;

/// Column order of the CSV table.
pub const CSV_COLUMNS: [&str; 5] = ["mu", "mu_tilde", "xi", "upper_bound", "witness_lower_bound"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GridParam {
    Mu,
    MuTilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub param: GridParam,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default = "default_true")]
    pub log: bool,
    /// Resource variance held fixed when the grid runs over `mu_tilde`.
    #[serde(default)]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    #[serde(default)]
    pub mu_tilde: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub channel: Value,
    pub grid: GridSpec,
    #[serde(default)]
    pub witness: Option<WitnessSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            bail!("grid needs at least one point");
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            bail!("grid endpoints must be finite");
        }
        if self.log && !(self.start > 0.0 && self.stop > 0.0) {
            bail!("log-spaced grids need positive endpoints");
        }
        Ok(if self.log {
            logspace(self.start, self.stop, self.points)
        } else if self.points == 1 {
            vec![self.start]
        } else {
            let step = (self.stop - self.start) / (self.points - 1) as f64;
            (0..self.points).map(|i| self.start + step * i as f64).collect()
        })
    }
}

pub fn parse_config(text: &str) -> Result<ScanConfig> {
    serde_json::from_str(text).context("invalid scan config")
}

pub fn run_scan(cfg: &ScanConfig, tol: &Tolerances) -> Result<Vec<ScanRow>> {
    let ch = parse_channel(&cfg.channel.to_string(), tol)?;
    let grid = cfg.grid.values()?;
    let defaults = WitnessParams::default();
    let witness_spec = match (&cfg.witness, cfg.grid.param) {
        (Some(w), _) => Some(w.clone()),
        (None, GridParam::MuTilde) => Some(WitnessSpec {
            mu_tilde: None,
            a: None,
            c: None,
        }),
        (None, GridParam::Mu) => None,
    };
    let witness = witness_spec.map(|w| WitnessParams {
        mu_tilde: w.mu_tilde.unwrap_or(defaults.mu_tilde),
        a: w.a.unwrap_or(defaults.a),
        c: w.c.unwrap_or(defaults.c),
    });
    let axis = match cfg.grid.param {
        GridParam::Mu => ScanAxis::Mu,
        GridParam::MuTilde => ScanAxis::MuTilde {
            mu: cfg.grid.mu.context("a mu_tilde grid needs a fixed \"mu\"")?,
        },
    };
    Ok(convergence_scan(&ch, &grid, axis, witness)?)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn write_rows(rows: &[ScanRow], format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_COLUMNS)?;
            for r in rows {
                w.write_record([
                    cell(Some(r.mu)),
                    cell(r.mu_tilde),
                    cell(Some(r.xi)),
                    cell(r.upper_bound),
                    cell(r.witness_lower_bound),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}
