mod scan;
mod spec;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use telesim::capacity::corrected_key_bound;
use telesim::channels::apply_channel;
use telesim::convergence::{uniform_verdict, InputFrame};
use telesim::fidelity::{bures_distance, fuchs_vdg, gaussian_fidelity};
use telesim::peeling::{per_use_delta, peel_bound, two_round_demo, DemoConfig, EpsilonParams, Topology};
use telesim::teleport::simulate_channel;
use telesim::{TelesimError, Tolerances};

use scan::{Format, GridParam, GridSpec, OutputSpec, ScanConfig, WitnessSpec};
use spec::{channel_to_json, parse_channel, parse_state, parse_tolerances, read_source, state_to_json};

/// Teleportation simulation of single-mode Gaussian channels.
///
/// Channels are JSON, either raw {"t": [[..],[..]], "n": [[..],[..]], "d": [..]} or
/// canonical {"class": "C_Att", "tau": 0.5, "nbar": 0.0} / {"class": "B2", "xi": 0.1}.
/// States are {"mean": [..], "cm": [[..], ..]}. Any JSON argument may be given inline,
/// as @path, or as - for stdin.
///
/// Exit codes: 0 success, 1 numerical failure, 2 invalid input, 3 request outside the
/// supported domain (no uniform bound, no capacity formula).
#[derive(Debug, Parser)]
#[command(name = "bosonic-telesim", version)]
struct Cli {
    /// Tolerance override: one number for the validation tolerances, or
    /// field=value pairs (symmetry, symplectic, uncertainty, rank, unit_transmissivity, purity).
    #[arg(long, global = true, env = "BOSONIC_TELESIM_TOL")]
    tol: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Canonical form and uniform-convergence verdict of a channel.
    Classify {
        channel: String,
    },
    /// Apply a channel to one mode of a state.
    Apply {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        state: String,
        /// Mode the channel acts on.
        #[arg(long, default_value_t = 0)]
        mode: usize,
    },
    /// Channel realized by teleportation through a resource of variance mu.
    Simulate {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        mu: f64,
    },
    /// Fidelity of two states with the trace-distance sandwich.
    Fidelity {
        state1: String,
        state2: String,
    },
    /// Upper-bound and witness table over a grid of mu or mu_tilde.
    #[command(long_about = CONVERGENCE_HELP)]
    Convergence(ConvergenceArgs),
    /// Peeling bound n·delta over adaptive rounds, optionally with the two-round demo.
    Peel(PeelArgs),
    /// Finite-size key-rate bound including the teleportation error.
    Capacity(CapacityArgs),
}

const CONVERGENCE_HELP: &str = "\
Upper-bound and witness table over a grid of mu or mu_tilde.

Either --config FILE (JSON: {\"channel\", \"grid\": {\"param\", \"start\", \"stop\", \"points\",
\"log\", \"mu\"}, \"witness\": {\"mu_tilde\", \"a\", \"c\"}, \"output\": {\"format\", \"path\"}})
or the flags below. Unknown config keys are rejected.

CSV columns, in order:
  mu                   resource variance
  mu_tilde             witness input variance (empty without a witness)
  xi                   added noise of the teleportation, 2/(mu + sqrt(mu^2 - 1))
  upper_bound          upper bound on the diamond distance (full-rank noise only)
  witness_lower_bound  witness lower bound on the diamond distance (when requested)
Numbers use 17 significant digits; empty cells mean not applicable. Rows follow the grid order.";

#[derive(Debug, Args)]
struct ConvergenceArgs {
    /// Scan configuration file; excludes the grid flags.
    #[arg(long, conflicts_with_all = ["channel", "start", "stop", "points"])]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    channel: Option<String>,
    #[arg(long, value_enum, default_value = "mu")]
    param: GridParam,
    #[arg(long, required_unless_present = "config")]
    start: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    stop: Option<f64>,
    #[arg(long, required_unless_present = "config")]
    points: Option<usize>,
    /// Linearly spaced grid (default log-spaced).
    #[arg(long)]
    linear: bool,
    /// Fixed resource variance for a mu_tilde grid.
    #[arg(long)]
    mu: Option<f64>,
    /// Add the witness lower-bound column.
    #[arg(long)]
    witness: bool,
    /// Witness input variance for a mu grid.
    #[arg(long)]
    mu_tilde: Option<f64>,
    /// First row (a, c) of the input unitary for the B1 witness.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file (default stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EpsilonArgs {
    #[arg(long, default_value = "uniform", value_parser = parse_topology)]
    topology: Topology,
    /// Mean photon-number bound of the protocol inputs.
    #[arg(long)]
    energy_bound: Option<f64>,
    /// TMSV variance of the strong-topology probe state.
    #[arg(long)]
    probe_mu_tilde: Option<f64>,
}

impl EpsilonArgs {
    fn params(&self) -> EpsilonParams {
        EpsilonParams {
            frame: InputFrame::Derived,
            energy_bound: self.energy_bound,
            probe_mu_tilde: self.probe_mu_tilde,
        }
    }
}

fn parse_topology(s: &str) -> std::result::Result<Topology, TelesimError> {
    s.parse()
}

#[derive(Debug, Args)]
struct PeelArgs {
    #[arg(long)]
    rounds: u64,
    /// Per-use distance; otherwise computed from --channel and --mu.
    #[arg(long, conflicts_with = "channel")]
    delta: Option<f64>,
    #[arg(long, requires = "mu")]
    channel: Option<String>,
    #[arg(long)]
    mu: Option<f64>,
    #[command(flatten)]
    eps: EpsilonArgs,
    /// Also run the two-round protocol with a two-mode squeezer between the uses.
    #[arg(long, requires = "channel")]
    demo: bool,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    squeeze: f64,
    /// TMSV variance of the demo input.
    #[arg(long, default_value_t = 2.0)]
    input_mu: f64,
}

#[derive(Debug, Args)]
struct CapacityArgs {
    #[arg(long)]
    channel: String,
    #[arg(long)]
    rounds: u64,
    /// Security parameter in (0, 1).
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    mu: f64,
    /// Relative-entropy variance of the channel.
    #[arg(long, default_value_t = 0.0)]
    variance: f64,
    #[command(flatten)]
    eps_args: EpsilonArgs,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn convergence(args: ConvergenceArgs, tol: &Tolerances) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => scan::parse_config(&std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?,
        None => {
            let channel = read_source(args.channel.as_deref().expect("required by clap"))?;
            let witness = (args.witness || args.mu_tilde.is_some()).then_some(WitnessSpec {
                mu_tilde: args.mu_tilde,
                a: args.a,
                c: args.c,
            });
            ScanConfig {
                channel: serde_json::from_str(&channel).context("channel is not valid JSON")?,
                grid: GridSpec {
                    param: args.param,
                    start: args.start.expect("required by clap"),
                    stop: args.stop.expect("required by clap"),
                    points: args.points.expect("required by clap"),
                    log: !args.linear,
                    mu: args.mu,
                },
                witness,
                output: OutputSpec::default(),
            }
        }
    };
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    if let Some(p) = args.output {
        cfg.output.path = Some(p);
    }
    let rows = scan::run_scan(&cfg, tol)?;
    match &cfg.output.path {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            scan::write_rows(&rows, cfg.output.format, &mut w)?;
            w.flush()?;
        }
        None => scan::write_rows(&rows, cfg.output.format, &mut io::stdout().lock())?,
    }
    Ok(())
}

fn peel(args: PeelArgs, tol: &Tolerances) -> Result<()> {
    let params = args.eps.params();
    let channel = args
        .channel
        .as_deref()
        .map(|c| parse_channel(&read_source(c)?, tol))
        .transpose()?;
    let delta = match (args.delta, &channel, args.mu) {
        (Some(d), _, _) => d,
        (None, Some(ch), Some(mu)) => per_use_delta(ch, mu, args.eps.topology, &params)?,
        _ => anyhow::bail!("give either --delta or --channel with --mu"),
    };
    let bound = peel_bound(args.rounds, delta, args.eps.topology)?;
    let demo = match (&channel, args.demo) {
        (Some(ch), true) => Some(two_round_demo(
            ch,
            &DemoConfig {
                mu: args.mu.expect("required by clap"),
                squeeze: args.squeeze,
                input_mu: args.input_mu,
            },
        )?),
        _ => None,
    };
    let per_state = args.eps.topology == Topology::Strong;
    print_json(&json!({
        "bound": bound,
        "epsilon_tp": (bound.total / 2.0).min(1.0),
        "per_state_bound": per_state,
        "energy_bound": args.eps.energy_bound,
        "demo": demo,
    }))
}

fn run(cli: Cli) -> Result<()> {
    let tol = match &cli.tol {
        Some(t) => parse_tolerances(t)?,
        None => Tolerances::default(),
    };
    match cli.command {
        Command::Classify { channel } => {
            let ch = parse_channel(&read_source(&channel)?, &tol)?;
            let (form, noise_rank, uniform) = uniform_verdict(&ch, &tol)?;
            print_json(&json!({
                "class": form.class,
                "tau": form.tau,
                "r": form.r,
                "noise_param": form.noise_param,
                "noise_rank": noise_rank,
                "uniform_convergence": uniform,
            }))
        }
        Command::Apply { channel, state, mode } => {
            let ch = parse_channel(&read_source(&channel)?, &tol)?;
            let st = parse_state(&read_source(&state)?, &tol)?;
            print_json(&state_to_json(&apply_channel(&ch, &st, mode)?))
        }
        Command::Simulate { channel, mu } => {
            let ch = parse_channel(&read_source(&channel)?, &tol)?;
            let sim = simulate_channel(&ch, mu)?;
            print_json(&json!({
                "mu": sim.params.mu,
                "xi": sim.params.xi,
                "channel": channel_to_json(&sim.base),
                "simulated": channel_to_json(&sim.effective),
            }))
        }
        Command::Fidelity { state1, state2 } => {
            let a = parse_state(&read_source(&state1)?, &tol)?;
            let b = parse_state(&read_source(&state2)?, &tol)?;
            let f = gaussian_fidelity(&a, &b)?;
            let bounds = fuchs_vdg(f)?;
            print_json(&json!({
                "fidelity": f,
                "trace_distance_lower": bounds.lower,
                "trace_distance_upper": bounds.upper,
                "bures_distance": bures_distance(&a, &b)?,
            }))
        }
        Command::Convergence(args) => convergence(args, &tol),
        Command::Peel(args) => peel(args, &tol),
        Command::Capacity(args) => {
            let ch = parse_channel(&read_source(&args.channel)?, &tol)?;
            let report = corrected_key_bound(
                &ch,
                args.rounds,
                args.eps,
                args.mu,
                args.variance,
                args.eps_args.topology,
                &args.eps_args.params(),
            )?;
            print_json(&report)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<TelesimError>()) {
        Some(e) if e.is_unsupported() => 3,
        Some(TelesimError::Numerical(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
