//! Uniform versus non-uniform convergence of teleportation simulation.
//!
//! A channel's simulation converges in diamond norm exactly when its noise matrix has
//! full rank. For such channels [`diamond_upper_bound`] gives a computable bound that
//! vanishes as `μ → ∞`; for the others the witnesses stay close to the maximal value 2.

use nalgebra::{DMatrix, Matrix2};
use serde::Serialize;

use crate::channels::{classify, numeric_rank, CanonicalClass, CanonicalForm, GaussianChannel};
use crate::error::{Result, TelesimError};
use crate::fidelity::{
    fid_b2_asymptotic_full, fid_env_a2_full, fid_env_c_full, fid_env_d_full, fid_output_identity, fidelity_of_cms,
    fuchs_vdg, gaussian_fidelity, EnvFidelity,
};
use crate::teleport::{bk_added_noise, environment_noise_ratio, quasi_choi, simulate_channel};
use crate::tolerance::Tolerances;

/// Resource variances at which [`decide_uniform`] samples the bound curve.
pub const DEFAULT_BOUND_GRID: [f64; 7] = [1.25, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceVerdict {
    pub uniform: bool,
    pub class: CanonicalClass,
    pub noise_rank: u8,
    /// `(μ, bound)` pairs; empty when no uniform bound exists.
    pub bound_curve: Vec<(f64, f64)>,
}

/// Canonical form, noise rank and uniform-convergence decision under the given tolerances.
pub fn uniform_verdict(ch: &GaussianChannel, tol: &Tolerances) -> Result<(CanonicalForm, u8, bool)> {
    let form = classify(ch, tol)?;
    let noise_rank = numeric_rank(ch.n(), tol);
    Ok((form, noise_rank, noise_rank == 2))
}

/// Decides uniform convergence from the rank of the noise matrix.
pub fn decide_uniform(ch: &GaussianChannel) -> Result<ConvergenceVerdict> {
    let (form, noise_rank, uniform) = uniform_verdict(ch, &Tolerances::default())?;
    let bound_curve = if uniform {
        DEFAULT_BOUND_GRID
            .iter()
            .map(|&mu| diamond_upper_bound(ch, mu, InputFrame::Derived).map(|b| (mu, b)))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(ConvergenceVerdict {
        uniform,
        class: form.class,
        noise_rank,
        bound_curve,
    })
}

/// How the input unitary `S_A` of the canonical reduction is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InputFrame {
    /// Computed from `(T, N)`; canonical-form channels give `S_A = I`.
    Derived,
    /// Bloch-Messiah squeezing `r` of `S_A` (C, D and additive forms).
    Squeezing(f64),
    /// First row `(a, c)` of `S_A`, completed to `[[a, c], [−c/s, a/s]]` with `s = a² + c²`.
    Row { a: f64, c: f64 },
}

/// Invariants of `S_A` that the environmental fidelities depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
struct FrameInvariants {
    /// Largest singular value of `S_A`.
    squeezing: f64,
    /// Squared norm of the first row of `S_A`.
    row_norm2: f64,
}

fn derived_frame(ch: &GaussianChannel, form: &CanonicalForm) -> Result<FrameInvariants> {
    let n = ch.n();
    let det_n = n.determinant();
    let inv = n
        .try_inverse()
        .ok_or_else(|| TelesimError::Numerical("noise matrix is singular".into()))?;
    // √det N · TᵀN⁻¹T equals |τ| S_AᵀS_A for C, D and additive forms and S_AᵀΠS_A for A2
    let g = ch.t().transpose() * inv * ch.t() * det_n.sqrt();
    let g = 0.5 * (g + g.transpose());
    match form.class {
        CanonicalClass::A2 => Ok(FrameInvariants {
            squeezing: 1.0,
            row_norm2: g.trace(),
        }),
        _ => {
            let g = g / form.tau.abs();
            let top = g.symmetric_eigenvalues().max().max(1.0);
            Ok(FrameInvariants {
                squeezing: top.sqrt(),
                row_norm2: 1.0,
            })
        }
    }
}

fn frame_invariants(frame: InputFrame, ch: &GaussianChannel, form: &CanonicalForm) -> Result<FrameInvariants> {
    match frame {
        InputFrame::Derived => derived_frame(ch, form),
        InputFrame::Squeezing(r) => {
            if !(r > 0.0 && r.is_finite()) {
                return Err(TelesimError::domain("squeezing", r, "(0, ∞)"));
            }
            if form.class == CanonicalClass::A2 {
                return Err(TelesimError::Validation(
                    "the A2 form is parametrized by the input row (a, c)".into(),
                ));
            }
            Ok(FrameInvariants {
                squeezing: r.max(1.0 / r),
                row_norm2: 1.0,
            })
        }
        InputFrame::Row { a, c } => {
            let s = a * a + c * c;
            if !(s > 0.0 && s.is_finite()) {
                return Err(TelesimError::Validation("input row (a, c) must be nonzero and finite".into()));
            }
            Ok(FrameInvariants {
                squeezing: s.sqrt().max(1.0 / s.sqrt()),
                row_norm2: s,
            })
        }
    }
}

/// Upper bound `2√(1 − F²)` on `‖G^μ − G‖◊`, with `F` the fidelity between the
/// environment states realizing `G^μ` and `G` through the same dilation.
///
/// Unit-transmissivity channels use the `τ → 1` limit of the attenuator dilation,
/// checked against a linear extrapolation from two finite transmissivities.
pub fn diamond_upper_bound(ch: &GaussianChannel, mu: f64, frame: InputFrame) -> Result<f64> {
    let tol = Tolerances::default();
    let form = classify(ch, &tol)?;
    if numeric_rank(ch.n(), &tol) < 2 {
        return Err(TelesimError::NoUniformBound(format!(
            "{} channel has a rank-deficient noise matrix",
            form.class
        )));
    }
    let xi = bk_added_noise(mu)?;
    let inv = frame_invariants(frame, ch, &form)?;
    let omega = form.environment_variance();
    let env = match form.class {
        CanonicalClass::A1 => EnvFidelity {
            fidelity: 1.0,
            complement: 0.0,
        },
        CanonicalClass::CAtt | CanonicalClass::CAmp => {
            fid_env_c_full(environment_noise_ratio(&form, xi), omega, inv.squeezing)?
        }
        CanonicalClass::D => fid_env_d_full(environment_noise_ratio(&form, xi), omega, inv.squeezing)?,
        CanonicalClass::A2 => fid_env_a2_full(xi, omega, inv.row_norm2.sqrt(), 0.0)?,
        CanonicalClass::B2 => {
            if xi == 0.0 {
                return Ok(0.0);
            }
            additive_fidelity(xi, form.noise_param, inv.squeezing)?
        }
        CanonicalClass::B1 | CanonicalClass::B2Id => unreachable!("rank-deficient noise handled above"),
    };
    Ok(env.trace_upper())
}

fn additive_fidelity(xi: f64, xi_prime: f64, r: f64) -> Result<EnvFidelity> {
    let limit = fid_b2_asymptotic_full(xi, xi_prime, r)?;
    let bound_at = |h: f64| -> Result<f64> {
        let tau = 1.0 - h;
        Ok(fid_env_c_full(xi * tau / h, xi_prime / h, r)?.trace_upper())
    };
    let h1 = 1e-6 * xi_prime.min(1.0);
    let h2 = 10.0 * h1;
    let (b1, b2) = (bound_at(h1)?, bound_at(h2)?);
    let extrapolated = b1 - h1 * (b2 - b1) / (h2 - h1);
    let limit_bound = limit.trace_upper();
    if (extrapolated - limit_bound).abs() > 1e-6 * (1.0 + limit_bound) {
        return Err(TelesimError::Numerical(format!(
            "unit-transmissivity extrapolation {extrapolated} disagrees with the limit {limit_bound}"
        )));
    }
    Ok(limit)
}

/// Lower bound `2(1 − F)` on the distance between a TMSV input of variance `μ̃` and its
/// teleported image at resource variance `μ`.
pub fn nonuniform_witness(mu: f64, mu_tilde: f64) -> Result<f64> {
    Ok(fuchs_vdg(fid_output_identity(mu_tilde, mu)?)?.lower)
}

/// Two-mode CM `S⁻¹ [V^μ̃ + 0 ⊕ Y] S⁻ᵀ` for diagonal `Y`, where `S` is the two-mode
/// squeezer producing the TMSV of variance `μ̃`. The TMSV part becomes the identity, so
/// the large entries enter only through the exactly known squeezer coefficients.
fn squeezed_frame_cm(mu_tilde: f64, y: [f64; 2]) -> DMatrix<f64> {
    let c2 = 0.5 * (mu_tilde + 1.0);
    let s2 = 0.5 * (mu_tilde - 1.0);
    let cs = 0.5 * ((mu_tilde - 1.0) * (mu_tilde + 1.0)).sqrt();
    let mut v = DMatrix::identity(4, 4);
    let z = [1.0, -1.0];
    for k in 0..2 {
        v[(k, k)] += s2 * y[k];
        v[(2 + k, 2 + k)] += c2 * y[k];
        let off = -cs * z[k] * y[k];
        v[(k, 2 + k)] += off;
        v[(2 + k, k)] += off;
    }
    v
}

/// Fidelity between the outputs of the B1 form and of its simulation when a TMSV of
/// variance `μ̃` is sent through the channel with input unitary row `(a, c)`.
pub fn b1_witness_fidelity(mu: f64, mu_tilde: f64, a: f64, c: f64) -> Result<f64> {
    let xi = bk_added_noise(mu)?;
    if !(mu_tilde >= 1.0 && mu_tilde.is_finite()) {
        return Err(TelesimError::domain("mu_tilde", mu_tilde, "[1, ∞)"));
    }
    let s = a * a + c * c;
    if !(s > 0.0 && s.is_finite()) {
        return Err(TelesimError::Validation("input row (a, c) must be nonzero and finite".into()));
    }
    // S_A S_Aᵀ = diag(s, 1/s); B1 noise diag(0, 1)
    let simulated = squeezed_frame_cm(mu_tilde, [xi * s, 1.0 + xi / s]);
    let exact = squeezed_frame_cm(mu_tilde, [0.0, 1.0]);
    fidelity_of_cms(&simulated, &exact)
}

/// `2(1 − F)` for the B1 witness; tends to 2 as `μ̃ → ∞` at fixed `μ`.
pub fn b1_witness_bound(mu: f64, mu_tilde: f64, a: f64, c: f64) -> Result<f64> {
    Ok(fuchs_vdg(b1_witness_fidelity(mu, mu_tilde, a, c)?)?.lower)
}

/// Lower bound `2(1 − F)` from the quasi-Choi states of `G^μ` and `G` at input
/// variance `μ̃`, for any channel.
pub fn quasi_choi_witness(ch: &GaussianChannel, mu: f64, mu_tilde: f64) -> Result<f64> {
    let sim = simulate_channel(ch, mu)?;
    let f = gaussian_fidelity(&quasi_choi(&sim.effective, mu_tilde)?, &quasi_choi(ch, mu_tilde)?)?;
    Ok(fuchs_vdg(f)?.lower)
}

/// Which variable the scan grid runs over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanAxis {
    /// Grid over the resource variance `μ`.
    Mu,
    /// Grid over the witness input variance `μ̃` at fixed `μ`.
    MuTilde { mu: f64 },
}

/// Witness settings: input variance (used when scanning `μ`) and the B1 input row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessParams {
    pub mu_tilde: f64,
    pub a: f64,
    pub c: f64,
}

impl Default for WitnessParams {
    fn default() -> Self {
        Self {
            mu_tilde: 1e6,
            a: 1.0,
            c: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub mu: f64,
    pub mu_tilde: Option<f64>,
    pub xi: f64,
    pub upper_bound: Option<f64>,
    pub witness_lower_bound: Option<f64>,
}

/// Evaluates the upper bound (rank-2 channels) and, if requested, a witness lower
/// bound at each grid point, in grid order.
///
/// The witness is the closed-form TMSV witness for unit-rank-zero channels, the B1
/// witness for B1 channels and the quasi-Choi fidelity bound otherwise.
pub fn convergence_scan(
    ch: &GaussianChannel,
    grid: &[f64],
    axis: ScanAxis,
    witness: Option<WitnessParams>,
) -> Result<Vec<ScanRow>> {
    let tol = Tolerances::default();
    let form = classify(ch, &tol)?;
    let full_rank = numeric_rank(ch.n(), &tol) == 2;
    grid.iter()
        .map(|&g| {
            let (mu, mu_tilde) = match axis {
                ScanAxis::Mu => (g, witness.map(|w| w.mu_tilde)),
                ScanAxis::MuTilde { mu } => (mu, Some(g)),
            };
            let xi = bk_added_noise(mu)?;
            let upper_bound = if full_rank {
                Some(diamond_upper_bound(ch, mu, InputFrame::Derived)?)
            } else {
                None
            };
            let witness_lower_bound = match (witness, mu_tilde) {
                (Some(w), Some(mt)) => Some(match form.class {
                    CanonicalClass::B2Id => nonuniform_witness(mu, mt)?,
                    CanonicalClass::B1 => b1_witness_bound(mu, mt, w.a, w.c)?,
                    _ => quasi_choi_witness(ch, mu, mt)?,
                }),
                _ => None,
            };
            Ok(ScanRow {
                mu,
                mu_tilde,
                xi,
                upper_bound,
                witness_lower_bound,
            })
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy, sxx, sxy) = points.iter().fold((0.0, 0.0, 0.0, 0.0), |acc, &(x, y)| {
        let (lx, ly) = (x.ln(), y.ln());
        (acc.0 + lx, acc.1 + ly, acc.2 + lx * lx, acc.3 + lx * ly)
    });
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// `count` log-spaced points from `start` to `stop` inclusive.
pub fn logspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (a, b) = (start.ln(), stop.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

#[allow(dead_code)]
fn diag2(a: f64, b: f64) -> Matrix2<f64> {
    Matrix2::new(a, 0.0, 0.0, b)
}
