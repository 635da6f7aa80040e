//! Frequency-domain predictions and post-run trace analysis.
//!
//! The first half evaluates the auxiliary section's closed-form responses:
//! the band-pass transfer `G`, the relative error response `E = (1 - G)/G`,
//! and the adaptation-speed profiles derived from them. The second half
//! fits what a run actually did — exponential convergence rate and
//! steady-state residual statistics — so predictions and measurements can
//! be compared in one report.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::estimator::EstimatorTrace;

/// Fraction of a trace treated as steady state by default.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;

/// Convergence is measured until the estimate first enters this relative
/// band around the true frequency.
pub const CONVERGENCE_BAND: f64 = 0.02;

// ── Closed-form responses ───────────────────────────────────────────────

/// A transfer-function value at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexResponse {
    pub re: f64,
    pub im: f64,
}

impl ComplexResponse {
    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Phase in rad, in `(-pi, pi]`.
    pub fn phase(&self) -> f64 {
        self.im.atan2(self.re)
    }
}

fn div(a: ComplexResponse, b: ComplexResponse) -> ComplexResponse {
    let d = b.re * b.re + b.im * b.im;
    ComplexResponse {
        re: (a.re * b.re + a.im * b.im) / d,
        im: (a.im * b.re - a.re * b.im) / d,
    }
}

/// Band-pass response of the critically damped section,
/// `G(j w) = 2 theta j w / ((j w)^2 + 2 theta j w + theta^2)`.
pub fn transfer_g(theta: f64, omega: f64) -> ComplexResponse {
    transfer_g_with_zeta(theta, omega, 1.0)
}

/// [`transfer_g`] with an explicit damping ratio (the input coupling keeps
/// the `2 zeta theta` factor, so the matched gain stays exactly one for
/// every `zeta`).
pub fn transfer_g_with_zeta(theta: f64, omega: f64, zeta: f64) -> ComplexResponse {
    debug_assert!(theta > 0.0 && omega >= 0.0 && zeta > 0.0);
    let num = ComplexResponse {
        re: 0.0,
        im: 2.0 * zeta * theta * omega,
    };
    let den = ComplexResponse {
        re: theta * theta - omega * omega,
        im: 2.0 * zeta * theta * omega,
    };
    div(num, den)
}

/// Relative error response `E(j w) = (1 - G(j w)) / G(j w)`.
///
/// For the critically damped section this is `((j w)^2 + theta^2) /
/// (2 theta j w)`: purely imaginary, with phase `-pi/2` below the corner
/// and `+pi/2` above it. `omega = 0` sits on the pole (G vanishes there).
pub fn transfer_e(theta: f64, omega: f64) -> Result<ComplexResponse> {
    transfer_e_with_zeta(theta, omega, 1.0)
}

/// [`transfer_e`] with an explicit damping ratio.
pub fn transfer_e_with_zeta(theta: f64, omega: f64, zeta: f64) -> Result<ComplexResponse> {
    if omega == 0.0 {
        return Err(Error::Domain(
            "E(j w) has a pole at w = 0 (G vanishes there)".into(),
        ));
    }
    let g = transfer_g_with_zeta(theta, omega, zeta);
    let one_minus_g = ComplexResponse {
        re: 1.0 - g.re,
        im: -g.im,
    };
    Ok(div(one_minus_g, g))
}

/// Normalized adaptation-speed profile
/// `Omega(theta) = |theta^2 - omega0^2| / (theta^2 + omega0^2)`.
///
/// Equals `|G(j omega0)| * |E(j omega0)|` for the critically damped
/// section; zero exactly at `theta = omega0`.
pub fn omega_gain(theta: f64, omega0: f64) -> f64 {
    debug_assert!(theta >= 0.0 && omega0 > 0.0);
    (theta * theta - omega0 * omega0).abs() / (theta * theta + omega0 * omega0)
}

/// Linearized speed profile `Omega*(theta) = 1 - theta / omega0`, a lower
/// bound on [`omega_gain`] valid on `[0, omega0]` only.
pub fn omega_gain_linear(theta: f64, omega0: f64) -> Result<f64> {
    debug_assert!(omega0 > 0.0);
    if !(0.0..=omega0).contains(&theta) {
        return Err(Error::Domain(format!(
            "Omega* is defined on [0, omega0] = [0, {omega0}], got theta = {theta}"
        )));
    }
    Ok(1.0 - theta / omega0)
}

/// Predicted exponential convergence rate `beta = gamma k / (2 omega0)`.
pub fn predicted_rate(gamma: f64, k: f64, omega0: f64) -> f64 {
    debug_assert!(gamma > 0.0 && k > 0.0 && omega0 > 0.0);
    0.5 * gamma * k / omega0
}

/// Upper bound on the steady-state variance of the frequency error under
/// white measurement noise of per-sample variance `tau_sq`:
/// `Var < 4 tau^2 omega0 / k`.
pub fn noise_floor(tau_sq: f64, omega0: f64, k: f64) -> f64 {
    debug_assert!(tau_sq >= 0.0 && omega0 > 0.0 && k > 0.0);
    4.0 * tau_sq * omega0 / k
}

/// Steady-state response of the mistuned section to `k sin(omega0 t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateHarmonic {
    /// Output-error amplitude `a = b |E(j omega0)|`.
    pub a: f64,
    /// Output amplitude `b = k |G(j omega0)|`.
    pub b: f64,
    /// Output phase `c = arg G(j omega0)`, rad.
    pub c: f64,
}

/// Amplitudes and phase of the section output once transients have died,
/// for a frozen estimate `theta`.
pub fn steady_state_harmonic(theta: f64, omega0: f64, k: f64) -> Result<SteadyStateHarmonic> {
    let g = transfer_g(theta, omega0);
    let e = transfer_e(theta, omega0)?;
    let b = k * g.magnitude();
    Ok(SteadyStateHarmonic {
        a: b * e.magnitude(),
        b,
        c: g.phase(),
    })
}

// ── Trace analysis ──────────────────────────────────────────────────────

/// Transient-skip heuristic: three periods of the target frequency, enough
/// for the filter states to ring up before rate fitting starts.  The skip is
/// deliberately tied to the target rather than the initial estimate: the
/// approach accelerates as the estimate closes in, so a skip sized to a slow
/// initial estimate would discard most of the usable exponential decay.
pub fn default_transient_skip(omega0: f64) -> f64 {
    debug_assert!(omega0 > 0.0);
    3.0 * TAU / omega0
}

/// Least-squares exponential rate of the frequency-error decay.
///
/// Fits a line to `ln |omega0 - theta(t)|` from `transient_skip` until the
/// error first enters the 2% convergence band, truncating at the first
/// sign change of the error. Needs at least a decade of decay inside the
/// window.
pub fn fit_exponential_rate(
    trace: &EstimatorTrace,
    omega0: f64,
    transient_skip: f64,
) -> Result<f64> {
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(Error::Domain(format!(
            "omega0 must be finite and > 0, got {omega0}"
        )));
    }
    let band = CONVERGENCE_BAND * omega0;
    let start = trace
        .records
        .iter()
        .position(|r| r.t >= transient_skip)
        .ok_or_else(|| {
            Error::NotEnoughDecay(format!(
                "trace ends at t = {:.3} s, before the {transient_skip:.3} s transient skip",
                trace.records.last().map(|r| r.t).unwrap_or(0.0)
            ))
        })?;

    let first = omega0 - trace.records[start].theta;
    if first == 0.0 {
        return Err(Error::NotEnoughDecay(
            "error is already zero at the start of the fit window".into(),
        ));
    }
    let direction = first.signum();

    let mut pts: Vec<(f64, f64)> = Vec::new();
    for r in &trace.records[start..] {
        let eps = omega0 - r.theta;
        if eps == 0.0 || eps.signum() != direction {
            break; // zero crossing: the exponential regime is over
        }
        if eps.abs() < band {
            break; // converged into the band
        }
        pts.push((r.t, eps.abs().ln()));
    }

    if pts.len() < 2 {
        return Err(Error::NotEnoughDecay(format!(
            "only {} usable samples between the transient skip and the \
             convergence band",
            pts.len()
        )));
    }
    let (max_ln, min_ln) = pts.iter().fold((f64::MIN, f64::MAX), |(hi, lo), &(_, y)| {
        (hi.max(y), lo.min(y))
    });
    if max_ln - min_ln < 10f64.ln() {
        return Err(Error::NotEnoughDecay(format!(
            "|error| spans only a factor of {:.2} inside the fit window; \
             need at least a decade",
            (max_ln - min_ln).exp()
        )));
    }

    let n = pts.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let slope = (n * sty - st * sy) / (n * stt - st * st);
    Ok(-slope)
}

/// Mean and sample variance of the frequency error over a trace tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats {
    /// Tail mean of `omega0 - theta`.
    pub mean: f64,
    /// Unbiased tail variance of `omega0 - theta`.
    pub variance: f64,
}

/// Steady-state residual statistics over the final `tail_fraction` of the
/// trace against a constant true frequency.
///
/// Refuses to report when the tail has clearly not settled (mean `|error|`
/// of 5% of `omega0` or more).
pub fn residual_variance(
    trace: &EstimatorTrace,
    omega0: f64,
    tail_fraction: f64,
) -> Result<ResidualStats> {
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(Error::Domain(format!(
            "omega0 must be finite and > 0, got {omega0}"
        )));
    }
    let tail = tail_slice(trace, tail_fraction)?;
    let mean_abs =
        tail.iter().map(|r| (omega0 - r.theta).abs()).sum::<f64>() / tail.len() as f64;
    if mean_abs >= 0.05 * omega0 {
        return Err(Error::NotConverged(format!(
            "tail mean |error| = {mean_abs:.4} rad/s is >= 5% of omega0 = {omega0}"
        )));
    }
    Ok(stats_over(tail.iter().map(|r| omega0 - r.theta)))
}

/// [`residual_variance`] against a per-sample frequency track (for chirps
/// and other time-varying scenarios). Purely diagnostic: no settledness
/// gate is applied.
pub fn residual_variance_tracked(
    trace: &EstimatorTrace,
    omega0_track: &[f64],
    tail_fraction: f64,
) -> Result<ResidualStats> {
    if omega0_track.len() != trace.len() {
        return Err(Error::Config(format!(
            "track has {} samples but the trace has {}",
            omega0_track.len(),
            trace.len()
        )));
    }
    let tail = tail_slice(trace, tail_fraction)?;
    let offset = trace.len() - tail.len();
    Ok(stats_over(
        tail.iter()
            .enumerate()
            .map(|(i, r)| omega0_track[offset + i] - r.theta),
    ))
}

fn tail_slice(
    trace: &EstimatorTrace,
    tail_fraction: f64,
) -> Result<&[crate::estimator::TraceRecord]> {
    if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
        return Err(Error::Domain(format!(
            "tail_fraction must be in (0, 0.5], got {tail_fraction}"
        )));
    }
    let n = trace.len();
    let count = ((n as f64 * tail_fraction).ceil() as usize).clamp(1, n);
    if count < 2 {
        return Err(Error::Domain(format!(
            "tail of {count} sample(s) is too short for statistics"
        )));
    }
    Ok(&trace.records[n - count..])
}

fn stats_over(values: impl Iterator<Item = f64> + Clone) -> ResidualStats {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let variance = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    ResidualStats { mean, variance }
}

// ── Reports ─────────────────────────────────────────────────────────────

/// Predicted versus fitted convergence behaviour of one run.
///
/// Fields that cannot be produced for a given trace (no exponential decay
/// to fit, tail not settled) are `None` rather than fabricated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    /// Fitted exponential rate, 1/s.
    pub beta_hat: Option<f64>,
    /// Predicted rate `gamma k / (2 omega0)`, 1/s.
    pub beta_pred: f64,
    /// Steady-state mean of the frequency error, rad/s.
    pub epsilon_ss_mean: Option<f64>,
    /// Steady-state variance of the frequency error, rad^2/s^2.
    pub epsilon_ss_var: Option<f64>,
    /// Noise-floor bound for the scenario, rad^2/s^2.
    pub noise_floor: f64,
    /// Seconds excluded from the rate fit.
    pub transient_skip: f64,
}

impl ConvergenceReport {
    /// Assemble the report for a constant-frequency scenario.
    ///
    /// `k` is the nominal signal amplitude, `tau_sq` the per-sample noise
    /// variance (0 for clean signals).
    pub fn from_trace(
        trace: &EstimatorTrace,
        omega0: f64,
        k: f64,
        tau_sq: f64,
        transient_skip: f64,
        tail_fraction: f64,
    ) -> Self {
        let stats = residual_variance(trace, omega0, tail_fraction).ok();
        Self {
            beta_hat: fit_exponential_rate(trace, omega0, transient_skip).ok(),
            beta_pred: predicted_rate(trace.gamma, k, omega0),
            epsilon_ss_mean: stats.map(|s| s.mean),
            epsilon_ss_var: stats.map(|s| s.variance),
            noise_floor: noise_floor(tau_sq, omega0, k),
            transient_skip,
        }
    }
}
