//! Scenario checks: quantitative pass/fail verdicts over run artifacts.
//!
//! Checks are declared per scenario but evaluated over the whole suite, so a
//! check may compare scenarios (reach-time ordering) or re-run a scenario
//! with shifted noise seeds (variance bounds are asserted across three
//! independent realizations).  Every threshold is pinned here as a named
//! constant.

use std::f64::consts::TAU;
use std::fmt;

use freqest_core::analysis::{
    default_transient_skip, fit_exponential_rate, noise_floor, predicted_rate, residual_variance,
};
use freqest_core::estimator::EstimatorTrace;
use freqest_core::signal::SignalSpec;

use crate::error::{HarnessError, Result};
use crate::scenario::{RunArtifact, Scenario, Suite, run_scenario, with_seed};

// ── Thresholds ──────────────────────────────────────────────────────────

/// Absolute band for "converged" in deadline checks, rad/s.
pub const REACH_BAND: f64 = 0.5;
/// Deadline for reaching [`REACH_BAND`]: `DEADLINE_MULTIPLE / beta_pred` s.
pub const DEADLINE_MULTIPLE: f64 = 10.0;
/// Fitted rates must reach this fraction of the predicted rate.
pub const RATE_FIT_MIN_FRACTION: f64 = 0.8;
/// Relative band for reach-time and ripple-window entry: 2% of the target.
pub const RELATIVE_BAND: f64 = 0.02;
/// Noise-seed shifts used to assert statistical checks across independent
/// realizations.
pub const SEED_SHIFTS: [u64; 3] = [0, 100, 200];
/// Amplitude-modulation runs: |error| bound (rad/s) after the settle time.
pub const AM_ERROR_BOUND: f64 = 1.0;
pub const AM_SETTLE_TIME: f64 = 3.0;
/// Spectral-leak test: the line at the modulation rate must stay below this
/// multiple of the integrated broadband residual.
pub const SPECTRAL_LEAK_RATIO: f64 = 3.0;
/// Modulation periods analyzed at the end of the run by the spectral check.
pub const SPECTRAL_PERIODS: f64 = 3.0;
/// Chirp tracking: settle time (s) and error envelope (rad/s).
pub const TRACKING_SETTLE_TIME: f64 = 10.0;
pub const TRACKING_BOUND: f64 = 5.0;
/// Damping-ripple check: window length after first band entry, and the
/// maximum variance ratio of the most- to least-damped run.
pub const RIPPLE_WINDOW: f64 = 5.0;
pub const RIPPLE_RATIO_MAX: f64 = 0.1;
/// Baseline parity: both estimators within this fraction of the target.
pub const PARITY_TOLERANCE: f64 = 0.01;
/// Tail fraction for steady-state statistics.
pub const TAIL_FRACTION: f64 = 0.25;

// ── Identifiers ─────────────────────────────────────────────────────────

/// Check identifiers attachable to scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckId {
    /// Every run reaches the [`REACH_BAND`] within `10/beta_pred` seconds.
    ConvergenceDeadline,
    /// Fitted rates reach 0.8x the prediction and increase with gain.
    RateFitOrdering,
    /// Reach times increase strictly with the target frequency across the
    /// suite's scenarios, for every seed shift.
    ReachTimeOrdering,
    /// Steady-state error variance stays under `4 tau^2 omega0 / k` for
    /// every seed shift.
    ResidualVarianceBound,
    /// |error| stays under [`AM_ERROR_BOUND`] after [`AM_SETTLE_TIME`].
    AmplitudeBoundedError,
    /// The modulation rate's spectral line stays under
    /// [`SPECTRAL_LEAK_RATIO`] times the integrated broadband residual.
    AmplitudeSpectralLeak,
    /// |estimate - instantaneous frequency| stays under [`TRACKING_BOUND`]
    /// after [`TRACKING_SETTLE_TIME`].
    ChirpTracking,
    /// Post-convergence theta variance decreases strictly with damping.
    DampingRippleOrdering,
    /// Proposed and baseline runs both land within [`PARITY_TOLERANCE`].
    BaselineParity,
}

impl CheckId {
    pub fn as_str(&self) -> &'static str {
        match self {
            CheckId::ConvergenceDeadline => "convergence-deadline",
            CheckId::RateFitOrdering => "rate-fit-ordering",
            CheckId::ReachTimeOrdering => "reach-time-ordering",
            CheckId::ResidualVarianceBound => "residual-variance-bound",
            CheckId::AmplitudeBoundedError => "amplitude-bounded-error",
            CheckId::AmplitudeSpectralLeak => "amplitude-spectral-leak",
            CheckId::ChirpTracking => "chirp-tracking",
            CheckId::DampingRippleOrdering => "damping-ripple-ordering",
            CheckId::BaselineParity => "baseline-parity",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(match text {
            "convergence-deadline" => CheckId::ConvergenceDeadline,
            "rate-fit-ordering" => CheckId::RateFitOrdering,
            "reach-time-ordering" => CheckId::ReachTimeOrdering,
            "residual-variance-bound" => CheckId::ResidualVarianceBound,
            "amplitude-bounded-error" => CheckId::AmplitudeBoundedError,
            "amplitude-spectral-leak" => CheckId::AmplitudeSpectralLeak,
            "chirp-tracking" => CheckId::ChirpTracking,
            "damping-ripple-ordering" => CheckId::DampingRippleOrdering,
            "baseline-parity" => CheckId::BaselineParity,
            other => {
                return Err(HarnessError::Config(format!("unknown check id `{other}`")));
            }
        })
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Verdict of one check evaluation.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub check: CheckId,
    /// Scenario the verdict is scoped to; `None` for suite-wide checks.
    pub scenario: Option<String>,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn scoped(check: CheckId, scenario: &str, passed: bool, detail: String) -> Self {
        CheckOutcome { check, scenario: Some(scenario.to_owned()), passed, detail }
    }
}

// ── Spectral helper ─────────────────────────────────────────────────────

/// Power at one angular frequency, `(omega, power)`.
pub type SpectralLine = (f64, f64);

/// Hann-windowed, mean-removed periodogram evaluated at the Fourier bins
/// `k * 2pi / span` up to `max_omega`, via the Goertzel recurrence.  Powers
/// are normalized so a unit-amplitude sinusoid at a bin yields 0.25.
pub fn hann_periodogram(samples: &[f64], dt: f64, max_omega: f64) -> Vec<SpectralLine> {
    assert!(samples.len() >= 4, "periodogram needs a few samples");
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut window_sum = 0.0;
    let windowed: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let w = 0.5 - 0.5 * (TAU * i as f64 / (n - 1) as f64).cos();
            window_sum += w;
            (x - mean) * w
        })
        .collect();

    let span = (n - 1) as f64 * dt;
    let fundamental = TAU / span;
    let mut lines = Vec::new();
    let mut k = 1usize;
    loop {
        let omega = fundamental * k as f64;
        if omega > max_omega {
            break;
        }
        let alpha = omega * dt;
        let c = 2.0 * alpha.cos();
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for &x in &windowed {
            let s0 = x + c * s1 - s2;
            s2 = s1;
            s1 = s0;
        }
        let power = (s1 * s1 + s2 * s2 - c * s1 * s2) / (window_sum * window_sum);
        lines.push((omega, power));
        k += 1;
    }
    lines
}

// ── Evaluation ──────────────────────────────────────────────────────────

struct Entry<'a> {
    scenario: &'a Scenario,
    artifact: &'a RunArtifact,
}

/// Evaluate every check declared anywhere in the suite over its artifacts.
pub fn evaluate(suite: &Suite, artifacts: &[RunArtifact]) -> Result<Vec<CheckOutcome>> {
    let entries: Vec<Entry> = suite
        .scenarios
        .iter()
        .map(|scenario| {
            let artifact = artifacts
                .iter()
                .find(|a| a.scenario_name == scenario.name)
                .ok_or_else(|| {
                    HarnessError::Config(format!("no artifact for scenario `{}`", scenario.name))
                })?;
            Ok(Entry { scenario, artifact })
        })
        .collect::<Result<_>>()?;

    let mut ids: Vec<CheckId> = Vec::new();
    for entry in &entries {
        for &id in &entry.scenario.checks {
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
    }

    let mut outcomes = Vec::new();
    for id in ids {
        let declaring: Vec<&Entry> = entries
            .iter()
            .filter(|e| e.scenario.checks.contains(&id))
            .collect();
        match id {
            CheckId::ReachTimeOrdering => outcomes.push(reach_time_ordering(&declaring)?),
            scoped => {
                for entry in declaring {
                    outcomes.push(evaluate_scoped(scoped, entry)?);
                }
            }
        }
    }
    Ok(outcomes)
}

fn evaluate_scoped(id: CheckId, entry: &Entry) -> Result<CheckOutcome> {
    if !entry.artifact.failures.is_empty() {
        let detail = entry
            .artifact
            .failures
            .iter()
            .map(|(label, error)| format!("{label}: {error}"))
            .collect::<Vec<_>>()
            .join("; ");
        return Ok(CheckOutcome::scoped(
            id,
            &entry.scenario.name,
            false,
            format!("estimator failures block the check: {detail}"),
        ));
    }
    match id {
        CheckId::ConvergenceDeadline => convergence_deadline(entry),
        CheckId::RateFitOrdering => rate_fit_ordering(entry),
        CheckId::ResidualVarianceBound => residual_variance_bound(entry),
        CheckId::AmplitudeBoundedError => amplitude_bounded_error(entry),
        CheckId::AmplitudeSpectralLeak => amplitude_spectral_leak(entry),
        CheckId::ChirpTracking => chirp_tracking(entry),
        CheckId::DampingRippleOrdering => damping_ripple_ordering(entry),
        CheckId::BaselineParity => baseline_parity(entry),
        CheckId::ReachTimeOrdering => unreachable!("suite-wide check dispatched separately"),
    }
}

fn required_omega0(scenario: &Scenario) -> Result<f64> {
    scenario.constant_omega0().ok_or_else(|| {
        HarnessError::Config(format!(
            "scenario `{}` declares a check that needs a constant carrier frequency",
            scenario.name
        ))
    })
}

/// First time the estimate is within `band` of `omega0`.
fn reach_time(trace: &EstimatorTrace, omega0: f64, band: f64) -> Option<f64> {
    trace
        .records
        .iter()
        .find(|r| (omega0 - r.theta).abs() < band)
        .map(|r| r.t)
}

fn worst_error_after(trace: &EstimatorTrace, omega0: f64, settle: f64) -> f64 {
    trace
        .records
        .iter()
        .filter(|r| r.t > settle)
        .map(|r| (omega0 - r.theta).abs())
        .fold(0.0, f64::max)
}

fn convergence_deadline(entry: &Entry) -> Result<CheckOutcome> {
    let omega0 = required_omega0(entry.scenario)?;
    let amplitude = entry.scenario.nominal_amplitude().unwrap_or(1.0);
    let mut passed = true;
    let mut parts = Vec::new();
    for run in &entry.artifact.runs {
        let beta = predicted_rate(run.entry.gamma, amplitude, omega0);
        let deadline = DEADLINE_MULTIPLE / beta;
        match reach_time(&run.trace, omega0, REACH_BAND) {
            Some(t) if t <= deadline => {
                parts.push(format!("{}: reached at {t:.2} s (deadline {deadline:.1} s)", run.entry.label));
            }
            Some(t) => {
                passed = false;
                parts.push(format!("{}: reached at {t:.2} s, past the {deadline:.1} s deadline", run.entry.label));
            }
            None => {
                passed = false;
                parts.push(format!("{}: never within {REACH_BAND} rad/s", run.entry.label));
            }
        }
    }
    Ok(CheckOutcome::scoped(
        CheckId::ConvergenceDeadline,
        &entry.scenario.name,
        passed,
        parts.join("; "),
    ))
}

fn rate_fit_ordering(entry: &Entry) -> Result<CheckOutcome> {
    let omega0 = required_omega0(entry.scenario)?;
    let amplitude = entry.scenario.nominal_amplitude().unwrap_or(1.0);
    let skip = default_transient_skip(omega0);

    // Group runs by initialization; within a group rates must track the gain.
    let mut theta0s: Vec<f64> = entry.artifact.runs.iter().map(|r| r.entry.theta0).collect();
    theta0s.sort_by(f64::total_cmp);
    theta0s.dedup();

    let mut passed = true;
    let mut parts = Vec::new();
    for theta0 in theta0s {
        let mut group: Vec<_> = entry
            .artifact
            .runs
            .iter()
            .filter(|r| r.entry.theta0 == theta0)
            .collect();
        group.sort_by(|a, b| a.entry.gamma.total_cmp(&b.entry.gamma));
        let mut previous = 0.0;
        for run in group {
            let predicted = predicted_rate(run.entry.gamma, amplitude, omega0);
            match fit_exponential_rate(&run.trace, omega0, skip) {
                Ok(beta_hat) => {
                    let floor = RATE_FIT_MIN_FRACTION * predicted;
                    if beta_hat < floor || beta_hat <= previous {
                        passed = false;
                    }
                    parts.push(format!(
                        "{}: beta_hat={beta_hat:.3} (predicted {predicted:.3})",
                        run.entry.label
                    ));
                    previous = beta_hat;
                }
                Err(error) => {
                    passed = false;
                    parts.push(format!("{}: fit failed: {error}", run.entry.label));
                }
            }
        }
    }
    Ok(CheckOutcome::scoped(CheckId::RateFitOrdering, &entry.scenario.name, passed, parts.join("; ")))
}

/// Re-run a scenario with its noise seed shifted; shift 0 reuses nothing and
/// regenerates deterministically, so callers pass the base artifact instead.
fn rerun_shifted(scenario: &Scenario, shift: u64) -> Result<RunArtifact> {
    let seed = scenario
        .signal
        .noise()
        .map(|noise| noise.seed)
        .unwrap_or_default();
    let mut shifted = scenario.clone();
    shifted.signal = with_seed(&scenario.signal, seed + shift);
    run_scenario(&shifted, false)
}

fn reach_time_ordering(entries: &[&Entry]) -> Result<CheckOutcome> {
    let mut ordered: Vec<&Entry> = entries.to_vec();
    for entry in &ordered {
        required_omega0(entry.scenario)?;
    }
    ordered.sort_by(|a, b| {
        a.scenario
            .constant_omega0()
            .unwrap()
            .total_cmp(&b.scenario.constant_omega0().unwrap())
    });

    let mut passed = true;
    let mut parts = Vec::new();
    for shift in SEED_SHIFTS {
        let mut previous = f64::NEG_INFINITY;
        let mut times = Vec::new();
        for entry in &ordered {
            let omega0 = entry.scenario.constant_omega0().unwrap();
            let artifact;
            let runs = if shift == 0 {
                &entry.artifact.runs
            } else {
                artifact = rerun_shifted(entry.scenario, shift)?;
                if !artifact.failures.is_empty() {
                    passed = false;
                }
                &artifact.runs
            };
            let Some(run) = runs.first() else {
                passed = false;
                times.push(format!("{omega0}: no run"));
                continue;
            };
            match reach_time(&run.trace, omega0, RELATIVE_BAND * omega0) {
                Some(t) => {
                    if t <= previous {
                        passed = false;
                    }
                    previous = t;
                    times.push(format!("{omega0}: {t:.3} s"));
                }
                None => {
                    passed = false;
                    times.push(format!("{omega0}: never within 2%"));
                }
            }
        }
        parts.push(format!("seed+{shift}: [{}]", times.join(", ")));
    }
    Ok(CheckOutcome {
        check: CheckId::ReachTimeOrdering,
        scenario: None,
        passed,
        detail: parts.join("; "),
    })
}

fn residual_variance_bound(entry: &Entry) -> Result<CheckOutcome> {
    let omega0 = required_omega0(entry.scenario)?;
    let amplitude = entry.scenario.nominal_amplitude().unwrap_or(1.0);
    let Some(noise) = entry.scenario.signal.noise() else {
        return Err(HarnessError::Config(format!(
            "scenario `{}` declares a variance-bound check but has no noise",
            entry.scenario.name
        )));
    };
    let tau_sq = noise.sample_variance(entry.artifact.dt);
    let bound = noise_floor(tau_sq, omega0, amplitude);

    let mut passed = true;
    let mut parts = Vec::new();
    for shift in SEED_SHIFTS {
        let artifact;
        let runs = if shift == 0 {
            &entry.artifact.runs
        } else {
            artifact = rerun_shifted(entry.scenario, shift)?;
            if !artifact.failures.is_empty() {
                passed = false;
            }
            &artifact.runs
        };
        for run in runs {
            match residual_variance(&run.trace, omega0, TAIL_FRACTION) {
                Ok(stats) => {
                    if stats.variance >= bound {
                        passed = false;
                    }
                    parts.push(format!(
                        "{} seed+{shift}: var={:.3e} (bound {bound:.3e})",
                        run.entry.label, stats.variance
                    ));
                }
                Err(error) => {
                    passed = false;
                    parts.push(format!("{} seed+{shift}: {error}", run.entry.label));
                }
            }
        }
    }
    Ok(CheckOutcome::scoped(
        CheckId::ResidualVarianceBound,
        &entry.scenario.name,
        passed,
        parts.join("; "),
    ))
}

fn amplitude_bounded_error(entry: &Entry) -> Result<CheckOutcome> {
    let omega0 = required_omega0(entry.scenario)?;
    let mut passed = true;
    let mut parts = Vec::new();
    for run in &entry.artifact.runs {
        let worst = worst_error_after(&run.trace, omega0, AM_SETTLE_TIME);
        if worst >= AM_ERROR_BOUND {
            passed = false;
        }
        parts.push(format!(
            "{}: worst |error| {worst:.3} rad/s after {AM_SETTLE_TIME} s",
            run.entry.label
        ));
    }
    Ok(CheckOutcome::scoped(
        CheckId::AmplitudeBoundedError,
        &entry.scenario.name,
        passed,
        parts.join("; "),
    ))
}

fn amplitude_spectral_leak(entry: &Entry) -> Result<CheckOutcome> {
    let omega0 = required_omega0(entry.scenario)?;
    let SignalSpec::AmSine { am_rate, .. } = entry.scenario.signal else {
        return Err(HarnessError::Config(format!(
            "scenario `{}` declares a spectral-leak check but is not amplitude modulated",
            entry.scenario.name
        )));
    };
    let window = SPECTRAL_PERIODS * TAU / am_rate;
    let start = entry.artifact.duration - window;
    if start < AM_SETTLE_TIME {
        return Err(HarnessError::Config(format!(
            "scenario `{}` is too short for {SPECTRAL_PERIODS} modulation periods after settling",
            entry.scenario.name
        )));
    }

    let mut passed = true;
    let mut parts = Vec::new();
    for run in &entry.artifact.runs {
        let eps: Vec<f64> = run
            .trace
            .records
            .iter()
            .filter(|r| r.t >= start)
            .map(|r| omega0 - r.theta)
            .collect();
        let lines = hann_periodogram(&eps, entry.artifact.dt, 22.0 * am_rate);
        let line_power = lines
            .iter()
            .filter(|(w, _)| (w - am_rate).abs() <= am_rate / 3.0)
            .map(|(_, p)| *p)
            .fold(0.0f64, f64::max);
        let broadband: f64 = lines
            .iter()
            .filter(|(w, _)| (w - am_rate).abs() > 2.0 * am_rate / 3.0)
            .map(|(_, p)| *p)
            .sum();
        let ratio = line_power / broadband;
        if ratio >= SPECTRAL_LEAK_RATIO {
            passed = false;
        }
        parts.push(format!(
            "{}: line {line_power:.3e} vs broadband {broadband:.3e} (ratio {ratio:.2})",
            run.entry.label
        ));
    }
    Ok(CheckOutcome::scoped(
        CheckId::AmplitudeSpectralLeak,
        &entry.scenario.name,
        passed,
        parts.join("; "),
    ))
}

fn chirp_tracking(entry: &Entry) -> Result<CheckOutcome> {
    let Some(track) = &entry.artifact.omega_track else {
        return Err(HarnessError::Config(format!(
            "scenario `{}` declares a tracking check but has no frequency track",
            entry.scenario.name
        )));
    };
    let mut passed = true;
    let mut parts = Vec::new();
    for run in &entry.artifact.runs {
        let worst = run
            .trace
            .records
            .iter()
            .zip(track)
            .filter(|(r, _)| r.t > TRACKING_SETTLE_TIME)
            .map(|(r, w)| (w - r.theta).abs())
            .fold(0.0, f64::max);
        if worst >= TRACKING_BOUND {
            passed = false;
        }
        parts.push(format!(
            "{}: worst tracking error {worst:.3} rad/s after {TRACKING_SETTLE_TIME} s",
            run.entry.label
        ));
    }
    Ok(CheckOutcome::scoped(CheckId::ChirpTracking, &entry.scenario.name, passed, parts.join("; ")))
}

fn damping_ripple_ordering(entry: &Entry) -> Result<CheckOutcome> {
    let omega0 = required_omega0(entry.scenario)?;
    let mut runs: Vec<_> = entry.artifact.runs.iter().collect();
    if runs.len() < 2 {
        return Err(HarnessError::Config(format!(
            "scenario `{}` needs at least two damping settings to order",
            entry.scenario.name
        )));
    }
    runs.sort_by(|a, b| a.entry.zeta.total_cmp(&b.entry.zeta));

    let mut passed = true;
    let mut variances = Vec::new();
    let mut parts = Vec::new();
    for run in &runs {
        let Some(entry_time) = reach_time(&run.trace, omega0, RELATIVE_BAND * omega0) else {
            passed = false;
            parts.push(format!("{}: never entered the 2% band", run.entry.label));
            continue;
        };
        let window: Vec<f64> = run
            .trace
            .records
            .iter()
            .filter(|r| r.t >= entry_time && r.t < entry_time + RIPPLE_WINDOW)
            .map(|r| r.theta)
            .collect();
        if window.len() < 2 {
            passed = false;
            parts.push(format!("{}: band entry too late to measure ripple", run.entry.label));
            continue;
        }
        let n = window.len() as f64;
        let mean = window.iter().sum::<f64>() / n;
        let variance = window.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        parts.push(format!("{}: var {variance:.3e} after entry at {entry_time:.2} s", run.entry.label));
        variances.push(variance);
    }
    if variances.len() == runs.len() {
        if !variances.windows(2).all(|w| w[0] > w[1]) {
            passed = false;
        }
        let (first, last) = (variances[0], *variances.last().unwrap());
        if last >= RIPPLE_RATIO_MAX * first {
            passed = false;
        }
        parts.push(format!("most/least damped ratio {:.4}", last / first));
    }
    Ok(CheckOutcome::scoped(
        CheckId::DampingRippleOrdering,
        &entry.scenario.name,
        passed,
        parts.join("; "),
    ))
}

fn baseline_parity(entry: &Entry) -> Result<CheckOutcome> {
    let omega0 = required_omega0(entry.scenario)?;
    let mut passed = entry.artifact.runs.len() >= 2;
    let mut parts = Vec::new();
    for run in &entry.artifact.runs {
        let error = (run.trace.final_theta() - omega0).abs();
        if error >= PARITY_TOLERANCE * omega0 {
            passed = false;
        }
        parts.push(format!("{}: final error {error:.2e} rad/s", run.entry.label));
    }
    Ok(CheckOutcome::scoped(CheckId::BaselineParity, &entry.scenario.name, passed, parts.join("; ")))
}
