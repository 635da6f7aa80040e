//! Scenario model and runner: a `Suite` bundles named scenarios, each pairing
//! one excitation signal with a set of estimator configurations and the
//! checks to evaluate over the results.

use std::path::PathBuf;

use freqest_core::analysis::{ConvergenceReport, default_transient_skip};
use freqest_core::anf::{AnfParams, anf_run};
use freqest_core::estimator::{EstimatorParams, EstimatorTrace, run};
use freqest_core::signal::{SignalSpec, TimeSeries, generate, omega_at};

use crate::checks::CheckId;
use crate::csvio;
use crate::error::{HarnessError, Result};

// ── Configuration types ─────────────────────────────────────────────────

/// Which adaptation law an entry runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// The critically damped estimator (zeta fixed at 1).
    Proposed,
    /// The damping-augmented variant (zeta is a free parameter).
    ProposedZeta,
    /// The gradient-law ANF baseline.
    Anf,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Proposed => "proposed",
            EstimatorKind::ProposedZeta => "proposed-zeta",
            EstimatorKind::Anf => "anf",
        }
    }
}

/// One estimator configuration inside a scenario.
#[derive(Debug, Clone)]
pub struct EstimatorEntry {
    pub kind: EstimatorKind,
    /// Short unique name; used in output file names.
    pub label: String,
    pub gamma: f64,
    pub zeta: f64,
    pub theta0: f64,
}

impl EstimatorEntry {
    pub fn new(kind: EstimatorKind, label: &str, gamma: f64, zeta: f64, theta0: f64) -> Self {
        EstimatorEntry { kind, label: label.to_owned(), gamma, zeta, theta0 }
    }

    fn validate(&self) -> Result<()> {
        if self.label.is_empty()
            || !self
                .label
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return Err(HarnessError::Config(format!(
                "estimator label `{}` must be non-empty and use only [A-Za-z0-9._-]",
                self.label
            )));
        }
        if self.kind == EstimatorKind::Proposed && self.zeta != 1.0 {
            return Err(HarnessError::Config(format!(
                "estimator `{}` is the critically damped law; set kind to proposed-zeta for zeta = {}",
                self.label, self.zeta
            )));
        }
        Ok(())
    }
}

/// A named experiment: one signal, one time grid, several estimators.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub signal: SignalSpec,
    pub dt: f64,
    pub duration: f64,
    pub estimators: Vec<EstimatorEntry>,
    pub checks: Vec<CheckId>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return Err(HarnessError::Config(format!(
                "scenario name `{}` must be non-empty and use only [A-Za-z0-9._-]",
                self.name
            )));
        }
        if self.estimators.is_empty() {
            return Err(HarnessError::Config(format!(
                "scenario `{}` configures no estimators",
                self.name
            )));
        }
        for entry in &self.estimators {
            entry.validate()?;
        }
        for (i, a) in self.estimators.iter().enumerate() {
            for b in &self.estimators[i + 1..] {
                if a.label == b.label {
                    return Err(HarnessError::Config(format!(
                        "scenario `{}` has duplicate estimator label `{}`",
                        self.name, a.label
                    )));
                }
            }
        }
        if !matches!(self.signal, SignalSpec::FromFile { .. }) {
            if !(self.dt > 0.0 && self.dt.is_finite()) {
                return Err(HarnessError::Config(format!(
                    "scenario `{}`: dt must be positive and finite",
                    self.name
                )));
            }
            if !(self.duration >= self.dt && self.duration.is_finite()) {
                return Err(HarnessError::Config(format!(
                    "scenario `{}`: duration must be at least one step",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// The constant carrier frequency, when the signal has one.
    pub fn constant_omega0(&self) -> Option<f64> {
        match self.signal {
            SignalSpec::PureSine { omega0, .. }
            | SignalSpec::NoisySine { omega0, .. }
            | SignalSpec::AmSine { omega0, .. } => Some(omega0),
            SignalSpec::LinearChirp { .. } | SignalSpec::FromFile { .. } => None,
        }
    }

    /// Nominal amplitude used for rate predictions and noise floors: the
    /// constant amplitude, or the modulation midline for AM signals.
    pub fn nominal_amplitude(&self) -> Option<f64> {
        match self.signal {
            SignalSpec::PureSine { amplitude, .. } | SignalSpec::NoisySine { amplitude, .. } => {
                Some(amplitude)
            }
            SignalSpec::AmSine { am_offset, .. } => Some(am_offset),
            SignalSpec::LinearChirp { .. } | SignalSpec::FromFile { .. } => None,
        }
    }
}

/// A named collection of scenarios run and checked together.
#[derive(Debug, Clone)]
pub struct Suite {
    pub name: String,
    pub scenarios: Vec<Scenario>,
}

impl Suite {
    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(HarnessError::Config(format!("suite `{}` is empty", self.name)));
        }
        for scenario in &self.scenarios {
            scenario.validate()?;
        }
        for (i, a) in self.scenarios.iter().enumerate() {
            for b in &self.scenarios[i + 1..] {
                if a.name == b.name {
                    return Err(HarnessError::Config(format!(
                        "duplicate scenario name `{}` in suite `{}`",
                        a.name, self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Command-line adjustments applied before a suite runs.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Replace every scenario's noise seed with `base + scenario index`.
    pub seed_override: Option<u64>,
    /// Replace every scenario's integration step (synthetic signals only).
    pub dt_override: Option<f64>,
    /// Subtract the sample mean when loading a measured signal.
    pub detrend: bool,
    /// Input file for file-backed scenarios.
    pub csv_input: Option<PathBuf>,
}

// ── Run results ─────────────────────────────────────────────────────────

/// One estimator's results within a scenario run.
#[derive(Debug, Clone)]
pub struct EstimatorRun {
    pub entry: EstimatorEntry,
    pub trace: EstimatorTrace,
    /// Convergence diagnostics; present only when the signal has a known
    /// constant carrier frequency.
    pub report: Option<ConvergenceReport>,
}

/// Everything produced by running one scenario.
#[derive(Debug, Clone)]
pub struct RunArtifact {
    pub scenario_name: String,
    /// FNV-1a hash over the generated sample stream; identical for every
    /// estimator in the scenario by construction, recorded as evidence.
    pub signal_hash: u64,
    pub dt: f64,
    pub duration: f64,
    pub sample_count: usize,
    /// Instantaneous true frequency per sample, when known.
    pub omega_track: Option<Vec<f64>>,
    pub runs: Vec<EstimatorRun>,
    /// (label, error) pairs for estimators that failed; failures do not
    /// abort sibling runs.
    pub failures: Vec<(String, String)>,
}

impl RunArtifact {
    pub fn run(&self, label: &str) -> Option<&EstimatorRun> {
        self.runs.iter().find(|r| r.entry.label == label)
    }
}

// ── Execution ───────────────────────────────────────────────────────────

fn fnv1a_update(hash: &mut u64, bytes: &[u8]) {
    for &byte in bytes {
        *hash ^= u64::from(byte);
        *hash = hash.wrapping_mul(0x100_0000_01b3);
    }
}

/// Order-sensitive hash of the exact sample stream an estimator consumes.
pub fn signal_hash(series: &TimeSeries) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    fnv1a_update(&mut hash, &series.t0().to_le_bytes());
    fnv1a_update(&mut hash, &series.dt().to_le_bytes());
    for sample in series.samples() {
        fnv1a_update(&mut hash, &sample.to_le_bytes());
    }
    hash
}

/// Copy of `spec` with its noise seed replaced; specs without noise are
/// returned unchanged.
pub fn with_seed(spec: &SignalSpec, seed: u64) -> SignalSpec {
    let mut spec = spec.clone();
    match &mut spec {
        SignalSpec::NoisySine { noise, .. } => noise.seed = seed,
        SignalSpec::AmSine { noise: Some(noise), .. }
        | SignalSpec::LinearChirp { noise: Some(noise), .. } => noise.seed = seed,
        _ => {}
    }
    spec
}

/// Apply command-line overrides, producing the suite that actually runs.
pub fn resolve_suite(suite: &Suite, options: &RunOptions) -> Result<Suite> {
    let mut resolved = suite.clone();
    if let Some(path) = &options.csv_input {
        let mut applied = false;
        for scenario in &mut resolved.scenarios {
            if let SignalSpec::FromFile { path: target } = &mut scenario.signal {
                *target = path.clone();
                applied = true;
            }
        }
        if !applied {
            return Err(HarnessError::Config(
                "--csv only applies to file-backed scenarios".into(),
            ));
        }
    }
    if let Some(dt) = options.dt_override {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(HarnessError::Config("--dt must be positive and finite".into()));
        }
        for scenario in &mut resolved.scenarios {
            if matches!(scenario.signal, SignalSpec::FromFile { .. }) {
                return Err(HarnessError::Config(
                    "--dt cannot override the sampling of a file-backed scenario".into(),
                ));
            }
            scenario.dt = dt;
        }
    }
    if let Some(base) = options.seed_override {
        for (index, scenario) in resolved.scenarios.iter_mut().enumerate() {
            scenario.signal = with_seed(&scenario.signal, base + index as u64);
        }
    }
    resolved.validate()?;
    Ok(resolved)
}

/// Build the scenario's input samples: synthetic generation or file load.
fn build_signal(scenario: &Scenario, detrend: bool) -> Result<TimeSeries> {
    match &scenario.signal {
        SignalSpec::FromFile { path } => {
            if path.as_os_str().is_empty() {
                return Err(HarnessError::MissingInput(format!(
                    "scenario `{}` reads a measured signal; pass --csv <file>",
                    scenario.name
                )));
            }
            csvio::load_signal_csv(path, detrend)
        }
        spec => Ok(generate(spec, scenario.dt, scenario.duration)?),
    }
}

/// Run every estimator of one scenario on the identical sample stream.
pub fn run_scenario(scenario: &Scenario, detrend: bool) -> Result<RunArtifact> {
    scenario.validate()?;
    let series = build_signal(scenario, detrend)?;
    let dt = series.dt();
    let hash = signal_hash(&series);

    let omega_track: Option<Vec<f64>> = match &scenario.signal {
        SignalSpec::FromFile { .. } => None,
        spec => Some(
            (0..series.len())
                .map(|i| omega_at(spec, series.time_at(i)))
                .collect::<freqest_core::Result<_>>()?,
        ),
    };

    let tau_sq = scenario
        .signal
        .noise()
        .map(|noise| noise.sample_variance(dt))
        .unwrap_or(0.0);

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for entry in &scenario.estimators {
        let outcome = match entry.kind {
            EstimatorKind::Proposed | EstimatorKind::ProposedZeta => run(
                &series,
                entry.theta0,
                &EstimatorParams::new(entry.gamma, dt).with_zeta(entry.zeta),
            ),
            EstimatorKind::Anf => anf_run(
                &series,
                entry.theta0,
                &AnfParams::new(entry.gamma, dt).with_zeta(entry.zeta),
            ),
        };
        match outcome {
            Ok(trace) => {
                debug_assert_eq!(trace.len(), series.len());
                let report = match (scenario.constant_omega0(), scenario.nominal_amplitude()) {
                    (Some(omega0), Some(amplitude)) => Some(ConvergenceReport::from_trace(
                        &trace,
                        omega0,
                        amplitude,
                        tau_sq,
                        default_transient_skip(omega0),
                        0.25,
                    )),
                    _ => None,
                };
                runs.push(EstimatorRun { entry: entry.clone(), trace, report });
            }
            Err(error) => failures.push((entry.label.clone(), error.to_string())),
        }
    }

    Ok(RunArtifact {
        scenario_name: scenario.name.clone(),
        signal_hash: hash,
        dt,
        duration: series.duration(),
        sample_count: series.len(),
        omega_track,
        runs,
        failures,
    })
}

/// Run all scenarios of a (resolved) suite in declaration order.
pub fn run_suite(suite: &Suite, detrend: bool) -> Result<Vec<RunArtifact>> {
    suite.validate()?;
    suite
        .scenarios
        .iter()
        .map(|scenario| run_scenario(scenario, detrend))
        .collect()
}
