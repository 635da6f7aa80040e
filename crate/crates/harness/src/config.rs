//! Suite configuration files.
//!
//! A suite is a TOML document with one `[[scenario]]` table per experiment;
//! every built-in preset can be expressed in this format, so a config file
//! is the escape hatch when the presets don't fit. Kind names accept `-` or
//! `_` interchangeably.
//!
//! ```toml
//! name = "example"
//!
//! [[scenario]]
//! name = "clean-50"
//! dt = 1e-4
//! duration = 10.0
//! checks = ["convergence-deadline"]
//!
//! [scenario.signal]
//! kind = "pure-sine"
//! omega0 = 50.0
//! amplitude = 1.0
//!
//! [[scenario.estimator]]
//! kind = "proposed"
//! label = "g100"
//! gamma = 100.0
//! theta0 = 10.0
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use freqest_core::signal::{NoiseSpec, SignalSpec};

use crate::checks::CheckId;
use crate::error::{HarnessError, Result};
use crate::scenario::{EstimatorEntry, EstimatorKind, Scenario, Suite};

#[derive(Debug, Serialize, Deserialize)]
struct SuiteDoc {
    name: String,
    #[serde(rename = "scenario")]
    scenarios: Vec<ScenarioDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioDoc {
    name: String,
    dt: f64,
    #[serde(default)]
    duration: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    checks: Vec<String>,
    signal: SignalDoc,
    #[serde(rename = "estimator")]
    estimators: Vec<EstimatorDoc>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignalDoc {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    am_offset: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    am_depth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    am_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    am_phase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_end: Option<f64>,
    /// Chirp ramp length in seconds (the scenario `duration` may stop
    /// earlier but never later).
    #[serde(skip_serializing_if = "Option::is_none")]
    ramp_duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    psd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    variance: Option<f64>,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimatorDoc {
    kind: String,
    label: String,
    gamma: f64,
    #[serde(default = "one")]
    zeta: f64,
    theta0: f64,
}

fn one() -> f64 {
    1.0
}

fn normalize(kind: &str) -> String {
    kind.replace('_', "-")
}

fn field(scenario: &str, name: &str, value: Option<f64>) -> Result<f64> {
    value.ok_or_else(|| {
        HarnessError::Config(format!("scenario `{scenario}`: signal needs `{name}`"))
    })
}

impl NoiseDoc {
    fn to_spec(&self) -> NoiseSpec {
        NoiseSpec { psd: self.psd, variance: self.variance, seed: self.seed }
    }

    fn from_spec(spec: &NoiseSpec) -> Self {
        NoiseDoc { psd: spec.psd, variance: spec.variance, seed: spec.seed }
    }
}

impl SignalDoc {
    fn to_spec(&self, scenario: &str) -> Result<SignalSpec> {
        let noise = self.noise.as_ref().map(NoiseDoc::to_spec);
        Ok(match normalize(&self.kind).as_str() {
            "pure-sine" => SignalSpec::PureSine {
                omega0: field(scenario, "omega0", self.omega0)?,
                amplitude: field(scenario, "amplitude", self.amplitude)?,
            },
            "noisy-sine" => SignalSpec::NoisySine {
                omega0: field(scenario, "omega0", self.omega0)?,
                amplitude: field(scenario, "amplitude", self.amplitude)?,
                noise: noise.ok_or_else(|| {
                    HarnessError::Config(format!(
                        "scenario `{scenario}`: noisy-sine needs a [scenario.signal.noise] table"
                    ))
                })?,
            },
            "am-sine" => SignalSpec::AmSine {
                omega0: field(scenario, "omega0", self.omega0)?,
                am_offset: field(scenario, "am_offset", self.am_offset)?,
                am_depth: field(scenario, "am_depth", self.am_depth)?,
                am_rate: field(scenario, "am_rate", self.am_rate)?,
                am_phase: self.am_phase.unwrap_or(0.0),
                noise,
            },
            "linear-chirp" => SignalSpec::LinearChirp {
                omega_start: field(scenario, "omega_start", self.omega_start)?,
                omega_end: field(scenario, "omega_end", self.omega_end)?,
                duration: field(scenario, "ramp_duration", self.ramp_duration)?,
                amplitude: field(scenario, "amplitude", self.amplitude)?,
                noise,
            },
            "from-file" => SignalSpec::FromFile {
                path: self.path.clone().unwrap_or_default().into(),
            },
            other => {
                return Err(HarnessError::Config(format!(
                    "scenario `{scenario}`: unknown signal kind `{other}`"
                )));
            }
        })
    }

    fn from_spec(spec: &SignalSpec) -> Self {
        let mut doc = SignalDoc { kind: normalize(spec.kind_name()), ..Default::default() };
        match spec {
            SignalSpec::PureSine { omega0, amplitude } => {
                doc.omega0 = Some(*omega0);
                doc.amplitude = Some(*amplitude);
            }
            SignalSpec::NoisySine { omega0, amplitude, noise } => {
                doc.omega0 = Some(*omega0);
                doc.amplitude = Some(*amplitude);
                doc.noise = Some(NoiseDoc::from_spec(noise));
            }
            SignalSpec::AmSine { omega0, am_offset, am_depth, am_rate, am_phase, noise } => {
                doc.omega0 = Some(*omega0);
                doc.am_offset = Some(*am_offset);
                doc.am_depth = Some(*am_depth);
                doc.am_rate = Some(*am_rate);
                doc.am_phase = Some(*am_phase);
                doc.noise = noise.as_ref().map(NoiseDoc::from_spec);
            }
            SignalSpec::LinearChirp { omega_start, omega_end, duration, amplitude, noise } => {
                doc.omega_start = Some(*omega_start);
                doc.omega_end = Some(*omega_end);
                doc.ramp_duration = Some(*duration);
                doc.amplitude = Some(*amplitude);
                doc.noise = noise.as_ref().map(NoiseDoc::from_spec);
            }
            SignalSpec::FromFile { path } => {
                doc.path = Some(path.display().to_string());
            }
        }
        doc
    }
}

impl EstimatorDoc {
    fn to_entry(&self, scenario: &str) -> Result<EstimatorEntry> {
        let kind = match normalize(&self.kind).as_str() {
            "proposed" => EstimatorKind::Proposed,
            "proposed-zeta" => EstimatorKind::ProposedZeta,
            "anf" => EstimatorKind::Anf,
            other => {
                return Err(HarnessError::Config(format!(
                    "scenario `{scenario}`: unknown estimator kind `{other}` \
                     (expected proposed, proposed-zeta, or anf)"
                )));
            }
        };
        Ok(EstimatorEntry::new(kind, &self.label, self.gamma, self.zeta, self.theta0))
    }

    fn from_entry(entry: &EstimatorEntry) -> Self {
        EstimatorDoc {
            kind: entry.kind.as_str().to_owned(),
            label: entry.label.clone(),
            gamma: entry.gamma,
            zeta: entry.zeta,
            theta0: entry.theta0,
        }
    }
}

fn scenario_from_doc(doc: &ScenarioDoc) -> Result<Scenario> {
    let mut checks = Vec::new();
    for text in &doc.checks {
        let id = CheckId::parse(&normalize(text))?;
        if !checks.contains(&id) {
            checks.push(id);
        }
    }
    Ok(Scenario {
        name: doc.name.clone(),
        signal: doc.signal.to_spec(&doc.name)?,
        dt: doc.dt,
        duration: doc.duration,
        estimators: doc
            .estimators
            .iter()
            .map(|e| e.to_entry(&doc.name))
            .collect::<Result<_>>()?,
        checks,
    })
}

fn scenario_to_doc(scenario: &Scenario) -> ScenarioDoc {
    ScenarioDoc {
        name: scenario.name.clone(),
        dt: scenario.dt,
        duration: scenario.duration,
        checks: scenario.checks.iter().map(|c| c.as_str().to_owned()).collect(),
        signal: SignalDoc::from_spec(&scenario.signal),
        estimators: scenario.estimators.iter().map(EstimatorDoc::from_entry).collect(),
    }
}

/// Parse and validate a suite config document.
pub fn suite_from_toml(text: &str) -> Result<Suite> {
    let doc: SuiteDoc =
        toml::from_str(text).map_err(|e| HarnessError::Config(format!("config: {e}")))?;
    let suite = Suite {
        name: doc.name,
        scenarios: doc.scenarios.iter().map(scenario_from_doc).collect::<Result<_>>()?,
    };
    suite.validate()?;
    Ok(suite)
}

/// Load a suite config file.
pub fn suite_from_path(path: &Path) -> Result<Suite> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    suite_from_toml(&text).map_err(|error| match error {
        HarnessError::Config(msg) => {
            HarnessError::Config(format!("{}: {msg}", path.display()))
        }
        other => other,
    })
}

/// Render a suite in the config format `run` accepts.
pub fn suite_to_toml(suite: &Suite) -> Result<String> {
    let doc = SuiteDoc {
        name: suite.name.clone(),
        scenarios: suite.scenarios.iter().map(scenario_to_doc).collect(),
    };
    toml::to_string_pretty(&doc)
        .map_err(|e| HarnessError::Config(format!("cannot serialize suite: {e}")))
}
