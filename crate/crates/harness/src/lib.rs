//! Scenario harness for the adaptive frequency estimator: built-in and
//! file-configured experiment suites, batch execution, artifact emission,
//! and quantitative pass/fail checks.
//!
//! The `freqest` binary is a thin shell over this library:
//!
//! * [`presets`] — the built-in suites;
//! * [`config`] — the TOML suite format (every preset round-trips);
//! * [`scenario`] — the suite model and runner;
//! * [`checks`] — verdicts evaluated over finished runs;
//! * [`report`] — trace CSVs and summary documents;
//! * [`csvio`] — signal ingestion and trace file I/O.
//!
//! ```
//! use freqest_cli::{checks, presets, scenario};
//!
//! let suite = presets::build("parity50").unwrap();
//! let artifacts = scenario::run_suite(&suite, false).unwrap();
//! let outcomes = checks::evaluate(&suite, &artifacts).unwrap();
//! assert!(outcomes.iter().all(|o| o.passed));
//! ```

pub mod checks;
pub mod config;
pub mod csvio;
pub mod error;
pub mod presets;
pub mod report;
pub mod scenario;

pub use error::{HarnessError, Result};
