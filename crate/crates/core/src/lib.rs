//! Online frequency estimation for noisy sinusoids whose amplitude drifts.
//!
//! The crate bundles four pieces that are meant to be used together:
//!
//! * [`signal`] — deterministic synthesis of test signals (sines, slow
//!   amplitude modulation, linear chirps, seeded Gaussian noise);
//! * [`estimator`] — the sign-based adaptive frequency estimator, a
//!   one-gain design whose convergence rate does not depend on the signal
//!   amplitude staying put;
//! * [`anf`] — a classical adaptive-notch-filter baseline on the same
//!   numerics, for side-by-side comparisons;
//! * [`analysis`] — closed-form response curves plus rate fitting and
//!   residual statistics for finished runs.
//!
//! ```
//! use freqest_core::analysis::{ConvergenceReport, default_transient_skip};
//! use freqest_core::estimator::{run, EstimatorParams};
//! use freqest_core::signal::{generate, SignalSpec};
//!
//! // 50 rad/s carrier, estimator started at 10 rad/s
//! let spec = SignalSpec::PureSine { omega0: 50.0, amplitude: 1.0 };
//! let signal = generate(&spec, 1e-4, 6.0).unwrap();
//! let trace = run(&signal, 10.0, &EstimatorParams::new(200.0, 1e-4)).unwrap();
//!
//! let skip = default_transient_skip(50.0);
//! let report = ConvergenceReport::from_trace(&trace, 50.0, 1.0, 0.0, skip, 0.25);
//! assert!((trace.final_theta() - 50.0).abs() < 0.5);
//! assert!(report.beta_hat.unwrap() > 0.8 * report.beta_pred);
//! ```

pub mod analysis;
pub mod anf;
pub mod error;
pub mod estimator;
pub mod signal;

mod solver;

pub use error::{Error, Result};
