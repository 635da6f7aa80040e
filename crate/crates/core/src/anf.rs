//! Classical adaptive-notch-filter baseline.
//!
//! A second-order low-pass section is tuned by a gradient-style law until
//! its resonance sits on the input frequency. It shares the integration
//! and clamping machinery of [`crate::estimator`] so that side-by-side
//! comparisons measure the adaptation laws, not the numerics. Unlike the
//! sign-based estimator, the update here is proportional to the states
//! themselves, so the effective adaptation rate scales with the squared
//! signal amplitude and the gain must be retuned per scenario.

use crate::error::{Error, Result};
use crate::estimator::{DEFAULT_THETA_MIN, EstimatorTrace, OutputState, run_clamped};
use crate::signal::TimeSeries;

/// Notch-filter configuration for one run. `theta` is clamped at the same
/// [`DEFAULT_THETA_MIN`] floor as the estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnfParams {
    /// Adaptation gain.
    pub gamma: f64,
    /// Damping ratio of the section.
    pub zeta: f64,
    /// Integration step, s. Must equal the sample period of the input.
    pub dt: f64,
}

impl AnfParams {
    /// Critically damped defaults: `zeta = 1`.
    pub fn new(gamma: f64, dt: f64) -> Self {
        Self {
            gamma,
            zeta: 1.0,
            dt,
        }
    }

    /// Same parameters with a different damping ratio.
    pub fn with_zeta(mut self, zeta: f64) -> Self {
        self.zeta = zeta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma", self.gamma), ("zeta", self.zeta), ("dt", self.dt)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "notch-filter {name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Instantaneous notch-filter state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnfState {
    /// Section output.
    pub x: f64,
    /// Section output rate.
    pub xdot: f64,
    /// Current frequency estimate, rad/s.
    pub theta: f64,
}

impl AnfState {
    /// Rest state with an initial frequency guess.
    pub fn initial(theta0: f64) -> Self {
        Self {
            x: 0.0,
            xdot: 0.0,
            theta: theta0,
        }
    }
}

/// Right-hand side of the notch-filter ODEs for a held input sample
/// `sigma`: a low-pass section `x'' + 2 zeta theta x' + theta^2 x =
/// theta^2 sigma` plus the gradient law
/// `theta' = -gamma x (theta^2 sigma - 2 zeta theta x')`.
pub fn anf_derivatives(state: &AnfState, sigma: f64, params: &AnfParams) -> (f64, f64, f64) {
    let AnfState { x, xdot, theta } = *state;
    let damping = 2.0 * params.zeta * theta;
    let d_x = xdot;
    let d_xdot = -damping * xdot - theta * theta * x + theta * theta * sigma;
    let d_theta = -params.gamma * x * (theta * theta * sigma - damping * xdot);
    (d_x, d_xdot, d_theta)
}

/// One clamped Runge-Kutta step; same conventions as
/// [`crate::estimator::step`].
pub fn anf_step(state: &AnfState, sigma: f64, params: &AnfParams) -> Result<AnfState> {
    let f = |s: &crate::solver::State3| {
        let at = AnfState {
            x: s[0],
            xdot: s[1],
            theta: s[2],
        };
        let (d1, d2, d3) = anf_derivatives(&at, sigma, params);
        [d1, d2, d3]
    };
    let next = crate::solver::rk4_step(f, &[state.x, state.xdot, state.theta], params.dt);
    crate::estimator::finish_step(&next, DEFAULT_THETA_MIN).map(|s| AnfState {
        x: s[0],
        xdot: s[1],
        theta: s[2],
    })
}

/// Drive the notch filter over a whole series from rest.
///
/// Returns the shared trace type; the `x1`/`x2` columns carry `x`/`xdot`
/// and `e` records `sigma - x` for diagnostics.
pub fn anf_run(signal: &TimeSeries, theta0: f64, params: &AnfParams) -> Result<EstimatorTrace> {
    params.validate()?;
    let deriv = |s: &crate::solver::State3, sigma: f64| {
        let at = AnfState {
            x: s[0],
            xdot: s[1],
            theta: s[2],
        };
        let (d1, d2, d3) = anf_derivatives(&at, sigma, params);
        [d1, d2, d3]
    };
    let records = run_clamped(
        signal,
        theta0,
        DEFAULT_THETA_MIN,
        params.dt,
        deriv,
        OutputState::X1,
    )?;
    Ok(EstimatorTrace {
        gamma: params.gamma,
        zeta: params.zeta,
        theta0,
        dt: params.dt,
        records,
    })
}
