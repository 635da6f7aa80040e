//! Property tests: frequency-domain identities of the filter section, signal
//! generation determinism, trace alignment, clamp safety, and the exact gain
//! scaling laws of both adaptation laws.

use std::f64::consts::FRAC_PI_2;

use freqest_core::Error;
use freqest_core::analysis::{
    omega_gain, omega_gain_linear, transfer_e, transfer_e_with_zeta, transfer_g_with_zeta,
};
use freqest_core::anf::{AnfParams, anf_run};
use freqest_core::estimator::{EstimatorParams, run};
use freqest_core::signal::{NoiseSpec, SignalSpec, generate};
use proptest::prelude::*;

proptest! {
    /// At the matched frequency the section passes the input with unit gain
    /// and zero phase, for every damping ratio.
    #[test]
    fn matched_gain_is_unity(
        theta in 1e-2..1e4f64,
        zeta in 0.05..2.0f64,
    ) {
        let g = transfer_g_with_zeta(theta, theta, zeta);
        prop_assert!((g.magnitude() - 1.0).abs() < 1e-12);
        prop_assert!(g.phase().abs() < 1e-12);
    }

    /// |G|·|E| evaluated at the true frequency equals the adaptation-rate
    /// gain |theta^2 - omega0^2| / (theta^2 + omega0^2).
    #[test]
    fn gain_product_matches_adaptation_gain(
        theta in 1e-1..1e3f64,
        omega0 in 1e-1..1e3f64,
    ) {
        let g = transfer_g_with_zeta(omega0, theta, 1.0);
        let e = transfer_e_with_zeta(omega0, theta, 1.0).unwrap();
        let product = g.magnitude() * e.magnitude();
        prop_assert!((product - omega_gain(theta, omega0)).abs() < 1e-12);
    }

    /// The inverse-error response sits on the imaginary axis: its phase is
    /// +pi/2 below the matched frequency and -pi/2 above it.
    #[test]
    fn error_phase_is_a_quarter_turn(
        theta in 1e-1..1e3f64,
        ratio in 0.01..100.0f64,
    ) {
        let omega = theta * ratio;
        prop_assume!((omega - theta).abs() > 1e-6 * theta);
        let e = transfer_e(omega, theta).unwrap();
        let expected = if omega < theta { FRAC_PI_2 } else { -FRAC_PI_2 };
        prop_assert!((e.phase() - expected).abs() < 1e-9);
    }

    /// The adaptation-rate gain strictly decreases on the approach to the
    /// target and dominates its linear under-approximation.
    #[test]
    fn adaptation_gain_shrinks_toward_match(
        omega0 in 1e-1..1e3f64,
        a in 0.0..1.0f64,
        b in 0.0..1.0f64,
    ) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-9);
        let theta_lo = lo * omega0;
        let theta_hi = hi * omega0;
        prop_assert!(omega_gain(theta_lo, omega0) > omega_gain(theta_hi, omega0));
        let linear = omega_gain_linear(theta_lo, omega0).unwrap();
        prop_assert!(linear <= omega_gain(theta_lo, omega0) + 1e-15);
    }

    /// Identical spec, step, and duration (seed included) reproduce the
    /// sample sequence bit for bit.
    #[test]
    fn generation_is_deterministic(
        omega0 in 1.0..200.0f64,
        amplitude in 0.01..10.0f64,
        variance in 1e-6..1e-1f64,
        seed in any::<u64>(),
    ) {
        let spec = SignalSpec::NoisySine {
            omega0,
            amplitude,
            noise: NoiseSpec::with_variance(variance, seed),
        };
        let first = generate(&spec, 1e-3, 0.25).unwrap();
        let second = generate(&spec, 1e-3, 0.25).unwrap();
        prop_assert_eq!(first.samples(), second.samples());
    }

    /// Sample counts follow floor(duration/dt) + 1 with a rounding guard, so
    /// near-integer duration/dt ratios do not drop the final sample.
    #[test]
    fn sample_count_includes_both_endpoints(
        steps in 1usize..5000,
        dt in 1e-5..1e-2f64,
    ) {
        let duration = steps as f64 * dt;
        let spec = SignalSpec::PureSine { omega0: 10.0, amplitude: 1.0 };
        let signal = generate(&spec, dt, duration).unwrap();
        prop_assert_eq!(signal.len(), steps + 1);
    }

    /// Arbitrary gains on a noisy input either integrate cleanly - every
    /// recorded state finite, theta never below the clamp - or fail loudly
    /// with the overflow error; nothing in between.
    #[test]
    fn clamp_and_finiteness_hold_for_arbitrary_gains(
        gamma in 1.0..1e4f64,
        theta0 in 1e-3..100.0f64,
        seed in any::<u64>(),
    ) {
        let spec = SignalSpec::NoisySine {
            omega0: 30.0,
            amplitude: 1.0,
            noise: NoiseSpec::with_variance(1e-2, seed),
        };
        let signal = generate(&spec, 1e-3, 0.5).unwrap();
        match run(&signal, theta0, &EstimatorParams::new(gamma, 1e-3)) {
            Ok(trace) => {
                for record in &trace.records {
                    prop_assert!(record.theta.is_finite());
                    prop_assert!(record.theta >= 1e-3);
                    prop_assert!(record.x1.is_finite() && record.x2.is_finite());
                }
            }
            Err(Error::NumericOverflow { .. }) => {}
            Err(other) => prop_assert!(false, "unexpected error: {other}"),
        }
    }

    /// Trace records sit exactly on the input sample grid.
    #[test]
    fn trace_aligns_with_input_grid(
        omega0 in 1.0..100.0f64,
        steps in 10usize..400,
    ) {
        let dt = 1e-3;
        let spec = SignalSpec::PureSine { omega0, amplitude: 1.0 };
        let signal = generate(&spec, dt, steps as f64 * dt).unwrap();
        let trace = run(&signal, 10.0, &EstimatorParams::new(100.0, dt)).unwrap();
        prop_assert_eq!(trace.len(), signal.len());
        for (i, record) in trace.records.iter().enumerate() {
            prop_assert_eq!(record.t, signal.time_at(i));
        }
    }

    /// Scaling the amplitude by 2^n and the gain by 2^-n leaves the theta
    /// trajectory bit-identical: adaptation speed depends only on the
    /// product gamma*k.
    #[test]
    fn theta_depends_on_gain_amplitude_product(
        omega0 in 5.0..100.0f64,
        gamma in 10.0..500.0f64,
        exponent in -2i32..3,
    ) {
        let c = (2.0f64).powi(exponent);
        let dt = 1e-3;
        let base = generate(&SignalSpec::PureSine { omega0, amplitude: 1.0 }, dt, 0.5).unwrap();
        let scaled =
            generate(&SignalSpec::PureSine { omega0, amplitude: c }, dt, 0.5).unwrap();
        let reference = run(&base, 10.0, &EstimatorParams::new(gamma, dt)).unwrap();
        let rescaled = run(&scaled, 10.0, &EstimatorParams::new(gamma / c, dt)).unwrap();
        for (a, b) in reference.records.iter().zip(rescaled.records.iter()) {
            prop_assert_eq!(a.theta, b.theta);
        }
    }

    /// The baseline's adaptation instead scales with gamma*k^2: doubling the
    /// amplitude and quartering the gain reproduces the trajectory.
    #[test]
    fn baseline_theta_depends_on_gain_amplitude_squared(
        omega0 in 5.0..100.0f64,
        gamma in 0.1..5.0f64,
        exponent in -2i32..3,
    ) {
        let c = (2.0f64).powi(exponent);
        let dt = 1e-3;
        let base = generate(&SignalSpec::PureSine { omega0, amplitude: 1.0 }, dt, 0.5).unwrap();
        let scaled =
            generate(&SignalSpec::PureSine { omega0, amplitude: c }, dt, 0.5).unwrap();
        let reference = anf_run(&base, 10.0, &AnfParams::new(gamma, dt)).unwrap();
        let rescaled = anf_run(&scaled, 10.0, &AnfParams::new(gamma / (c * c), dt)).unwrap();
        for (a, b) in reference.records.iter().zip(rescaled.records.iter()) {
            prop_assert_eq!(a.theta, b.theta);
        }
    }
}
