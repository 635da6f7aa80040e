//! Test-signal synthesis: sinusoids with optional amplitude modulation,
//! linear chirps, and seeded Gaussian measurement noise.
//!
//! Generation is fully deterministic: the same spec, sample period, and
//! duration (noise seed included) reproduce the stream bit for bit.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Default minimum ratio `omega0 / am_rate`: the envelope must move at least
/// a decade slower than the carrier for the slow-modulation assumption to
/// hold.
pub const AM_RATE_RATIO: f64 = 10.0;

// ── Noise ───────────────────────────────────────────────────────────────

/// Additive white measurement noise, realized as i.i.d. Gaussian samples.
///
/// Either `psd` or `variance` must be set. A bare `psd` is converted to the
/// per-sample variance `psd / dt` at generation time; when both fields are
/// set, `variance` wins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Noise power spectral density. Per-sample variance is `psd / dt`.
    pub psd: Option<f64>,
    /// Per-sample variance; takes precedence over `psd` when both are set.
    pub variance: Option<f64>,
    /// Seed for the sample stream; fully determines the realization.
    pub seed: u64,
}

impl NoiseSpec {
    /// Noise with a given per-sample variance.
    pub fn with_variance(variance: f64, seed: u64) -> Self {
        Self {
            psd: None,
            variance: Some(variance),
            seed,
        }
    }

    /// Noise with a given power spectral density.
    pub fn with_psd(psd: f64, seed: u64) -> Self {
        Self {
            psd: Some(psd),
            variance: None,
            seed,
        }
    }

    /// Per-sample variance at sample period `dt`.
    pub fn sample_variance(&self, dt: f64) -> f64 {
        match (self.variance, self.psd) {
            (Some(v), _) => v,
            (None, Some(p)) => p / dt,
            (None, None) => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.psd.is_none() && self.variance.is_none() {
            return Err(Error::InvalidSpec(
                "noise needs psd or variance (neither is set)".into(),
            ));
        }
        if let Some(p) = self.psd {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "noise psd must be finite and >= 0, got {p}"
                )));
            }
        }
        if let Some(v) = self.variance {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "noise variance must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

// ── Signal specs ────────────────────────────────────────────────────────

/// Parametric description of a test signal.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalSpec {
    /// `k * sin(omega0 * t)`.
    PureSine { omega0: f64, amplitude: f64 },

    /// `k * sin(omega0 * t) + eta(t)` with seeded Gaussian noise.
    NoisySine {
        omega0: f64,
        amplitude: f64,
        noise: NoiseSpec,
    },

    /// Carrier with a slowly varying envelope
    /// `k(t) = am_offset + am_depth * sin(am_rate * t + am_phase)`.
    AmSine {
        omega0: f64,
        am_offset: f64,
        am_depth: f64,
        am_rate: f64,
        am_phase: f64,
        noise: Option<NoiseSpec>,
    },

    /// Linear frequency ramp from `omega_start` to `omega_end` over
    /// `duration` seconds. The phase is integrated exactly:
    /// `phi(t) = omega_start * t - mu * t^2 / 2` with
    /// `mu = (omega_start - omega_end) / duration`.
    LinearChirp {
        omega_start: f64,
        omega_end: f64,
        duration: f64,
        amplitude: f64,
        noise: Option<NoiseSpec>,
    },

    /// Samples come from a measurement file; synthesis operations reject
    /// this kind, ingestion lives with the harness.
    FromFile { path: PathBuf },
}

impl SignalSpec {
    /// Short kind name used in error messages.
    pub fn kind_name(&self) -> &'static str {
        match self {
            SignalSpec::PureSine { .. } => "pure_sine",
            SignalSpec::NoisySine { .. } => "noisy_sine",
            SignalSpec::AmSine { .. } => "am_sine",
            SignalSpec::LinearChirp { .. } => "linear_chirp",
            SignalSpec::FromFile { .. } => "from_file",
        }
    }

    /// The noise description, if the spec carries one.
    pub fn noise(&self) -> Option<&NoiseSpec> {
        match self {
            SignalSpec::NoisySine { noise, .. } => Some(noise),
            SignalSpec::AmSine { noise, .. } | SignalSpec::LinearChirp { noise, .. } => {
                noise.as_ref()
            }
            _ => None,
        }
    }

    /// Check every invariant with the default envelope-rate bound.
    pub fn validate(&self) -> Result<()> {
        self.validate_with_am_ratio(AM_RATE_RATIO)
    }

    /// Check every invariant, requiring `am_rate < omega0 / min_ratio`.
    pub fn validate_with_am_ratio(&self, min_ratio: f64) -> Result<()> {
        match self {
            SignalSpec::PureSine { omega0, amplitude } => {
                check_positive("omega0", *omega0)?;
                check_positive("amplitude", *amplitude)?;
            }
            SignalSpec::NoisySine {
                omega0,
                amplitude,
                noise,
            } => {
                check_positive("omega0", *omega0)?;
                check_positive("amplitude", *amplitude)?;
                noise.validate()?;
            }
            SignalSpec::AmSine {
                omega0,
                am_offset,
                am_depth,
                am_rate,
                am_phase,
                noise,
            } => {
                check_positive("omega0", *omega0)?;
                check_positive("am_offset", *am_offset)?;
                check_positive("am_rate", *am_rate)?;
                if !am_depth.is_finite() || *am_depth < 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "am_depth must be finite and >= 0, got {am_depth}"
                    )));
                }
                if am_offset - am_depth < 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "am_offset - am_depth must be >= 0 so the envelope never \
                         goes negative (got {am_offset} - {am_depth})"
                    )));
                }
                if !am_phase.is_finite() {
                    return Err(Error::InvalidSpec("am_phase must be finite".into()));
                }
                if *am_rate >= *omega0 / min_ratio {
                    return Err(Error::InvalidSpec(format!(
                        "am_rate {am_rate} is not slow against the carrier: \
                         need am_rate < omega0 / {min_ratio} = {}",
                        omega0 / min_ratio
                    )));
                }
                if let Some(n) = noise {
                    n.validate()?;
                }
            }
            SignalSpec::LinearChirp {
                omega_start,
                omega_end,
                duration,
                amplitude,
                noise,
            } => {
                check_positive("omega_start", *omega_start)?;
                check_positive("omega_end", *omega_end)?;
                check_positive("duration", *duration)?;
                check_positive("amplitude", *amplitude)?;
                if let Some(n) = noise {
                    n.validate()?;
                }
            }
            SignalSpec::FromFile { path } => {
                if path.as_os_str().is_empty() {
                    return Err(Error::InvalidSpec("from_file path is empty".into()));
                }
            }
        }
        Ok(())
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidSpec(format!(
            "{name} must be finite and > 0, got {value}"
        )));
    }
    Ok(())
}

// ── Point evaluation ────────────────────────────────────────────────────

/// Instantaneous envelope `k(t)`. Only sinusoid kinds have a queryable
/// envelope; chirp and file-backed specs are rejected.
pub fn amplitude_at(spec: &SignalSpec, t: f64) -> Result<f64> {
    check_time(spec, t)?;
    match spec {
        SignalSpec::PureSine { amplitude, .. } | SignalSpec::NoisySine { amplitude, .. } => {
            Ok(*amplitude)
        }
        SignalSpec::AmSine {
            am_offset,
            am_depth,
            am_rate,
            am_phase,
            ..
        } => Ok(am_offset + am_depth * (am_rate * t + am_phase).sin()),
        SignalSpec::LinearChirp { .. } | SignalSpec::FromFile { .. } => {
            Err(Error::UnsupportedKind {
                operation: "amplitude_at",
                kind: spec.kind_name(),
            })
        }
    }
}

/// Instantaneous frequency `omega0(t)` in rad/s.
pub fn omega_at(spec: &SignalSpec, t: f64) -> Result<f64> {
    check_time(spec, t)?;
    match spec {
        SignalSpec::PureSine { omega0, .. }
        | SignalSpec::NoisySine { omega0, .. }
        | SignalSpec::AmSine { omega0, .. } => Ok(*omega0),
        SignalSpec::LinearChirp {
            omega_start,
            omega_end,
            duration,
            ..
        } => {
            let mu = (omega_start - omega_end) / duration;
            Ok(omega_start - mu * t)
        }
        SignalSpec::FromFile { .. } => Err(Error::UnsupportedKind {
            operation: "omega_at",
            kind: spec.kind_name(),
        }),
    }
}

/// Integrated carrier phase `phi(t)` in rad, with `phi(0) = 0`.
pub fn phase_at(spec: &SignalSpec, t: f64) -> Result<f64> {
    check_time(spec, t)?;
    match spec {
        SignalSpec::PureSine { omega0, .. }
        | SignalSpec::NoisySine { omega0, .. }
        | SignalSpec::AmSine { omega0, .. } => Ok(omega0 * t),
        SignalSpec::LinearChirp {
            omega_start,
            omega_end,
            duration,
            ..
        } => {
            let mu = (omega_start - omega_end) / duration;
            Ok(omega_start * t - 0.5 * mu * t * t)
        }
        SignalSpec::FromFile { .. } => Err(Error::UnsupportedKind {
            operation: "phase_at",
            kind: spec.kind_name(),
        }),
    }
}

/// `t` must be finite and >= 0; a chirp is only defined on its ramp
/// (small relative slack absorbs accumulated rounding in `i * dt`).
fn check_time(spec: &SignalSpec, t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("t must be finite and >= 0, got {t}")));
    }
    if let SignalSpec::LinearChirp { duration, .. } = spec {
        if t > duration * (1.0 + 1e-6) {
            return Err(Error::Domain(format!(
                "t = {t} is past the end of the {duration} s chirp ramp"
            )));
        }
    }
    Ok(())
}

// ── Generation ──────────────────────────────────────────────────────────

/// Uniformly sampled scalar series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    t0: f64,
    dt: f64,
    samples: Vec<f64>,
}

impl TimeSeries {
    /// Wrap raw samples; `dt` must be positive and finite, `samples`
    /// non-empty.
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !t0.is_finite() {
            return Err(Error::InvalidSpec(format!("t0 must be finite, got {t0}")));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "dt must be finite and > 0, got {dt}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::InvalidSpec("sample vector is empty".into()));
        }
        Ok(Self { t0, dt, samples })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Timestamp of sample `i`.
    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Time span covered by the series.
    pub fn duration(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }
}

/// Number of samples covering `[0, duration]` at step `dt`:
/// `floor(duration / dt) + 1`, robust to the quotient landing one ulp
/// below an integer.
fn sample_count(duration: f64, dt: f64) -> usize {
    let raw = duration / dt;
    let rounded = raw.round();
    let steps = if (raw - rounded).abs() <= raw.abs() * 1e-9 {
        rounded
    } else {
        raw.floor()
    };
    steps as usize + 1
}

/// Synthesize `floor(duration / dt) + 1` samples of `spec` on the uniform
/// grid `t_i = i * dt`.
///
/// Noise is layered on top of the clean waveform from a stream seeded by
/// the spec, so two calls with identical arguments are bit-identical.
pub fn generate(spec: &SignalSpec, dt: f64, duration: f64) -> Result<TimeSeries> {
    spec.validate()?;
    if let SignalSpec::FromFile { .. } = spec {
        return Err(Error::UnsupportedKind {
            operation: "generate",
            kind: spec.kind_name(),
        });
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::Config(format!(
            "dt must be finite and > 0, got {dt}"
        )));
    }
    if !duration.is_finite() || duration < 0.0 {
        return Err(Error::Config(format!(
            "duration must be finite and >= 0, got {duration}"
        )));
    }
    if let SignalSpec::LinearChirp {
        duration: ramp, ..
    } = spec
    {
        if duration > ramp * (1.0 + 1e-9) {
            return Err(Error::Config(format!(
                "requested duration {duration} s runs past the {ramp} s chirp ramp"
            )));
        }
    }

    let n = sample_count(duration, dt);
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * dt;
        let k = match spec {
            SignalSpec::LinearChirp { amplitude, .. } => *amplitude,
            _ => amplitude_at(spec, t)?,
        };
        samples.push(k * phase_at(spec, t)?.sin());
    }

    if let Some(noise) = spec.noise() {
        let var = noise.sample_variance(dt);
        if var > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
            let normal = Normal::new(0.0, var.sqrt()).expect("finite std dev");
            for s in &mut samples {
                *s += normal.sample(&mut rng);
            }
        }
    }

    TimeSeries::new(0.0, dt, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn chirp_20_to_1_hz() -> SignalSpec {
        SignalSpec::LinearChirp {
            omega_start: 20.0 * TAU,
            omega_end: TAU,
            duration: 30.0,
            amplitude: 1.0,
            noise: None,
        }
    }

    fn am_envelope_5_5() -> SignalSpec {
        SignalSpec::AmSine {
            omega0: 40.0,
            am_offset: 5.0,
            am_depth: 5.0,
            am_rate: 0.9,
            am_phase: -PI / 2.0,
            noise: None,
        }
    }

    #[test]
    fn sample_counts() {
        assert_eq!(sample_count(0.1, 1e-4), 1001);
        assert_eq!(sample_count(10.0, 5e-4), 20001);
        assert_eq!(sample_count(10.0, 1e-4), 100_001);
        assert_eq!(sample_count(1.0, 0.3), 4); // floor(3.33) + 1
        assert_eq!(sample_count(0.0, 1e-4), 1);
    }

    #[test]
    fn pure_sine_samples() {
        let spec = SignalSpec::PureSine {
            omega0: 50.0,
            amplitude: 1.0,
        };
        let ts = generate(&spec, 1e-4, 0.1).unwrap();
        assert_eq!(ts.len(), 1001);
        for (i, &s) in ts.samples().iter().enumerate() {
            let expect = (50.0 * i as f64 * 1e-4).sin();
            assert!((s - expect).abs() < 1e-15, "sample {i}: {s} vs {expect}");
        }
    }

    #[test]
    fn chirp_frequency_endpoints() {
        let spec = chirp_20_to_1_hz();
        let w0 = omega_at(&spec, 0.0).unwrap();
        let w30 = omega_at(&spec, 30.0).unwrap();
        assert!((w0 - 125.663_706_143_591_72).abs() < 1e-9, "w0 = {w0}");
        assert!((w30 - TAU).abs() < 1e-12, "w30 = {w30}");
        // ramp rate comes out near 3.98 rad/s^2
        let mu = (w0 - w30) / 30.0;
        assert!((mu - 3.979).abs() < 1e-3, "mu = {mu}");
    }

    #[test]
    fn chirp_phase_derivative_matches_omega() {
        // phi(t) is quadratic, so the central difference is exact up to
        // rounding.
        let spec = chirp_20_to_1_hz();
        let h = 1e-4;
        for &t in &[0.5, 7.0, 15.0, 29.5] {
            let dphi = (phase_at(&spec, t + h).unwrap() - phase_at(&spec, t - h).unwrap())
                / (2.0 * h);
            let w = omega_at(&spec, t).unwrap();
            assert!((dphi - w).abs() < 1e-6, "t = {t}: {dphi} vs {w}");
        }
    }

    #[test]
    fn am_envelope_touches_zero() {
        let spec = am_envelope_5_5();
        let k0 = amplitude_at(&spec, 0.0).unwrap();
        assert!(k0.abs() < 1e-12, "k(0) = {k0}");
        // a quarter envelope period later the offset value is back
        let t_quarter = (PI / 2.0) / 0.9;
        let kq = amplitude_at(&spec, t_quarter).unwrap();
        assert!((kq - 5.0).abs() < 1e-9, "k = {kq}");
    }

    #[test]
    fn am_samples_stay_under_envelope() {
        let mut spec = am_envelope_5_5();
        if let SignalSpec::AmSine { noise, .. } = &mut spec {
            *noise = Some(NoiseSpec::with_variance(1e-3, 7));
        }
        let tau = 1e-3f64.sqrt();
        let ts = generate(&spec, 1e-4, 20.0).unwrap();
        for (i, &s) in ts.samples().iter().enumerate() {
            let bound = amplitude_at(&spec, ts.time_at(i)).unwrap() + 5.0 * tau;
            assert!(s.abs() <= bound, "sample {i}: |{s}| > {bound}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SignalSpec::NoisySine {
            omega0: 50.0,
            amplitude: 1.0,
            noise: NoiseSpec::with_variance(1e-3, 42),
        };
        let a = generate(&spec, 1e-4, 1.0).unwrap();
        let b = generate(&spec, 1e-4, 1.0).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn noise_statistics_match_spec() {
        // measure the noise alone by subtracting the clean waveform
        let clean = SignalSpec::PureSine {
            omega0: 10.0,
            amplitude: 1.0,
        };
        let noisy = SignalSpec::NoisySine {
            omega0: 10.0,
            amplitude: 1.0,
            noise: NoiseSpec::with_variance(1e-3, 123),
        };
        let dt = 1e-4;
        let a = generate(&clean, dt, 100.0).unwrap();
        let b = generate(&noisy, dt, 100.0).unwrap();
        let n = a.len();
        assert_eq!(n, 1_000_001);
        let eta: Vec<f64> = b
            .samples()
            .iter()
            .zip(a.samples())
            .map(|(y, x)| y - x)
            .collect();
        let mean = eta.iter().sum::<f64>() / n as f64;
        let var = eta.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // 4-sigma band for the sample mean, 5% for the sample variance
        assert!(mean.abs() < 4.0 * (1e-3f64 / n as f64).sqrt(), "mean = {mean}");
        assert!((var - 1e-3).abs() < 0.05 * 1e-3, "var = {var}");
    }

    #[test]
    fn psd_converts_to_sample_variance() {
        let by_psd = NoiseSpec::with_psd(1e-7, 1);
        assert!((by_psd.sample_variance(1e-4) - 1e-3).abs() < 1e-18);
        // variance wins when both are set
        let both = NoiseSpec {
            psd: Some(5.0),
            variance: Some(1e-3),
            seed: 1,
        };
        assert_eq!(both.sample_variance(1e-4), 1e-3);
    }

    #[test]
    fn psd_and_variance_seeds_agree() {
        // same per-sample variance, same seed -> same stream
        let a = SignalSpec::NoisySine {
            omega0: 50.0,
            amplitude: 1.0,
            noise: NoiseSpec::with_psd(1e-7, 9),
        };
        let b = SignalSpec::NoisySine {
            omega0: 50.0,
            amplitude: 1.0,
            noise: NoiseSpec::with_variance(1e-3, 9),
        };
        let xa = generate(&a, 1e-4, 0.5).unwrap();
        let xb = generate(&b, 1e-4, 0.5).unwrap();
        for (x, y) in xa.samples().iter().zip(xb.samples()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let too_fast = SignalSpec::AmSine {
            omega0: 40.0,
            am_offset: 5.0,
            am_depth: 5.0,
            am_rate: 4.0, // needs < 40/10
            am_phase: 0.0,
            noise: None,
        };
        assert!(matches!(
            too_fast.validate(),
            Err(Error::InvalidSpec(msg)) if msg.contains("am_rate")
        ));
        // but a looser ratio admits it: 4.0 < 40 / 5
        assert!(too_fast.validate_with_am_ratio(5.0).is_ok());

        let negative_floor = SignalSpec::AmSine {
            omega0: 40.0,
            am_offset: 4.0,
            am_depth: 5.0,
            am_rate: 0.9,
            am_phase: 0.0,
            noise: None,
        };
        assert!(matches!(
            negative_floor.validate(),
            Err(Error::InvalidSpec(msg)) if msg.contains("am_offset")
        ));

        let no_noise_fields = SignalSpec::NoisySine {
            omega0: 50.0,
            amplitude: 1.0,
            noise: NoiseSpec {
                psd: None,
                variance: None,
                seed: 0,
            },
        };
        assert!(no_noise_fields.validate().is_err());
    }

    #[test]
    fn file_backed_specs_reject_synthesis() {
        let spec = SignalSpec::FromFile {
            path: "measurement.csv".into(),
        };
        assert!(matches!(
            generate(&spec, 1e-4, 1.0),
            Err(Error::UnsupportedKind {
                operation: "generate",
                ..
            })
        ));
        assert!(amplitude_at(&spec, 0.0).is_err());
        assert!(omega_at(&spec, 0.0).is_err());
    }

    #[test]
    fn chirp_rejects_queries_past_the_ramp() {
        let spec = chirp_20_to_1_hz();
        assert!(matches!(omega_at(&spec, 31.0), Err(Error::Domain(_))));
        assert!(matches!(omega_at(&spec, -0.1), Err(Error::Domain(_))));
        assert!(matches!(
            generate(&spec, 1e-3, 40.0),
            Err(Error::Config(_))
        ));
        // amplitude is constant but deliberately not queryable on a chirp
        assert!(matches!(
            amplitude_at(&spec, 1.0),
            Err(Error::UnsupportedKind { .. })
        ));
    }

    #[test]
    fn up_chirp_ramps_upward() {
        let spec = SignalSpec::LinearChirp {
            omega_start: TAU,
            omega_end: 10.0 * TAU,
            duration: 10.0,
            amplitude: 1.0,
            noise: None,
        };
        let mid = omega_at(&spec, 5.0).unwrap();
        assert!((mid - 5.5 * TAU).abs() < 1e-9, "mid = {mid}");
    }

    #[test]
    fn time_series_accessors() {
        let ts = TimeSeries::new(1.0, 0.5, vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(ts.len(), 3);
        assert_eq!(ts.time_at(2), 2.0);
        assert_eq!(ts.duration(), 1.0);
        assert!(TimeSeries::new(0.0, 0.0, vec![1.0]).is_err());
        assert!(TimeSeries::new(0.0, 1.0, vec![]).is_err());
    }
}
