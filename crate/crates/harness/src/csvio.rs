//! CSV ingestion and emission.
//!
//! Input signals are two-column `t,sigma` files with an optional single
//! header line, strictly increasing and uniformly spaced time stamps.
//! Emitted traces carry six columns and are decimated to at most 100k data
//! rows; the final record is always included so the last estimate survives
//! decimation.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use freqest_core::estimator::EstimatorTrace;
use freqest_core::signal::TimeSeries;

use crate::error::{HarnessError, Result};

/// Relative jitter tolerated between sample intervals of an input signal.
pub const UNIFORMITY_TOLERANCE: f64 = 1e-6;
/// Emission cap per trace file (data rows, excluding the header).
pub const MAX_EMITTED_ROWS: usize = 100_000;

pub const TRACE_HEADER: &str = "t,theta,epsilon,e,x1,x2";

// ── Input signals ───────────────────────────────────────────────────────

fn parse_field(path: &Path, row: usize, column: &'static str, field: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        HarnessError::parse(path, row, format!("column `{column}`: `{}` is not a number", field.trim()))
    })
}

/// Load a measured two-column signal. `detrend` subtracts the sample mean,
/// freeing the estimator from a constant offset in the measurement.
pub fn load_signal_csv(path: &Path, detrend: bool) -> Result<TimeSeries> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut times: Vec<f64> = Vec::new();
    let mut samples: Vec<f64> = Vec::new();
    // File row of each accepted data row, so later shape errors can point at
    // the exact line even past blank lines or a header.
    let mut source_rows: Vec<usize> = Vec::new();

    for (index, line) in text.lines().enumerate() {
        let row = index + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(HarnessError::parse(
                path,
                row,
                format!("expected 2 columns (t, sigma), found {}", fields.len()),
            ));
        }
        // A single leading header line is allowed; detect it by a
        // non-numeric first field on row 1.
        if row == 1 && fields[0].trim().parse::<f64>().is_err() {
            continue;
        }
        let t = parse_field(path, row, "t", fields[0])?;
        let sigma = parse_field(path, row, "sigma", fields[1])?;
        if let Some(&previous) = times.last() {
            if t <= previous {
                return Err(HarnessError::parse(
                    path,
                    row,
                    format!("time stamps must increase strictly: {t} follows {previous}"),
                ));
            }
        }
        times.push(t);
        samples.push(sigma);
        source_rows.push(row);
    }

    if times.len() < 2 {
        return Err(HarnessError::parse(
            path,
            times.len(),
            "need at least two data rows to determine the sampling interval",
        ));
    }

    let mut deltas: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    deltas.sort_by(|a, b| a.partial_cmp(b).expect("deltas are finite"));
    let dt = deltas[deltas.len() / 2];
    for (i, window) in times.windows(2).enumerate() {
        let delta = window[1] - window[0];
        if (delta - dt).abs() > UNIFORMITY_TOLERANCE * dt {
            return Err(HarnessError::parse(
                path,
                source_rows[i + 1],
                format!("non-uniform sampling: interval {delta} deviates from the median {dt}"),
            ));
        }
    }

    if detrend {
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        for sample in &mut samples {
            *sample -= mean;
        }
    }

    Ok(TimeSeries::new(times[0], dt, samples)?)
}

// ── Trace emission ──────────────────────────────────────────────────────

/// Indices emitted for a trace of `len` records: a uniform stride keeping at
/// most [`MAX_EMITTED_ROWS`] rows, with the final record always included.
fn emitted_indices(len: usize) -> impl Iterator<Item = usize> {
    let stride = len.div_ceil(MAX_EMITTED_ROWS).max(1);
    let last = len.saturating_sub(1);
    (0..len)
        .step_by(stride)
        .chain((last % stride != 0).then_some(last))
}

/// Write one estimator trace. `omega_track` supplies the true frequency per
/// sample for the epsilon column; without it epsilon is emitted as NaN.
pub fn write_trace_csv(
    path: &Path,
    trace: &EstimatorTrace,
    omega_track: Option<&[f64]>,
) -> Result<()> {
    let mut text = String::with_capacity(trace.len().min(MAX_EMITTED_ROWS + 1) * 96);
    text.push_str(TRACE_HEADER);
    text.push('\n');
    for i in emitted_indices(trace.len()) {
        let record = &trace.records[i];
        let epsilon = omega_track.map_or(f64::NAN, |track| track[i] - record.theta);
        writeln!(
            text,
            "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
            record.t, record.theta, epsilon, record.e, record.x1, record.x2
        )
        .expect("writing to a String cannot fail");
    }
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

// ── Trace ingestion (for `analyze`) ─────────────────────────────────────

/// One parsed row of an emitted trace file.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub t: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub e: f64,
    pub x1: f64,
    pub x2: f64,
}

/// Load a six-column trace file as written by [`write_trace_csv`].  Time
/// stamps must increase strictly, but uniformity is not required: emitted
/// traces may end on a shortened interval after decimation.
pub fn load_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut rows: Vec<TraceRow> = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let row = index + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(HarnessError::parse(
                path,
                row,
                format!("expected 6 columns (t,theta,epsilon,e,x1,x2), found {}", fields.len()),
            ));
        }
        if row == 1 && fields[0].trim().parse::<f64>().is_err() {
            continue;
        }
        let mut values = [0.0f64; 6];
        for (value, (field, column)) in values.iter_mut().zip(
            fields
                .iter()
                .zip(["t", "theta", "epsilon", "e", "x1", "x2"]),
        ) {
            *value = parse_field(path, row, column, field)?;
        }
        if let Some(previous) = rows.last() {
            if values[0] <= previous.t {
                return Err(HarnessError::parse(
                    path,
                    row,
                    format!("time stamps must increase strictly: {} follows {}", values[0], previous.t),
                ));
            }
        }
        rows.push(TraceRow {
            t: values[0],
            theta: values[1],
            epsilon: values[2],
            e: values[3],
            x1: values[4],
            x2: values[5],
        });
    }
    if rows.is_empty() {
        return Err(HarnessError::parse(path, 1, "no data rows"));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use freqest_core::estimator::TraceRecord;
    use tempfile::tempdir;

    fn write(path: &Path, content: &str) {
        fs::write(path, content).unwrap();
    }

    #[test]
    fn loads_two_column_files_with_and_without_header() {
        let dir = tempdir().unwrap();
        let bare = dir.path().join("bare.csv");
        write(&bare, "0,0.0\n0.0005,0.1\n");
        let series = load_signal_csv(&bare, false).unwrap();
        assert_eq!(series.dt(), 5e-4);
        assert_eq!(series.samples(), &[0.0, 0.1]);

        let headed = dir.path().join("headed.csv");
        write(&headed, "t,sigma\n0,0.0\n0.0005,0.1\n0.001,0.2\n");
        let series = load_signal_csv(&headed, false).unwrap();
        assert_eq!(series.len(), 3);
        assert_eq!(series.t0(), 0.0);
    }

    #[test]
    fn detrend_subtracts_the_mean() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("biased.csv");
        write(&path, "0,1.5\n0.001,0.5\n0.002,1.0\n");
        let series = load_signal_csv(&path, true).unwrap();
        let mean: f64 = series.samples().iter().sum::<f64>() / 3.0;
        assert!(mean.abs() < 1e-15);
        assert_eq!(series.samples()[0], 0.5);
    }

    #[test]
    fn time_jump_is_reported_with_its_row() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("jump.csv");
        write(&path, "t,sigma\n0,0\n0.001,0\n0.005,0\n0.006,0\n");
        let err = load_signal_csv(&path, false).unwrap_err();
        match err {
            HarnessError::Parse { row, reason, .. } => {
                assert_eq!(row, 4, "{reason}");
                assert!(reason.contains("non-uniform"), "{reason}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn decreasing_time_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("back.csv");
        write(&path, "0,0\n0.002,0\n0.001,0\n");
        let err = load_signal_csv(&path, false).unwrap_err();
        assert!(matches!(err, HarnessError::Parse { row: 3, .. }), "{err}");
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        write(&path, "0,0\n0.001,oops\n");
        let err = load_signal_csv(&path, false).unwrap_err();
        match err {
            HarnessError::Parse { row, reason, .. } => {
                assert_eq!(row, 2);
                assert!(reason.contains("sigma"), "{reason}");
                assert!(reason.contains("oops"), "{reason}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn wrong_column_count_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("three.csv");
        write(&path, "0,0,0\n");
        assert!(matches!(
            load_signal_csv(&path, false),
            Err(HarnessError::Parse { row: 1, .. })
        ));
    }

    fn synthetic_trace(len: usize) -> EstimatorTrace {
        EstimatorTrace {
            gamma: 100.0,
            zeta: 1.0,
            theta0: 10.0,
            dt: 1e-4,
            records: (0..len)
                .map(|i| TraceRecord {
                    t: i as f64 * 1e-4,
                    theta: 50.0 - (i as f64 * -1e-4).exp(),
                    x1: 0.01,
                    x2: -0.02,
                    e: 0.5,
                })
                .collect(),
        }
    }

    #[test]
    fn trace_round_trips_through_csv() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let trace = synthetic_trace(1000);
        let track = vec![50.0; 1000];
        write_trace_csv(&path, &trace, Some(&track)).unwrap();
        let rows = load_trace_csv(&path).unwrap();
        assert_eq!(rows.len(), 1000);
        for (row, record) in rows.iter().zip(&trace.records) {
            assert!((row.t - record.t).abs() <= 1e-8 * record.t.abs().max(1.0));
            assert!((row.theta - record.theta).abs() < 1e-6);
            assert!((row.epsilon - (50.0 - record.theta)).abs() < 1e-6);
        }
    }

    #[test]
    fn emission_is_decimated_but_keeps_the_final_record() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("big.csv");
        let trace = synthetic_trace(250_001);
        write_trace_csv(&path, &trace, None).unwrap();
        let rows = load_trace_csv(&path).unwrap();
        assert!(rows.len() <= MAX_EMITTED_ROWS, "emitted {} rows", rows.len());
        let last = rows.last().unwrap();
        assert!((last.t - 25.0).abs() < 1e-9, "final record missing: t={}", last.t);
        assert!(last.epsilon.is_nan(), "epsilon must be NaN without a frequency track");
    }

    #[test]
    fn emitted_bytes_use_lf_line_endings_and_nine_digits() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("fmt.csv");
        write_trace_csv(&path, &synthetic_trace(3), Some(&[50.0, 50.0, 50.0])).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(!text.contains('\r'));
        let first_data_line = text.lines().nth(1).unwrap();
        let theta_field = first_data_line.split(',').nth(1).unwrap();
        assert!(theta_field.contains('e'), "scientific notation expected: {theta_field}");
        let digits = theta_field
            .chars()
            .take_while(|c| *c != 'e')
            .filter(|c| c.is_ascii_digit())
            .count();
        assert_eq!(digits, 9, "nine significant digits expected: {theta_field}");
    }
}
