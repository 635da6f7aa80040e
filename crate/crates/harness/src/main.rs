use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use freqest_cli::checks::{self, CheckOutcome};
use freqest_cli::error::{HarnessError, Result};
use freqest_cli::scenario::{RunOptions, Suite, resolve_suite, run_suite};
use freqest_cli::{config, csvio, presets, report};

use freqest_core::analysis::{default_transient_skip, fit_exponential_rate, residual_variance};
use freqest_core::estimator::{EstimatorTrace, TraceRecord};

#[derive(Parser)]
#[command(
    name = "freqest",
    version,
    about = "Run frequency-estimation scenario suites and check their results"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML suite config and write traces and summaries.
    Run {
        /// Preset name (see `list-presets`) or path to a config file.
        target: String,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Replace noise seeds with `SEED + scenario index`.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the sample period of synthetic scenarios, seconds.
        #[arg(long)]
        dt: Option<f64>,
        /// Subtract the sample mean from measured input signals.
        #[arg(long)]
        detrend: bool,
        /// Measured-signal file for scenarios that read one.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// List the built-in presets.
    ListPresets,
    /// Run a preset's checks without writing artifacts; exit 0 only if all pass.
    Check {
        /// Preset name or path to a config file.
        preset: String,
    },
    /// Summarize an emitted trace file against a known carrier frequency.
    Analyze {
        /// Trace CSV as written by `run`.
        trace: PathBuf,
        /// True carrier frequency, rad/s.
        #[arg(long)]
        omega0: f64,
        /// Seconds to skip before the rate fit (default: three carrier
        /// periods).
        #[arg(long)]
        skip: Option<f64>,
        /// Tail fraction for steady-state statistics.
        #[arg(long, default_value_t = 0.25)]
        tail: f64,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { target, out, seed, dt, detrend, csv } => {
            cmd_run(&target, &out, RunOptions {
                seed_override: seed,
                dt_override: dt,
                detrend,
                csv_input: csv,
            })
        }
        Command::ListPresets => {
            for (name, summary) in presets::catalog() {
                println!("{name:<10} {summary}");
            }
            Ok(true)
        }
        Command::Check { preset } => cmd_check(&preset),
        Command::Analyze { trace, omega0, skip, tail } => cmd_analyze(&trace, omega0, skip, tail),
    }
}

/// A run target is either a preset name or a config file on disk.
fn load_suite(target: &str) -> Result<Suite> {
    if presets::names().contains(&target) {
        presets::build(target)
    } else if Path::new(target).exists() {
        config::suite_from_path(Path::new(target))
    } else {
        Err(HarnessError::UnknownPreset(target.to_owned()))
    }
}

fn print_verdicts(outcomes: &[CheckOutcome]) {
    for outcome in outcomes {
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        let scope = outcome.scenario.as_deref().unwrap_or("suite");
        println!("[{status}] {scope} {}: {}", outcome.check, outcome.detail);
    }
}

fn all_green(outcomes: &[CheckOutcome], failure_free: bool) -> bool {
    failure_free && outcomes.iter().all(|o| o.passed)
}

fn cmd_run(target: &str, out: &Path, options: RunOptions) -> Result<bool> {
    let suite = load_suite(target)?;
    let resolved = resolve_suite(&suite, &options)?;
    let artifacts = run_suite(&resolved, options.detrend)?;
    let outcomes = checks::evaluate(&resolved, &artifacts)?;

    let mut failure_free = true;
    for (scenario, artifact) in resolved.scenarios.iter().zip(&artifacts) {
        for path in report::emit_artifact(out, artifact, &outcomes, scenario.signal.kind_name())? {
            println!("wrote {}", path.display());
        }
        for (label, error) in &artifact.failures {
            failure_free = false;
            eprintln!("{}/{label} failed: {error}", artifact.scenario_name);
        }
    }
    let digest = report::emit_check_digest(out, &resolved.name, &outcomes)?;
    println!("wrote {}", digest.display());
    print_verdicts(&outcomes);
    Ok(all_green(&outcomes, failure_free))
}

fn cmd_check(target: &str) -> Result<bool> {
    let suite = load_suite(target)?;
    let resolved = resolve_suite(&suite, &RunOptions::default())?;
    let artifacts = run_suite(&resolved, false)?;
    let outcomes = checks::evaluate(&resolved, &artifacts)?;
    print_verdicts(&outcomes);
    let failure_free = artifacts.iter().all(|a| a.failures.is_empty());
    for artifact in &artifacts {
        for (label, error) in &artifact.failures {
            eprintln!("{}/{label} failed: {error}", artifact.scenario_name);
        }
    }
    Ok(all_green(&outcomes, failure_free))
}

fn cmd_analyze(path: &Path, omega0: f64, skip: Option<f64>, tail: f64) -> Result<bool> {
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(HarnessError::Config(format!(
            "--omega0 must be positive and finite, got {omega0}"
        )));
    }
    let rows = csvio::load_trace_csv(path)?;
    if rows.len() < 2 {
        return Err(HarnessError::Config("trace has fewer than two rows".into()));
    }
    let mut deltas: Vec<f64> = rows.windows(2).map(|w| w[1].t - w[0].t).collect();
    deltas.sort_by(f64::total_cmp);
    let dt = deltas[deltas.len() / 2];

    // Reassemble just enough of a trace for the analysis routines; the
    // gains that produced the file are not recorded in it.
    let trace = EstimatorTrace {
        gamma: f64::NAN,
        zeta: f64::NAN,
        theta0: rows[0].theta,
        dt,
        records: rows
            .iter()
            .map(|r| TraceRecord { t: r.t, theta: r.theta, x1: r.x1, x2: r.x2, e: r.e })
            .collect(),
    };

    let span = trace.records.last().unwrap().t - trace.records[0].t;
    let final_theta = trace.final_theta();
    println!("samples:       {}", trace.len());
    println!("span:          {span:.6} s (median dt {dt:.3e} s)");
    println!("final theta:   {final_theta:.6} rad/s");
    println!("final error:   {:.6} rad/s", omega0 - final_theta);

    let band = 0.02 * omega0;
    match trace.records.iter().find(|r| (omega0 - r.theta).abs() < band) {
        Some(r) => println!("in 2% band at: {:.4} s", r.t),
        None => println!("in 2% band at: never"),
    }

    let skip = skip.unwrap_or_else(|| default_transient_skip(omega0));
    match fit_exponential_rate(&trace, omega0, skip) {
        Ok(beta) => println!("fitted rate:   {beta:.4} 1/s (skipping {skip:.3} s)"),
        Err(error) => println!("fitted rate:   unavailable ({error})"),
    }
    match residual_variance(&trace, omega0, tail) {
        Ok(stats) => {
            println!("tail mean:     {:.6e} rad/s", stats.mean);
            println!("tail variance: {:.6e} rad^2/s^2", stats.variance);
        }
        Err(error) => println!("tail stats:    unavailable ({error})"),
    }
    Ok(true)
}
