//! Experiment runner for entropy-gated level-k games.
//!
//! Four commands: `run` (gated vs ungated games with per-level rows and an
//! eval-reduction summary), `entropy-profile` (per-level entropy means),
//! `sweep` (threshold-schedule ablation on a fixed suite), and `audit`
//! (standalone gate verdicts for an external MTP file).
//!
//! Exit codes: 0 success, 1 config error, 2 I/O error, 3 internal contract
//! violation.

use std::fmt::Write as _;
use std::path::Path;

use levelk_core::{load_external_mtp, trajectory_entropy, EntropyConfig};
use thiserror::Error;

pub mod args;
pub mod presets;
pub mod report;
pub mod runner;

use args::{AuditArgs, RunArgs, SweepArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Contract(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Contract(_) => 3,
        }
    }
}

fn write_output(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// `levelk run`: executes gated and ungated games over the suite, writes
/// `levels.csv` and `summary.csv`, and prints the summary.
pub fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let run = runner::resolve(args)?;
    let results = runner::execute(&run)?;
    let (levels_csv, summary) = report::build_run_report(&run, &results)?;
    let summary_csv = report::summary_csv(&summary);
    write_output(&run.out, "levels.csv", &levels_csv)?;
    write_output(&run.out, "summary.csv", &summary_csv)?;

    print!("{summary_csv}");
    println!(
        "wrote {} and {}",
        run.out.join("levels.csv").display(),
        run.out.join("summary.csv").display()
    );
    Ok(())
}

/// `levelk entropy-profile`: per-level entropy mean/std for gated and
/// ungated runs; writes `entropy_profile.csv`.
pub fn cmd_entropy_profile(args: &RunArgs) -> Result<(), CliError> {
    let run = runner::resolve(args)?;
    let results = runner::execute(&run)?;
    let csv = report::build_entropy_profile(run.levels, &results);
    write_output(&run.out, "entropy_profile.csv", &csv)?;
    print!("{csv}");
    println!("wrote {}", run.out.join("entropy_profile.csv").display());
    Ok(())
}

/// Default sweep grid for a K-level run: three constant and three
/// decreasing schedules spanning the entropy range the built-in suites
/// realize (free-flow agents sit around 10, intersection agents in the
/// hundreds).
fn default_grid(levels: usize) -> Vec<Vec<f64>> {
    let anchors = [30.0, 300.0, 900.0];
    let mut grid: Vec<Vec<f64>> = anchors.iter().map(|&a| vec![a; levels - 1]).collect();
    for &(top, rate) in &[(120.0f64, 0.5f64), (480.0, 0.5), (960.0, 0.5)] {
        grid.push((0..levels - 1).map(|i| top * rate.powi(i as i32)).collect());
    }
    grid
}

fn parse_grid(grid: &str, levels: usize) -> Result<Vec<Vec<f64>>, CliError> {
    let mut out = Vec::new();
    for schedule in grid.split(';').filter(|s| !s.trim().is_empty()) {
        let thresholds: Result<Vec<f64>, _> =
            schedule.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let thresholds =
            thresholds.map_err(|e| CliError::Config(format!("bad schedule {schedule:?}: {e}")))?;
        if thresholds.len() != levels - 1 {
            return Err(CliError::Config(format!(
                "schedule {schedule:?} has {} thresholds but K={levels} needs {}",
                thresholds.len(),
                levels - 1
            )));
        }
        out.push(thresholds);
    }
    if out.is_empty() {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    Ok(out)
}

/// `levelk sweep`: runs the same suite under every schedule of the grid and
/// writes one `sweep.csv` row per schedule.
pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let run = runner::resolve(&args.run)?;
    let grid = match &args.grid {
        Some(g) => parse_grid(g, run.levels)?,
        None => default_grid(run.levels),
    };

    let mut csv = String::from("thresholds,min_ade,miss_rate,eval_reduction_pct\n");
    for thresholds in &grid {
        let gate = levelk_core::GateConfig::new(thresholds.clone())
            .map_err(|e| CliError::Config(e.to_string()))?;
        let results = runner::execute_with_gate(&run, &gate)?;
        let (_, summary) = report::build_run_report(&run, &results)?;
        csv.push_str(&report::sweep_row(thresholds, &summary));
    }
    write_output(&run.out, "sweep.csv", &csv)?;
    print!("{csv}");
    println!("wrote {}", run.out.join("sweep.csv").display());
    Ok(())
}

/// Builds the audit table for an external MTP file: one `agent,entropy,
/// verdict` line per agent, sorted by agent id.
pub fn audit_table(
    path: &Path,
    threshold: f64,
    config: &EntropyConfig,
) -> Result<String, CliError> {
    if threshold.is_nan() {
        return Err(CliError::Config("--threshold must not be NaN".into()));
    }
    let results = load_external_mtp(path).map_err(|e| CliError::Io(e.to_string()))?;
    let mut out = String::from("agent,entropy,verdict\n");
    for (agent, result) in &results {
        let entropy = trajectory_entropy(result, config)
            .map_err(|e| CliError::Contract(format!("agent {agent}: {e}")))?;
        let verdict = if entropy.value < threshold { "inactive" } else { "active" };
        writeln!(out, "{agent},{},{verdict}", report::fmt_real(entropy.value))
            .expect("writing to a string cannot fail");
    }
    Ok(out)
}

/// `levelk audit`: prints the audit table.
pub fn cmd_audit(args: &AuditArgs) -> Result<(), CliError> {
    let config = EntropyConfig {
        variant: args.normalization.into(),
        pair_convention: args.pairs.into(),
        ..EntropyConfig::default()
    };
    let table = audit_table(&args.mtp, args.threshold, &config)?;
    print!("{table}");
    Ok(())
}
