//! Prints trajectory-entropy statistics for the built-in scenario
//! generators: level-0 entropy by scene difficulty, and per-level means for
//! the ungated contraction policy. Handy when calibrating gate thresholds
//! for new scene parameters.
//!
//! Run with: cargo run --example entropy_stats

use levelk_core::{
    build_suite, run_ungated, trajectory_entropy, Difficulty, EntropyConfig, FanPolicy,
    FanPolicyParams, SuiteSpec,
};

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

fn main() {
    let horizon = 30;
    let dt = 0.5;
    let levels = 5;
    let config = EntropyConfig::default();
    let params = FanPolicyParams::default();
    let policy = FanPolicy::new(params.clone()).unwrap();

    let suite = build_suite(SuiteSpec::Mixed { scenes: 100 }, 2024, horizon, dt).unwrap();

    let mut by_difficulty: std::collections::BTreeMap<&str, Vec<f64>> = Default::default();
    let mut by_level: Vec<Vec<f64>> = vec![Vec::new(); levels];

    for entry in &suite.entries {
        let trace = run_ungated(&entry.scene, &policy, levels, &config).unwrap();
        let tag = match entry.difficulty {
            Difficulty::Simple => "simple",
            Difficulty::Interactive => "interactive",
            Difficulty::Hard => "hard",
        };
        for record in trace.levels[0].values() {
            let e = trajectory_entropy(&record.result, &config).unwrap().value;
            by_difficulty.entry(tag).or_default().push(e);
        }
        for (level, rows) in trace.levels.iter().enumerate() {
            for record in rows.values() {
                by_level[level].push(record.entropy.expect("ungated rows carry entropy"));
            }
        }
    }

    println!("level-0 entropy by scene difficulty:");
    for (tag, mut values) in by_difficulty {
        values.sort_by(|a, b| a.total_cmp(b));
        let (mean, std) = mean_std(&values);
        println!(
            "  {tag:<12} n={:<4} mean={mean:8.3} std={std:8.3} p10={:8.3} p50={:8.3} p90={:8.3}",
            values.len(),
            quantile(&values, 0.1),
            quantile(&values, 0.5),
            quantile(&values, 0.9),
        );
    }

    println!("ungated entropy per level (contraction policy):");
    for (level, values) in by_level.iter().enumerate() {
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let (mean, std) = mean_std(values);
        println!(
            "  level {level}: mean={mean:8.3} std={std:8.3} p10={:8.3} p50={:8.3} p90={:8.3}",
            quantile(&sorted, 0.1),
            quantile(&sorted, 0.5),
            quantile(&sorted, 0.9),
        );
    }
}
