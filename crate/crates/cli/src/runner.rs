//! Config resolution and suite execution.

use std::path::{Path, PathBuf};

use levelk_core::{
    build_suite, load_policy_params, load_scene, load_suite_dir, run_level_k_game, run_ungated,
    Difficulty, EntropyConfig, FanPolicy, FanPolicyParams, GameTrace, GateConfig, ScenarioSuite,
    SceneError, SuiteEntry, SuiteSpec,
};
use rayon::prelude::*;

use crate::args::RunArgs;
use crate::presets;
use crate::CliError;

/// Fully resolved run configuration: suite built, thresholds expanded,
/// policy loaded.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub suite: ScenarioSuite,
    pub levels: usize,
    pub thresholds: Vec<f64>,
    pub entropy: EntropyConfig,
    pub policy: FanPolicyParams,
    pub jobs: usize,
    pub out: PathBuf,
    pub no_gate: bool,
    pub seed: u64,
}

/// Gated and ungated traces for one scene.
#[derive(Debug, Clone)]
pub struct SceneRun {
    pub name: String,
    pub gated: GameTrace,
    pub ungated: GameTrace,
}

fn scene_io_error(e: SceneError) -> CliError {
    CliError::Io(e.to_string())
}

/// Builds or loads the scenario suite named by `--suite`: generator specs
/// first, then a scene file or a directory of scene files.
pub fn resolve_suite(
    suite: &str,
    seed: u64,
    horizon: usize,
    dt: f64,
    max_agents: Option<usize>,
) -> Result<ScenarioSuite, CliError> {
    let mut resolved = if let Ok(spec) = suite.parse::<SuiteSpec>() {
        build_suite(spec, seed, horizon, dt).map_err(scene_io_error)?
    } else {
        let path = Path::new(suite);
        if path.is_dir() {
            load_suite_dir(path, seed).map_err(scene_io_error)?
        } else if path.is_file() {
            let scene = load_scene(path).map_err(scene_io_error)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scene".to_string());
            ScenarioSuite {
                seed,
                entries: vec![SuiteEntry { name, difficulty: Difficulty::Interactive, scene }],
            }
        } else {
            return Err(CliError::Io(format!(
                "suite {suite:?} is neither a generator spec nor a readable path"
            )));
        }
    };

    if let Some(cap) = max_agents {
        if cap == 0 {
            return Err(CliError::Config("--max-agents must be at least 1".into()));
        }
        for entry in &mut resolved.entries {
            let mut ids = entry.scene.agent_ids();
            ids.truncate(cap);
            entry.scene.agents.retain(|a| ids.contains(&a.id));
        }
    }
    Ok(resolved)
}

pub fn resolve(args: &RunArgs) -> Result<ResolvedRun, CliError> {
    if args.levels == Some(0) {
        return Err(CliError::Config("--levels must be at least 1".into()));
    }
    let explicit = match (&args.thresholds, &args.preset) {
        (Some(t), _) => Some(t.clone()),
        (None, Some(name)) => Some(presets::lookup(name)?.thresholds),
        (None, None) => None,
    };
    let (levels, thresholds) = match (args.levels, explicit) {
        (Some(k), Some(t)) => {
            if k != t.len() + 1 {
                return Err(CliError::Config(format!(
                    "--levels {k} needs {} thresholds, got {}",
                    k - 1,
                    t.len()
                )));
            }
            (k, t)
        }
        // a bare --levels works when no gate can fire anyway; otherwise fall
        // back to the synthetic preset and insist the depths agree
        (Some(k), None) if args.no_gate || k == 1 => (k, vec![f64::NEG_INFINITY; k - 1]),
        (Some(k), None) => {
            let t = presets::lookup("synthetic")?.thresholds;
            if k != t.len() + 1 {
                return Err(CliError::Config(format!(
                    "--levels {k} needs {} thresholds; pass --thresholds or a --preset",
                    k - 1
                )));
            }
            (k, t)
        }
        (None, Some(t)) => (t.len() + 1, t),
        (None, None) => {
            let t = presets::lookup("synthetic")?.thresholds;
            (t.len() + 1, t)
        }
    };

    if !(args.dt > 0.0 && args.dt.is_finite()) {
        return Err(CliError::Config(format!("--dt must be positive, got {}", args.dt)));
    }
    if args.horizon < 1 {
        return Err(CliError::Config("--horizon must be at least 1".into()));
    }
    if args.jobs < 1 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }

    let mut policy = match &args.policy {
        Some(path) => load_policy_params(path).map_err(|e| CliError::Config(e.to_string()))?,
        None => FanPolicyParams::default(),
    };
    policy.seed = args.seed;

    let entropy = EntropyConfig {
        variant: args.normalization.into(),
        pair_convention: args.pairs.into(),
        ..EntropyConfig::default()
    };

    let suite = resolve_suite(&args.suite, args.seed, args.horizon, args.dt, args.max_agents)?;

    Ok(ResolvedRun {
        suite,
        levels,
        thresholds,
        entropy,
        policy,
        jobs: args.jobs,
        out: args.out.clone(),
        no_gate: args.no_gate,
        seed: args.seed,
    })
}

/// The gate the run will use: disabled under `--no-gate`, otherwise the
/// resolved schedule.
pub fn effective_gate(run: &ResolvedRun) -> Result<GateConfig, CliError> {
    if run.no_gate {
        Ok(GateConfig::disabled(run.levels))
    } else {
        GateConfig::new(run.thresholds.clone()).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Runs every scene gated (with `gate`) and ungated. Scenes execute in
/// parallel up to `jobs`; results keep suite order regardless of completion
/// order.
pub fn execute_with_gate(run: &ResolvedRun, gate: &GateConfig) -> Result<Vec<SceneRun>, CliError> {
    let policy = FanPolicy::new(run.policy.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    let run_one = |entry: &SuiteEntry| -> Result<SceneRun, CliError> {
        let gated = run_level_k_game(&entry.scene, &policy, gate, &run.entropy)
            .map_err(|e| CliError::Contract(format!("{}: {e}", entry.name)))?;
        let ungated = run_ungated(&entry.scene, &policy, run.levels, &run.entropy)
            .map_err(|e| CliError::Contract(format!("{}: {e}", entry.name)))?;
        Ok(SceneRun { name: entry.name.clone(), gated, ungated })
    };

    if run.jobs <= 1 {
        run.suite.entries.iter().map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(run.jobs)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?;
        pool.install(|| run.suite.entries.par_iter().map(run_one).collect())
    }
}

pub fn execute(run: &ResolvedRun) -> Result<Vec<SceneRun>, CliError> {
    execute_with_gate(run, &effective_gate(run)?)
}
