//! CSV assembly for run, profile, and sweep outputs.
//!
//! All reals are written with 9 significant digits and rows follow a fixed
//! (scene, agent, level) order, so outputs are byte-identical across reruns
//! with the same config and seed.

use levelk_core::metrics::{DEFAULT_COLLISION_RADIUS, DEFAULT_MISS_THRESHOLD};
use levelk_core::{evaluate, AgentId, EvalMetrics, GameTrace, ModeTrajectory, MtpResult, Scene};

use crate::runner::{ResolvedRun, SceneRun};
use crate::CliError;

/// 9 significant digits, scientific notation.
pub fn fmt_real(x: f64) -> String {
    format!("{:.8e}", x)
}

/// Suite-level aggregates of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub scenes: usize,
    pub agents: usize,
    pub eval_count_gated: u64,
    pub eval_count_ungated: u64,
    pub eval_reduction_pct: f64,
    pub mean_min_ade_gated: f64,
    pub mean_min_ade_ungated: f64,
    pub mean_min_fde_gated: f64,
    pub mean_min_fde_ungated: f64,
    pub miss_rate_gated: f64,
    pub miss_rate_ungated: f64,
    pub collision_rate_gated: f64,
    pub collision_rate_ungated: f64,
}

fn metrics_for(
    scene: &Scene,
    agent: AgentId,
    result: &MtpResult,
) -> Result<Option<EvalMetrics>, CliError> {
    let Some(init) = scene.agent(agent) else {
        return Ok(None);
    };
    let Some(gt) = &init.ground_truth else {
        return Ok(None);
    };
    if gt.points.len() != result.horizon() {
        return Ok(None);
    }
    let others: Vec<&ModeTrajectory> = scene
        .agents
        .iter()
        .filter(|a| a.id != agent)
        .filter_map(|a| a.ground_truth.as_ref())
        .filter(|g| g.points.len() == result.horizon())
        .collect();
    evaluate(result, gt, &others, DEFAULT_MISS_THRESHOLD, DEFAULT_COLLISION_RADIUS)
        .map(Some)
        .map_err(|e| CliError::Contract(format!("metrics for agent {agent}: {e}")))
}

/// Sums of the final-level metrics of one trace over agents with ground
/// truth.
#[derive(Debug, Clone, Copy, Default)]
struct MetricSums {
    ade: f64,
    fde: f64,
    misses: usize,
    collisions: usize,
    n: usize,
}

impl MetricSums {
    fn add(&mut self, other: MetricSums) {
        self.ade += other.ade;
        self.fde += other.fde;
        self.misses += other.misses;
        self.collisions += other.collisions;
        self.n += other.n;
    }

    fn rates(&self) -> (f64, f64, f64, f64) {
        let n = self.n.max(1) as f64;
        (
            self.ade / n,
            self.fde / n,
            self.misses as f64 / n,
            self.collisions as f64 / n,
        )
    }
}

fn final_level_sums(scene: &Scene, trace: &GameTrace) -> Result<MetricSums, CliError> {
    let mut sums = MetricSums::default();
    for (&agent, record) in trace.final_level() {
        if let Some(m) = metrics_for(scene, agent, &record.result)? {
            sums.n += 1;
            sums.ade += m.min_ade;
            sums.fde += m.min_fde;
            sums.misses += m.miss as usize;
            sums.collisions += m.collision as usize;
        }
    }
    Ok(sums)
}

/// Builds `levels.csv` (one row per scene, agent, and level of the gated
/// trace, with the per-scene eval counts) and the run summary.
pub fn build_run_report(
    run: &ResolvedRun,
    runs: &[SceneRun],
) -> Result<(String, RunSummary), CliError> {
    let mut csv = String::from(
        "scene,agent,level,entropy,active,min_ade,min_fde,miss,collision,\
         eval_count_gated,eval_count_ungated\n",
    );

    let mut agents_total = 0usize;
    let (mut eval_gated, mut eval_ungated) = (0u64, 0u64);
    let mut gated_acc = MetricSums::default();
    let mut ungated_acc = MetricSums::default();

    for (entry, scene_run) in run.suite.entries.iter().zip(runs) {
        let scene = &entry.scene;
        agents_total += scene.agents.len();
        eval_gated += scene_run.gated.policy_eval_count;
        eval_ungated += scene_run.ungated.policy_eval_count;

        for agent in scene.agent_ids() {
            for (level, rows) in scene_run.gated.levels.iter().enumerate() {
                let record = &rows[&agent];
                let metrics = metrics_for(scene, agent, &record.result)?;
                let (ade, fde, miss, collision) = match metrics {
                    Some(m) => (
                        fmt_real(m.min_ade),
                        fmt_real(m.min_fde),
                        m.miss.to_string(),
                        m.collision.to_string(),
                    ),
                    None => (String::new(), String::new(), String::new(), String::new()),
                };
                let entropy = record.entropy.map(fmt_real).unwrap_or_default();
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{}\n",
                    scene_run.name,
                    agent,
                    level,
                    entropy,
                    record.active,
                    ade,
                    fde,
                    miss,
                    collision,
                    scene_run.gated.policy_eval_count,
                    scene_run.ungated.policy_eval_count,
                ));
            }
        }

        gated_acc.add(final_level_sums(scene, &scene_run.gated)?);
        ungated_acc.add(final_level_sums(scene, &scene_run.ungated)?);
    }

    let reduction = if eval_ungated > 0 {
        100.0 * (1.0 - eval_gated as f64 / eval_ungated as f64)
    } else {
        0.0
    };
    let (g_ade, g_fde, g_miss, g_coll) = gated_acc.rates();
    let (u_ade, u_fde, u_miss, u_coll) = ungated_acc.rates();

    let summary = RunSummary {
        scenes: runs.len(),
        agents: agents_total,
        eval_count_gated: eval_gated,
        eval_count_ungated: eval_ungated,
        eval_reduction_pct: reduction,
        mean_min_ade_gated: g_ade,
        mean_min_ade_ungated: u_ade,
        mean_min_fde_gated: g_fde,
        mean_min_fde_ungated: u_fde,
        miss_rate_gated: g_miss,
        miss_rate_ungated: u_miss,
        collision_rate_gated: g_coll,
        collision_rate_ungated: u_coll,
    };
    Ok((csv, summary))
}

pub fn summary_csv(s: &RunSummary) -> String {
    let mut out = String::from("metric,value\n");
    out.push_str(&format!("scenes,{}\n", s.scenes));
    out.push_str(&format!("agents,{}\n", s.agents));
    out.push_str(&format!("eval_count_gated,{}\n", s.eval_count_gated));
    out.push_str(&format!("eval_count_ungated,{}\n", s.eval_count_ungated));
    out.push_str(&format!("eval_reduction_pct,{}\n", fmt_real(s.eval_reduction_pct)));
    out.push_str(&format!("mean_min_ade_gated,{}\n", fmt_real(s.mean_min_ade_gated)));
    out.push_str(&format!("mean_min_ade_ungated,{}\n", fmt_real(s.mean_min_ade_ungated)));
    out.push_str(&format!("mean_min_fde_gated,{}\n", fmt_real(s.mean_min_fde_gated)));
    out.push_str(&format!("mean_min_fde_ungated,{}\n", fmt_real(s.mean_min_fde_ungated)));
    out.push_str(&format!("miss_rate_gated,{}\n", fmt_real(s.miss_rate_gated)));
    out.push_str(&format!("miss_rate_ungated,{}\n", fmt_real(s.miss_rate_ungated)));
    out.push_str(&format!("collision_rate_gated,{}\n", fmt_real(s.collision_rate_gated)));
    out.push_str(&format!("collision_rate_ungated,{}\n", fmt_real(s.collision_rate_ungated)));
    out
}

/// Builds `entropy_profile.csv`: per level, mean and population std of the
/// per-agent entropies, gated and ungated.
pub fn build_entropy_profile(levels: usize, runs: &[SceneRun]) -> String {
    let mut csv = String::from("level,gated_mean,gated_std,ungated_mean,ungated_std\n");
    for level in 0..levels {
        let collect = |pick: fn(&SceneRun) -> &GameTrace| -> Vec<f64> {
            runs.iter()
                .flat_map(|r| pick(r).levels[level].values())
                .filter_map(|record| record.entropy)
                .collect()
        };
        let gated = collect(|r| &r.gated);
        let ungated = collect(|r| &r.ungated);
        let stats = |v: &[f64]| -> (f64, f64) {
            if v.is_empty() {
                return (f64::NAN, f64::NAN);
            }
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
            (mean, var.sqrt())
        };
        let (gm, gs) = stats(&gated);
        let (um, us) = stats(&ungated);
        csv.push_str(&format!(
            "{level},{},{},{},{}\n",
            fmt_real(gm),
            fmt_real(gs),
            fmt_real(um),
            fmt_real(us)
        ));
    }
    csv
}

/// One sweep row: the schedule plus the gated run's headline numbers.
pub fn sweep_row(thresholds: &[f64], summary: &RunSummary) -> String {
    let label = thresholds
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join("/");
    format!(
        "{label},{},{},{}\n",
        fmt_real(summary.mean_min_ade_gated),
        fmt_real(summary.miss_rate_gated),
        fmt_real(summary.eval_reduction_pct)
    )
}
