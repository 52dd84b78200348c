//! Analytical stand-in policies for the game engine.
//!
//! These replace a learned decoder with two closed-form behaviors that make
//! the level-k dynamics observable and testable:
//!
//! * [`fan_level0`] rolls out a fan of constant-speed candidates around the
//!   agent's heading, pulls them toward the assigned centerline, and scores
//!   confidences by lateral deviation. On a straight lane the aligned mode
//!   dominates and entropy is low; near a turning lane all candidates deviate
//!   comparably and entropy is high.
//! * [`contraction_refine`] contracts each mode toward the agent's own
//!   confidence-weighted mean trajectory, resolves crossing conflicts by
//!   delaying the lower-priority agent, and re-scores confidences with a
//!   temperature sharpened per level. Entropy shrinks level over level,
//!   reproducing the contraction the gate exploits.
//!
//! No fidelity to any neural decoder is claimed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::game::{LevelSnapshot, Policy, PolicyError};
use crate::mtp::{AgentId, ModeTrajectory, MtpResult, Point2};
use crate::scene::{Polyline, Scene};

/// Disc radius used for conflict detection, meters (two car half-widths plus
/// margin).
pub const DEFAULT_CONFLICT_RADIUS: f64 = 3.0;

/// Fraction by which rollout points are pulled toward the centerline.
const CENTERLINE_PULL: f64 = 0.5;

/// Per-mode heading jitter bound, radians.
const HEADING_JITTER: f64 = 0.005;

/// Per-mode speed jitter bound, relative.
const SPEED_JITTER: f64 = 0.01;

/// Caps softmax exponents so extreme deviations cannot underflow a
/// confidence to zero.
const MAX_SOFTMAX_EXPONENT: f64 = 700.0;

/// Parameters for [`fan_level0`] / [`contraction_refine`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FanPolicyParams {
    /// Number of modes M to emit.
    pub mode_count: usize,
    /// Candidate heading offsets around the agent heading, radians.
    pub heading_offsets: Vec<f64>,
    /// Candidate speed multipliers. Candidates enumerate scaling-major
    /// (all offsets at the first scaling, then the next scaling) and are
    /// truncated to `mode_count`.
    pub speed_scalings: Vec<f64>,
    /// Softmax temperature for deviation-based confidences, meters.
    pub confidence_temperature: f64,
    /// Fraction of each mode's deviation from the weighted mean retained per
    /// refinement level, in (0, 1]. 1.0 disables contraction entirely.
    pub contraction_rate: f64,
    /// Time gap restored between conflicting trajectories, seconds.
    pub conflict_time_gap: f64,
    /// Conflict detection radius, meters.
    pub conflict_radius: f64,
    pub seed: u64,
}

impl Default for FanPolicyParams {
    fn default() -> Self {
        FanPolicyParams {
            mode_count: 6,
            heading_offsets: vec![-0.3, -0.1, 0.0, 0.1, 0.3],
            speed_scalings: vec![1.0, 0.85, 1.15],
            confidence_temperature: 2.0,
            contraction_rate: 0.5,
            conflict_time_gap: 2.0,
            conflict_radius: DEFAULT_CONFLICT_RADIUS,
            seed: 0,
        }
    }
}

impl FanPolicyParams {
    pub fn validate(&self) -> Result<(), PolicyError> {
        let fail = |msg: String| Err(PolicyError::InvalidParams(msg));
        if self.mode_count < 1 {
            return fail("mode_count must be at least 1".into());
        }
        if self.heading_offsets.len() * self.speed_scalings.len() < self.mode_count {
            return fail(format!(
                "{} heading offsets x {} speed scalings cannot cover {} modes",
                self.heading_offsets.len(),
                self.speed_scalings.len(),
                self.mode_count
            ));
        }
        if !(self.confidence_temperature > 0.0 && self.confidence_temperature.is_finite()) {
            return fail(format!(
                "confidence_temperature must be positive, got {}",
                self.confidence_temperature
            ));
        }
        if !(self.contraction_rate > 0.0 && self.contraction_rate <= 1.0) {
            return fail(format!(
                "contraction_rate must be in (0, 1], got {}",
                self.contraction_rate
            ));
        }
        if !(self.conflict_time_gap >= 0.0 && self.conflict_time_gap.is_finite()) {
            return fail(format!(
                "conflict_time_gap must be non-negative, got {}",
                self.conflict_time_gap
            ));
        }
        if !(self.conflict_radius > 0.0 && self.conflict_radius.is_finite()) {
            return fail(format!(
                "conflict_radius must be positive, got {}",
                self.conflict_radius
            ));
        }
        if self.heading_offsets.iter().any(|h| !h.is_finite()) {
            return fail("heading_offsets must be finite".into());
        }
        if self.speed_scalings.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return fail("speed_scalings must be finite and non-negative".into());
        }
        Ok(())
    }
}

/// Softmax of `-score/temperature`, guarded against underflow so every
/// confidence stays strictly positive.
fn deviation_softmax(deviations: &[f64], temperature: f64) -> Vec<f64> {
    let min_dev = deviations.iter().cloned().fold(f64::INFINITY, f64::min);
    let exps: Vec<f64> = deviations
        .iter()
        .map(|d| (-((d - min_dev) / temperature)).max(-MAX_SOFTMAX_EXPONENT).exp())
        .collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

fn mean_lane_deviation(points: &[Point2], lane: &Polyline) -> f64 {
    let sum: f64 = points.iter().map(|&p| lane.distance_to(p)).sum();
    sum / points.len() as f64
}

fn lookup_agent(scene: &Scene, agent: AgentId) -> Result<&crate::scene::AgentInit, PolicyError> {
    scene.agent(agent).ok_or(PolicyError::UnknownAgent(agent))
}

fn lookup_lane<'a>(
    scene: &'a Scene,
    agent: AgentId,
    lane: &str,
) -> Result<&'a Polyline, PolicyError> {
    scene
        .centerlines
        .get(lane)
        .ok_or_else(|| PolicyError::MissingCenterline { agent, lane: lane.to_string() })
}

/// Level-0 prediction: a fan of `mode_count` constant-speed rollouts over
/// heading offsets x speed scalings (plus small seeded jitter), each pulled
/// halfway toward the agent's centerline, with confidences softmaxed from
/// mean lateral deviation.
pub fn fan_level0(
    scene: &Scene,
    agent: AgentId,
    params: &FanPolicyParams,
) -> Result<MtpResult, PolicyError> {
    params.validate()?;
    let init = lookup_agent(scene, agent)?;
    let lane = lookup_lane(scene, agent, &init.lane)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ agent.0.wrapping_mul(0x9E37_79B9_7F4A_7C15));

    let candidates: Vec<(f64, f64)> = params
        .speed_scalings
        .iter()
        .flat_map(|&scale| params.heading_offsets.iter().map(move |&offset| (offset, scale)))
        .take(params.mode_count)
        .collect();

    let mut rollouts = Vec::with_capacity(candidates.len());
    let mut deviations = Vec::with_capacity(candidates.len());
    for (offset, scale) in candidates {
        let heading = init.heading + offset + rng.random_range(-HEADING_JITTER..HEADING_JITTER);
        let speed = init.speed * scale * (1.0 + rng.random_range(-SPEED_JITTER..SPEED_JITTER));
        let dir = Point2::unit(heading);
        let mut points = Vec::with_capacity(scene.horizon);
        for t in 1..=scene.horizon {
            let raw = init.position + dir * (speed * scene.dt * t as f64);
            let pulled = raw + (lane.closest_point(raw) - raw) * CENTERLINE_PULL;
            points.push(pulled);
        }
        deviations.push(mean_lane_deviation(&points, lane));
        rollouts.push(points);
    }

    let confidences = deviation_softmax(&deviations, params.confidence_temperature);
    let modes = rollouts
        .into_iter()
        .zip(confidences)
        .map(|(points, confidence)| ModeTrajectory::new(points, confidence))
        .collect();
    Ok(MtpResult::new(init.position, modes, scene.dt))
}

/// Refinement: contract modes toward the agent's own confidence-weighted
/// mean trajectory, delay modes that conflict with a higher-priority agent's
/// top mode, then re-softmax confidences with the per-level sharpened
/// temperature.
///
/// Priority is ascending agent id: when refining agent `i`, only agents with
/// id < i are checked, so in any two-agent conflict exactly one side yields
/// and id 0 never does.
pub fn contraction_refine(
    scene: &Scene,
    agent: AgentId,
    own_prev: &MtpResult,
    others: &LevelSnapshot<'_>,
    level: usize,
    params: &FanPolicyParams,
) -> Result<MtpResult, PolicyError> {
    params.validate()?;
    let init = lookup_agent(scene, agent)?;
    let lane = lookup_lane(scene, agent, &init.lane)?;
    for neighbor in &scene.agents {
        if neighbor.id != agent && !others.contains_key(&neighbor.id) {
            return Err(PolicyError::MissingNeighbor {
                agent,
                missing: neighbor.id,
                level,
            });
        }
    }

    let horizon = own_prev.horizon();
    let lambda = params.contraction_rate;

    let mut modes: Vec<Vec<Point2>> =
        own_prev.modes.iter().map(|m| m.points.clone()).collect();

    // Consensus contraction. lambda == 1.0 is the no-contraction sentinel and
    // bypasses the blend so the geometry stays bit-identical.
    if lambda < 1.0 {
        let total: f64 = own_prev.modes.iter().map(|m| m.confidence).sum();
        for t in 0..horizon {
            let mut mean = Point2::ORIGIN;
            for mode in &own_prev.modes {
                mean = mean + mode.points[t] * mode.confidence;
            }
            mean = mean * (1.0 / total);
            for points in &mut modes {
                points[t] = mean + (points[t] - mean) * lambda;
            }
        }
    }

    // Conflict resolution against higher-priority agents' top modes.
    let delay = (params.conflict_time_gap / own_prev.dt).ceil() as usize;
    for points in &mut modes {
        for (_, other) in others.range(..agent) {
            let Some(top) = other.top_mode() else { continue };
            let steps = horizon.min(top.points.len());
            let conflict = (0..steps)
                .any(|t| points[t].dist(top.points[t]) < params.conflict_radius);
            if conflict {
                time_shift(points, own_prev.origin, delay);
            }
        }
    }

    let temperature =
        params.confidence_temperature * lambda.powi(i32::try_from(level).unwrap_or(i32::MAX));
    let deviations: Vec<f64> = modes
        .iter()
        .map(|points| mean_lane_deviation(points, lane))
        .collect();
    let confidences = deviation_softmax(&deviations, temperature);

    let modes = modes
        .into_iter()
        .zip(confidences)
        .map(|(points, confidence)| ModeTrajectory::new(points, confidence))
        .collect();
    Ok(MtpResult::new(own_prev.origin, modes, own_prev.dt))
}

/// Delays a trajectory by `delay` steps: each point takes the value the mode
/// had `delay` steps earlier, and the first `delay` points creep from the
/// origin toward the old first point.
fn time_shift(points: &mut Vec<Point2>, origin: Point2, delay: usize) {
    if delay == 0 || points.is_empty() {
        return;
    }
    let first = points[0];
    let shifted: Vec<Point2> = (1..=points.len())
        .map(|t| {
            if t > delay {
                points[t - delay - 1]
            } else {
                origin + (first - origin) * (t as f64 / (delay + 1) as f64)
            }
        })
        .collect();
    *points = shifted;
}

/// [`Policy`] wiring [`fan_level0`] and [`contraction_refine`] together.
#[derive(Debug, Clone)]
pub struct FanPolicy {
    params: FanPolicyParams,
}

impl FanPolicy {
    pub fn new(params: FanPolicyParams) -> Result<Self, PolicyError> {
        params.validate()?;
        Ok(FanPolicy { params })
    }

    pub fn params(&self) -> &FanPolicyParams {
        &self.params
    }
}

impl Policy for FanPolicy {
    fn level0(&self, scene: &Scene, agent: AgentId) -> Result<MtpResult, PolicyError> {
        fan_level0(scene, agent, &self.params)
    }

    fn refine(
        &self,
        scene: &Scene,
        agent: AgentId,
        own_prev: &MtpResult,
        others: &LevelSnapshot<'_>,
        level: usize,
    ) -> Result<MtpResult, PolicyError> {
        contraction_refine(scene, agent, own_prev, others, level, &self.params)
    }
}
