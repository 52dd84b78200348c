//! Displacement and safety metrics against scripted ground truth.
//!
//! Miss rate uses a flat final-displacement threshold and collision uses
//! center-point discs; both are deliberate simplifications of the
//! benchmark-specific criteria, tuned for synthetic scenes.

use thiserror::Error;

use crate::mtp::{ModeTrajectory, MtpResult};

/// Flat miss threshold on the minimum final displacement, meters.
pub const DEFAULT_MISS_THRESHOLD: f64 = 2.0;

/// Disc radius for collision checks, meters.
pub const DEFAULT_COLLISION_RADIUS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("prediction horizon {pred} does not match ground-truth length {gt}")]
    HorizonMismatch { pred: usize, gt: usize },
    #[error("trajectory lengths differ: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("prediction has no modes")]
    NoModes,
}

/// Displacement and safety metrics for one agent at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalMetrics {
    pub min_ade: f64,
    pub min_fde: f64,
    pub miss: bool,
    pub collision: bool,
}

fn check_horizon(pred: &MtpResult, gt: &ModeTrajectory) -> Result<(), MetricError> {
    if pred.modes.is_empty() {
        return Err(MetricError::NoModes);
    }
    if pred.horizon() != gt.points.len() {
        return Err(MetricError::HorizonMismatch {
            pred: pred.horizon(),
            gt: gt.points.len(),
        });
    }
    Ok(())
}

/// Minimum over modes of the mean per-timestep distance to ground truth.
pub fn min_ade(pred: &MtpResult, gt: &ModeTrajectory) -> Result<f64, MetricError> {
    check_horizon(pred, gt)?;
    Ok(pred
        .modes
        .iter()
        .map(|mode| {
            let sum: f64 = mode
                .points
                .iter()
                .zip(&gt.points)
                .map(|(p, q)| p.dist(*q))
                .sum();
            sum / gt.points.len() as f64
        })
        .fold(f64::INFINITY, f64::min))
}

/// Minimum over modes of the distance at the final timestep.
pub fn min_fde(pred: &MtpResult, gt: &ModeTrajectory) -> Result<f64, MetricError> {
    check_horizon(pred, gt)?;
    let last = gt.points.len() - 1;
    Ok(pred
        .modes
        .iter()
        .map(|mode| mode.points[last].dist(gt.points[last]))
        .fold(f64::INFINITY, f64::min))
}

/// True iff the minimum final displacement strictly exceeds the threshold.
pub fn miss(pred: &MtpResult, gt: &ModeTrajectory, threshold: f64) -> Result<bool, MetricError> {
    Ok(min_fde(pred, gt)? > threshold)
}

/// True iff any same-timestep pair of points is strictly closer than
/// `radius`.
pub fn collision(
    a: &ModeTrajectory,
    b: &ModeTrajectory,
    radius: f64,
) -> Result<bool, MetricError> {
    if a.points.len() != b.points.len() {
        return Err(MetricError::LengthMismatch {
            a: a.points.len(),
            b: b.points.len(),
        });
    }
    Ok(a.points
        .iter()
        .zip(&b.points)
        .any(|(p, q)| p.dist(*q) < radius))
}

/// Bundles the metrics for one prediction: displacement errors and miss
/// against its ground truth, and collision of the argmax-confidence mode
/// (the agent's "plan") against the other agents' trajectories.
pub fn evaluate(
    pred: &MtpResult,
    gt: &ModeTrajectory,
    others: &[&ModeTrajectory],
    miss_threshold: f64,
    collision_radius: f64,
) -> Result<EvalMetrics, MetricError> {
    let ade = min_ade(pred, gt)?;
    let fde = min_fde(pred, gt)?;
    let plan = pred.top_mode().ok_or(MetricError::NoModes)?;
    let mut hit = false;
    for other in others {
        if collision(plan, other, collision_radius)? {
            hit = true;
            break;
        }
    }
    Ok(EvalMetrics {
        min_ade: ade,
        min_fde: fde,
        miss: fde > miss_threshold,
        collision: hit,
    })
}
