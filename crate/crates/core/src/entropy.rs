//! Trajectory Entropy: an SNR-based uncertainty scalar for multimodal
//! trajectory predictions.
//!
//! The inter-mode point distances at each timestep are treated as signals;
//! each carries white Gaussian noise whose variance is the inverse product of
//! the two mode confidences, `sigma_ij^2 = 1/(c_i c_j)`. The SNR of one
//! distance signal is therefore
//!
//! ```text
//! SNR_ij^t = (d_ij^t)^2 / sigma_ij^2 = ||p_i^t - p_j^t||^2 * c_i * c_j
//! ```
//!
//! The per-step point-set entropy is the sum of these SNRs over mode pairs,
//! and the trajectory entropy accumulates the per-step values over the
//! horizon, each divided by a speed-normalization factor so that faster
//! agents do not read as more uncertain:
//!
//! ```text
//! E_Y = sum_t  E_{P_t} / max(N_t, epsilon)
//! ```
//!
//! Four normalization variants ship (see [`NormalizationVariant`]); the
//! default divides by the confidence-weighted expected squared per-step
//! travel, which makes the metric dimensionless and scale-invariant.
//!
//! [`trajectory_entropy`] computes the per-step pair sum in O(M) via the
//! weighted-scatter identity; [`trajectory_entropy_oracle`] is a deliberately
//! naive triple loop kept as an independent reference for tests.

use thiserror::Error;

use crate::mtp::{validate_mtp, MtpResult, Point2, Validation};

/// Default floor for the normalization denominator.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Which pairs the point-set entropy sums over.
///
/// `Ordered` counts each unordered pair twice and is exactly 2x `Unordered`
/// for every input; the factor is absorbed by gate-threshold tuning, so the
/// cheaper unordered convention is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairConvention {
    #[default]
    Unordered,
    Ordered,
}

/// Speed-normalization factor dividing each per-step entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalizationVariant {
    /// `sum_j c_j * ||p_j^t - p_j^{t-1}||^2`: expected squared per-step
    /// travel. Dimensionless entropy; the default.
    #[default]
    UnitStepSquared,
    /// `sum_j c_j * ||p_j^t - p_j^{t-1}||`: expected per-step travel
    /// (linear reading of the same factor). Entropy carries meters.
    UnitStepLinear,
    /// `sum_j c_j * ||p_j^t - origin||`: expected distance from the agent
    /// origin at step `t`. Grows with `t`, down-weighting late steps.
    CumulativeAtStep,
    /// `sum_j c_j * ||p_j^T - origin||`: expected final trajectory length,
    /// independent of `t`.
    FinalLength,
}

/// Knobs for the entropy computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyConfig {
    pub variant: NormalizationVariant,
    /// Floor for the normalization denominator; must be positive. A fully
    /// stationary prediction would otherwise divide by zero.
    pub epsilon: f64,
    pub pair_convention: PairConvention,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            variant: NormalizationVariant::default(),
            epsilon: DEFAULT_EPSILON,
            pair_convention: PairConvention::default(),
        }
    }
}

/// The scalar metric. Non-negative and finite for every valid input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryEntropy {
    pub value: f64,
}

/// SNR of one inter-mode distance signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSnr {
    pub i: usize,
    pub j: usize,
    pub snr: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    #[error("points/confidences length mismatch: {points} vs {confidences}")]
    LengthMismatch { points: usize, confidences: usize },
    #[error("empty point set")]
    EmptyPointSet,
    #[error("confidence at index {index} must be positive and finite, got {confidence}")]
    NonPositiveConfidence { index: usize, confidence: f64 },
    #[error("timestep {t} out of range 1..={horizon}")]
    TimestepOutOfRange { t: usize, horizon: usize },
    #[error("invalid multimodal prediction: {0}")]
    InvalidMtp(Validation),
    #[error("epsilon must be strictly positive, got {0}")]
    InvalidEpsilon(f64),
}

fn check_point_set(points: &[Point2], confidences: &[f64]) -> Result<(), EntropyError> {
    if points.len() != confidences.len() {
        return Err(EntropyError::LengthMismatch {
            points: points.len(),
            confidences: confidences.len(),
        });
    }
    if points.is_empty() {
        return Err(EntropyError::EmptyPointSet);
    }
    for (index, &c) in confidences.iter().enumerate() {
        if !(c > 0.0 && c.is_finite()) {
            return Err(EntropyError::NonPositiveConfidence { index, confidence: c });
        }
    }
    Ok(())
}

/// All pairwise SNRs `||p_i - p_j||^2 * c_i * c_j` under the given pair
/// convention, in lexicographic `(i, j)` order. A single point yields no
/// pairs. Under `Ordered`, the `(i, j)` and `(j, i)` entries are bit-equal.
pub fn pairwise_snr(
    points: &[Point2],
    confidences: &[f64],
    convention: PairConvention,
) -> Result<Vec<PairSnr>, EntropyError> {
    check_point_set(points, confidences)?;
    let m = points.len();
    let snr = |i: usize, j: usize| points[i].dist_sq(points[j]) * (confidences[i] * confidences[j]);

    let mut out = Vec::new();
    match convention {
        PairConvention::Unordered => {
            for i in 0..m {
                for j in (i + 1)..m {
                    out.push(PairSnr { i, j, snr: snr(i, j) });
                }
            }
        }
        PairConvention::Ordered => {
            for i in 0..m {
                for j in 0..m {
                    if i != j {
                        out.push(PairSnr { i, j, snr: snr(i, j) });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Unordered pair-SNR sum via the weighted-scatter identity:
///
/// ```text
/// sum_{i<j} c_i c_j ||p_i - p_j||^2 = S0 * sum_i c_i ||p_i - mu||^2,
/// S0 = sum_i c_i,  mu = (sum_i c_i p_i) / S0
/// ```
///
/// Terms are accumulated in a canonical sorted order, so the value is
/// invariant under permutation of the input down to the last bit.
fn unordered_snr_sum(items: &mut [(f64, Point2)]) -> f64 {
    if items.len() < 2 {
        return 0.0;
    }
    items.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| a.1.x.total_cmp(&b.1.x))
            .then_with(|| a.1.y.total_cmp(&b.1.y))
    });
    let s0: f64 = items.iter().map(|(c, _)| *c).sum();
    let sx: f64 = items.iter().map(|(c, p)| c * p.x).sum();
    let sy: f64 = items.iter().map(|(c, p)| c * p.y).sum();
    let (mx, my) = (sx / s0, sy / s0);
    let scatter: f64 = items
        .iter()
        .map(|(c, p)| {
            let dx = p.x - mx;
            let dy = p.y - my;
            c * (dx * dx + dy * dy)
        })
        .sum();
    s0 * scatter
}

fn convention_factor(convention: PairConvention) -> f64 {
    match convention {
        PairConvention::Unordered => 1.0,
        PairConvention::Ordered => 2.0,
    }
}

/// Point-set entropy at one timestep: the sum of all pairwise SNRs under the
/// given convention. Always >= 0; a single point yields 0.
pub fn point_set_entropy(
    points: &[Point2],
    confidences: &[f64],
    convention: PairConvention,
) -> Result<f64, EntropyError> {
    check_point_set(points, confidences)?;
    let mut items: Vec<(f64, Point2)> =
        confidences.iter().copied().zip(points.iter().copied()).collect();
    Ok(convention_factor(convention) * unordered_snr_sum(&mut items))
}

/// Permutation-stable sum: terms are added in a canonical sorted order.
fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.total_cmp(b));
    terms.iter().sum()
}

/// Confidence-weighted speed-normalization factor at 1-based timestep `t`.
/// `FinalLength` is independent of `t`.
pub fn normalization_factor(
    mtp: &MtpResult,
    t: usize,
    variant: NormalizationVariant,
) -> Result<f64, EntropyError> {
    let horizon = mtp.horizon();
    if t < 1 || t > horizon {
        return Err(EntropyError::TimestepOutOfRange { t, horizon });
    }
    let terms: Vec<f64> = mtp
        .modes
        .iter()
        .map(|mode| {
            let l = match variant {
                NormalizationVariant::UnitStepSquared | NormalizationVariant::UnitStepLinear => {
                    let prev = if t == 1 { mtp.origin } else { mode.points[t - 2] };
                    let d_sq = mode.points[t - 1].dist_sq(prev);
                    if variant == NormalizationVariant::UnitStepSquared {
                        d_sq
                    } else {
                        d_sq.sqrt()
                    }
                }
                NormalizationVariant::CumulativeAtStep => mode.points[t - 1].dist(mtp.origin),
                NormalizationVariant::FinalLength => mode.points[horizon - 1].dist(mtp.origin),
            };
            mode.confidence * l
        })
        .collect();
    Ok(sorted_sum(terms))
}

/// Trajectory entropy of a full MTP result: per-step point-set entropy
/// divided by the floored normalization factor, accumulated over the horizon.
///
/// The input must pass [`validate_mtp`]. The result is non-negative, finite,
/// invariant under rigid motions and mode permutation, and (under the default
/// squared-step normalization) invariant under uniform coordinate scaling.
pub fn trajectory_entropy(
    mtp: &MtpResult,
    config: &EntropyConfig,
) -> Result<TrajectoryEntropy, EntropyError> {
    if config.epsilon <= 0.0 || config.epsilon.is_nan() {
        return Err(EntropyError::InvalidEpsilon(config.epsilon));
    }
    let validation = validate_mtp(mtp);
    if !validation.is_ok() {
        return Err(EntropyError::InvalidMtp(validation));
    }

    let factor = convention_factor(config.pair_convention);
    let mut total = 0.0;
    for t in 1..=mtp.horizon() {
        let mut items: Vec<(f64, Point2)> = mtp
            .modes
            .iter()
            .map(|mode| (mode.confidence, mode.points[t - 1]))
            .collect();
        let num = factor * unordered_snr_sum(&mut items);
        let den = normalization_factor(mtp, t, config.variant)?;
        total += num / den.max(config.epsilon);
    }
    Ok(TrajectoryEntropy { value: total })
}

/// Brute-force reference implementation: a literal triple loop over
/// timesteps and mode pairs with no algebraic shortcuts, computing each SNR
/// as signal power over noise variance. Shares no accumulation code with
/// [`trajectory_entropy`]; intended for tests.
pub fn trajectory_entropy_oracle(
    mtp: &MtpResult,
    config: &EntropyConfig,
) -> Result<TrajectoryEntropy, EntropyError> {
    if config.epsilon <= 0.0 || config.epsilon.is_nan() {
        return Err(EntropyError::InvalidEpsilon(config.epsilon));
    }
    let validation = validate_mtp(mtp);
    if !validation.is_ok() {
        return Err(EntropyError::InvalidMtp(validation));
    }

    let m = mtp.mode_count();
    let horizon = mtp.horizon();
    let mut total = 0.0;
    for t in 1..=horizon {
        let mut step_entropy = 0.0;
        for i in 0..m {
            for j in 0..m {
                let counted = match config.pair_convention {
                    PairConvention::Unordered => i < j,
                    PairConvention::Ordered => i != j,
                };
                if !counted {
                    continue;
                }
                let d_sq = mtp.modes[i].points[t - 1].dist_sq(mtp.modes[j].points[t - 1]);
                let noise_variance = 1.0 / (mtp.modes[i].confidence * mtp.modes[j].confidence);
                step_entropy += d_sq / noise_variance;
            }
        }

        let mut norm = 0.0;
        for mode in &mtp.modes {
            let l = match config.variant {
                NormalizationVariant::UnitStepSquared => {
                    let prev = if t == 1 { mtp.origin } else { mode.points[t - 2] };
                    mode.points[t - 1].dist_sq(prev)
                }
                NormalizationVariant::UnitStepLinear => {
                    let prev = if t == 1 { mtp.origin } else { mode.points[t - 2] };
                    mode.points[t - 1].dist(prev)
                }
                NormalizationVariant::CumulativeAtStep => mode.points[t - 1].dist(mtp.origin),
                NormalizationVariant::FinalLength => mode.points[horizon - 1].dist(mtp.origin),
            };
            norm += mode.confidence * l;
        }

        total += step_entropy / norm.max(config.epsilon);
    }
    Ok(TrajectoryEntropy { value: total })
}
