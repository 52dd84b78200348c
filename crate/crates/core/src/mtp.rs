//! Core prediction types: 2D trajectory points, confidence-weighted modes,
//! and multimodal trajectory prediction (MTP) results.
//!
//! An [`MtpResult`] is the unit everything else operates on: `M` candidate
//! future trajectories for one agent, each with a confidence, all sharing the
//! same horizon and timestep spacing. Values are plain immutable data; they
//! can be shared freely across threads.

use std::fmt;

use thiserror::Error;

/// Absolute tolerance on the mode-confidence sum.
pub const CONFIDENCE_SUM_TOLERANCE: f64 = 1e-6;

/// A 2D point in scene-local Cartesian coordinates, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Unit vector for a heading angle (radians, counterclockwise from +x).
    pub fn unit(heading: f64) -> Self {
        Point2::new(heading.cos(), heading.sin())
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist_sq(self, other: Point2) -> f64 {
        (self - other).norm_sq()
    }

    pub fn dist(self, other: Point2) -> f64 {
        self.dist_sq(other).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotation about the coordinate origin.
    pub fn rotated(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Opaque agent identifier, unique within a scene.
///
/// Ordering doubles as conflict priority: smaller ids have right of way and
/// the ego vehicle is id 0 by convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u64);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One candidate future trajectory with its confidence.
///
/// `points` are positions at timesteps `t = 1..=T` at uniform spacing; the
/// position at `t = 0` is not part of the mode (it is the shared origin of
/// the enclosing [`MtpResult`]). Confidence is per-trajectory and applies to
/// every timestep of the mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTrajectory {
    pub points: Vec<Point2>,
    pub confidence: f64,
}

impl ModeTrajectory {
    pub fn new(points: Vec<Point2>, confidence: f64) -> Self {
        ModeTrajectory { points, confidence }
    }
}

/// Multimodal trajectory prediction result for a single agent.
#[derive(Debug, Clone, PartialEq)]
pub struct MtpResult {
    /// Agent position at `t = 0`, the predecessor of every mode's first point.
    pub origin: Point2,
    /// The `M` candidate trajectories. All must share the same length.
    pub modes: Vec<ModeTrajectory>,
    /// Timestep spacing, seconds.
    pub dt: f64,
}

impl MtpResult {
    pub fn new(origin: Point2, modes: Vec<ModeTrajectory>, dt: f64) -> Self {
        MtpResult { origin, modes, dt }
    }

    /// Number of predicted timesteps `T` (0 only for a degenerate empty result).
    pub fn horizon(&self) -> usize {
        self.modes.first().map_or(0, |m| m.points.len())
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Highest-confidence mode; ties resolve to the lowest index.
    pub fn top_mode(&self) -> Option<&ModeTrajectory> {
        self.modes
            .iter()
            .reduce(|best, m| if m.confidence > best.confidence { m } else { best })
    }
}

/// A single violated [`MtpResult`] invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoModes,
    EmptyMode { mode: usize },
    RaggedHorizon { mode: usize, len: usize, expected: usize },
    NonPositiveConfidence { mode: usize, confidence: f64 },
    ConfidenceSum { sum: f64 },
    NonFinitePoint { mode: usize, index: usize },
    NonFiniteOrigin,
    NonPositiveDt { dt: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoModes => write!(f, "result has no modes"),
            Violation::EmptyMode { mode } => write!(f, "mode {mode} has no points"),
            Violation::RaggedHorizon { mode, len, expected } => write!(
                f,
                "ragged horizon: mode {mode} has {len} points, expected {expected}"
            ),
            Violation::NonPositiveConfidence { mode, confidence } => write!(
                f,
                "mode {mode} confidence {confidence} is not strictly positive"
            ),
            Violation::ConfidenceSum { sum } => write!(
                f,
                "confidence sum {sum} differs from 1 by more than {CONFIDENCE_SUM_TOLERANCE}"
            ),
            Violation::NonFinitePoint { mode, index } => {
                write!(f, "mode {mode} point {index} is not finite")
            }
            Violation::NonFiniteOrigin => write!(f, "origin is not finite"),
            Violation::NonPositiveDt { dt } => write!(f, "dt {dt} is not strictly positive"),
        }
    }
}

/// Outcome of [`validate_mtp`]: empty means the result is well formed.
/// Violations are data, not faults; callers decide whether to treat them as
/// errors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Validation {
    violations: Vec<Violation>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }
}

impl fmt::Display for Validation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Checks every [`MtpResult`] invariant and reports each violation found:
/// at least one mode, no empty modes, equal mode lengths, strictly positive
/// confidences summing to 1 within [`CONFIDENCE_SUM_TOLERANCE`], finite
/// coordinates, and positive `dt`.
pub fn validate_mtp(result: &MtpResult) -> Validation {
    let mut out = Validation::default();

    if !result.origin.is_finite() {
        out.push(Violation::NonFiniteOrigin);
    }
    // NaN dt must fail too, so spell the check NaN-proof
    if result.dt <= 0.0 || result.dt.is_nan() {
        out.push(Violation::NonPositiveDt { dt: result.dt });
    }
    if result.modes.is_empty() {
        out.push(Violation::NoModes);
        return out;
    }

    let expected = result.modes[0].points.len();
    for (i, mode) in result.modes.iter().enumerate() {
        if mode.points.is_empty() {
            out.push(Violation::EmptyMode { mode: i });
        } else if mode.points.len() != expected {
            out.push(Violation::RaggedHorizon {
                mode: i,
                len: mode.points.len(),
                expected,
            });
        }
        if !(mode.confidence > 0.0 && mode.confidence.is_finite()) {
            out.push(Violation::NonPositiveConfidence {
                mode: i,
                confidence: mode.confidence,
            });
        }
        for (j, p) in mode.points.iter().enumerate() {
            if !p.is_finite() {
                out.push(Violation::NonFinitePoint { mode: i, index: j });
            }
        }
    }

    let sum: f64 = result.modes.iter().map(|m| m.confidence).sum();
    if (sum - 1.0).abs() > CONFIDENCE_SUM_TOLERANCE || sum.is_nan() {
        out.push(Violation::ConfidenceSum { sum });
    }

    out
}

/// Timestep index outside `1..=T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("timestep {t} out of range 1..={horizon}")]
pub struct TimestepOutOfRange {
    pub t: usize,
    pub horizon: usize,
}

/// Squared per-step travel `l_t = ||p_t - p_{t-1}||^2` of one mode, meters^2.
///
/// Timesteps are 1-based; for `t = 1` the predecessor is the supplied agent
/// origin, so the value is defined at every predicted step.
pub fn displacement(
    traj: &ModeTrajectory,
    origin: Point2,
    t: usize,
) -> Result<f64, TimestepOutOfRange> {
    let horizon = traj.points.len();
    if t < 1 || t > horizon {
        return Err(TimestepOutOfRange { t, horizon });
    }
    let prev = if t == 1 { origin } else { traj.points[t - 2] };
    Ok(traj.points[t - 1].dist_sq(prev))
}
