//! Synthetic driving scenes: centerline maps, agent initial states, seeded
//! generators for mixed-difficulty suites, and file ingestion.
//!
//! Scene files and external MTP files are JSON. All reals are decimal
//! (scientific notation accepted) and round-trip bit-exactly, so
//! `load(save(scene))` is the identity.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mtp::{validate_mtp, AgentId, ModeTrajectory, MtpResult, Point2};
use crate::policies::FanPolicyParams;

/// Supported scene / MTP file schema version.
pub const FILE_VERSION: u32 = 1;

const LANE_SPACING: f64 = 4.0;
/// Seconds between scripted intersection crossings.
const ARRIVAL_GAP: f64 = 2.5;
/// Centerline margin behind each intersection agent's start, meters.
const APPROACH_MARGIN: f64 = 5.0;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error: {message}")]
    Parse { path: String, message: String },
    #[error("invalid scene: {0}")]
    Semantic(String),
}

/// An open polyline with at least two vertices; lane centerline geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<Point2>,
}

impl Polyline {
    pub fn new(points: Vec<Point2>) -> Self {
        Polyline { points }
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    /// Point at arc length `s` from the first vertex, clamped to the ends.
    pub fn point_at(&self, s: f64) -> Point2 {
        if s <= 0.0 {
            return self.points[0];
        }
        let mut remaining = s;
        for w in self.points.windows(2) {
            let seg = w[0].dist(w[1]);
            if remaining <= seg {
                if seg == 0.0 {
                    return w[0];
                }
                return w[0] + (w[1] - w[0]) * (remaining / seg);
            }
            remaining -= seg;
        }
        *self.points.last().expect("polyline has vertices")
    }

    /// Closest point on the polyline to `p`.
    pub fn closest_point(&self, p: Point2) -> Point2 {
        let mut best = self.points[0];
        let mut best_d = f64::INFINITY;
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            let ab = b - a;
            let len_sq = ab.norm_sq();
            let q = if len_sq == 0.0 {
                a
            } else {
                a + ab * (((p - a).dot(ab) / len_sq).clamp(0.0, 1.0))
            };
            let d = p.dist_sq(q);
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }

    pub fn distance_to(&self, p: Point2) -> f64 {
        p.dist(self.closest_point(p))
    }
}

/// Agent kinematic state at t = 0 plus its lane assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentInit {
    pub id: AgentId,
    pub position: Point2,
    /// m/s, >= 0.
    pub speed: f64,
    /// Radians, counterclockwise from +x.
    pub heading: f64,
    /// Centerline id; must resolve within the scene.
    pub lane: String,
    /// Scripted future for metric evaluation, confidence 1.
    pub ground_truth: Option<ModeTrajectory>,
}

/// A synthetic scene: centerline map plus agents, with a shared prediction
/// horizon and timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub centerlines: BTreeMap<String, Polyline>,
    pub agents: Vec<AgentInit>,
    /// Number of predicted timesteps T.
    pub horizon: usize,
    /// Timestep spacing, seconds.
    pub dt: f64,
}

impl Scene {
    pub fn agent(&self, id: AgentId) -> Option<&AgentInit> {
        self.agents.iter().find(|a| a.id == id)
    }

    /// Agent ids in ascending order.
    pub fn agent_ids(&self) -> Vec<AgentId> {
        let mut ids: Vec<AgentId> = self.agents.iter().map(|a| a.id).collect();
        ids.sort();
        ids
    }

    pub fn horizon_seconds(&self) -> f64 {
        self.horizon as f64 * self.dt
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let fail = |msg: String| Err(SceneError::Semantic(msg));
        if self.horizon < 1 {
            return fail("horizon must be at least 1".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return fail(format!("dt {} is not strictly positive", self.dt));
        }
        if self.agents.is_empty() {
            return fail("scene has no agents".into());
        }
        for (id, line) in &self.centerlines {
            if line.points.len() < 2 {
                return fail(format!("centerline {id:?} has fewer than 2 points"));
            }
            if line.points.iter().any(|p| !p.is_finite()) {
                return fail(format!("centerline {id:?} has non-finite points"));
            }
        }
        let mut seen = BTreeSet::new();
        for agent in &self.agents {
            if !seen.insert(agent.id) {
                return fail(format!("duplicate agent id {}", agent.id));
            }
            if !agent.position.is_finite() || !agent.heading.is_finite() {
                return fail(format!("agent {}: non-finite kinematics", agent.id));
            }
            if !(agent.speed >= 0.0 && agent.speed.is_finite()) {
                return fail(format!("agent {}: negative speed {}", agent.id, agent.speed));
            }
            if !self.centerlines.contains_key(&agent.lane) {
                return fail(format!(
                    "agent {} references unknown lane {:?}",
                    agent.id, agent.lane
                ));
            }
            if let Some(gt) = &agent.ground_truth {
                if gt.points.len() != self.horizon {
                    return fail(format!(
                        "agent {}: ground truth length {} does not match horizon {}",
                        agent.id,
                        gt.points.len(),
                        self.horizon
                    ));
                }
                if gt.points.iter().any(|p| !p.is_finite()) {
                    return fail(format!("agent {}: non-finite ground truth", agent.id));
                }
            }
        }
        Ok(())
    }
}

/// Scene difficulty tag used by suite statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difficulty {
    Simple,
    Interactive,
    Hard,
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Difficulty::Simple => write!(f, "simple"),
            Difficulty::Interactive => write!(f, "interactive"),
            Difficulty::Hard => write!(f, "hard"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub name: String,
    pub difficulty: Difficulty,
    pub scene: Scene,
}

/// Named scenes with difficulty tags; fully determined by its seed and spec.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSuite {
    pub seed: u64,
    pub entries: Vec<SuiteEntry>,
}

/// Generator spec for a suite: `straight:N`, `intersection:N`, or `mixed:N`
/// (70% straight-road, 30% intersection).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteSpec {
    Straight { scenes: usize },
    Intersection { scenes: usize },
    Mixed { scenes: usize },
}

impl FromStr for SuiteSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, count) = s
            .split_once(':')
            .ok_or_else(|| format!("suite spec {s:?} is not of the form kind:count"))?;
        let scenes: usize = count
            .parse()
            .map_err(|_| format!("suite spec {s:?} has a non-numeric scene count"))?;
        if scenes == 0 {
            return Err(format!("suite spec {s:?} needs at least one scene"));
        }
        match kind {
            "straight" => Ok(SuiteSpec::Straight { scenes }),
            "intersection" => Ok(SuiteSpec::Intersection { scenes }),
            "mixed" => Ok(SuiteSpec::Mixed { scenes }),
            other => Err(format!(
                "unknown suite kind {other:?} (expected straight, intersection, or mixed)"
            )),
        }
    }
}

fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Parallel straight lanes with one free-flowing agent per lane and
/// constant-speed scripted ground truth. Deterministic per seed.
pub fn gen_straight_road(n_agents: usize, seed: u64, horizon: usize, dt: f64) -> Scene {
    assert!(n_agents >= 1, "need at least one agent");
    assert!(horizon >= 1 && dt > 0.0, "need a positive horizon");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let end_x = 30.0 + 20.0 * horizon as f64 * dt;
    let mut centerlines = BTreeMap::new();
    let mut agents = Vec::with_capacity(n_agents);
    for i in 0..n_agents {
        let y = LANE_SPACING * i as f64;
        let speed: f64 = rng.random_range(8.0..15.0);
        let start_x: f64 = rng.random_range(0.0..10.0);
        let lateral: f64 = rng.random_range(-0.3..0.3);
        let heading: f64 = rng.random_range(-0.02..0.02);

        let lane = format!("lane{i}");
        centerlines.insert(
            lane.clone(),
            Polyline::new(vec![Point2::new(-20.0, y), Point2::new(end_x, y)]),
        );
        let position = Point2::new(start_x, y + lateral);
        let gt_points: Vec<Point2> = (1..=horizon)
            .map(|t| Point2::new(start_x + speed * dt * t as f64, y + lateral))
            .collect();
        agents.push(AgentInit {
            id: AgentId(i as u64),
            position,
            speed,
            heading,
            lane,
            ground_truth: Some(ModeTrajectory::new(gt_points, 1.0)),
        });
    }
    Scene { centerlines, agents, horizon, dt }
}

/// Exit turn signs per agent count, chosen so no exit ray coincides with any
/// approach ray (exits and approaches only share the conflict point itself).
fn intersection_turns(n_agents: usize) -> &'static [f64] {
    match n_agents {
        2 => &[1.0, -1.0],
        3 => &[1.0, -1.0, 1.0],
        4 => &[1.0, 1.0, -1.0, -1.0],
        _ => unreachable!("agent count validated by caller"),
    }
}

/// Crossing turn lanes through a common conflict point at the origin.
///
/// Agents 0 and 1 are timed to reach the conflict point simultaneously at
/// nominal speed, so unscripted constant-velocity rollouts collide; in the
/// scripted ground truth agent 1 alone yields by driving slower, crossing
/// [`ARRIVAL_GAP`] seconds later. Further agents are staggered behind by
/// construction. Deterministic per seed.
pub fn gen_intersection(
    n_agents: usize,
    seed: u64,
    horizon: usize,
    dt: f64,
) -> Result<Scene, SceneError> {
    if !(2..=4).contains(&n_agents) {
        return Err(SceneError::Semantic(format!(
            "intersection agent count {n_agents} out of range 2..=4"
        )));
    }
    assert!(horizon >= 1 && dt > 0.0, "need a positive horizon");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let h_secs = horizon as f64 * dt;
    let crossing_step = ((0.35 * horizon as f64).round() as usize).clamp(1, horizon);
    let t_cross = crossing_step as f64 * dt;
    let turns = intersection_turns(n_agents);

    let mut centerlines = BTreeMap::new();
    let mut agents = Vec::with_capacity(n_agents);
    for (i, &turn) in turns.iter().enumerate() {
        let phi = i as f64 * PI / n_agents as f64;
        let dir = Point2::unit(phi);
        let speed: f64 = rng.random_range(7.0..11.0);
        // Agents 0 and 1 race for the conflict point; in the script agent 1
        // crosses one gap later, so agents 2+ start far enough back to cross
        // i gaps after agent 0 at nominal speed.
        let nominal_arrival = if i >= 2 {
            t_cross + i as f64 * ARRIVAL_GAP
        } else {
            t_cross
        };
        let start_dist = speed * nominal_arrival;
        let start = dir * (-start_dist);

        let exit_dir = Point2::unit(phi + turn * FRAC_PI_2);
        let exit_len = speed * h_secs + 20.0;
        let lane = format!("approach{i}");
        let line = Polyline::new(vec![
            start - dir * APPROACH_MARGIN,
            Point2::ORIGIN,
            exit_dir * exit_len,
        ]);

        let gt_speed = if i == 1 {
            start_dist / (t_cross + ARRIVAL_GAP)
        } else {
            speed
        };
        let gt_points: Vec<Point2> = (1..=horizon)
            .map(|t| line.point_at(APPROACH_MARGIN + gt_speed * dt * t as f64))
            .collect();

        centerlines.insert(lane.clone(), line);
        agents.push(AgentInit {
            id: AgentId(i as u64),
            position: start,
            speed,
            heading: phi,
            lane,
            ground_truth: Some(ModeTrajectory::new(gt_points, 1.0)),
        });
    }
    Ok(Scene { centerlines, agents, horizon, dt })
}

/// Builds a seeded suite from a generator spec. Straight scenes are tagged
/// simple; intersections are interactive with 2 agents and hard with more.
pub fn build_suite(
    spec: SuiteSpec,
    seed: u64,
    horizon: usize,
    dt: f64,
) -> Result<ScenarioSuite, SceneError> {
    let (n_straight, n_intersection) = match spec {
        SuiteSpec::Straight { scenes } => (scenes, 0),
        SuiteSpec::Intersection { scenes } => (0, scenes),
        SuiteSpec::Mixed { scenes } => {
            let straight = scenes * 7 / 10;
            (straight, scenes - straight)
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(n_straight + n_intersection);
    for i in 0..n_straight {
        let n_agents = rng.random_range(1..=4);
        let scene = gen_straight_road(n_agents, mix_seed(seed, i as u64), horizon, dt);
        entries.push(SuiteEntry {
            name: format!("straight_{i:03}"),
            difficulty: Difficulty::Simple,
            scene,
        });
    }
    for i in 0..n_intersection {
        let n_agents = rng.random_range(2..=4);
        let scene = gen_intersection(n_agents, mix_seed(seed, 1_000_000 + i as u64), horizon, dt)?;
        entries.push(SuiteEntry {
            name: format!("intersection_{i:03}"),
            difficulty: if n_agents == 2 { Difficulty::Interactive } else { Difficulty::Hard },
            scene,
        });
    }
    Ok(ScenarioSuite { seed, entries })
}

// --- file schemas -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SceneFile {
    version: u32,
    dt: f64,
    horizon: usize,
    centerlines: Vec<CenterlineEntry>,
    agents: Vec<AgentEntry>,
}

#[derive(Serialize, Deserialize)]
struct CenterlineEntry {
    id: String,
    points: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct AgentEntry {
    id: u64,
    position: [f64; 2],
    speed: f64,
    heading: f64,
    lane: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ground_truth: Option<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct MtpFile {
    version: u32,
    dt: f64,
    agents: Vec<MtpAgentEntry>,
}

#[derive(Serialize, Deserialize)]
struct MtpAgentEntry {
    id: u64,
    origin: [f64; 2],
    modes: Vec<MtpModeEntry>,
}

#[derive(Serialize, Deserialize)]
struct MtpModeEntry {
    confidence: f64,
    points: Vec<[f64; 2]>,
}

fn points_to_pairs(points: &[Point2]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [p.x, p.y]).collect()
}

fn pairs_to_points(pairs: &[[f64; 2]]) -> Vec<Point2> {
    pairs.iter().map(|&[x, y]| Point2::new(x, y)).collect()
}

fn read_file(path: &Path) -> Result<String, SceneError> {
    std::fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> Result<T, SceneError> {
    serde_json::from_str(text).map_err(|e| SceneError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn check_version(version: u32) -> Result<(), SceneError> {
    if version != FILE_VERSION {
        return Err(SceneError::Semantic(format!(
            "unsupported file version {version} (expected {FILE_VERSION})"
        )));
    }
    Ok(())
}

/// Loads and semantically validates a scene file.
pub fn load_scene(path: &Path) -> Result<Scene, SceneError> {
    let file: SceneFile = parse_json(&read_file(path)?, path)?;
    check_version(file.version)?;

    let mut centerlines = BTreeMap::new();
    for entry in file.centerlines {
        if centerlines
            .insert(entry.id.clone(), Polyline::new(pairs_to_points(&entry.points)))
            .is_some()
        {
            return Err(SceneError::Semantic(format!(
                "duplicate centerline id {:?}",
                entry.id
            )));
        }
    }
    let agents = file
        .agents
        .into_iter()
        .map(|a| AgentInit {
            id: AgentId(a.id),
            position: Point2::new(a.position[0], a.position[1]),
            speed: a.speed,
            heading: a.heading,
            lane: a.lane,
            ground_truth: a
                .ground_truth
                .map(|points| ModeTrajectory::new(pairs_to_points(&points), 1.0)),
        })
        .collect();

    let scene = Scene {
        centerlines,
        agents,
        horizon: file.horizon,
        dt: file.dt,
    };
    scene.validate()?;
    Ok(scene)
}

/// Saves a scene as pretty-printed JSON. The scene is validated first, so a
/// saved file always loads back to an identical scene.
pub fn save_scene(scene: &Scene, path: &Path) -> Result<(), SceneError> {
    scene.validate()?;
    let file = SceneFile {
        version: FILE_VERSION,
        dt: scene.dt,
        horizon: scene.horizon,
        centerlines: scene
            .centerlines
            .iter()
            .map(|(id, line)| CenterlineEntry {
                id: id.clone(),
                points: points_to_pairs(&line.points),
            })
            .collect(),
        agents: scene
            .agents
            .iter()
            .map(|a| AgentEntry {
                id: a.id.0,
                position: [a.position.x, a.position.y],
                speed: a.speed,
                heading: a.heading,
                lane: a.lane.clone(),
                ground_truth: a.ground_truth.as_ref().map(|gt| points_to_pairs(&gt.points)),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("scene serialization is infallible");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| SceneError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads externally produced MTP results for auditing. Every result must
/// pass validation; the first failure aborts the load listing its
/// violations. An empty agent list is a valid empty map.
pub fn load_external_mtp(path: &Path) -> Result<BTreeMap<AgentId, MtpResult>, SceneError> {
    let file: MtpFile = parse_json(&read_file(path)?, path)?;
    check_version(file.version)?;

    let mut out = BTreeMap::new();
    for entry in file.agents {
        let id = AgentId(entry.id);
        let result = MtpResult::new(
            Point2::new(entry.origin[0], entry.origin[1]),
            entry
                .modes
                .into_iter()
                .map(|m| ModeTrajectory::new(pairs_to_points(&m.points), m.confidence))
                .collect(),
            file.dt,
        );
        let validation = validate_mtp(&result);
        if !validation.is_ok() {
            return Err(SceneError::Semantic(format!(
                "agent {id}: {validation}"
            )));
        }
        if out.insert(id, result).is_some() {
            return Err(SceneError::Semantic(format!("duplicate agent id {id}")));
        }
    }
    Ok(out)
}

/// Loads fan-policy parameters from a JSON file; absent fields keep their
/// defaults.
pub fn load_policy_params(path: &Path) -> Result<FanPolicyParams, SceneError> {
    let params: FanPolicyParams = parse_json(&read_file(path)?, path)?;
    params
        .validate()
        .map_err(|e| SceneError::Semantic(e.to_string()))?;
    Ok(params)
}

/// Loads every `*.json` scene in a directory (sorted by file name) as a
/// suite. File-based scenes carry no generator difficulty tag and default to
/// interactive.
pub fn load_suite_dir(dir: &Path, seed: u64) -> Result<ScenarioSuite, SceneError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|source| SceneError::Io { path: dir.display().to_string(), source })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(SceneError::Semantic(format!(
            "no .json scenes found in {}",
            dir.display()
        )));
    }

    let mut entries = Vec::with_capacity(paths.len());
    for path in paths {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        entries.push(SuiteEntry {
            name,
            difficulty: Difficulty::Interactive,
            scene: load_scene(&path)?,
        });
    }
    Ok(ScenarioSuite { seed, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_geometry() {
        let line = Polyline::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(10.0, 0.0),
            Point2::new(10.0, 10.0),
        ]);
        assert_eq!(line.length(), 20.0);
        assert_eq!(line.point_at(5.0), Point2::new(5.0, 0.0));
        assert_eq!(line.point_at(15.0), Point2::new(10.0, 5.0));
        assert_eq!(line.point_at(-1.0), Point2::new(0.0, 0.0));
        assert_eq!(line.point_at(99.0), Point2::new(10.0, 10.0));
        assert_eq!(line.closest_point(Point2::new(3.0, 4.0)), Point2::new(3.0, 0.0));
        assert_eq!(line.distance_to(Point2::new(3.0, 4.0)), 4.0);
        // beyond the end clamps to the last vertex
        assert_eq!(line.closest_point(Point2::new(10.0, 20.0)), Point2::new(10.0, 10.0));
    }

    #[test]
    fn straight_road_generation_is_deterministic() {
        let a = gen_straight_road(3, 9, 20, 0.5);
        let b = gen_straight_road(3, 9, 20, 0.5);
        assert_eq!(a, b);
        let c = gen_straight_road(3, 10, 20, 0.5);
        assert_ne!(a, c);
        assert!(a.validate().is_ok());
        assert_eq!(a.agents.len(), 3);

        let lone = gen_straight_road(1, 9, 20, 0.5);
        assert_eq!(lone.agents.len(), 1);
        assert_eq!(lone.centerlines.len(), 1);
    }

    #[test]
    fn straight_road_ground_truth_hugs_its_lane() {
        for seed in 0..20 {
            let scene = gen_straight_road(4, seed, 30, 0.5);
            for agent in &scene.agents {
                let lane = &scene.centerlines[&agent.lane];
                let gt = agent.ground_truth.as_ref().unwrap();
                for p in &gt.points {
                    assert!(
                        lane.distance_to(*p) <= 0.5,
                        "seed {seed}: ground truth strays {} m from lane",
                        lane.distance_to(*p)
                    );
                }
            }
        }
    }

    #[test]
    fn intersection_rejects_out_of_range_agent_counts() {
        assert!(gen_intersection(1, 0, 20, 0.5).is_err());
        assert!(gen_intersection(5, 0, 20, 0.5).is_err());
        for n in 2..=4 {
            let scene = gen_intersection(n, 0, 30, 0.5).unwrap();
            assert!(scene.validate().is_ok());
            assert_eq!(scene.agents.len(), n);
        }
    }

    #[test]
    fn intersection_is_deterministic() {
        let a = gen_intersection(3, 21, 30, 0.5).unwrap();
        let b = gen_intersection(3, 21, 30, 0.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn intersection_naive_rollouts_collide() {
        for seed in 0..20 {
            let scene = gen_intersection(2, seed, 30, 0.5).unwrap();
            let naive: Vec<Vec<Point2>> = scene
                .agents
                .iter()
                .map(|a| {
                    let dir = Point2::unit(a.heading);
                    (1..=scene.horizon)
                        .map(|t| a.position + dir * (a.speed * scene.dt * t as f64))
                        .collect()
                })
                .collect();
            let collides = (0..scene.horizon)
                .any(|t| naive[0][t].dist(naive[1][t]) < 3.0);
            assert!(collides, "seed {seed}: constant-velocity rollouts should collide");
        }
    }

    #[test]
    fn intersection_ground_truth_is_collision_free() {
        for seed in 0..20 {
            for n in 2..=4 {
                let scene = gen_intersection(n, seed, 30, 0.5).unwrap();
                let gts: Vec<&ModeTrajectory> = scene
                    .agents
                    .iter()
                    .map(|a| a.ground_truth.as_ref().unwrap())
                    .collect();
                for i in 0..gts.len() {
                    for j in (i + 1)..gts.len() {
                        for t in 0..scene.horizon {
                            let d = gts[i].points[t].dist(gts[j].points[t]);
                            assert!(
                                d >= 3.0,
                                "seed {seed} n {n}: agents {i}/{j} come within {d} m at step {t}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn exactly_one_intersection_agent_yields() {
        let scene = gen_intersection(3, 4, 30, 0.5).unwrap();
        let mut yielding = 0;
        for agent in &scene.agents {
            let gt = agent.ground_truth.as_ref().unwrap();
            // a yielding agent's ground truth advances slower than nominal
            let first_step = gt.points[0].dist(agent.position);
            if first_step < agent.speed * scene.dt * 0.99 {
                yielding += 1;
            }
        }
        assert_eq!(yielding, 1);
    }

    #[test]
    fn suite_spec_parsing() {
        assert_eq!("straight:5".parse(), Ok(SuiteSpec::Straight { scenes: 5 }));
        assert_eq!("mixed:50".parse(), Ok(SuiteSpec::Mixed { scenes: 50 }));
        assert!("mixed".parse::<SuiteSpec>().is_err());
        assert!("mixed:zero".parse::<SuiteSpec>().is_err());
        assert!("diagonal:5".parse::<SuiteSpec>().is_err());
        assert!("mixed:0".parse::<SuiteSpec>().is_err());
    }

    #[test]
    fn mixed_suite_split_and_determinism() {
        let suite = build_suite(SuiteSpec::Mixed { scenes: 50 }, 77, 20, 0.5).unwrap();
        assert_eq!(suite.entries.len(), 50);
        let straight = suite
            .entries
            .iter()
            .filter(|e| e.difficulty == Difficulty::Simple)
            .count();
        assert_eq!(straight, 35);

        let names: BTreeSet<&str> = suite.entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names.len(), suite.entries.len(), "names must be unique");

        let again = build_suite(SuiteSpec::Mixed { scenes: 50 }, 77, 20, 0.5).unwrap();
        assert_eq!(suite, again);
    }

    #[test]
    fn scene_round_trip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        for seed in 0..5 {
            let scene = gen_intersection(3, seed, 25, 0.5).unwrap();
            save_scene(&scene, &path).unwrap();
            let loaded = load_scene(&path).unwrap();
            assert_eq!(scene, loaded);
        }
        let straight = gen_straight_road(2, 3, 25, 0.5);
        save_scene(&straight, &path).unwrap();
        assert_eq!(load_scene(&path).unwrap(), straight);
    }

    #[test]
    fn missing_dt_is_a_parse_error_naming_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        std::fs::write(
            &path,
            r#"{"version": 1, "horizon": 2, "centerlines": [], "agents": []}"#,
        )
        .unwrap();
        let err = load_scene(&path).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, SceneError::Parse { .. }), "{msg}");
        assert!(msg.contains("missing field") && msg.contains("dt"), "{msg}");
    }

    #[test]
    fn negative_speed_is_a_semantic_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        std::fs::write(
            &path,
            r#"{
              "version": 1, "dt": 0.5, "horizon": 1,
              "centerlines": [{"id": "l", "points": [[0.0, 0.0], [1e2, 0.0]]}],
              "agents": [{"id": 0, "position": [0.0, 0.0], "speed": -1.0, "heading": 0.0, "lane": "l"}]
            }"#,
        )
        .unwrap();
        let err = load_scene(&path).unwrap_err();
        assert!(matches!(err, SceneError::Semantic(_)));
        assert!(err.to_string().contains("negative speed"));
    }

    #[test]
    fn unresolved_lane_is_a_semantic_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        std::fs::write(
            &path,
            r#"{
              "version": 1, "dt": 0.5, "horizon": 1,
              "centerlines": [{"id": "l", "points": [[0.0, 0.0], [100.0, 0.0]]}],
              "agents": [{"id": 0, "position": [0.0, 0.0], "speed": 1.0, "heading": 0.0, "lane": "m"}]
            }"#,
        )
        .unwrap();
        let err = load_scene(&path).unwrap_err();
        assert!(err.to_string().contains("unknown lane"));
    }

    #[test]
    fn external_mtp_loading() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mtp.json");
        std::fs::write(
            &path,
            r#"{
              "version": 1, "dt": 0.5,
              "agents": [
                {"id": 0, "origin": [0.0, 0.0], "modes": [
                  {"confidence": 0.5, "points": [[1.0, 0.0]]},
                  {"confidence": 0.5, "points": [[0.0, 1.0]]}
                ]},
                {"id": 3, "origin": [5.0, 5.0], "modes": [
                  {"confidence": 1.0, "points": [[6.0, 5.0]]}
                ]}
              ]
            }"#,
        )
        .unwrap();
        let results = load_external_mtp(&path).unwrap();
        assert_eq!(results.len(), 2);
        assert_eq!(results[&AgentId(0)].mode_count(), 2);
        assert_eq!(results[&AgentId(3)].horizon(), 1);

        // empty agent list is a valid empty map
        std::fs::write(&path, r#"{"version": 1, "dt": 0.5, "agents": []}"#).unwrap();
        assert!(load_external_mtp(&path).unwrap().is_empty());

        // confidence sum violation aborts the load
        std::fs::write(
            &path,
            r#"{
              "version": 1, "dt": 0.5,
              "agents": [{"id": 0, "origin": [0.0, 0.0], "modes": [
                {"confidence": 0.7, "points": [[1.0, 0.0]]},
                {"confidence": 0.2, "points": [[0.0, 1.0]]}
              ]}]
            }"#,
        )
        .unwrap();
        let err = load_external_mtp(&path).unwrap_err();
        assert!(err.to_string().contains("confidence sum"), "{err}");
    }

    #[test]
    fn ragged_external_mtp_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mtp.json");
        std::fs::write(
            &path,
            r#"{
              "version": 1, "dt": 0.5,
              "agents": [{"id": 0, "origin": [0.0, 0.0], "modes": [
                {"confidence": 0.5, "points": [[1.0, 0.0], [2.0, 0.0]]},
                {"confidence": 0.5, "points": [[0.0, 1.0]]}
              ]}]
            }"#,
        )
        .unwrap();
        let err = load_external_mtp(&path).unwrap_err();
        assert!(err.to_string().contains("ragged horizon"), "{err}");
    }
}
