//! Policy-agnostic level-k game loop with the trajectory-entropy gate.
//!
//! Level 0 predicts once per agent. Before each later level's decoder a gate
//! evaluates the trajectory entropy of every still-active agent's current
//! result against that level's threshold; agents below the threshold are
//! frozen and their results propagate unchanged to all subsequent levels
//! (they remain visible as inputs to other agents' refinement). Active agents
//! are then refined, each seeing only the previous level's snapshot.
//!
//! Gate thresholds typically decrease with level, since entropy contracts as
//! reasoning deepens; an increasing schedule is legal but logged as a
//! warning. A threshold of negative infinity never fires, which is how
//! [`run_ungated`] reproduces the plain (gate-free) hierarchical game.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::entropy::{trajectory_entropy, EntropyConfig, EntropyError};
use crate::mtp::{validate_mtp, AgentId, MtpResult, Validation};
use crate::scene::Scene;

/// One game level's results, keyed by agent: what `refine` sees.
pub type LevelSnapshot<'a> = BTreeMap<AgentId, &'a MtpResult>;

/// Behavioral contract for prediction policies plugged into the game.
///
/// `refine` at level `k` receives the agent's own level-`(k-1)` result plus
/// every other agent's level-`(k-1)` result (frozen or not); the engine never
/// exposes any level-`k` result of another agent.
pub trait Policy {
    fn level0(&self, scene: &Scene, agent: AgentId) -> Result<MtpResult, PolicyError>;

    fn refine(
        &self,
        scene: &Scene,
        agent: AgentId,
        own_prev: &MtpResult,
        others: &LevelSnapshot<'_>,
        level: usize,
    ) -> Result<MtpResult, PolicyError>;
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("agent {agent} references centerline {lane:?} which is not in the scene")]
    MissingCenterline { agent: AgentId, lane: String },
    #[error("agent {0} is not part of the scene")]
    UnknownAgent(AgentId),
    #[error("refine at level {level} for agent {agent} is missing neighbor {missing}")]
    MissingNeighbor {
        agent: AgentId,
        missing: AgentId,
        level: usize,
    },
    #[error("invalid policy parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("scene has no agents")]
    EmptyScene,
    #[error("gate threshold at index {0} is NaN")]
    NanThreshold(usize),
    #[error("policy failed for agent {agent} at level {level}: {source}")]
    Policy {
        agent: AgentId,
        level: usize,
        #[source]
        source: PolicyError,
    },
    #[error("policy output for agent {agent} at level {level} is invalid: {violations}")]
    InvalidPolicyOutput {
        agent: AgentId,
        level: usize,
        violations: Validation,
    },
    #[error("entropy evaluation failed for agent {agent}: {source}")]
    Entropy {
        agent: AgentId,
        #[source]
        source: EntropyError,
    },
}

/// Per-level gate thresholds for a K-level game.
///
/// `thresholds[k-1]` is applied to level-`(k-1)` results before the level-`k`
/// decoder, so a K-level game carries `K - 1` thresholds (none for `K = 1`).
/// Thresholds may be any non-NaN value; `+inf` freezes everything and `-inf`
/// freezes nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct GateConfig {
    thresholds: Vec<f64>,
}

impl GateConfig {
    pub fn new(thresholds: Vec<f64>) -> Result<Self, GameError> {
        for (i, t) in thresholds.iter().enumerate() {
            if t.is_nan() {
                return Err(GameError::NanThreshold(i));
            }
        }
        for w in thresholds.windows(2) {
            if w[1] > w[0] {
                log::warn!(
                    "gate thresholds increase with level ({} -> {}); \
                     a decreasing schedule matches the entropy contraction across levels",
                    w[0],
                    w[1]
                );
                break;
            }
        }
        Ok(GateConfig { thresholds })
    }

    /// Gate that never fires: the plain hierarchical game with `levels` levels.
    pub fn disabled(levels: usize) -> Self {
        assert!(levels >= 1, "a game needs at least one level");
        GateConfig {
            thresholds: vec![f64::NEG_INFINITY; levels - 1],
        }
    }

    /// Total level count `K` (thresholds plus the ungated level 0).
    pub fn levels(&self) -> usize {
        self.thresholds.len() + 1
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }
}

/// Per-agent bookkeeping across game levels.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentGameState {
    pub agent: AgentId,
    pub active: bool,
    /// Level whose result became final when the gate froze this agent;
    /// present iff `!active`.
    pub frozen_at_level: Option<usize>,
    /// Latest result; never changes again once the agent is frozen.
    pub current: MtpResult,
}

/// What one gate application computed and decided.
#[derive(Debug, Clone, PartialEq)]
pub struct GateDecision {
    /// The level whose decoder this gate preceded (1..K-1).
    pub level: usize,
    pub threshold: f64,
    /// Entropies computed for the agents that were still active at the gate.
    pub entropies: BTreeMap<AgentId, f64>,
    pub newly_frozen: Vec<AgentId>,
}

/// One agent's row in a level of the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    /// The agent's result as of this level (bit-identical across levels once
    /// frozen).
    pub result: MtpResult,
    /// Entropy of `result`; for frozen agents the last computed value is
    /// carried forward.
    pub entropy: Option<f64>,
    /// Whether the result was computed at this level (always true at level 0).
    pub active: bool,
}

/// Full record of one game: per-level per-agent results and entropies, the
/// gate log, and the policy invocation count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GameTrace {
    pub levels: Vec<BTreeMap<AgentId, LevelRecord>>,
    /// Number of `level0` plus `refine` invocations.
    pub policy_eval_count: u64,
    pub gates: Vec<GateDecision>,
}

impl GameTrace {
    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn final_level(&self) -> &BTreeMap<AgentId, LevelRecord> {
        self.levels.last().expect("a trace always has level 0")
    }

    pub fn final_result(&self, agent: AgentId) -> Option<&MtpResult> {
        self.final_level().get(&agent).map(|r| &r.result)
    }
}

/// Applies the gate to all active agents: computes each one's trajectory
/// entropy and freezes those strictly below `threshold` (ties stay active).
/// Frozen agents are untouched. `current_level` is recorded as the level
/// whose result became final for newly frozen agents.
pub fn gate_step(
    states: &mut BTreeMap<AgentId, AgentGameState>,
    threshold: f64,
    config: &EntropyConfig,
    current_level: usize,
) -> Result<GateOutcome, GameError> {
    if threshold.is_nan() {
        return Err(GameError::NanThreshold(current_level));
    }
    let mut entropies = BTreeMap::new();
    let mut newly_frozen = Vec::new();
    for state in states.values_mut() {
        if !state.active {
            continue;
        }
        let entropy = trajectory_entropy(&state.current, config)
            .map_err(|source| GameError::Entropy { agent: state.agent, source })?;
        entropies.insert(state.agent, entropy.value);
        if entropy.value < threshold {
            state.active = false;
            state.frozen_at_level = Some(current_level);
            newly_frozen.push(state.agent);
        }
    }
    Ok(GateOutcome { entropies, newly_frozen })
}

/// Result of one [`gate_step`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GateOutcome {
    pub entropies: BTreeMap<AgentId, f64>,
    pub newly_frozen: Vec<AgentId>,
}

/// Runs the gated K-level game over the scene.
///
/// Level 0 invokes `level0` once per agent; for each `k in 1..K` the gate is
/// applied with `thresholds[k-1]`, then every still-active agent is refined
/// against the complete level-`(k-1)` snapshot. Every policy output is
/// validated before entering the game.
pub fn run_level_k_game(
    scene: &Scene,
    policy: &dyn Policy,
    gate: &GateConfig,
    config: &EntropyConfig,
) -> Result<GameTrace, GameError> {
    let agent_ids = scene.agent_ids();
    if agent_ids.is_empty() {
        return Err(GameError::EmptyScene);
    }
    let levels = gate.levels();

    let mut states: BTreeMap<AgentId, AgentGameState> = BTreeMap::new();
    let mut trace = GameTrace::default();
    let mut last_entropy: BTreeMap<AgentId, f64> = BTreeMap::new();

    for &agent in &agent_ids {
        let result = checked_policy_output(policy.level0(scene, agent), agent, 0)?;
        trace.policy_eval_count += 1;
        states.insert(
            agent,
            AgentGameState {
                agent,
                active: true,
                frozen_at_level: None,
                current: result,
            },
        );
    }
    trace.levels.push(level_records(&states, &last_entropy));

    for level in 1..levels {
        let threshold = gate.thresholds()[level - 1];
        let outcome = gate_step(&mut states, threshold, config, level - 1)?;
        for (&agent, &entropy) in &outcome.entropies {
            last_entropy.insert(agent, entropy);
            trace.levels[level - 1]
                .get_mut(&agent)
                .expect("gated agent has a trace row")
                .entropy = Some(entropy);
        }
        trace.gates.push(GateDecision {
            level,
            threshold,
            entropies: outcome.entropies,
            newly_frozen: outcome.newly_frozen,
        });

        // Immutable level-(k-1) snapshot: refinement within a level must not
        // observe any level-k result.
        let snapshot: BTreeMap<AgentId, MtpResult> =
            states.iter().map(|(&id, s)| (id, s.current.clone())).collect();
        for &agent in &agent_ids {
            if !states[&agent].active {
                continue;
            }
            let others: LevelSnapshot<'_> = snapshot
                .iter()
                .filter(|(&id, _)| id != agent)
                .map(|(&id, r)| (id, r))
                .collect();
            let result = checked_policy_output(
                policy.refine(scene, agent, &snapshot[&agent], &others, level),
                agent,
                level,
            )?;
            trace.policy_eval_count += 1;
            states.get_mut(&agent).expect("agent exists").current = result;
        }
        trace.levels.push(level_records(&states, &last_entropy));
    }

    // The final level's freshly refined results never meet another gate;
    // compute their entropies so every trace row is populated.
    for state in states.values() {
        if state.active {
            let entropy = trajectory_entropy(&state.current, config)
                .map_err(|source| GameError::Entropy { agent: state.agent, source })?;
            trace.levels[levels - 1]
                .get_mut(&state.agent)
                .expect("active agent has a trace row")
                .entropy = Some(entropy.value);
        }
    }

    Ok(trace)
}

/// The plain hierarchical game: identical to [`run_level_k_game`] with a gate
/// that never fires. Entropies are still recorded at every level for
/// per-level profiling.
pub fn run_ungated(
    scene: &Scene,
    policy: &dyn Policy,
    levels: usize,
    config: &EntropyConfig,
) -> Result<GameTrace, GameError> {
    run_level_k_game(scene, policy, &GateConfig::disabled(levels), config)
}

fn checked_policy_output(
    output: Result<MtpResult, PolicyError>,
    agent: AgentId,
    level: usize,
) -> Result<MtpResult, GameError> {
    let result = output.map_err(|source| GameError::Policy { agent, level, source })?;
    let validation = validate_mtp(&result);
    if !validation.is_ok() {
        return Err(GameError::InvalidPolicyOutput {
            agent,
            level,
            violations: validation,
        });
    }
    Ok(result)
}

fn level_records(
    states: &BTreeMap<AgentId, AgentGameState>,
    last_entropy: &BTreeMap<AgentId, f64>,
) -> BTreeMap<AgentId, LevelRecord> {
    states
        .iter()
        .map(|(&id, s)| {
            (
                id,
                LevelRecord {
                    result: s.current.clone(),
                    entropy: if s.active { None } else { last_entropy.get(&id).copied() },
                    active: s.active,
                },
            )
        })
        .collect()
}
