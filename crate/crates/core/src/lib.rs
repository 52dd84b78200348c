//! Trajectory-entropy metrics and an entropy-gated level-k game engine for
//! multimodal trajectory prediction.
//!
//! The crate provides, bottom up:
//!
//! * [`mtp`] — prediction types ([`MtpResult`] and friends) and their
//!   validation;
//! * [`entropy`] — the trajectory-entropy metric (pairwise inter-mode SNRs,
//!   speed normalization, ablation variants) plus a brute-force oracle;
//! * [`game`] — the level-k game loop with the entropy gate that freezes
//!   stable agents;
//! * [`policies`] — analytical fan/contraction stand-in policies;
//! * [`scene`] — synthetic scene generators, suites, and file formats;
//! * [`metrics`] — minADE / minFDE / miss / collision against scripted
//!   ground truth.

pub mod entropy;
pub mod game;
pub mod metrics;
pub mod mtp;
pub mod policies;
pub mod scene;

pub use entropy::{
    pairwise_snr, point_set_entropy, trajectory_entropy, trajectory_entropy_oracle, EntropyConfig,
    EntropyError, NormalizationVariant, PairConvention, TrajectoryEntropy,
};
pub use game::{
    gate_step, run_level_k_game, run_ungated, AgentGameState, GameError, GameTrace, GateConfig,
    GateDecision, LevelRecord, LevelSnapshot, Policy, PolicyError,
};
pub use metrics::{collision, evaluate, min_ade, min_fde, miss, EvalMetrics, MetricError};
pub use mtp::{
    displacement, validate_mtp, AgentId, ModeTrajectory, MtpResult, Point2, Validation, Violation,
};
pub use policies::{contraction_refine, fan_level0, FanPolicy, FanPolicyParams};
pub use scene::{
    build_suite, gen_intersection, gen_straight_road, load_external_mtp, load_policy_params,
    load_scene, load_suite_dir, save_scene, AgentInit, Difficulty, Polyline, ScenarioSuite, Scene,
    SceneError, SuiteEntry, SuiteSpec,
};
