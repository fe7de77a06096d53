//! Reachability with LP-based interval refinement.
//!
//! The state is lifted through a full-rank `H` (`y = Hx`) and the reachable
//! set is bounded by the polytope `{x : y_lo ≤ Hx ≤ y_hi}`. Each face of the
//! embedding is refined by LPs over that subspace before the vector field is
//! bounded with interval arithmetic. The whole pipeline is generic over
//! [`LpScalar`], so running it on [`Dual`](crate::dual::Dual) numbers gives
//! forward-mode gradients of the safety value with respect to the
//! feedforward input.

mod embedding;
mod lp;
mod refine;
mod safety;
mod scenario;
pub mod systems;

pub use embedding::{
    embedding_dynamics, embedding_dynamics_traced, integrate_embedding, integrate_embedding_traced, step_count,
    EmbeddingDerivative, EmbeddingState, Feedback, FeedforwardTable, LiftedSystem, RefineRecord, Trajectory,
};
pub use lp::LpScalar;
pub use refine::{refine, Refinement};
pub use safety::{
    nudge, obstacle_bound, safety_check, safety_gradient, NudgeConfig, NudgeResult, ObstacleSpec, SafetyReport,
};
pub use scenario::{bicycle_fallback_nominal, BoxSpec, FeedbackSpec, Scenario, BICYCLE_X0};

use thiserror::Error;

use crate::interval::IntervalError;
use crate::lp_core::LpError;

#[derive(Debug, Error)]
pub enum ReachError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("interval evaluation failed at t = {t}: {source}")]
    Interval { t: f64, source: IntervalError },
    #[error("invalid lifting: {0}")]
    InvalidLifting(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
