//! Fixed-shape two-phase tableau simplex with forward-mode tangents, and an
//! LP-refined interval reachability pipeline built on it.
//!
//! - [`lp_core`]: general and canonical LP forms.
//! - [`simplex`]: the solver ([`simplex::linprog`], [`simplex::solve_batch`]).
//! - [`autodiff`]: tangent propagation through a solve.
//! - [`interval`]: interval arithmetic and natural inclusion functions.
//! - [`reach`]: interval refinement, refined embedding dynamics, safety
//!   check and feedforward nudging, with demo systems.
//! - [`bench`]: benchmark workloads and reporting.

pub mod autodiff;
pub mod bench;
pub mod dual;
pub mod interval;
pub mod lp_core;
pub mod par;
pub mod reach;
pub mod scalar;
pub mod simplex;

pub use autodiff::{solve_with_tangents, DifferentiableOutcome, LpSeeds, TangentBundle};
pub use dual::Dual;
pub use interval::{Interval, IntervalError, IntervalVector, VectorField};
pub use lp_core::{canonicalize, recover, CanonicalLP, GeneralLP, LpError};
pub use scalar::{Arith, Scalar};
pub use simplex::{linprog, linprog_with, solve_batch, BasisSet, SolveOutcome, SolveStatus, SolverConfig, Tableau};
