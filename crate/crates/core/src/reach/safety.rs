//! Obstacle bounds over the tube, the safety value, and gradient nudging of
//! the feedforward input.

use serde::{Deserialize, Serialize};

use super::embedding::{integrate_embedding, EmbeddingState, FeedforwardTable, LiftedSystem, Trajectory};
use super::lp::LpScalar;
use super::ReachError;
use crate::dual::Dual;
use crate::interval::{mat_vec, Interval, VectorField};
use crate::scalar::Scalar;

/// Ball obstacle `o(x) = r² − Σ_k (x[coords[k]] − center[k])² ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    /// State coordinates the obstacle lives in; defaults to the first
    /// `center.len()` coordinates.
    #[serde(default)]
    pub coords: Vec<usize>,
}

impl ObstacleSpec {
    pub fn circle(cx: f64, cy: f64, radius: f64) -> Self {
        Self { center: vec![cx, cy], radius, coords: vec![0, 1] }
    }

    pub fn validate(&self) -> Result<(), ReachError> {
        if self.radius.is_nan() || self.radius <= 0.0 {
            return Err(ReachError::InvalidConfig(format!("obstacle radius {} must be positive", self.radius)));
        }
        if !self.coords.is_empty() && self.coords.len() != self.center.len() {
            return Err(ReachError::InvalidConfig("obstacle coords and center differ in length".into()));
        }
        Ok(())
    }

    fn coord(&self, k: usize) -> usize {
        self.coords.get(k).copied().unwrap_or(k)
    }

    /// Interval upper bound of `o` over the state box.
    pub fn upper_bound<S: Scalar>(&self, x: &[Interval<S>]) -> S {
        let mut o = Interval::<S>::point(S::cst(self.radius * self.radius));
        for (k, &c) in self.center.iter().enumerate() {
            o = o - (x[self.coord(k)].clone() - c).sqr();
        }
        o.hi
    }
}

/// Upper bound of `o` over `H⁺ [y_lo, y_hi]`.
pub fn obstacle_bound<S: Scalar, F: VectorField>(
    sys: &LiftedSystem<F>,
    obstacle: &ObstacleSpec,
    s: &EmbeddingState<S>,
) -> Result<S, ReachError> {
    let x = mat_vec(sys.h_plus(), &s.intervals()).map_err(|e| ReachError::InvalidConfig(e.to_string()))?;
    Ok(obstacle.upper_bound(&x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NudgeConfig {
    pub eta: f64,
    pub max_outer_iters: usize,
    pub dt: f64,
    pub horizon: f64,
}

impl Default for NudgeConfig {
    fn default() -> Self {
        Self { eta: 0.05, max_outer_iters: 100, dt: 5e-3, horizon: 1.0 }
    }
}

impl NudgeConfig {
    pub fn validate(&self) -> Result<(), ReachError> {
        if !(self.eta > 0.0 && self.dt > 0.0 && self.horizon > 0.0) {
            return Err(ReachError::InvalidConfig(format!(
                "eta = {}, dt = {}, horizon = {} must be positive",
                self.eta, self.dt, self.horizon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SafetyReport<S> {
    /// `Σ_{k≥1} max(ŝ(t_k), 0)·dt`.
    pub value: S,
    /// `ŝ(t_k)` for every stored state, including `t = 0`.
    pub bounds: Vec<f64>,
    pub trajectory: Trajectory<S>,
}

impl<S: Scalar> SafetyReport<S> {
    /// Zero value over a full-length trajectory.
    pub fn is_safe(&self) -> bool {
        self.value.value() <= 0.0 && self.trajectory.order_violation.is_none()
    }
}

/// Sum of the positive part of the obstacle bound over the refined tube
/// (right Riemann sum in time).
pub fn safety_check<S: LpScalar, F: VectorField>(
    sys: &LiftedSystem<F>,
    s0: &EmbeddingState<S>,
    u_ff: &FeedforwardTable<S>,
    obstacle: &ObstacleSpec,
    cfg: &NudgeConfig,
) -> Result<SafetyReport<S>, ReachError> {
    obstacle.validate()?;
    let trajectory = integrate_embedding(sys, s0, u_ff, cfg.dt, cfg.horizon)?;
    let mut value = S::cst(0.0);
    let mut bounds = Vec::with_capacity(trajectory.states.len());
    for (k, s) in trajectory.states.iter().enumerate() {
        let b = obstacle_bound(sys, obstacle, s)?;
        bounds.push(b.value());
        if k > 0 {
            value = value + b.relu() * cfg.dt;
        }
    }
    Ok(SafetyReport { value, bounds, trajectory })
}

/// Safety value and its gradient with respect to every entry of `u_ff`
/// (in [`FeedforwardTable::flat`] order).
pub fn safety_gradient<F: VectorField>(
    sys: &LiftedSystem<F>,
    s0: &EmbeddingState<f64>,
    u_ff: &FeedforwardTable<f64>,
    obstacle: &ObstacleSpec,
    cfg: &NudgeConfig,
) -> Result<(SafetyReport<Dual>, Vec<f64>), ReachError> {
    let k = u_ff.flat().len();
    let report = safety_check(sys, &s0.lift::<Dual>(), &u_ff.seeded(), obstacle, cfg)?;
    let grad = (0..k).map(|i| report.value.d(i)).collect();
    Ok((report, grad))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NudgeResult {
    pub u_ff: FeedforwardTable<f64>,
    /// Number of gradient steps attempted, rejected ones included.
    pub iterations: usize,
    /// Safety value after each accepted step, starting with the input's.
    pub history: Vec<f64>,
    pub converged: bool,
    /// Step size at exit.
    pub eta: f64,
    /// Report for the returned input.
    pub report: SafetyReport<f64>,
}

/// Gradient descent `u ← u − η ∇ safety` until the safety value is zero or
/// the iteration budget runs out. A step that increases the value is
/// rejected and halves `η`.
pub fn nudge<F: VectorField>(
    sys: &LiftedSystem<F>,
    s0: &EmbeddingState<f64>,
    u_ff: &FeedforwardTable<f64>,
    obstacle: &ObstacleSpec,
    cfg: &NudgeConfig,
) -> Result<NudgeResult, ReachError> {
    cfg.validate()?;
    let mut u = u_ff.clone();
    let (mut report, mut grad) = safety_gradient(sys, s0, &u, obstacle, cfg)?;
    let mut history = vec![report.value.re];
    let mut eta = cfg.eta;
    let mut iterations = 0;
    while !report.is_safe() && iterations < cfg.max_outer_iters {
        iterations += 1;
        let flat: Vec<f64> = u.flat().iter().zip(&grad).map(|(u, g)| u - eta * g).collect();
        let cand = u.with_flat(&flat);
        let (r, g) = safety_gradient(sys, s0, &cand, obstacle, cfg)?;
        let worse = r.value.re > report.value.re || r.trajectory.order_violation.is_some();
        if worse {
            eta *= 0.5;
            continue;
        }
        u = cand;
        report = r;
        grad = g;
        history.push(report.value.re);
    }
    let converged = report.is_safe();
    let report = safety_check(sys, s0, &u, obstacle, cfg)?;
    Ok(NudgeResult { u_ff: u, iterations, history, converged, eta, report })
}
