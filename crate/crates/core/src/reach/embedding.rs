//! Refined embedding dynamics on lifted face vectors and their Euler
//! integration.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::lp::LpScalar;
use super::refine::{bound_matrix, BoundProblem, Refinement};
use super::ReachError;
use crate::dual::Dual;
use crate::interval::{inclusion_boxed_input, mat_vec, Interval, IntervalError, VectorField};
use crate::scalar::Scalar;
use crate::simplex::SolverConfig;

/// Piecewise-constant input: `values[k]` applies on `[k·period, (k+1)·period)`
/// and the last entry holds past the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedforwardTable<S> {
    pub period: f64,
    pub values: Vec<Vec<S>>,
}

impl<S> FeedforwardTable<S> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_at(&self, t: f64) -> usize {
        // the small offset keeps t = k·dt on segment boundaries from
        // rounding down
        let k = (t / self.period + 1e-9).floor().max(0.0) as usize;
        k.min(self.values.len().saturating_sub(1))
    }

    pub fn at(&self, t: f64) -> &[S] {
        if self.values.is_empty() {
            return &[];
        }
        &self.values[self.index_at(t)]
    }

    pub fn input_dim(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

impl FeedforwardTable<f64> {
    pub fn constant(period: f64, segments: usize, u: &[f64]) -> Self {
        Self { period, values: vec![u.to_vec(); segments] }
    }

    /// Entries in row-major order; this is the order of gradient components.
    pub fn flat(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    pub fn with_flat(&self, flat: &[f64]) -> Self {
        let p = self.input_dim();
        Self { period: self.period, values: flat.chunks(p.max(1)).map(<[f64]>::to_vec).collect() }
    }

    /// Dual table with one tangent direction per entry, in [`Self::flat`] order.
    pub fn seeded(&self) -> FeedforwardTable<Dual> {
        let k = self.values.len() * self.input_dim();
        let mut idx = 0;
        let values = self
            .values
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&v| {
                        idx += 1;
                        Dual::variable(v, idx - 1, k)
                    })
                    .collect()
            })
            .collect();
        FeedforwardTable { period: self.period, values }
    }

    /// Same table over another scalar type, with zero tangents.
    pub fn lift<S: Scalar>(&self) -> FeedforwardTable<S> {
        FeedforwardTable {
            period: self.period,
            values: self.values.iter().map(|r| r.iter().map(|&v| S::cst(v)).collect()).collect(),
        }
    }
}

/// Linear feedback `u = u_ff + K (x − x_nom(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Feedback {
    pub k: Array2<f64>,
    pub x_nom: FeedforwardTable<f64>,
}

/// Lower and upper face vectors in lifted coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingState<S> {
    pub y_lo: Vec<S>,
    pub y_hi: Vec<S>,
}

impl<S: Scalar> EmbeddingState<S> {
    pub fn new(y_lo: Vec<S>, y_hi: Vec<S>) -> Self {
        Self { y_lo, y_hi }
    }

    /// Lifted box `H [x_lo, x_hi]`.
    pub fn from_box(h: ArrayView2<f64>, x: &[Interval<S>]) -> Result<Self, ReachError> {
        let y = mat_vec(h, x).map_err(|e| ReachError::InvalidConfig(e.to_string()))?;
        Ok(Self::from_intervals(&y))
    }

    pub fn from_intervals(y: &[Interval<S>]) -> Self {
        Self { y_lo: y.iter().map(|v| v.lo.clone()).collect(), y_hi: y.iter().map(|v| v.hi.clone()).collect() }
    }

    pub fn intervals(&self) -> Vec<Interval<S>> {
        self.y_lo.iter().zip(&self.y_hi).map(|(lo, hi)| Interval { lo: lo.clone(), hi: hi.clone() }).collect()
    }

    pub fn dim(&self) -> usize {
        self.y_lo.len()
    }

    /// First component with `y_lo > y_hi`.
    pub fn order_violation(&self) -> Option<usize> {
        (0..self.dim()).find(|&i| self.y_lo[i].value() > self.y_hi[i].value())
    }

    pub fn values(&self) -> EmbeddingState<f64> {
        EmbeddingState {
            y_lo: self.y_lo.iter().map(Scalar::value).collect(),
            y_hi: self.y_hi.iter().map(Scalar::value).collect(),
        }
    }

    /// `Σ (y_hi − y_lo)` over the first `n` components.
    pub fn width_sum(&self, n: usize) -> f64 {
        (0..n.min(self.dim())).map(|i| self.y_hi[i].value() - self.y_lo[i].value()).sum()
    }
}

impl EmbeddingState<f64> {
    pub fn lift<S: Scalar>(&self) -> EmbeddingState<S> {
        EmbeddingState {
            y_lo: self.y_lo.iter().map(|&v| S::cst(v)).collect(),
            y_hi: self.y_hi.iter().map(|&v| S::cst(v)).collect(),
        }
    }
}

/// A vector field lifted through `H`, with the data the embedding needs.
#[derive(Debug, Clone)]
pub struct LiftedSystem<F> {
    pub field: F,
    h: Array2<f64>,
    h_plus: Array2<f64>,
    pub feedback: Option<Feedback>,
    pub w_box: Vec<Interval<f64>>,
    /// When false the refinement LPs are skipped (plain interval embedding).
    pub refine: bool,
    pub solver: SolverConfig,
    a_ub: Array2<f64>,
    pullback: Vec<usize>,
}

impl<F: VectorField> LiftedSystem<F> {
    /// Checks `H⁺H = I` within `1e-10`. The disturbance box defaults to zero
    /// width.
    pub fn new(field: F, h: Array2<f64>, h_plus: Array2<f64>) -> Result<Self, ReachError> {
        let n = field.state_dim();
        let (m, hn) = h.dim();
        if hn != n || h_plus.dim() != (n, m) {
            return Err(ReachError::InvalidLifting(format!(
                "H is {m}x{hn} and H⁺ is {:?} for a state of dimension {n}",
                h_plus.dim()
            )));
        }
        let err = (h_plus.dot(&h) - Array2::<f64>::eye(n)).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if err > 1e-10 {
            return Err(ReachError::InvalidLifting(format!("H⁺H differs from the identity by {err:e}")));
        }
        // only components that H⁺ actually reads need refined bounds
        let pullback = (0..m).filter(|&j| h_plus.column(j).iter().any(|&v| v != 0.0)).collect();
        let a_ub = bound_matrix(h.view());
        let w_box = vec![Interval { lo: 0.0, hi: 0.0 }; field.disturbance_dim()];
        Ok(Self {
            field,
            h,
            h_plus,
            feedback: None,
            w_box,
            refine: true,
            solver: SolverConfig::default(),
            a_ub,
            pullback,
        })
    }

    pub fn with_feedback(mut self, fb: Feedback) -> Self {
        self.feedback = Some(fb);
        self
    }

    pub fn with_disturbance(mut self, w: Vec<Interval<f64>>) -> Self {
        self.w_box = w;
        self
    }

    pub fn with_refinement(mut self, on: bool) -> Self {
        self.refine = on;
        self
    }

    pub fn h(&self) -> ArrayView2<'_, f64> {
        self.h.view()
    }

    pub fn h_plus(&self) -> ArrayView2<'_, f64> {
        self.h_plus.view()
    }

    pub fn state_dim(&self) -> usize {
        self.h.ncols()
    }

    pub fn lifted_dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn initial_state<S: Scalar>(&self, x: &[Interval<S>]) -> Result<EmbeddingState<S>, ReachError> {
        EmbeddingState::from_box(self.h.view(), x)
    }

    fn bound_problem(&self) -> BoundProblem<'_> {
        BoundProblem { h: self.h.view(), a_ub: &self.a_ub, cfg: &self.solver }
    }

    /// Input over the state box `x`, including interval feedback.
    fn input<S: Scalar>(&self, t: f64, x: &[Interval<S>], u_ff: &[S]) -> Result<Vec<Interval<S>>, IntervalError> {
        let mut u: Vec<Interval<S>> = u_ff.iter().cloned().map(Interval::point).collect();
        if let Some(fb) = &self.feedback {
            let dx: Vec<Interval<S>> = x.iter().zip(fb.x_nom.at(t)).map(|(xi, &xn)| xi.clone() - xn).collect();
            for (ui, ki) in u.iter_mut().zip(mat_vec(fb.k.view(), &dx)?) {
                *ui = ui.clone() + ki;
            }
        }
        Ok(u)
    }
}

/// One refinement performed by the embedding, in primal values.
#[derive(Debug, Clone, PartialEq)]
pub struct RefineRecord {
    pub t: f64,
    pub face: usize,
    pub upper: bool,
    pub y_lo: Vec<f64>,
    pub y_hi: Vec<f64>,
    pub z_lo: Vec<f64>,
    pub z_hi: Vec<f64>,
    /// Components actually refined; the rest were passed through.
    pub components: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDerivative<S> {
    pub d_lo: Vec<S>,
    pub d_hi: Vec<S>,
    pub lp_fallbacks: usize,
}

/// Derivative of the refined embedding at `s`: for each face `i`, flatten
/// the opposing bound onto it, refine, and bound
/// `(H f(H⁺z, u, w))_i` over the refined box.
pub fn embedding_dynamics<S: LpScalar, F: VectorField>(
    sys: &LiftedSystem<F>,
    s: &EmbeddingState<S>,
    t: f64,
    u_ff: &FeedforwardTable<S>,
) -> Result<EmbeddingDerivative<S>, ReachError> {
    dynamics(sys, s, t, u_ff, None)
}

/// [`embedding_dynamics`] that also records every refinement.
pub fn embedding_dynamics_traced<S: LpScalar, F: VectorField>(
    sys: &LiftedSystem<F>,
    s: &EmbeddingState<S>,
    t: f64,
    u_ff: &FeedforwardTable<S>,
    log: &mut Vec<RefineRecord>,
) -> Result<EmbeddingDerivative<S>, ReachError> {
    dynamics(sys, s, t, u_ff, Some(log))
}

fn dynamics<S: LpScalar, F: VectorField>(
    sys: &LiftedSystem<F>,
    s: &EmbeddingState<S>,
    t: f64,
    u_ff: &FeedforwardTable<S>,
    log: Option<&mut Vec<RefineRecord>>,
) -> Result<EmbeddingDerivative<S>, ReachError> {
    let m = sys.lifted_dim();
    if s.dim() != m {
        return Err(ReachError::InvalidConfig(format!("state has {} faces, lifting has {m}", s.dim())));
    }
    let faces: Vec<(Vec<S>, Vec<S>)> = (0..m)
        .flat_map(|i| {
            let mut lower = (s.y_lo.clone(), s.y_hi.clone());
            lower.1[i] = s.y_lo[i].clone();
            let mut upper = (s.y_lo.clone(), s.y_hi.clone());
            upper.0[i] = s.y_hi[i].clone();
            [lower, upper]
        })
        .collect();
    let refined: Vec<Refinement<S>> = if sys.refine {
        sys.bound_problem().refine_many(&faces, &sys.pullback)?
    } else {
        faces
            .iter()
            .map(|(lo, hi)| Refinement { z_lo: lo.clone(), z_hi: hi.clone(), fallback: vec![false; m] })
            .collect()
    };
    if let Some(log) = log {
        for (f, ((lo, hi), r)) in faces.iter().zip(&refined).enumerate() {
            let v = |xs: &[S]| xs.iter().map(Scalar::value).collect::<Vec<_>>();
            log.push(RefineRecord {
                t,
                face: f / 2,
                upper: f % 2 == 1,
                y_lo: v(lo),
                y_hi: v(hi),
                z_lo: v(&r.z_lo),
                z_hi: v(&r.z_hi),
                components: if sys.refine { sys.pullback.clone() } else { Vec::new() },
            });
        }
    }

    let at_t = |e: IntervalError| ReachError::Interval { t, source: e };
    let w: Vec<Interval<S>> = sys.w_box.iter().map(|w| Interval { lo: S::cst(w.lo), hi: S::cst(w.hi) }).collect();
    let mut d_lo = Vec::with_capacity(m);
    let mut d_hi = Vec::with_capacity(m);
    let mut lp_fallbacks = 0;
    for (f, r) in refined.iter().enumerate() {
        let i = f / 2;
        lp_fallbacks += r.fallback_count();
        let z: Vec<Interval<S>> =
            r.z_lo.iter().zip(&r.z_hi).map(|(lo, hi)| Interval { lo: lo.clone(), hi: hi.clone() }).collect();
        let x = mat_vec(sys.h_plus.view(), &z).map_err(at_t)?;
        let u = sys.input(t, &x, u_ff.at(t)).map_err(at_t)?;
        let fx = inclusion_boxed_input(&sys.field, &x, &u, &w).map_err(at_t)?;
        let gi = mat_vec(sys.h.slice(ndarray::s![i..i + 1, ..]), &fx).map_err(at_t)?.remove(0);
        if f % 2 == 0 {
            d_lo.push(gi.lo);
        } else {
            d_hi.push(gi.hi);
        }
    }
    Ok(EmbeddingDerivative { d_lo, d_hi, lp_fallbacks })
}

/// Euler trajectory of the embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub dt: f64,
    /// `states[k]` is the state at `t = k·dt`.
    pub states: Vec<EmbeddingState<S>>,
    /// Step at which `y_lo ≤ y_hi` first failed; the trajectory stops just
    /// before it.
    pub order_violation: Option<usize>,
    pub lp_fallbacks: usize,
}

impl<S: Scalar> Trajectory<S> {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.states.len()).map(|k| k as f64 * self.dt)
    }

    pub fn last(&self) -> &EmbeddingState<S> {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Number of Euler steps for `horizon`, which must be an integral multiple
/// of `dt`.
pub fn step_count(dt: f64, horizon: f64) -> Result<usize, ReachError> {
    if !(dt > 0.0 && horizon > 0.0) {
        return Err(ReachError::InvalidConfig(format!("dt = {dt} and horizon = {horizon} must be positive")));
    }
    let r = horizon / dt;
    let k = r.round();
    if (r - k).abs() > 1e-6 * k.max(1.0) {
        return Err(ReachError::InvalidConfig(format!("horizon {horizon} is not a multiple of dt {dt}")));
    }
    Ok(k as usize)
}

/// Explicit Euler over `[0, horizon]`, `horizon/dt + 1` states unless an
/// order violation truncates the run.
pub fn integrate_embedding<S: LpScalar, F: VectorField>(
    sys: &LiftedSystem<F>,
    s0: &EmbeddingState<S>,
    u_ff: &FeedforwardTable<S>,
    dt: f64,
    horizon: f64,
) -> Result<Trajectory<S>, ReachError> {
    integrate(sys, s0, u_ff, dt, horizon, None)
}

/// [`integrate_embedding`] that records every refinement.
pub fn integrate_embedding_traced<S: LpScalar, F: VectorField>(
    sys: &LiftedSystem<F>,
    s0: &EmbeddingState<S>,
    u_ff: &FeedforwardTable<S>,
    dt: f64,
    horizon: f64,
    log: &mut Vec<RefineRecord>,
) -> Result<Trajectory<S>, ReachError> {
    integrate(sys, s0, u_ff, dt, horizon, Some(log))
}

fn integrate<S: LpScalar, F: VectorField>(
    sys: &LiftedSystem<F>,
    s0: &EmbeddingState<S>,
    u_ff: &FeedforwardTable<S>,
    dt: f64,
    horizon: f64,
    mut log: Option<&mut Vec<RefineRecord>>,
) -> Result<Trajectory<S>, ReachError> {
    let steps = step_count(dt, horizon)?;
    let mut traj = Trajectory { dt, states: Vec::with_capacity(steps + 1), order_violation: None, lp_fallbacks: 0 };
    if s0.order_violation().is_some() {
        traj.order_violation = Some(0);
        return Ok(traj);
    }
    traj.states.push(s0.clone());
    for k in 0..steps {
        let t = k as f64 * dt;
        let s = traj.states.last().expect("initial state pushed");
        let d = dynamics(sys, s, t, u_ff, log.as_deref_mut())?;
        let step = |y: &[S], dy: Vec<S>| -> Vec<S> { y.iter().zip(dy).map(|(y, d)| y.clone() + d * dt).collect() };
        let next = EmbeddingState { y_lo: step(&s.y_lo, d.d_lo), y_hi: step(&s.y_hi, d.d_hi) };
        traj.lp_fallbacks += d.lp_fallbacks;
        if next.order_violation().is_some() {
            traj.order_violation = Some(k + 1);
            break;
        }
        traj.states.push(next);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reach::systems::{vanderpol_lifting, DemoSystem};
    use ndarray::array;

    fn decay() -> LiftedSystem<DemoSystem> {
        LiftedSystem::new(DemoSystem::Linear { a: vec![vec![-1.0]] }, Array2::eye(1), Array2::eye(1)).unwrap()
    }

    fn no_input<S>() -> FeedforwardTable<S> {
        FeedforwardTable { period: 1.0, values: Vec::new() }
    }

    #[test]
    fn table_lookup() {
        let u = FeedforwardTable::constant(0.5, 3, &[1.0]).with_flat(&[1.0, 2.0, 3.0]);
        assert_eq!(u.at(0.0), &[1.0]);
        assert_eq!(u.at(0.49), &[1.0]);
        assert_eq!(u.at(0.5), &[2.0]);
        // products of dt land a hair off segment boundaries
        assert_eq!(u.at(0.1 * 5.0), &[2.0]);
        assert_eq!(u.at(0.1 * 15.0), &[3.0]);
        assert_eq!(u.at(10.0), &[3.0]);
        let s = u.seeded();
        assert_eq!(s.values[1][0].d(1), 1.0);
        assert_eq!(s.values[2][0].width(), 3);
    }

    #[test]
    fn stable_linear_contracts() {
        let sys = decay();
        let s = EmbeddingState::new(vec![-1.0], vec![1.0]);
        let d = embedding_dynamics(&sys, &s, 0.0, &no_input()).unwrap();
        assert_eq!(d.d_lo, vec![1.0]);
        assert_eq!(d.d_hi, vec![-1.0]);
    }

    #[test]
    fn identity_lifting_matches_plain_inclusion() {
        let sys = LiftedSystem::new(DemoSystem::VanDerPol { mu: 1.0 }, Array2::eye(2), Array2::eye(2)).unwrap();
        let s = EmbeddingState::new(vec![0.9, -0.1], vec![1.1, 0.1]);
        let d = embedding_dynamics(&sys, &s, 0.0, &no_input()).unwrap();
        let plain = embedding_dynamics(&sys.clone().with_refinement(false), &s, 0.0, &no_input()).unwrap();
        assert_eq!(d, plain);
        let w = [Interval::point(0.0), Interval::point(0.0)];
        for i in 0..2 {
            let mut lo_face = s.intervals();
            lo_face[i].hi = lo_face[i].lo;
            let f = inclusion_boxed_input(&sys.field, &lo_face, &[], &w).unwrap();
            assert_eq!(d.d_lo[i], f[i].lo);
            let mut hi_face = s.intervals();
            hi_face[i].lo = hi_face[i].hi;
            let f = inclusion_boxed_input(&sys.field, &hi_face, &[], &w).unwrap();
            assert_eq!(d.d_hi[i], f[i].hi);
        }
    }

    #[test]
    fn zero_field_is_constant() {
        let sys = LiftedSystem::new(DemoSystem::Integrator { dim: 2 }, Array2::eye(2), Array2::eye(2)).unwrap();
        let s0 = EmbeddingState::new(vec![0.0, 1.0], vec![0.5, 2.0]);
        let u = FeedforwardTable::constant(1.0, 1, &[0.0, 0.0]);
        let traj = integrate_embedding(&sys, &s0, &u, 0.1, 1.0).unwrap();
        assert_eq!(traj.states.len(), 11);
        assert!(traj.states.iter().all(|s| *s == s0));
    }

    #[test]
    fn euler_arithmetic() {
        // ẏ_lo = 0, ẏ_hi = 1 via ẋ = u + w with w ∈ [−0.5, 0.5] and u = 0.5
        let sys = LiftedSystem::new(DemoSystem::Integrator { dim: 1 }, Array2::eye(1), Array2::eye(1))
            .unwrap()
            .with_disturbance(vec![Interval::new(-0.5, 0.5)]);
        let s0 = EmbeddingState::new(vec![0.0], vec![0.0]);
        let u = FeedforwardTable::constant(1.0, 1, &[0.5]);
        let traj = integrate_embedding(&sys, &s0, &u, 0.1, 1.0).unwrap();
        assert_eq!(traj.states.len(), 11);
        assert_eq!(traj.last().y_lo, vec![0.0]);
        assert!((traj.last().y_hi[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn order_violation_truncates() {
        // a stiff contraction with a large step makes the faces cross
        let sys =
            LiftedSystem::new(DemoSystem::Linear { a: vec![vec![-10.0]] }, Array2::eye(1), Array2::eye(1)).unwrap();
        let s0 = EmbeddingState::new(vec![-1.0], vec![1.0]);
        let traj = integrate_embedding(&sys, &s0, &no_input(), 0.25, 1.0).unwrap();
        assert_eq!(traj.order_violation, Some(1));
        assert_eq!(traj.states.len(), 1);
    }

    #[test]
    fn vanderpol_step_keeps_order() {
        let (h, hp) = vanderpol_lifting();
        let sys = LiftedSystem::new(DemoSystem::VanDerPol { mu: 1.0 }, h, hp).unwrap();
        let s0 = sys.initial_state(&[Interval::new(0.9, 1.1), Interval::new(-0.1, 0.1)]).unwrap();
        let traj = integrate_embedding(&sys, &s0, &no_input(), 0.00628, 0.00628).unwrap();
        assert_eq!(traj.states.len(), 2);
        assert!(traj.order_violation.is_none());
        assert_eq!(traj.lp_fallbacks, 0);
    }

    #[test]
    fn refinement_tightens_vanderpol() {
        let (h, hp) = vanderpol_lifting();
        let sys = LiftedSystem::new(DemoSystem::VanDerPol { mu: 1.0 }, h, hp).unwrap();
        let s0 = sys.initial_state(&[Interval::new(0.9, 1.1), Interval::new(-0.1, 0.1)]).unwrap();
        let on = integrate_embedding(&sys, &s0, &no_input(), 0.00628, 0.628).unwrap();
        let off = integrate_embedding(&sys.clone().with_refinement(false), &s0, &no_input(), 0.00628, 0.628).unwrap();
        for (a, b) in on.states.iter().zip(&off.states) {
            for i in 0..4 {
                assert!(a.y_lo[i] >= b.y_lo[i] - 1e-9 && a.y_hi[i] <= b.y_hi[i] + 1e-9);
            }
        }
        assert!(on.last().width_sum(2) < off.last().width_sum(2));
    }

    #[test]
    fn lifting_validation() {
        let bad = LiftedSystem::new(DemoSystem::Integrator { dim: 1 }, array![[1.0], [1.0]], array![[1.0, 1.0]]);
        assert!(matches!(bad, Err(ReachError::InvalidLifting(_))));
        let shape = LiftedSystem::new(DemoSystem::Integrator { dim: 1 }, array![[1.0], [1.0]], array![[1.0]]);
        assert!(matches!(shape, Err(ReachError::InvalidLifting(_))));
    }

    #[test]
    fn step_count_requires_integral_horizon() {
        assert_eq!(step_count(0.00628, 0.628).unwrap(), 100);
        assert_eq!(step_count(std::f64::consts::TAU / 1000.0, std::f64::consts::TAU).unwrap(), 1000);
        assert!(step_count(0.3, 1.0).is_err());
        assert!(step_count(0.0, 1.0).is_err());
    }
}
