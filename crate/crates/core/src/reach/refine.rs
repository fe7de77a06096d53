//! LP-based interval refinement against the subspace `{Hx}`.

use ndarray::{Array1, Array2, ArrayView2};

use super::lp::LpScalar;
use super::ReachError;
use crate::par;
use crate::simplex::SolverConfig;

/// Refined bounds `[z_lo, z_hi] ⊆ [y_lo, y_hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement<S> {
    pub z_lo: Vec<S>,
    pub z_hi: Vec<S>,
    /// Components whose LPs did not succeed; they keep the input interval.
    pub fallback: Vec<bool>,
}

impl<S: LpScalar> Refinement<S> {
    pub fn fallback_count(&self) -> usize {
        self.fallback.iter().filter(|&&f| f).count()
    }
}

/// `[H; -H]`, the constraint matrix of every bound LP for `H`.
pub(crate) fn bound_matrix(h: ArrayView2<f64>) -> Array2<f64> {
    let (m, n) = h.dim();
    Array2::from_shape_fn((2 * m, n), |(r, j)| if r < m { h[[r, j]] } else { -h[[r - m, j]] })
}

/// Shared data for a batch of refinements.
pub(crate) struct BoundProblem<'a> {
    pub h: ArrayView2<'a, f64>,
    pub a_ub: &'a Array2<f64>,
    pub cfg: &'a SolverConfig,
}

impl BoundProblem<'_> {
    /// Min (or max) of `H[j,:]·x` over `y_lo ≤ Hx ≤ y_hi`; `None` when the LP
    /// does not succeed.
    fn bound<S: LpScalar>(&self, rhs: &[S], j: usize, upper: bool) -> Result<Option<S>, ReachError> {
        let row = self.h.row(j);
        let c: Array1<f64> = if upper { row.mapv(|v| -v) } else { row.to_owned() };
        let (status, v) = S::min_free(self.a_ub, rhs, &c, self.cfg)?;
        if !status.success {
            return Ok(None);
        }
        Ok(Some(if upper { -v } else { v }))
    }

    /// Refines every box in `boxes`, solving LPs only for `components`; the
    /// others are passed through. All LPs run as one batch.
    pub fn refine_many<S: LpScalar>(
        &self,
        boxes: &[(Vec<S>, Vec<S>)],
        components: &[usize],
    ) -> Result<Vec<Refinement<S>>, ReachError> {
        let m = self.h.nrows();
        let rhs: Vec<Vec<S>> =
            boxes.iter().map(|(lo, hi)| hi.iter().cloned().chain(lo.iter().map(|v| -v.clone())).collect()).collect();
        let jobs: Vec<(usize, usize, bool)> = (0..boxes.len())
            .flat_map(|b| components.iter().flat_map(move |&j| [(b, j, false), (b, j, true)]))
            .collect();
        let results: Vec<Option<S>> =
            par::map(&jobs, |&(b, j, upper)| self.bound(&rhs[b], j, upper)).into_iter().collect::<Result<_, _>>()?;

        let mut out: Vec<Refinement<S>> = boxes
            .iter()
            .map(|(lo, hi)| Refinement { z_lo: lo.clone(), z_hi: hi.clone(), fallback: vec![false; m] })
            .collect();
        for pair in jobs.chunks(2).zip(results.chunks(2)) {
            let ([(b, j, _), _], [lo, hi]) = pair else { unreachable!() };
            let (y_lo, y_hi) = &boxes[*b];
            let r = &mut out[*b];
            match (lo.clone(), hi.clone()) {
                (Some(lo), Some(hi)) => {
                    let clamp = |v: S| v.max_by_value(y_lo[*j].clone()).min_by_value(y_hi[*j].clone());
                    let (lo, hi) = (clamp(lo), clamp(hi));
                    let gap = lo.value() - hi.value();
                    if gap <= 0.0 {
                        r.z_lo[*j] = lo;
                        r.z_hi[*j] = hi;
                    } else if gap <= self.cfg.eps_feas * (1.0 + lo.value().abs()) {
                        // a face that is a point in this coordinate, with the
                        // two LP values a few ulps apart
                        r.z_lo[*j] = hi;
                        r.z_hi[*j] = lo;
                    } else {
                        r.fallback[*j] = true;
                    }
                }
                _ => r.fallback[*j] = true,
            }
        }
        Ok(out)
    }
}

/// Tightest `[z_lo, z_hi]` with `{Hx} ∩ [y_lo, y_hi] ⊆ [z_lo, z_hi] ⊆ [y_lo, y_hi]`,
/// from `2m` LPs in free mode. When a component LP does not succeed (for
/// example an empty intersection), that component keeps its input interval
/// and is flagged.
pub fn refine<S: LpScalar>(
    y_lo: &[S],
    y_hi: &[S],
    h: ArrayView2<f64>,
    cfg: &SolverConfig,
) -> Result<Refinement<S>, ReachError> {
    let m = h.nrows();
    if y_lo.len() != m || y_hi.len() != m {
        return Err(ReachError::InvalidConfig(format!(
            "bounds have lengths {} and {}, H has {m} rows",
            y_lo.len(),
            y_hi.len()
        )));
    }
    if let Some(i) = (0..m).find(|&i| y_lo[i].value() > y_hi[i].value()) {
        return Err(ReachError::InvalidConfig(format!("y_lo[{i}] > y_hi[{i}]")));
    }
    let a_ub = bound_matrix(h);
    let all: Vec<usize> = (0..m).collect();
    let bp = BoundProblem { h, a_ub: &a_ub, cfg };
    let mut out = bp.refine_many(&[(y_lo.to_vec(), y_hi.to_vec())], &all)?;
    Ok(out.pop().expect("one box in, one refinement out"))
}
