//! Bound LPs over scalars that may carry tangents.

use ndarray::{Array1, Array2};

use crate::autodiff::{solve_with_tangents_cfg, LpSeeds, TangentBundle};
use crate::dual::Dual;
use crate::lp_core::{GeneralLP, LpError};
use crate::scalar::Scalar;
use crate::simplex::{linprog_with, SolveStatus, SolverConfig};

/// A [`Scalar`] that can flow through the right-hand side of an LP.
pub trait LpScalar: Scalar {
    /// Solves `min c·x s.t. a_ub x ≤ b_ub` with `x` free and returns the
    /// optimal value (zero unless the status is a success).
    fn min_free(
        a_ub: &Array2<f64>,
        b_ub: &[Self],
        c: &Array1<f64>,
        cfg: &SolverConfig,
    ) -> Result<(SolveStatus, Self), LpError>;
}

fn free_lp(a_ub: &Array2<f64>, b: Array1<f64>, c: &Array1<f64>) -> GeneralLP {
    GeneralLP::new(c.clone()).with_ub(a_ub.clone(), b).free(true)
}

impl LpScalar for f64 {
    fn min_free(
        a_ub: &Array2<f64>,
        b_ub: &[f64],
        c: &Array1<f64>,
        cfg: &SolverConfig,
    ) -> Result<(SolveStatus, f64), LpError> {
        let out = linprog_with(&free_lp(a_ub, Array1::from(b_ub.to_vec()), c), cfg)?;
        Ok((out.status, out.fun))
    }
}

impl LpScalar for Dual {
    fn min_free(
        a_ub: &Array2<f64>,
        b_ub: &[Dual],
        c: &Array1<f64>,
        cfg: &SolverConfig,
    ) -> Result<(SolveStatus, Dual), LpError> {
        let b = Array1::from_iter(b_ub.iter().map(|d| d.re));
        let k = b_ub.iter().map(Dual::width).max().unwrap_or(0);
        if k == 0 {
            let out = linprog_with(&free_lp(a_ub, b, c), cfg)?;
            return Ok((out.status, Dual::constant(out.fun)));
        }
        let seeds = Array2::from_shape_fn((k, b_ub.len()), |(i, r)| b_ub[r].d(i));
        let tb =
            TangentBundle { primal: free_lp(a_ub, b, c), seeds: LpSeeds { b_ub: Some(seeds), ..LpSeeds::default() } };
        let out = solve_with_tangents_cfg(&tb, cfg)?;
        Ok((out.outcome.status, Dual::new(out.outcome.fun, out.dfun.to_vec())))
    }
}
