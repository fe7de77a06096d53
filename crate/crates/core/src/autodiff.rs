//! Forward-mode tangents through [`linprog`](crate::simplex::linprog).
//!
//! Every canonical-form entry gets `k` tangent components which ride along
//! with the tableau through canonicalization, phase one, row marking and
//! phase two. Pivot selection only ever looks at primal values, so the pivot
//! path is the same as the untangented solve.
//!
//! At a nondegenerate optimum with a unique basis the result is the usual LP
//! sensitivity. At degenerate optima it is the derivative of the affine
//! piece selected by the pivot path.

use ndarray::{Array1, Array2, Array3, ArrayView1, ArrayView2};

use crate::lp_core::{canonicalize, recover, GeneralLP, LpError};
use crate::simplex::{basic_solution, solve_canonical, CanonicalSolve, SolveOutcome, SolverConfig, Tableau};

/// Tangent directions for each differentiable field of a [`GeneralLP`].
/// Direction `i` of a field is `field[i]`; absent fields have zero tangents.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpSeeds {
    pub c: Option<Array2<f64>>,
    pub a_ub: Option<Array3<f64>>,
    pub b_ub: Option<Array2<f64>>,
    pub a_eq: Option<Array3<f64>>,
    pub b_eq: Option<Array2<f64>>,
}

impl LpSeeds {
    /// Number of directions, or `None` if no field is seeded.
    pub fn width(&self) -> Option<usize> {
        [
            self.c.as_ref().map(|a| a.nrows()),
            self.a_ub.as_ref().map(|a| a.dim().0),
            self.b_ub.as_ref().map(|a| a.nrows()),
            self.a_eq.as_ref().map(|a| a.dim().0),
            self.b_eq.as_ref().map(|a| a.nrows()),
        ]
        .into_iter()
        .flatten()
        .next()
    }

    /// Multiplies every seed by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            c: self.c.as_ref().map(|a| a * s),
            a_ub: self.a_ub.as_ref().map(|a| a * s),
            b_ub: self.b_ub.as_ref().map(|a| a * s),
            a_eq: self.a_eq.as_ref().map(|a| a * s),
            b_eq: self.b_eq.as_ref().map(|a| a * s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentBundle {
    pub primal: GeneralLP,
    pub seeds: LpSeeds,
}

impl TangentBundle {
    fn check(&self) -> Result<usize, LpError> {
        let p = &self.primal;
        let k = self.seeds.width().unwrap_or(0);
        let mismatch = |what: &str, got: Vec<usize>, want: Vec<usize>| {
            LpError::DimensionMismatch(format!("{what} seed has shape {got:?}, expected {want:?}"))
        };
        let s = &self.seeds;
        if let Some(a) = &s.c {
            if a.dim() != (k, p.n()) {
                return Err(mismatch("c", a.shape().to_vec(), vec![k, p.n()]));
            }
        }
        if let Some(a) = &s.b_ub {
            if a.dim() != (k, p.m_ub()) {
                return Err(mismatch("b_ub", a.shape().to_vec(), vec![k, p.m_ub()]));
            }
        }
        if let Some(a) = &s.b_eq {
            if a.dim() != (k, p.m_eq()) {
                return Err(mismatch("b_eq", a.shape().to_vec(), vec![k, p.m_eq()]));
            }
        }
        if let Some(a) = &s.a_ub {
            if a.dim() != (k, p.m_ub(), p.n()) {
                return Err(mismatch("A_ub", a.shape().to_vec(), vec![k, p.m_ub(), p.n()]));
            }
        }
        if let Some(a) = &s.a_eq {
            if a.dim() != (k, p.m_eq(), p.n()) {
                return Err(mismatch("A_eq", a.shape().to_vec(), vec![k, p.m_eq(), p.n()]));
            }
        }
        Ok(k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferentiableOutcome {
    pub outcome: SolveOutcome,
    /// `n × k`: column `i` is the derivative of `x` along direction `i`.
    pub dx: Array2<f64>,
    /// Derivative of `fun` along each direction.
    pub dfun: Array1<f64>,
    /// False when the solve did not succeed; `dx` and `dfun` are then zero.
    pub valid: bool,
}

/// Solves `tb.primal` and propagates the seeded tangents.
pub fn solve_with_tangents(tb: &TangentBundle) -> Result<DifferentiableOutcome, LpError> {
    solve_with_tangents_cfg(tb, &SolverConfig::default())
}

pub fn solve_with_tangents_cfg(tb: &TangentBundle, cfg: &SolverConfig) -> Result<DifferentiableOutcome, LpError> {
    let mut p = tb.primal.clone();
    p.validate()?;
    let k = TangentBundle { primal: p.clone(), seeds: tb.seeds.clone() }.check()?;
    let cp = canonicalize(&p)?;
    let (n, m_ub, m_eq) = (p.n(), p.m_ub(), p.m_eq());

    let zeros1 = |len| Array1::<f64>::zeros(len);
    let zeros2 = |r, c| Array2::<f64>::zeros((r, c));
    let s = &tb.seeds;
    let planes: Vec<_> = (0..k)
        .map(|i| {
            let c: Array1<f64> = s.c.as_ref().map_or_else(|| zeros1(n), |a| a.row(i).to_owned());
            let b_ub = s.b_ub.as_ref().map_or_else(|| zeros1(m_ub), |a| a.row(i).to_owned());
            let b_eq = s.b_eq.as_ref().map_or_else(|| zeros1(m_eq), |a| a.row(i).to_owned());
            let a_ub =
                s.a_ub.as_ref().map_or_else(|| zeros2(m_ub, n), |a| a.index_axis(ndarray::Axis(0), i).to_owned());
            let a_eq =
                s.a_eq.as_ref().map_or_else(|| zeros2(m_eq, n), |a| a.index_axis(ndarray::Axis(0), i).to_owned());
            cp.recovery.layout(c.view(), a_ub.view(), b_ub.view(), a_eq.view(), b_eq.view(), 0.0)
        })
        .collect();

    let mut t = Tableau::phase_one(&cp);
    t.attach_tangents(&planes);
    let CanonicalSolve { tableau, basis, status, trace } = solve_canonical(t, cfg);

    let mut dx = Array2::zeros((n, k));
    let mut dfun = Array1::zeros(k);
    let (x, fun) = if status.success {
        let rhs = tableau.rhs_col();
        let xc = basic_solution(&tableau.data, &basis, cp.n_c(), rhs);
        let x = recover(&cp.recovery, xc.view())?;
        for (i, plane) in tableau.tangent_planes().iter().enumerate() {
            let dxc = basic_solution(plane, &basis, cp.n_c(), rhs);
            let dxi = recover(&cp.recovery, dxc.view())?;
            let dc = s.c.as_ref().map_or(0.0, |a| a.row(i).dot(&x));
            dfun[i] = dc + p.c.dot(&dxi);
            dx.column_mut(i).assign(&dxi);
        }
        let fun = p.c.dot(&x);
        (x, fun)
    } else {
        (Array1::zeros(n), 0.0)
    };
    Ok(DifferentiableOutcome {
        outcome: SolveOutcome { x, fun, tableau, basis, status, trace },
        dx,
        dfun,
        valid: status.success,
    })
}

/// Single-direction convenience wrapper: derivative of `(x, fun)` along the
/// given data direction.
pub fn directional(
    p: &GeneralLP,
    dc: ArrayView1<f64>,
    da_ub: ArrayView2<f64>,
    db_ub: ArrayView1<f64>,
    da_eq: ArrayView2<f64>,
    db_eq: ArrayView1<f64>,
) -> Result<DifferentiableOutcome, LpError> {
    let lift2 = |a: ArrayView1<f64>| a.to_owned().insert_axis(ndarray::Axis(0));
    let lift3 = |a: ArrayView2<f64>| a.to_owned().insert_axis(ndarray::Axis(0));
    solve_with_tangents(&TangentBundle {
        primal: p.clone(),
        seeds: LpSeeds {
            c: Some(lift2(dc)),
            a_ub: Some(lift3(da_ub)),
            b_ub: Some(lift2(db_ub)),
            a_eq: Some(lift3(da_eq)),
            b_eq: Some(lift2(db_eq)),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::linprog;
    use ndarray::array;

    fn example() -> GeneralLP {
        GeneralLP::new(array![-1.0, -2.0]).with_ub(array![[1.0, 1.0]], array![1.0])
    }

    fn fun_at(p: &GeneralLP) -> f64 {
        let out = linprog(p).unwrap();
        assert!(out.status.success);
        out.fun
    }

    #[test]
    fn zero_seeds_give_zero_tangents() {
        let p = example();
        let tb = TangentBundle {
            primal: p.clone(),
            seeds: LpSeeds { c: Some(Array2::zeros((3, 2))), b_ub: Some(Array2::zeros((3, 1))), ..Default::default() },
        };
        let d = solve_with_tangents(&tb).unwrap();
        assert!(d.valid);
        assert!(d.dx.iter().all(|&v| v == 0.0));
        assert!(d.dfun.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn objective_seed_matches_finite_difference() {
        let p = example();
        let h = 1e-6;
        let mut plus = p.clone();
        plus.c[1] += h;
        let mut minus = p.clone();
        minus.c[1] -= h;
        let fd = (fun_at(&plus) - fun_at(&minus)) / (2.0 * h);

        let tb = TangentBundle { primal: p, seeds: LpSeeds { c: Some(array![[0.0, 1.0]]), ..Default::default() } };
        let d = solve_with_tangents(&tb).unwrap();
        assert!((d.dfun[0] - 1.0).abs() < 1e-12);
        assert!((d.dfun[0] - fd).abs() < 1e-6);
    }

    #[test]
    fn rhs_seed_matches_finite_difference() {
        let p = example();
        let h = 1e-6;
        let mut plus = p.clone();
        plus.b_ub[0] += h;
        let mut minus = p.clone();
        minus.b_ub[0] -= h;
        let fd = (fun_at(&plus) - fun_at(&minus)) / (2.0 * h);
        assert!((fd + 2.0).abs() < 1e-6);

        let tb = TangentBundle { primal: p, seeds: LpSeeds { b_ub: Some(array![[1.0]]), ..Default::default() } };
        let d = solve_with_tangents(&tb).unwrap();
        assert!((d.dfun[0] + 2.0).abs() < 1e-12);
        assert!((d.dx[[1, 0]] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn failed_solve_has_invalid_zero_tangents() {
        let p = GeneralLP::new(array![1.0]).with_ub(array![[1.0]], array![-1.0]);
        let tb = TangentBundle { primal: p, seeds: LpSeeds { b_ub: Some(array![[1.0]]), ..Default::default() } };
        let d = solve_with_tangents(&tb).unwrap();
        assert!(!d.valid);
        assert!(!d.outcome.status.feasible);
        assert_eq!(d.dfun[0], 0.0);
    }

    #[test]
    fn seed_shape_is_checked() {
        let tb = TangentBundle {
            primal: example(),
            seeds: LpSeeds { c: Some(Array2::zeros((1, 3))), ..Default::default() },
        };
        assert!(solve_with_tangents(&tb).is_err());
    }

    #[test]
    fn doubling_seeds_doubles_tangents() {
        let p = GeneralLP::new(array![-1.0, -1.5, 0.5])
            .with_ub(array![[1.0, 2.0, 1.0], [3.0, 1.0, -1.0]], array![4.0, 5.0])
            .with_eq(array![[1.0, 1.0, 1.0]], array![2.0]);
        let seeds = LpSeeds {
            c: Some(array![[0.3, -0.2, 0.1], [1.0, 0.0, 0.0]]),
            b_ub: Some(array![[0.5, -0.1], [0.0, 1.0]]),
            a_ub: Some(Array3::from_elem((2, 2, 3), 0.25)),
            a_eq: Some(Array3::from_elem((2, 1, 3), -0.1)),
            b_eq: Some(array![[0.2], [0.0]]),
        };
        let one = solve_with_tangents(&TangentBundle { primal: p.clone(), seeds: seeds.clone() }).unwrap();
        let two = solve_with_tangents(&TangentBundle { primal: p, seeds: seeds.scaled(2.0) }).unwrap();
        assert!(one.valid);
        assert_eq!(one.dx.mapv(|v| v * 2.0), two.dx);
        assert_eq!(one.dfun.mapv(|v| v * 2.0), two.dfun);
        assert_eq!(one.outcome.trace.pivots, two.outcome.trace.pivots);
    }
}
