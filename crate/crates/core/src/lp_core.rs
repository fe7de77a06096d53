//! General and canonical LP forms.
//!
//! A [`GeneralLP`] is `min c·x` subject to `A_eq x = b_eq`, `A_ub x <= b_ub`,
//! with either `x >= 0` or `x` free. [`canonicalize`] rewrites it as
//! `min ĉ·x̂` s.t. `Â x̂ = b̂`, `x̂ >= 0`, `b̂ >= 0`, and the attached
//! [`Recovery`] record maps canonical points back.
//!
//! Canonical layout:
//! - rows: the `m_eq` equality rows first, then the `m_ub` inequality rows;
//! - columns: `x` (or `x⁺` then `x⁻` in free mode), then one slack per
//!   inequality row.
//!
//! Rows whose right-hand side is negative are negated after the slack is
//! inserted, so a slack coefficient may be `-1`.

use ndarray::{s, Array1, Array2, ArrayView1};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// An LP in general form.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralLP {
    pub c: Array1<f64>,
    pub a_ub: Array2<f64>,
    pub b_ub: Array1<f64>,
    pub a_eq: Array2<f64>,
    pub b_eq: Array1<f64>,
    /// `true` for free variables, `false` for `x >= 0`.
    pub unbounded: bool,
}

impl GeneralLP {
    /// Objective only, no constraints, `x >= 0`.
    pub fn new(c: Array1<f64>) -> Self {
        let n = c.len();
        Self {
            c,
            a_ub: Array2::zeros((0, n)),
            b_ub: Array1::zeros(0),
            a_eq: Array2::zeros((0, n)),
            b_eq: Array1::zeros(0),
            unbounded: false,
        }
    }

    pub fn with_ub(mut self, a_ub: Array2<f64>, b_ub: Array1<f64>) -> Self {
        self.a_ub = a_ub;
        self.b_ub = b_ub;
        self
    }

    pub fn with_eq(mut self, a_eq: Array2<f64>, b_eq: Array1<f64>) -> Self {
        self.a_eq = a_eq;
        self.b_eq = b_eq;
        self
    }

    pub fn free(mut self, unbounded: bool) -> Self {
        self.unbounded = unbounded;
        self
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn m_ub(&self) -> usize {
        self.b_ub.len()
    }

    pub fn m_eq(&self) -> usize {
        self.b_eq.len()
    }

    /// Checks shapes. An empty `(0, 0)` matrix is accepted for a constraint
    /// block with no rows and is normalized to `(0, n)`.
    pub fn validate(&mut self) -> Result<(), LpError> {
        let n = self.n();
        for (name, a, b) in [("A_ub", &mut self.a_ub, &self.b_ub), ("A_eq", &mut self.a_eq, &self.b_eq)] {
            if a.nrows() == 0 && a.ncols() != n {
                *a = Array2::zeros((0, n));
            }
            if a.ncols() != n {
                return Err(LpError::DimensionMismatch(format!("{name} has {} columns, objective has {n}", a.ncols())));
            }
            if a.nrows() != b.len() {
                return Err(LpError::DimensionMismatch(format!("{name} has {} rows, rhs has {}", a.nrows(), b.len())));
            }
        }
        Ok(())
    }

    /// Objective value `c·x`.
    pub fn objective(&self, x: ArrayView1<f64>) -> f64 {
        self.c.dot(&x)
    }

    /// Largest constraint violation of `x` (0 when feasible).
    pub fn max_violation(&self, x: ArrayView1<f64>) -> f64 {
        let eq = (self.a_eq.dot(&x) - &self.b_eq).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let ub = (self.a_ub.dot(&x) - &self.b_ub).iter().fold(0.0f64, |acc, v| acc.max(*v));
        let lb = if self.unbounded { 0.0 } else { x.iter().fold(0.0f64, |acc, v| acc.max(-v)) };
        eq.max(ub).max(lb)
    }
}

/// Maps canonical columns back to original variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub n: usize,
    pub m_eq: usize,
    pub m_ub: usize,
    pub free: bool,
    /// `+1` or `-1` per canonical row; `-1` if the row was negated.
    pub row_sign: Vec<f64>,
}

impl Recovery {
    /// Number of structural (non-slack) canonical columns.
    pub fn n_struct(&self) -> usize {
        if self.free {
            2 * self.n
        } else {
            self.n
        }
    }

    pub fn n_c(&self) -> usize {
        self.n_struct() + self.m_ub
    }

    pub fn m(&self) -> usize {
        self.m_eq + self.m_ub
    }

    /// First slack column.
    pub fn slack_start(&self) -> usize {
        self.n_struct()
    }

    /// Canonical column(s) representing original variable `j`: the positive
    /// part and, in free mode, the negative part.
    pub fn columns_of(&self, j: usize) -> (usize, Option<usize>) {
        if self.free {
            (j, Some(self.n + j))
        } else {
            (j, None)
        }
    }

    /// Lays out `(c, A_ub, b_ub, A_eq, b_eq)`-shaped data in canonical form
    /// using this record's row signs. Used for both primal data and tangents.
    pub(crate) fn layout(
        &self,
        c: ArrayView1<f64>,
        a_ub: ndarray::ArrayView2<f64>,
        b_ub: ArrayView1<f64>,
        a_eq: ndarray::ArrayView2<f64>,
        b_eq: ArrayView1<f64>,
        slack_coeff: f64,
    ) -> (Array2<f64>, Array1<f64>, Array1<f64>) {
        let (n, m_eq, m_ub) = (self.n, self.m_eq, self.m_ub);
        let ns = self.n_struct();
        let mut a = Array2::zeros((self.m(), self.n_c()));
        let mut b = Array1::zeros(self.m());
        let mut cc = Array1::zeros(self.n_c());

        cc.slice_mut(s![..n]).assign(&c);
        a.slice_mut(s![..m_eq, ..n]).assign(&a_eq);
        a.slice_mut(s![m_eq.., ..n]).assign(&a_ub);
        if self.free {
            cc.slice_mut(s![n..2 * n]).assign(&c.mapv(|v| -v));
            a.slice_mut(s![..m_eq, n..2 * n]).assign(&a_eq.mapv(|v| -v));
            a.slice_mut(s![m_eq.., n..2 * n]).assign(&a_ub.mapv(|v| -v));
        }
        for i in 0..m_ub {
            a[[m_eq + i, ns + i]] = slack_coeff;
        }
        b.slice_mut(s![..m_eq]).assign(&b_eq);
        b.slice_mut(s![m_eq..]).assign(&b_ub);

        for (r, &sign) in self.row_sign.iter().enumerate() {
            if sign < 0.0 {
                a.row_mut(r).mapv_inplace(|v| -v);
                b[r] = -b[r];
            }
        }
        (a, b, cc)
    }
}

/// An LP in canonical form `min c·x, A x = b, x >= 0, b >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalLP {
    pub a: Array2<f64>,
    pub b: Array1<f64>,
    pub c: Array1<f64>,
    pub recovery: Recovery,
}

impl CanonicalLP {
    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_c(&self) -> usize {
        self.a.ncols()
    }
}

/// Converts a general LP to canonical form.
pub fn canonicalize(p: &GeneralLP) -> Result<CanonicalLP, LpError> {
    let mut p = p.clone();
    p.validate()?;
    let row_sign = p.b_eq.iter().chain(p.b_ub.iter()).map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let recovery = Recovery { n: p.n(), m_eq: p.m_eq(), m_ub: p.m_ub(), free: p.unbounded, row_sign };
    let (a, b, c) = recovery.layout(p.c.view(), p.a_ub.view(), p.b_ub.view(), p.a_eq.view(), p.b_eq.view(), 1.0);
    Ok(CanonicalLP { a, b, c, recovery })
}

/// Maps a canonical point back to the original variables, dropping slacks.
pub fn recover(meta: &Recovery, x_c: ArrayView1<f64>) -> Result<Array1<f64>, LpError> {
    if x_c.len() != meta.n_c() {
        return Err(LpError::DimensionMismatch(format!(
            "canonical point has length {}, expected {}",
            x_c.len(),
            meta.n_c()
        )));
    }
    let n = meta.n;
    Ok(if meta.free { &x_c.slice(s![..n]) - &x_c.slice(s![n..2 * n]) } else { x_c.slice(s![..n]).to_owned() })
}
