use ndarray::{Array2, ArrayView2};
use std::ops::Range;

use crate::lp_core::CanonicalLP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Phase {
    One,
    Two,
}

/// Dense simplex tableau with a fixed phase-one allocation.
///
/// Layout for a canonical problem with `m` rows and `n_c` columns:
///
/// ```text
///   rows 0..m      [ A        | I_m | b  ]
///   row  m         [ c        | 0   | -z ]
///   row  m+1       [ -Σ A[i]  | 0   | -w ]
/// ```
///
/// Phase two works on the view made of rows `0..=m`, columns `0..n_c` and
/// the rhs column. Nothing is ever deallocated or reshaped between phases.
///
/// Optional tangent planes (one per forward-mode direction) share the layout
/// and are updated alongside every row operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Tableau {
    m: usize,
    n_c: usize,
    pub(crate) phase: Phase,
    pub(crate) data: Array2<f64>,
    pub(crate) tangents: Vec<Array2<f64>>,
    /// Every tangent plane is zero outside the rhs column, so pivots only
    /// need to update that column.
    pub(crate) tangent_rhs_only: bool,
}

impl Tableau {
    /// Phase-one tableau for `p`.
    pub fn phase_one(p: &CanonicalLP) -> Self {
        let (m, n_c) = (p.m(), p.n_c());
        let cols = n_c + m + 1;
        let rhs = cols - 1;
        let mut data = Array2::zeros((m + 2, cols));
        for r in 0..m {
            for j in 0..n_c {
                data[[r, j]] = p.a[[r, j]];
                data[[m + 1, j]] -= p.a[[r, j]];
            }
            data[[r, n_c + r]] = 1.0;
            data[[r, rhs]] = p.b[r];
            data[[m + 1, rhs]] -= p.b[r];
        }
        for j in 0..n_c {
            data[[m, j]] = p.c[j];
        }
        Self { m, n_c, phase: Phase::One, data, tangents: Vec::new(), tangent_rhs_only: false }
    }

    /// Builds a tableau directly from entries. `data` must have shape
    /// `(m + 2, n_c + m + 1)`.
    pub fn from_entries(m: usize, n_c: usize, phase: Phase, data: Array2<f64>) -> Self {
        assert_eq!(data.dim(), (m + 2, n_c + m + 1), "tableau shape");
        Self { m, n_c, phase, data, tangents: Vec::new(), tangent_rhs_only: false }
    }

    /// Attaches tangent planes built from canonical tangent data `(dA, db, dc)`.
    pub(crate) fn attach_tangents(&mut self, planes: &[(Array2<f64>, ndarray::Array1<f64>, ndarray::Array1<f64>)]) {
        let (m, n_c) = (self.m, self.n_c);
        let rhs = self.rhs_col();
        self.tangents = planes
            .iter()
            .map(|(da, db, dc)| {
                let mut d = Array2::zeros(self.data.dim());
                for r in 0..m {
                    for j in 0..n_c {
                        d[[r, j]] = da[[r, j]];
                        d[[m + 1, j]] -= da[[r, j]];
                    }
                    d[[r, rhs]] = db[r];
                    d[[m + 1, rhs]] -= db[r];
                }
                for j in 0..n_c {
                    d[[m, j]] = dc[j];
                }
                d
            })
            .collect();
        self.tangent_rhs_only = self.tangents.iter().all(|d| d.indexed_iter().all(|((_, j), &v)| j == rhs || v == 0.0));
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub fn rhs_col(&self) -> usize {
        self.n_c + self.m
    }

    /// Full allocation, including parts phase two ignores.
    pub fn entries(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn get(&self, r: usize, j: usize) -> f64 {
        self.data[[r, j]]
    }

    pub fn tangent_planes(&self) -> &[Array2<f64>] {
        &self.tangents
    }

    /// Row holding the reduced costs for the current phase.
    pub fn cost_row(&self) -> usize {
        match self.phase {
            Phase::One => self.m + 1,
            Phase::Two => self.m,
        }
    }

    /// Columns that may enter the basis in the current phase.
    pub fn candidate_cols(&self) -> Range<usize> {
        match self.phase {
            Phase::One => 0..self.n_c + self.m,
            Phase::Two => 0..self.n_c,
        }
    }

    /// Rows touched by a pivot in the current phase.
    pub(crate) fn active_rows(&self) -> Range<usize> {
        match self.phase {
            Phase::One => 0..self.m + 2,
            Phase::Two => 0..self.m + 1,
        }
    }

    /// Column ranges touched by a pivot in the current phase.
    pub(crate) fn active_col_ranges(&self) -> [Range<usize>; 2] {
        let rhs = self.rhs_col();
        match self.phase {
            Phase::One => [0..rhs + 1, 0..0],
            Phase::Two => [0..self.n_c, rhs..rhs + 1],
        }
    }

    /// Objective value `z` of the original cost row.
    pub fn objective_value(&self) -> f64 {
        -self.data[[self.m, self.rhs_col()]]
    }

    /// Auxiliary objective `w` (sum of auxiliary variables).
    pub fn aux_objective_value(&self) -> f64 {
        -self.data[[self.m + 1, self.rhs_col()]]
    }

    /// Pointer to the backing allocation; stable for the whole solve.
    pub fn allocation_ptr(&self) -> *const f64 {
        self.data.as_ptr()
    }
}
