//! Two-phase tableau simplex on a fixed-shape tableau.
//!
//! Entering variables follow Bland's rule. The ratio test breaks ties by the
//! smallest basic-variable index; in phase two rows still held by an
//! auxiliary variable win ties first, which is the same Bland discipline under
//! an ordering that lists auxiliaries before structural columns (auxiliaries
//! never enter in phase two).
//!
//! Between the phases, every row whose basic variable is a lingering
//! auxiliary is replaced by its elementwise absolute value
//! ([`mark_aux_rows`]). Such a row has a zero rhs, so any entering column with
//! a positive entry there gives it a zero ratio and the auxiliary leaves the
//! basis on that pivot. This way dependent constraints never require
//! dropping rows or columns.

mod tableau;

pub use tableau::{Phase, Tableau};

use ndarray::Array1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp_core::{self, canonicalize, CanonicalLP, GeneralLP, LpError};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// A reduced cost below `-eps_opt` is improving.
    pub eps_opt: f64,
    /// Pivot entries must exceed this magnitude.
    pub eps_piv: f64,
    /// Phase-one infeasibility threshold and constraint tolerance.
    pub eps_feas: f64,
    /// Total pivot budget; `None` means `50 * (n_c + m)`.
    pub max_iters: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { eps_opt: 1e-9, eps_piv: 1e-9, eps_feas: 1e-7, max_iters: None }
    }
}

impl SolverConfig {
    pub fn iteration_cap(&self, n_c: usize, m: usize) -> usize {
        self.max_iters.unwrap_or(50 * (n_c + m))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimplexError {
    #[error("pivot entry at ({row}, {col}) is too small")]
    PivotTooSmall { row: usize, col: usize },
}

/// Basic variable per constraint row (0-based column indices). Auxiliary
/// variables use indices `n_c..n_c + m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSet(pub Vec<usize>);

impl BasisSet {
    /// The all-auxiliary starting basis.
    pub fn auxiliary(n_c: usize, m: usize) -> Self {
        Self((n_c..n_c + m).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Rows still held by auxiliary variables.
    pub fn aux_rows(&self, n_c: usize) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(move |(_, &v)| v >= n_c).map(|(r, _)| r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStatus {
    pub feasible: bool,
    pub bounded: bool,
    pub success: bool,
    pub iterations: usize,
    pub hit_iteration_cap: bool,
}

impl SolveStatus {
    fn new(feasible: bool, bounded: bool, iterations: usize, hit_iteration_cap: bool) -> Self {
        Self { feasible, bounded, success: feasible && bounded && !hit_iteration_cap, iterations, hit_iteration_cap }
    }
}

/// One pivot of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PivotRecord {
    pub phase: Phase,
    pub row: usize,
    pub entering: usize,
    pub leaving: usize,
    /// The exit row's rhs was (numerically) zero, so the step was degenerate.
    pub zero_ratio: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveTrace {
    pub pivots: Vec<PivotRecord>,
    /// Auxiliary variables still basic when phase one ended.
    pub lingering_aux: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    /// Optimal point in original variables; zeros unless `status.success`.
    pub x: Array1<f64>,
    /// Optimal objective; zero unless `status.success`.
    pub fun: f64,
    pub tableau: Tableau,
    pub basis: BasisSet,
    pub status: SolveStatus,
    pub trace: SolveTrace,
}

/// Result of the ratio test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ratio {
    Row(usize),
    Unbounded,
}

/// Bland's rule: the smallest candidate column with a reduced cost below
/// `-eps_opt`.
pub fn select_entering(t: &Tableau, cfg: &SolverConfig) -> Option<usize> {
    let row = t.cost_row();
    t.candidate_cols().find(|&j| t.get(row, j) < -cfg.eps_opt)
}

/// Minimum-ratio row for entering column `col`, over rows with an entry above
/// `eps_piv`. Ties go to the smallest basic-variable index (in phase two,
/// auxiliary-held rows first).
pub fn ratio_test(t: &Tableau, basis: &BasisSet, col: usize, cfg: &SolverConfig) -> Ratio {
    let rhs = t.rhs_col();
    let n_c = t.n_c();
    let mut best: Option<(f64, usize)> = None;
    for r in 0..t.m() {
        let a = t.get(r, col);
        if a <= cfg.eps_piv {
            continue;
        }
        let ratio = t.get(r, rhs).max(0.0) / a;
        best = match best {
            None => Some((ratio, r)),
            Some((br, bi)) => {
                let tol = 1e-12 * (1.0 + br.abs());
                if ratio < br - tol {
                    Some((ratio, r))
                } else if ratio <= br + tol && tie_key(t, basis, r, n_c) < tie_key(t, basis, bi, n_c) {
                    Some((ratio.min(br), r))
                } else {
                    Some((br, bi))
                }
            }
        };
    }
    match best {
        Some((_, r)) => Ratio::Row(r),
        None => Ratio::Unbounded,
    }
}

fn tie_key(t: &Tableau, basis: &BasisSet, r: usize, n_c: usize) -> (bool, usize) {
    let v = basis.0[r];
    match t.phase() {
        Phase::One => (false, v),
        Phase::Two => (v < n_c, v),
    }
}

/// Gauss-Jordan pivot on `(row, col)`: scales the row to a unit pivot and
/// eliminates `col` from every other active row. Tangent planes follow the
/// same row operations.
pub fn pivot(
    t: &mut Tableau,
    basis: &mut BasisSet,
    row: usize,
    col: usize,
    cfg: &SolverConfig,
) -> Result<(), SimplexError> {
    let p = t.data[[row, col]];
    if p.abs() <= cfg.eps_piv {
        return Err(SimplexError::PivotTooSmall { row, col });
    }
    let rows = t.active_rows();
    let ranges = t.active_col_ranges();
    let cols = t.data.ncols();
    let k = t.tangents.len();
    let rhs = t.rhs_col();
    let tangent_ranges = if t.tangent_rhs_only { [rhs..rhs + 1, 0..0] } else { ranges.clone() };

    let data = t.data.as_slice_mut().expect("standard layout");
    for range in ranges.iter() {
        for j in range.clone() {
            data[row * cols + j] /= p;
        }
    }
    let prow: Vec<f64> = data[row * cols..(row + 1) * cols].to_vec();

    let mut dprows = Vec::with_capacity(k);
    for plane in t.tangents.iter_mut() {
        let d = plane.as_slice_mut().expect("standard layout");
        let dp = d[row * cols + col];
        for range in tangent_ranges.iter() {
            for j in range.clone() {
                d[row * cols + j] = (d[row * cols + j] - prow[j] * dp) / p;
            }
        }
        dprows.push(d[row * cols..(row + 1) * cols].to_vec());
    }

    for r in rows {
        if r == row {
            continue;
        }
        let f = data[r * cols + col];
        for (plane, dprow) in t.tangents.iter_mut().zip(dprows.iter()) {
            let d = plane.as_slice_mut().expect("standard layout");
            let df = d[r * cols + col];
            if f == 0.0 && df == 0.0 {
                continue;
            }
            for range in tangent_ranges.iter() {
                for j in range.clone() {
                    d[r * cols + j] -= df * prow[j] + f * dprow[j];
                }
            }
            d[r * cols + col] = 0.0;
        }
        if f == 0.0 {
            continue;
        }
        for range in ranges.iter() {
            for j in range.clone() {
                data[r * cols + j] -= f * prow[j];
            }
        }
        data[r * cols + col] = 0.0;
    }
    data[row * cols + col] = 1.0;
    for plane in t.tangents.iter_mut() {
        plane[[row, col]] = 0.0;
    }
    basis.0[row] = col;
    Ok(())
}

/// How an iteration loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopEnd {
    Optimal,
    Unbounded,
    IterationCap,
}

/// Pivots under Bland's rule until optimal, unbounded, or `budget` pivots.
fn iterate(
    t: &mut Tableau,
    basis: &mut BasisSet,
    cfg: &SolverConfig,
    budget: usize,
    trace: &mut SolveTrace,
) -> LoopEnd {
    let mut used = 0;
    let rhs = t.rhs_col();
    loop {
        let Some(col) = select_entering(t, cfg) else {
            return LoopEnd::Optimal;
        };
        if used == budget {
            return LoopEnd::IterationCap;
        }
        let row = match ratio_test(t, basis, col, cfg) {
            Ratio::Row(r) => r,
            Ratio::Unbounded => return LoopEnd::Unbounded,
        };
        let leaving = basis.0[row];
        let zero_ratio = t.get(row, rhs) <= cfg.eps_feas;
        pivot(t, basis, row, col, cfg).expect("ratio test only returns pivotable rows");
        trace.pivots.push(PivotRecord { phase: t.phase(), row, entering: col, leaving, zero_ratio });
        used += 1;
    }
}

/// Output of [`phase_one`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOne {
    pub tableau: Tableau,
    pub basis: BasisSet,
    pub feasible: bool,
    pub hit_iteration_cap: bool,
    pub trace: SolveTrace,
}

/// Solves the auxiliary problem from the all-auxiliary basis.
pub fn phase_one(p: &CanonicalLP, cfg: &SolverConfig) -> PhaseOne {
    let mut t = Tableau::phase_one(p);
    let budget = cfg.iteration_cap(p.n_c(), p.m());
    let (basis, feasible, hit, trace) = run_phase_one(&mut t, cfg, budget);
    PhaseOne { tableau: t, basis, feasible, hit_iteration_cap: hit, trace }
}

fn run_phase_one(t: &mut Tableau, cfg: &SolverConfig, budget: usize) -> (BasisSet, bool, bool, SolveTrace) {
    let mut basis = BasisSet::auxiliary(t.n_c(), t.m());
    let mut trace = SolveTrace::default();
    t.set_phase(Phase::One);
    let end = iterate(t, &mut basis, cfg, budget, &mut trace);
    let hit = end == LoopEnd::IterationCap;
    let feasible = !hit && t.aux_objective_value() <= cfg.eps_feas;
    trace.lingering_aux = basis.0.iter().copied().filter(|&v| v >= t.n_c()).collect();
    (basis, feasible, hit, trace)
}

/// Replaces every row held by an auxiliary variable with its absolute value.
/// Returns the marked rows.
pub fn mark_aux_rows(t: &mut Tableau, basis: &BasisSet) -> Vec<usize> {
    let rows: Vec<usize> = basis.aux_rows(t.n_c()).collect();
    for &r in &rows {
        for plane in t.tangents.iter_mut() {
            for (d, &v) in plane.row_mut(r).iter_mut().zip(t.data.row(r).iter()) {
                if v < 0.0 {
                    *d = -*d;
                }
            }
        }
        t.data.row_mut(r).mapv_inplace(f64::abs);
    }
    rows
}

/// Output of [`phase_two`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseTwo {
    pub bounded: bool,
    pub hit_iteration_cap: bool,
    pub pivots: usize,
}

/// Optimizes the original objective on the phase-two view of `t`.
pub fn phase_two(
    t: &mut Tableau,
    basis: &mut BasisSet,
    cfg: &SolverConfig,
    budget: usize,
    trace: &mut SolveTrace,
) -> PhaseTwo {
    t.set_phase(Phase::Two);
    let before = trace.pivots.len();
    let end = iterate(t, basis, cfg, budget, trace);
    PhaseTwo {
        bounded: end != LoopEnd::Unbounded,
        hit_iteration_cap: end == LoopEnd::IterationCap,
        pivots: trace.pivots.len() - before,
    }
}

/// Raw result of a canonical solve, including tangents of the canonical
/// basic solution.
pub(crate) struct CanonicalSolve {
    pub tableau: Tableau,
    pub basis: BasisSet,
    pub status: SolveStatus,
    pub trace: SolveTrace,
}

pub(crate) fn solve_canonical(mut t: Tableau, cfg: &SolverConfig) -> CanonicalSolve {
    let cap = cfg.iteration_cap(t.n_c(), t.m());
    let (mut basis, feasible, hit, mut trace) = run_phase_one(&mut t, cfg, cap);
    let used = trace.pivots.len();
    let status = if !feasible {
        SolveStatus::new(false, true, used, hit)
    } else {
        mark_aux_rows(&mut t, &basis);
        let two = phase_two(&mut t, &mut basis, cfg, cap - used, &mut trace);
        SolveStatus::new(true, two.bounded, trace.pivots.len(), two.hit_iteration_cap)
    };
    CanonicalSolve { tableau: t, basis, status, trace }
}

/// Basic solution in canonical coordinates read from a tableau plane.
pub(crate) fn basic_solution(plane: &ndarray::Array2<f64>, basis: &BasisSet, n_c: usize, rhs: usize) -> Array1<f64> {
    let mut xc = Array1::zeros(n_c);
    for (r, &v) in basis.0.iter().enumerate() {
        if v < n_c {
            xc[v] = plane[[r, rhs]];
        }
    }
    xc
}

/// Solves `p` with default tolerances.
pub fn linprog(p: &GeneralLP) -> Result<SolveOutcome, LpError> {
    linprog_with(p, &SolverConfig::default())
}

/// Solves `p`. Solver pathologies are reported in `status`; only shape
/// errors are returned as `Err`.
pub fn linprog_with(p: &GeneralLP, cfg: &SolverConfig) -> Result<SolveOutcome, LpError> {
    let cp = canonicalize(p)?;
    let CanonicalSolve { tableau, basis, status, trace } = solve_canonical(Tableau::phase_one(&cp), cfg);
    let (x, fun) = if status.success {
        let xc = basic_solution(&tableau.data, &basis, cp.n_c(), tableau.rhs_col());
        let x = lp_core::recover(&cp.recovery, xc.view())?;
        let fun = p.c.dot(&x);
        (x, fun)
    } else {
        (Array1::zeros(p.n()), 0.0)
    };
    Ok(SolveOutcome { x, fun, tableau, basis, status, trace })
}

/// Solves every problem in `problems`, data-parallel when the `parallel`
/// feature is enabled. Output order matches input order and does not depend
/// on the number of workers.
pub fn solve_batch(problems: &[GeneralLP], cfg: &SolverConfig) -> Result<Vec<SolveOutcome>, LpError> {
    check_batch_shapes(problems)?;
    par::map(problems, |p| linprog_with(p, cfg)).into_iter().collect()
}

/// Sequential reference for [`solve_batch`].
pub fn solve_batch_sequential(problems: &[GeneralLP], cfg: &SolverConfig) -> Result<Vec<SolveOutcome>, LpError> {
    check_batch_shapes(problems)?;
    problems.iter().map(|p| linprog_with(p, cfg)).collect()
}

fn check_batch_shapes(problems: &[GeneralLP]) -> Result<(), LpError> {
    let Some(first) = problems.first() else {
        return Ok(());
    };
    let dims = |p: &GeneralLP| (p.n(), p.m_ub(), p.m_eq(), p.unbounded);
    if let Some(i) = problems.iter().position(|p| dims(p) != dims(first)) {
        return Err(LpError::DimensionMismatch(format!(
            "batch problem {i} has dimensions {:?}, expected {:?}",
            dims(&problems[i]),
            dims(first)
        )));
    }
    Ok(())
}
