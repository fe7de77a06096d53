//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use itertools::Itertools;
use lpreach::GeneralLP;
use ndarray::{s, Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const PIVOT_TOL: f64 = 1e-10;
pub const FEAS_TOL: f64 = 1e-9;

/// Solves the square system `a z = b` by Gaussian elimination with partial
/// pivoting; `None` when a pivot falls below `PIVOT_TOL`.
pub fn solve_square(mut a: Array2<f64>, mut b: Array1<f64>) -> Option<Array1<f64>> {
    let n = a.nrows();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[[i, k]].abs().total_cmp(&a[[j, k]].abs()))?;
        if a[[p, k]].abs() < PIVOT_TOL {
            return None;
        }
        if p != k {
            for j in 0..n {
                a.swap([k, j], [p, j]);
            }
            b.swap(k, p);
        }
        for i in k + 1..n {
            let f = a[[i, k]] / a[[k, k]];
            if f != 0.0 {
                for j in k..n {
                    a[[i, j]] -= f * a[[k, j]];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut z = Array1::zeros(n);
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[[k, j]] * z[j]).sum();
        z[k] = (b[k] - s) / a[[k, k]];
    }
    Some(z)
}

/// Rows of `[m | b]` that form a basis of its row space, or `None` when the
/// system `m z = b` is inconsistent.
pub fn independent_rows(m: &Array2<f64>, b: &Array1<f64>) -> Option<Vec<usize>> {
    let (rows, cols) = m.dim();
    let mut a = Array2::zeros((rows, cols + 1));
    a.slice_mut(s![.., ..cols]).assign(m);
    a.column_mut(cols).assign(b);
    let scale = 1.0 + a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut order: Vec<usize> = (0..rows).collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).max_by(|&i, &j| a[[i, col]].abs().total_cmp(&a[[j, col]].abs())) else {
            break;
        };
        if a[[p, col]].abs() < 1e-9 * scale {
            continue;
        }
        for j in 0..=cols {
            a.swap([rank, j], [p, j]);
        }
        order.swap(rank, p);
        for i in 0..rows {
            if i != rank {
                let f = a[[i, col]] / a[[rank, col]];
                for j in 0..=cols {
                    a[[i, j]] -= f * a[[rank, j]];
                }
            }
        }
        rank += 1;
    }
    if (rank..rows).any(|i| a[[i, cols]].abs() > 1e-9 * scale) {
        return None;
    }
    Some(order[..rank].to_vec())
}

/// Basic feasible solutions of `{z ≥ 0 : m z = b}` (rows already
/// independent): every nonsingular basis with a nonnegative solution.
pub fn basic_feasible_solutions(m: &Array2<f64>, b: &Array1<f64>) -> Vec<(Vec<usize>, Array1<f64>)> {
    let (r, n) = m.dim();
    let mut out = Vec::new();
    for basis in (0..n).combinations(r) {
        let a = Array2::from_shape_fn((r, r), |(i, j)| m[[i, basis[j]]]);
        let Some(zb) = solve_square(a, b.clone()) else { continue };
        if zb.iter().all(|&v| v >= -FEAS_TOL) {
            let mut z = Array1::zeros(n);
            for (k, &j) in basis.iter().enumerate() {
                z[j] = zb[k].max(0.0);
            }
            out.push((basis, z));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleStatus {
    Infeasible,
    Unbounded,
    Optimal(f64),
}

/// Standard form `[A_ub I; A_eq 0] z = b`, `z ≥ 0`, with costs `[c; 0]`.
/// Free variables are split into `x⁺ − x⁻`.
pub fn standard_form(p: &GeneralLP) -> (Array2<f64>, Array1<f64>, Array1<f64>) {
    let (n, m_ub, m_eq) = (p.n(), p.m_ub(), p.m_eq());
    let nx = if p.unbounded { 2 * n } else { n };
    let cols = nx + m_ub;
    let mut m = Array2::zeros((m_ub + m_eq, cols));
    let mut c = Array1::zeros(cols);
    for j in 0..n {
        c[j] = p.c[j];
        if p.unbounded {
            c[n + j] = -p.c[j];
        }
        for i in 0..m_ub {
            m[[i, j]] = p.a_ub[[i, j]];
            if p.unbounded {
                m[[i, n + j]] = -p.a_ub[[i, j]];
            }
        }
        for i in 0..m_eq {
            m[[m_ub + i, j]] = p.a_eq[[i, j]];
            if p.unbounded {
                m[[m_ub + i, n + j]] = -p.a_eq[[i, j]];
            }
        }
    }
    for i in 0..m_ub {
        m[[i, nx + i]] = 1.0;
    }
    let b = ndarray::concatenate![ndarray::Axis(0), p.b_ub, p.b_eq];
    (m, b, c)
}

/// Exhaustive vertex enumeration. The LP is unbounded when the normalized
/// recession cone `{d ≥ 0 : m d = 0, 1ᵀd = 1}` has a vertex with `c·d < 0`.
pub fn bfs_oracle(p: &GeneralLP) -> OracleStatus {
    let (m, b, c) = standard_form(p);
    let Some(rows) = independent_rows(&m, &b) else {
        return OracleStatus::Infeasible;
    };
    let mr = m.select(ndarray::Axis(0), &rows);
    let br = b.select(ndarray::Axis(0), &rows);
    let vertices = basic_feasible_solutions(&mr, &br);
    if vertices.is_empty() {
        return OracleStatus::Infeasible;
    }
    let cols = m.ncols();
    let mut cone = Array2::zeros((mr.nrows() + 1, cols));
    cone.slice_mut(s![..mr.nrows(), ..]).assign(&mr);
    cone.row_mut(mr.nrows()).fill(1.0);
    let mut cb = Array1::zeros(mr.nrows() + 1);
    cb[mr.nrows()] = 1.0;
    // an inconsistent cone system means 1ᵀd = 0 on the null space, so the
    // only recession direction is d = 0
    if let Some(cone_rows) = independent_rows(&cone, &cb) {
        let cone = cone.select(ndarray::Axis(0), &cone_rows);
        let cb = cb.select(ndarray::Axis(0), &cone_rows);
        if basic_feasible_solutions(&cone, &cb).iter().any(|(_, d)| c.dot(d) < -1e-9) {
            return OracleStatus::Unbounded;
        }
    }
    OracleStatus::Optimal(vertices.iter().map(|(_, z)| c.dot(z)).fold(f64::INFINITY, f64::min))
}

/// Vertex objective values of a bounded, feasible LP (with multiplicity
/// per basis), and the optimal vertex's basic values.
pub fn vertex_values(p: &GeneralLP) -> Option<Vec<(f64, Array1<f64>)>> {
    let (m, b, c) = standard_form(p);
    let rows = independent_rows(&m, &b)?;
    let mr = m.select(ndarray::Axis(0), &rows);
    let br = b.select(ndarray::Axis(0), &rows);
    let v: Vec<(f64, Array1<f64>)> = basic_feasible_solutions(&mr, &br)
        .into_iter()
        .map(|(basis, z)| (c.dot(&z), z.select(ndarray::Axis(0), &basis)))
        .collect();
    (!v.is_empty()).then_some(v)
}

/// Optimal vertex of an LP whose optimum is unique and nondegenerate with
/// margin `delta`: every basic value and the gap to the next vertex exceed it.
pub fn is_nondegenerate(p: &GeneralLP, delta: f64) -> bool {
    if !matches!(bfs_oracle(p), OracleStatus::Optimal(_)) {
        return false;
    }
    let Some(mut v) = vertex_values(p) else { return false };
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (best, zb) = &v[0];
    zb.iter().all(|&z| z > delta) && v.get(1).is_none_or(|(next, _)| next - best > delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Plain,
    Duplicated,
    Infeasible,
    Unbounded,
}

/// A seeded random LP of the given kind, `x ≥ 0`, `n ≤ 6`, at most 8 rows.
/// `Duplicated` also returns the instance before rows were copied.
pub fn random_lp(rng: &mut ChaCha8Rng, kind: Kind) -> (GeneralLP, Option<GeneralLP>) {
    let n: usize = rng.gen_range(1..=6);
    let extra = match kind {
        Kind::Duplicated => rng.gen_range(1..=3),
        Kind::Infeasible => 1,
        _ => 0,
    };
    let rows = rng.gen_range(1..=8 - extra);
    let m_eq = rng.gen_range(0..=rows.min(n.saturating_sub(1)).min(2));
    let bound_row = kind != Kind::Unbounded && rng.gen_bool(0.8);
    let m_ub = rows - m_eq - (bound_row && rows > m_eq) as usize;
    let sparse = kind == Kind::Duplicated && rng.gen_bool(0.5);
    // a sparse feasible point makes phase one end on degenerate vertices
    let x0 = Array1::from_shape_fn(n, |_| if sparse && rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..1.0) });
    let mut a_ub = Array2::from_shape_fn((m_ub, n), |_| rng.gen_range(-1.0..1.0));
    let mut a_eq = Array2::from_shape_fn((m_eq, n), |_| rng.gen_range(-1.0..1.0));
    let mut c = Array1::from_shape_fn(n, |_| rng.gen_range(-1.0..1.0));
    if kind == Kind::Unbounded {
        // e_j is a recession direction that decreases the objective
        let j = rng.gen_range(0..n);
        a_ub.column_mut(j).mapv_inplace(|v: f64| -v.abs());
        a_eq.column_mut(j).fill(0.0);
        c[j] = -rng.gen_range(0.1..1.0);
    }
    let slack = if sparse { 0.0 } else { 1.0 };
    let mut b_ub = a_ub.dot(&x0) + Array1::from_shape_fn(m_ub, |_| slack * rng.gen_range(0.0..1.0));
    let b_eq = a_eq.dot(&x0);
    if bound_row && rows > m_eq {
        a_ub.push_row(Array1::ones(n).view()).unwrap();
        b_ub = ndarray::concatenate![ndarray::Axis(0), b_ub, Array1::from_elem(1, 2.0 * n as f64)];
    }
    let base = GeneralLP::new(c).with_ub(a_ub, b_ub).with_eq(a_eq, b_eq);
    match kind {
        Kind::Plain | Kind::Unbounded => (base, None),
        Kind::Infeasible => (make_infeasible(rng, &base), None),
        Kind::Duplicated => (duplicate_rows(rng, &base, extra), Some(base)),
    }
}

fn make_infeasible(rng: &mut ChaCha8Rng, p: &GeneralLP) -> GeneralLP {
    let n = p.n();
    let mut q = p.clone();
    if p.m_eq() > 0 && rng.gen_bool(0.5) {
        // the same equality row with a shifted right-hand side
        let i = rng.gen_range(0..p.m_eq());
        q.a_eq.push_row(p.a_eq.row(i)).unwrap();
        q.b_eq = ndarray::concatenate![ndarray::Axis(0), q.b_eq, Array1::from_elem(1, p.b_eq[i] + 1.0)];
    } else {
        // sum of nonnegative variables below zero
        q.a_ub.push_row(Array1::ones(n).view()).unwrap();
        q.b_ub = ndarray::concatenate![ndarray::Axis(0), q.b_ub, Array1::from_elem(1, -rng.gen_range(0.1..1.0))];
    }
    q
}

fn duplicate_rows(rng: &mut ChaCha8Rng, p: &GeneralLP, extra: usize) -> GeneralLP {
    let mut q = p.clone();
    for _ in 0..extra {
        let eq = p.m_eq() > 0 && (p.m_ub() == 0 || rng.gen_bool(0.5));
        if eq {
            let mut row = Array1::zeros(p.n());
            let mut rhs = 0.0;
            // a scaled copy or a combination of two rows
            for _ in 0..rng.gen_range(1..=2) {
                let i = rng.gen_range(0..p.m_eq());
                let s = if rng.gen_bool(0.5) { 1.0 } else { rng.gen_range(-2.0..2.0) };
                row = row + &p.a_eq.row(i) * s;
                rhs += p.b_eq[i] * s;
            }
            q.a_eq.push_row(row.view()).unwrap();
            q.b_eq = ndarray::concatenate![ndarray::Axis(0), q.b_eq, Array1::from_elem(1, rhs)];
        } else {
            let i = rng.gen_range(0..p.m_ub());
            let s = if rng.gen_bool(0.5) { 1.0 } else { rng.gen_range(0.5..2.0) };
            q.a_ub.push_row((&p.a_ub.row(i) * s).view()).unwrap();
            q.b_ub = ndarray::concatenate![ndarray::Axis(0), q.b_ub, Array1::from_elem(1, p.b_ub[i] * s)];
        }
    }
    q
}

/// Classical RK4 step for `ẋ = f(x)`.
pub fn rk4_step(f: &impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> Vec<f64> {
    let add = |a: &[f64], b: &[f64], s: f64| a.iter().zip(b).map(|(x, y)| x + s * y).collect::<Vec<_>>();
    let k1 = f(x);
    let k2 = f(&add(x, &k1, h / 2.0));
    let k3 = f(&add(x, &k2, h / 2.0));
    let k4 = f(&add(x, &k3, h));
    (0..x.len()).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// States at `t = k·dt`, `k = 0..=steps`, with `sub` RK4 substeps per step.
pub fn rk4_path(f: &impl Fn(&[f64]) -> Vec<f64>, x0: &[f64], dt: f64, steps: usize, sub: usize) -> Vec<Vec<f64>> {
    let mut out = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    for _ in 0..steps {
        for _ in 0..sub {
            x = rk4_step(f, &x, dt / sub as f64);
        }
        out.push(x.clone());
    }
    out
}

pub fn vanderpol(mu: f64) -> impl Fn(&[f64]) -> Vec<f64> {
    move |x: &[f64]| vec![mu * (x[0] - x[0].powi(3) / 3.0 - x[1]), x[0] / mu]
}

/// Vertices of `{x : lo ≤ Hx ≤ hi}` by intersecting every `n`-subset of the
/// `2m` bounding hyperplanes.
pub fn polytope_vertices(h: &Array2<f64>, lo: &[f64], hi: &[f64]) -> Vec<Array1<f64>> {
    let (m, n) = h.dim();
    let planes: Vec<(usize, f64)> = (0..m).flat_map(|i| [(i, lo[i]), (i, hi[i])]).collect();
    let scale = 1.0 + lo.iter().chain(hi).fold(0.0f64, |a, v| a.max(v.abs()));
    let mut out: Vec<Array1<f64>> = Vec::new();
    for pick in (0..planes.len()).combinations(n) {
        let a = Array2::from_shape_fn((n, n), |(r, j)| h[[planes[pick[r]].0, j]]);
        let b = Array1::from_shape_fn(n, |r| planes[pick[r]].1);
        let Some(x) = solve_square(a, b) else { continue };
        let y = h.dot(&x);
        if (0..m).all(|i| y[i] >= lo[i] - 1e-9 * scale && y[i] <= hi[i] + 1e-9 * scale)
            && !out.iter().any(|v| (v - &x).iter().all(|d| d.abs() < 1e-12 * scale))
        {
            out.push(x);
        }
    }
    out
}

/// `count` points of the polytope with the given vertices: the vertices
/// themselves, then random convex combinations.
pub fn polytope_samples(rng: &mut ChaCha8Rng, vertices: &[Array1<f64>], count: usize) -> Vec<Array1<f64>> {
    if vertices.is_empty() {
        return Vec::new();
    }
    let n = vertices[0].len();
    let mut out: Vec<Array1<f64>> = vertices.iter().take(count).cloned().collect();
    while out.len() < count {
        let w: Vec<f64> = vertices.iter().map(|_| -rng.gen_range(1e-12f64..1.0).ln()).collect();
        let total: f64 = w.iter().sum();
        let mut x = Array1::zeros(n);
        for (v, wi) in vertices.iter().zip(&w) {
            x = x + v * (wi / total);
        }
        out.push(x);
    }
    out
}
