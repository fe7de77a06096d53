//! Closed intervals and natural inclusion functions.
//!
//! Endpoints are any [`Scalar`], so intervals of dual numbers carry
//! tangents of their endpoints. Endpoint selection (min/max of candidate
//! products, extremum detection) is decided on primal values.
//!
//! Arithmetic uses round-to-nearest; enclosures are sound up to roundoff.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Arith, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("division by an interval containing zero")]
    DivisionByZeroInterval,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval<S = f64> {
    pub lo: S,
    pub hi: S,
}

pub type IntervalVector<S = f64> = Vec<Interval<S>>;

impl<S: Scalar> Interval<S> {
    /// Panics if `lo > hi`.
    pub fn new(lo: S, hi: S) -> Self {
        assert!(lo.value() <= hi.value(), "interval lo {:?} > hi {:?}", lo, hi);
        Self { lo, hi }
    }

    pub fn point(v: S) -> Self {
        Self { lo: v.clone(), hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi.value() - self.lo.value()
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo.value() <= v && v <= self.hi.value()
    }

    /// `self ⊆ other` on primal values.
    pub fn subset_of(&self, other: &Interval<S>) -> bool {
        other.lo.value() <= self.lo.value() && self.hi.value() <= other.hi.value()
    }

    /// Primal endpoints.
    pub fn values(&self) -> Interval<f64> {
        Interval { lo: self.lo.value(), hi: self.hi.value() }
    }

    fn from_candidates(cands: [S; 4]) -> Self {
        let mut lo = cands[0].clone();
        let mut hi = cands[0].clone();
        for c in cands.into_iter().skip(1) {
            if c.value() < lo.value() {
                lo = c.clone();
            }
            if c.value() > hi.value() {
                hi = c;
            }
        }
        Self { lo, hi }
    }

    /// Range of `f` over the interval for a `2π`-periodic `f` whose maximum
    /// is at `peak + 2kπ` and minimum at `peak + π + 2kπ`.
    fn periodic(self, f: impl Fn(S) -> S, peak: f64) -> Self {
        let (a, b) = (self.lo.value(), self.hi.value());
        if b - a >= TAU {
            return Self { lo: S::cst(-1.0), hi: S::cst(1.0) };
        }
        let contains_shift = |offset: f64| {
            let k = ((a - offset) / TAU).ceil();
            offset + k * TAU <= b
        };
        let fa = f(self.lo);
        let fb = f(self.hi);
        let (mut lo, mut hi) = if fa.value() <= fb.value() { (fa, fb) } else { (fb, fa) };
        if contains_shift(peak) {
            hi = S::cst(1.0);
        }
        if contains_shift(peak + PI) {
            lo = S::cst(-1.0);
        }
        Self { lo, hi }
    }

    pub fn sqr(self) -> Self {
        Arith::powi(self, 2)
    }
}

impl<S: Scalar> Add for Interval<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { lo: self.lo + rhs.lo, hi: self.hi + rhs.hi }
    }
}

impl<S: Scalar> Sub for Interval<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { lo: self.lo - rhs.hi, hi: self.hi - rhs.lo }
    }
}

impl<S: Scalar> Mul for Interval<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::from_candidates([
            self.lo.clone() * rhs.lo.clone(),
            self.lo * rhs.hi.clone(),
            self.hi.clone() * rhs.lo,
            self.hi * rhs.hi,
        ])
    }
}

impl<S: Scalar> Neg for Interval<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { lo: -self.hi, hi: -self.lo }
    }
}

impl<S: Scalar> Add<f64> for Interval<S> {
    type Output = Self;
    fn add(self, rhs: f64) -> Self {
        Self { lo: self.lo + rhs, hi: self.hi + rhs }
    }
}

impl<S: Scalar> Sub<f64> for Interval<S> {
    type Output = Self;
    fn sub(self, rhs: f64) -> Self {
        Self { lo: self.lo - rhs, hi: self.hi - rhs }
    }
}

impl<S: Scalar> Mul<f64> for Interval<S> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        if rhs >= 0.0 {
            Self { lo: self.lo * rhs, hi: self.hi * rhs }
        } else {
            Self { lo: self.hi * rhs, hi: self.lo * rhs }
        }
    }
}

impl<S: Scalar> Arith for Interval<S> {
    fn cst(v: f64) -> Self {
        Interval::point(S::cst(v))
    }

    fn try_div(self, rhs: Self) -> Result<Self, IntervalError> {
        if rhs.lo.value() <= 0.0 && rhs.hi.value() >= 0.0 {
            return Err(IntervalError::DivisionByZeroInterval);
        }
        let q = |a: S, b: S| a.try_div(b);
        Ok(Self::from_candidates([
            q(self.lo.clone(), rhs.lo.clone())?,
            q(self.lo, rhs.hi.clone())?,
            q(self.hi.clone(), rhs.lo)?,
            q(self.hi, rhs.hi)?,
        ]))
    }

    fn sin(self) -> Self {
        self.periodic(Arith::sin, FRAC_PI_2)
    }

    fn cos(self) -> Self {
        self.periodic(Arith::cos, 0.0)
    }

    fn try_tan(self) -> Result<Self, IntervalError> {
        let (a, b) = (self.lo.value(), self.hi.value());
        let k = ((a - FRAC_PI_2) / PI).ceil();
        if b - a >= PI || FRAC_PI_2 + k * PI <= b {
            return Err(IntervalError::DomainError(format!("tan over [{a}, {b}] crosses a pole")));
        }
        Ok(Self { lo: self.lo.try_tan()?, hi: self.hi.try_tan()? })
    }

    fn atan(self) -> Self {
        Self { lo: self.lo.atan(), hi: self.hi.atan() }
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::cst(1.0);
        }
        if n < 0 {
            // not needed by any supported field
            unimplemented!("negative interval powers");
        }
        if n % 2 == 1 {
            return Self { lo: self.lo.powi(n), hi: self.hi.powi(n) };
        }
        let (a, b) = (self.lo.value(), self.hi.value());
        if a >= 0.0 {
            Self { lo: self.lo.powi(n), hi: self.hi.powi(n) }
        } else if b <= 0.0 {
            Self { lo: self.hi.powi(n), hi: self.lo.powi(n) }
        } else {
            let hi = if -a >= b { self.lo.powi(n) } else { self.hi.powi(n) };
            Self { lo: S::cst(0.0), hi }
        }
    }
}

/// Exact range of `M v` for a real matrix and an interval vector.
pub fn mat_vec<S: Scalar>(m: ArrayView2<f64>, v: &[Interval<S>]) -> Result<IntervalVector<S>, IntervalError> {
    if m.ncols() != v.len() {
        return Err(IntervalError::DimensionMismatch(format!(
            "matrix has {} columns, vector has {} components",
            m.ncols(),
            v.len()
        )));
    }
    Ok(m.rows()
        .into_iter()
        .map(|row| {
            let mut acc = Interval::<S>::cst(0.0);
            for (&a, x) in row.iter().zip(v) {
                if a != 0.0 {
                    acc = acc + x.clone() * a;
                }
            }
            acc
        })
        .collect())
}

/// A vector field `f(x, u, w)` written once against [`Arith`] so that it can
/// be evaluated pointwise or as its natural interval extension.
pub trait VectorField: Sync {
    fn state_dim(&self) -> usize;
    fn input_dim(&self) -> usize;
    fn disturbance_dim(&self) -> usize;
    fn eval<T: Arith>(&self, x: &[T], u: &[T], w: &[T]) -> Result<Vec<T>, IntervalError>;
}

/// Natural inclusion of `f` over `x × {u} × w`.
pub fn inclusion<S: Scalar, F: VectorField>(
    f: &F,
    x: &[Interval<S>],
    u: &[S],
    w: &[Interval<S>],
) -> Result<IntervalVector<S>, IntervalError> {
    let u: Vec<Interval<S>> = u.iter().cloned().map(Interval::point).collect();
    inclusion_boxed_input(f, x, &u, w)
}

/// Natural inclusion of `f` with an interval-valued input.
pub fn inclusion_boxed_input<S: Scalar, F: VectorField>(
    f: &F,
    x: &[Interval<S>],
    u: &[Interval<S>],
    w: &[Interval<S>],
) -> Result<IntervalVector<S>, IntervalError> {
    if x.len() != f.state_dim() || u.len() != f.input_dim() || w.len() != f.disturbance_dim() {
        return Err(IntervalError::DimensionMismatch(format!(
            "field expects ({}, {}, {}), got ({}, {}, {})",
            f.state_dim(),
            f.input_dim(),
            f.disturbance_dim(),
            x.len(),
            u.len(),
            w.len()
        )));
    }
    f.eval(x, u, w)
}
