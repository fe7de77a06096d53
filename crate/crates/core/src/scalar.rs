//! Numeric abstractions shared by the reachability pipeline.
//!
//! [`Arith`] is what vector fields are written against; it is implemented by
//! plain numbers ([`f64`], [`Dual`](crate::dual::Dual)) for point evaluation
//! and by [`Interval`](crate::interval::Interval) for natural inclusion
//! functions. [`Scalar`] adds the operations that need a real ordering.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use crate::interval::IntervalError;

pub trait Arith:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn try_div(self, rhs: Self) -> Result<Self, IntervalError>;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn try_tan(self) -> Result<Self, IntervalError>;
    fn atan(self) -> Self;
    fn powi(self, n: i32) -> Self;
}

/// A real number, possibly carrying forward-mode tangents. All branching in
/// the pipeline is decided on [`Scalar::value`].
pub trait Scalar: Arith + Send + Sync + 'static {
    fn value(&self) -> f64;

    /// `max(self, 0)`; at exactly zero the tangent of `self` is kept.
    fn relu(self) -> Self {
        if self.value() >= 0.0 {
            self
        } else {
            Self::cst(0.0)
        }
    }

    fn max_by_value(self, other: Self) -> Self {
        if other.value() > self.value() {
            other
        } else {
            self
        }
    }

    fn min_by_value(self, other: Self) -> Self {
        if other.value() < self.value() {
            other
        } else {
            self
        }
    }
}

impl Arith for f64 {
    fn cst(v: f64) -> Self {
        v
    }

    fn try_div(self, rhs: Self) -> Result<Self, IntervalError> {
        if rhs == 0.0 {
            Err(IntervalError::DivisionByZeroInterval)
        } else {
            Ok(self / rhs)
        }
    }

    fn sin(self) -> Self {
        f64::sin(self)
    }

    fn cos(self) -> Self {
        f64::cos(self)
    }

    fn try_tan(self) -> Result<Self, IntervalError> {
        Ok(f64::tan(self))
    }

    fn atan(self) -> Self {
        f64::atan(self)
    }

    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
}
