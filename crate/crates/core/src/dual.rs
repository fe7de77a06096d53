//! Multi-direction forward-mode dual numbers.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::interval::IntervalError;
use crate::scalar::{Arith, Scalar};

/// `re + Σ eps[k] ε_k`. An empty `eps` is the zero tangent, so constants need
/// no knowledge of the tangent width.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dual {
    pub re: f64,
    pub eps: Vec<f64>,
}

impl Dual {
    pub fn constant(re: f64) -> Self {
        Self { re, eps: Vec::new() }
    }

    pub fn new(re: f64, eps: Vec<f64>) -> Self {
        Self { re, eps }
    }

    /// Seed for direction `k` out of `width`.
    pub fn variable(re: f64, k: usize, width: usize) -> Self {
        let mut eps = vec![0.0; width];
        eps[k] = 1.0;
        Self { re, eps }
    }

    pub fn width(&self) -> usize {
        self.eps.len()
    }

    /// Tangent component `k` (zero past the stored width).
    pub fn d(&self, k: usize) -> f64 {
        self.eps.get(k).copied().unwrap_or(0.0)
    }

    /// Applies a scalar function with derivative `df` at `re`.
    fn chain(self, re: f64, df: f64) -> Self {
        let mut eps = self.eps;
        eps.iter_mut().for_each(|e| *e *= df);
        Self { re, eps }
    }
}

/// `a * x + b * y` over tangents, treating missing entries as zero.
fn combine(a: f64, x: Vec<f64>, b: f64, y: &[f64]) -> Vec<f64> {
    let mut out = x;
    if out.len() < y.len() {
        out.resize(y.len(), 0.0);
    }
    for (i, o) in out.iter_mut().enumerate() {
        let yi = y.get(i).copied().unwrap_or(0.0);
        *o = a * *o + b * yi;
    }
    out
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual { re: self.re + rhs.re, eps: combine(1.0, self.eps, 1.0, &rhs.eps) }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual { re: self.re - rhs.re, eps: combine(1.0, self.eps, -1.0, &rhs.eps) }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        let re = self.re * rhs.re;
        Dual { re, eps: combine(rhs.re, self.eps, self.re, &rhs.eps) }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        let re = self.re / rhs.re;
        let inv = 1.0 / rhs.re;
        Dual { re, eps: combine(inv, self.eps, -re * inv, &rhs.eps) }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        let re = -self.re;
        self.chain(re, -1.0)
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(mut self, rhs: f64) -> Dual {
        self.re += rhs;
        self
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    fn sub(mut self, rhs: f64) -> Dual {
        self.re -= rhs;
        self
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, rhs: f64) -> Dual {
        let re = self.re * rhs;
        self.chain(re, rhs)
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    fn div(self, rhs: f64) -> Dual {
        let re = self.re / rhs;
        self.chain(re, 1.0 / rhs)
    }
}

impl Arith for Dual {
    fn cst(v: f64) -> Self {
        Dual::constant(v)
    }

    fn try_div(self, rhs: Self) -> Result<Self, IntervalError> {
        if rhs.re == 0.0 {
            Err(IntervalError::DivisionByZeroInterval)
        } else {
            Ok(self / rhs)
        }
    }

    fn sin(self) -> Self {
        let (s, c) = self.re.sin_cos();
        self.chain(s, c)
    }

    fn cos(self) -> Self {
        let (s, c) = self.re.sin_cos();
        self.chain(c, -s)
    }

    fn try_tan(self) -> Result<Self, IntervalError> {
        let t = self.re.tan();
        Ok(self.chain(t, 1.0 + t * t))
    }

    fn atan(self) -> Self {
        let re = self.re.atan();
        let d = 1.0 / (1.0 + self.re * self.re);
        self.chain(re, d)
    }

    fn powi(self, n: i32) -> Self {
        let re = self.re.powi(n);
        let d = if n == 0 { 0.0 } else { n as f64 * self.re.powi(n - 1) };
        self.chain(re, d)
    }
}

impl Scalar for Dual {
    fn value(&self) -> f64 {
        self.re
    }
}
