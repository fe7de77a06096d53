//! Demo vector fields and their liftings.
//!
//! Every field takes an additive disturbance `w` on `ẋ`, so
//! `disturbance_dim == state_dim`.

use ndarray::{array, concatenate, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::interval::{IntervalError, VectorField};
use crate::scalar::Arith;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DemoSystem {
    /// Second-order kinematic bicycle, state `(p_x, p_y, φ, v)`, input
    /// `(acceleration, steering angle)`.
    Bicycle { lf: f64, lr: f64 },
    /// `ẋ₁ = μ(x₁ − x₁³/3 − x₂)`, `ẋ₂ = x₁/μ`.
    VanDerPol { mu: f64 },
    /// `ẋ = u`.
    Integrator { dim: usize },
    /// `ẋ = A x`, input-free.
    Linear { a: Vec<Vec<f64>> },
}

impl DemoSystem {
    pub fn bicycle() -> Self {
        DemoSystem::Bicycle { lf: 1.0, lr: 1.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DemoSystem::Bicycle { .. } => "bicycle",
            DemoSystem::VanDerPol { .. } => "van_der_pol",
            DemoSystem::Integrator { .. } => "integrator",
            DemoSystem::Linear { .. } => "linear",
        }
    }
}

impl VectorField for DemoSystem {
    fn state_dim(&self) -> usize {
        match self {
            DemoSystem::Bicycle { .. } => 4,
            DemoSystem::VanDerPol { .. } => 2,
            DemoSystem::Integrator { dim } => *dim,
            DemoSystem::Linear { a } => a.len(),
        }
    }

    fn input_dim(&self) -> usize {
        match self {
            DemoSystem::Bicycle { .. } => 2,
            DemoSystem::VanDerPol { .. } | DemoSystem::Linear { .. } => 0,
            DemoSystem::Integrator { dim } => *dim,
        }
    }

    fn disturbance_dim(&self) -> usize {
        self.state_dim()
    }

    fn eval<T: Arith>(&self, x: &[T], u: &[T], w: &[T]) -> Result<Vec<T>, IntervalError> {
        let f = match self {
            DemoSystem::Bicycle { lf, lr } => bicycle(*lf, *lr, x, u)?,
            DemoSystem::VanDerPol { mu } => vanderpol(*mu, x),
            DemoSystem::Integrator { .. } => u.to_vec(),
            DemoSystem::Linear { a } => a
                .iter()
                .map(|row| row.iter().zip(x).fold(T::cst(0.0), |acc, (&aij, xj)| acc + xj.clone() * aij))
                .collect(),
        };
        Ok(f.into_iter().zip(w).map(|(fi, wi)| fi + wi.clone()).collect())
    }
}

fn bicycle<T: Arith>(lf: f64, lr: f64, x: &[T], u: &[T]) -> Result<Vec<T>, IntervalError> {
    let (phi, v) = (x[2].clone(), x[3].clone());
    let beta = (u[1].clone().try_tan()? * (lf / (lf + lr))).atan();
    let heading = phi + beta.clone();
    Ok(vec![v.clone() * heading.clone().cos(), v.clone() * heading.sin(), v * beta.sin() * (1.0 / lr), u[0].clone()])
}

fn vanderpol<T: Arith>(mu: f64, x: &[T]) -> Vec<T> {
    let (x1, x2) = (x[0].clone(), x[1].clone());
    vec![(x1.clone() - x1.clone().powi(3) * (1.0 / 3.0) - x2) * mu, x1 * (1.0 / mu)]
}

/// Point evaluation of the bicycle with unit wheelbase halves.
pub fn bicycle_field(x: &[f64], u: &[f64], w: &[f64]) -> Vec<f64> {
    DemoSystem::bicycle().eval(x, u, w).expect("tan is total on points")
}

pub fn vanderpol_field(x: &[f64], mu: f64) -> Vec<f64> {
    DemoSystem::VanDerPol { mu }.eval(x, &[], &[0.0, 0.0]).expect("polynomial field")
}

/// `H = [I₄; H₂]` with sum/difference rows pairing each position with the
/// heading, and `H⁺ = [I₄ 0]`.
pub fn bicycle_lifting() -> (Array2<f64>, Array2<f64>) {
    let h2 = array![[1.0, 0.0, 1.0, 0.0], [1.0, 0.0, -1.0, 0.0], [0.0, 1.0, 1.0, 0.0], [0.0, 1.0, -1.0, 0.0]];
    stack_identity(h2)
}

/// `H = [I₂; H₂]` with `H₂ = [1 1; 1 −1]`, and `H⁺ = [I₂ 0]`.
pub fn vanderpol_lifting() -> (Array2<f64>, Array2<f64>) {
    stack_identity(array![[1.0, 1.0], [1.0, -1.0]])
}

fn stack_identity(h2: Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let n = h2.ncols();
    let eye = Array2::eye(n);
    let h = concatenate(Axis(0), &[eye.view(), h2.view()]).expect("same width");
    let h_plus = concatenate(Axis(1), &[eye.view(), Array2::zeros((n, h2.nrows())).view()]).expect("same height");
    (h, h_plus)
}
