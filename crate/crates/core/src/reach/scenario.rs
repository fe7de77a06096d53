//! Scenario files: everything a demo run needs, as JSON.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::embedding::{EmbeddingState, Feedback, FeedforwardTable, LiftedSystem};
use super::safety::{NudgeConfig, ObstacleSpec};
use super::systems::{bicycle_lifting, vanderpol_lifting, DemoSystem};
use super::ReachError;
use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxSpec {
    pub fn around(center: &[f64], half: &[f64]) -> Self {
        Self {
            lo: center.iter().zip(half).map(|(c, h)| c - h).collect(),
            hi: center.iter().zip(half).map(|(c, h)| c + h).collect(),
        }
    }

    pub fn intervals(&self) -> Result<Vec<Interval>, ReachError> {
        if self.lo.len() != self.hi.len() {
            return Err(ReachError::InvalidConfig("box lo and hi differ in length".into()));
        }
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&lo, &hi)| {
                if lo <= hi {
                    Ok(Interval { lo, hi })
                } else {
                    Err(ReachError::InvalidConfig(format!("box has lo {lo} > hi {hi}")))
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackSpec {
    pub k: Vec<Vec<f64>>,
    pub x_nom: FeedforwardTable<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub system: DemoSystem,
    pub h: Vec<Vec<f64>>,
    pub h_plus: Vec<Vec<f64>>,
    pub initial_box: BoxSpec,
    #[serde(default)]
    pub disturbance_box: Option<BoxSpec>,
    pub u_ff: FeedforwardTable<f64>,
    #[serde(default)]
    pub feedback: Option<FeedbackSpec>,
    #[serde(default)]
    pub obstacle: Option<ObstacleSpec>,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_iters")]
    pub max_outer_iters: usize,
}

fn default_eta() -> f64 {
    NudgeConfig::default().eta
}

fn default_iters() -> usize {
    NudgeConfig::default().max_outer_iters
}

fn rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn matrix(name: &str, rows: &[Vec<f64>]) -> Result<Array2<f64>, ReachError> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(ReachError::InvalidConfig(format!("{name} has ragged rows")));
    }
    Ok(Array2::from_shape_fn((rows.len(), ncols), |(i, j)| rows[i][j]))
}

/// Start of the bicycle demo: `(p_x, p_y, φ, v)`.
pub const BICYCLE_X0: [f64; 4] = [8.0, 7.0, -2.0 / std::f64::consts::PI, 2.0];

/// Self-contained nominal input for the bicycle demo: light braking, hard
/// right steering for the first `0.4` of the segments, then straight. The
/// nominal path swings past the obstacle and its tube clips it.
pub fn bicycle_fallback_nominal(segments: usize, period: f64) -> FeedforwardTable<f64> {
    let turn = (segments as f64 * 0.4).round() as usize;
    let values = (0..segments).map(|k| vec![-0.1, if k < turn { -1.0 } else { 0.0 }]).collect();
    FeedforwardTable { period, values }
}

impl Scenario {
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Van der Pol demo from the box `x₁ ∈ [0.9, 1.1]`, `x₂ ∈ [−0.1, 0.1]`
    /// with the sum/difference lifting.
    pub fn vanderpol(mu: f64, horizon: f64, dt: f64) -> Self {
        let (h, hp) = vanderpol_lifting();
        Scenario {
            system: DemoSystem::VanDerPol { mu },
            h: rows(&h),
            h_plus: rows(&hp),
            initial_box: BoxSpec { lo: vec![0.9, -0.1], hi: vec![1.1, 0.1] },
            disturbance_box: None,
            u_ff: FeedforwardTable { period: horizon, values: Vec::new() },
            feedback: None,
            obstacle: None,
            dt,
            horizon,
            eta: default_eta(),
            max_outer_iters: default_iters(),
        }
    }

    /// Bicycle demo with the fallback nominal input and the circular
    /// obstacle at `(4, 4)` of radius 3.
    pub fn bicycle() -> Self {
        let (h, hp) = bicycle_lifting();
        let horizon = 2.5;
        let segments = 10;
        Scenario {
            system: DemoSystem::bicycle(),
            h: rows(&h),
            h_plus: rows(&hp),
            initial_box: BoxSpec::around(&BICYCLE_X0, &[0.05, 0.05, 0.01, 0.01]),
            disturbance_box: None,
            u_ff: bicycle_fallback_nominal(segments, horizon / segments as f64),
            feedback: None,
            obstacle: Some(ObstacleSpec::circle(4.0, 4.0, 3.0)),
            dt: 5e-3,
            horizon,
            eta: default_eta(),
            max_outer_iters: default_iters(),
        }
    }

    /// `ẋ = u` from `[0.4, 0.6]` next to an obstacle interval `[−0.5, 0.5]`,
    /// with zero nominal input.
    pub fn integrator_toy() -> Self {
        Scenario {
            system: DemoSystem::Integrator { dim: 1 },
            h: vec![vec![1.0]],
            h_plus: vec![vec![1.0]],
            initial_box: BoxSpec { lo: vec![0.4], hi: vec![0.6] },
            disturbance_box: None,
            u_ff: FeedforwardTable::constant(0.5, 2, &[0.0]),
            feedback: None,
            obstacle: Some(ObstacleSpec { center: vec![0.0], radius: 0.5, coords: vec![0] }),
            dt: 0.1,
            horizon: 1.0,
            // gradients here are O(0.1), far smaller than for the bicycle
            eta: 5.0,
            max_outer_iters: default_iters(),
        }
    }

    pub fn lifted_system(&self) -> Result<LiftedSystem<DemoSystem>, ReachError> {
        let h = matrix("H", &self.h)?;
        let hp = matrix("H⁺", &self.h_plus)?;
        let mut sys = LiftedSystem::new(self.system.clone(), h, hp)?;
        if let Some(w) = &self.disturbance_box {
            let w = w.intervals()?;
            if w.len() != sys.state_dim() {
                return Err(ReachError::InvalidConfig("disturbance box has the wrong dimension".into()));
            }
            sys = sys.with_disturbance(w);
        }
        if let Some(fb) = &self.feedback {
            sys = sys.with_feedback(Feedback { k: matrix("K", &fb.k)?, x_nom: fb.x_nom.clone() });
        }
        Ok(sys)
    }

    pub fn initial_state(&self) -> Result<EmbeddingState<f64>, ReachError> {
        let sys = self.lifted_system()?;
        let x = self.initial_box.intervals()?;
        if x.len() != sys.state_dim() {
            return Err(ReachError::InvalidConfig("initial box has the wrong dimension".into()));
        }
        sys.initial_state(&x)
    }

    pub fn nudge_config(&self) -> NudgeConfig {
        NudgeConfig { eta: self.eta, max_outer_iters: self.max_outer_iters, dt: self.dt, horizon: self.horizon }
    }
}
