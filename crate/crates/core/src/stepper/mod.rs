//! Impulse-based time stepping with fixed-point relinearization of the gap
//! functions.

mod step;
mod trajectory;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Pose2, World};
use crate::lcp::{FailureDump, SolverConfig};
use crate::model::{FeedbackModel, LimitSurface, ModelError};
use crate::scalar::Real;

pub use step::{assemble_timestep_lcp, step, StepResult};
pub use trajectory::{
    check_penetration, simulate, CommandSource, PenetrationReport, StepRecord, Termination, TerminationReason,
    Trajectory,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeStepConfig {
    /// Step length in seconds.
    pub h: f64,
    /// Upper bound on LCP solves per step; `1` disables relinearization.
    pub max_relin_iters: usize,
    /// Infinity-norm change in `(q_O, q_M)` accepted as a fixed point.
    pub relin_tol: f64,
    pub penetration_tol: f64,
    /// Gap below which a pair enters the step's contact set. `None` means
    /// `2 h |v*|`, floored at `penetration_tol`.
    pub activation_distance: Option<f64>,
    pub solver: SolverConfig,
    /// Keep going after a step that did not reach a fixed point.
    pub continue_on_unconverged: bool,
}

impl Default for TimeStepConfig {
    fn default() -> Self {
        Self::for_scalar::<f64>(0.025)
    }
}

impl TimeStepConfig {
    pub fn for_scalar<T: Real>(h: f64) -> Self {
        let eps = T::default_epsilon().to_f64_lossy();
        Self {
            h,
            max_relin_iters: 10,
            relin_tol: (100.0 * eps).max(1e-8),
            penetration_tol: 1e-4,
            activation_distance: None,
            solver: SolverConfig::for_scalar::<T>(),
            continue_on_unconverged: false,
        }
    }

    pub fn validate(&self) -> Result<(), StepError> {
        let bad = |m: &str| Err(StepError::InvalidConfig(m.to_string()));
        if !(self.h.is_finite() && self.h > 0.0) {
            return bad("h must be positive");
        }
        if self.max_relin_iters == 0 {
            return bad("max_relin_iters must be at least 1");
        }
        if !(self.relin_tol >= 0.0 && self.penetration_tol >= 0.0) {
            return bad("tolerances must be non-negative");
        }
        if let Some(d) = self.activation_distance {
            if !(d >= 0.0) {
                return bad("activation_distance must be non-negative");
            }
        }
        Ok(())
    }

    pub(crate) fn activation_for<T: Real>(&self, v_star: &DVector<T>) -> f64 {
        self.activation_distance
            .unwrap_or_else(|| (2.0 * self.h * v_star.norm().to_f64_lossy()).max(self.penetration_tol))
    }
}

/// Everything that stays fixed during a rollout.
#[derive(Clone, Debug)]
pub struct Plant<T: Real> {
    pub world: World<T>,
    pub limit_surface: LimitSurface<T>,
    pub feedback: FeedbackModel<T>,
}

impl<T: Real> Plant<T> {
    pub fn validate(&self) -> Result<(), StepError> {
        self.world.validate()?;
        self.limit_surface.validate()?;
        self.feedback.validate()?;
        let m = self.world.manipulator_dim();
        if self.feedback.dim() != m {
            return Err(StepError::InvalidConfig(format!(
                "feedback gain is {}x{} but the manipulator has {m} coordinates",
                self.feedback.dim(),
                self.feedback.dim()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct State<T: Real> {
    pub q_o: Pose2<T>,
    pub q_m: DVector<T>,
}

impl<T: Real> State<T> {
    pub fn new(q_o: Pose2<T>, q_m: DVector<T>) -> Self {
        Self { q_o, q_m }
    }

    /// `(x, y, theta, q_M...)`.
    pub fn stacked(&self) -> DVector<T> {
        let m = self.q_m.len();
        DVector::from_fn(3 + m, |i, _| match i {
            0 => self.q_o.x,
            1 => self.q_o.y,
            2 => self.q_o.theta,
            _ => self.q_m[i - 3],
        })
    }

    pub fn is_finite(&self) -> bool {
        self.q_o.is_finite() && self.q_m.iter().all(|x| x.is_finite())
    }
}

#[derive(Debug, Error)]
pub enum StepError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("infeasible start: gap {gap} is below -{tol}")]
    InfeasibleStart { gap: f64, tol: f64 },
    /// Perfect velocity tracking asked for a motion no contact forces allow.
    #[error("no feasible contact forces under perfect velocity tracking")]
    Infeasible(Box<FailureDump>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl StepError {
    pub fn dump(&self) -> Option<&FailureDump> {
        match self {
            StepError::Infeasible(d) => Some(d),
            StepError::Model(e) => e.dump(),
            _ => None,
        }
    }

    pub fn is_theorem_violation(&self) -> bool {
        matches!(self, StepError::Model(ModelError::TheoremViolation(_)))
    }
}
