//! Scene files, built-in benchmark scenes and the gain-sweep studies.

mod builtin;
mod commands;
mod studies;

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{FingerBody, GeometryError, Pose2, Shape, StaticBody, World};
use crate::model::{FeedbackModel, LimitSurface, ModelError};
use crate::scalar::Real;
use crate::stepper::{Plant, State, StepError, TimeStepConfig};

pub use builtin::{builtin_scene, BUILTIN_SCENES};
pub use commands::{CommandProfile, Segment};
pub use studies::{
    loglog_fit, pose_error, run_convergence_study, run_jamming_study, ConvergenceEntry, ConvergenceReport,
    JammingEntry, JammingReport, LogLogFit, StudyError, StudyOptions, StudyRun, FIT_ERROR_FLOOR,
};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("unknown scene '{0}'")]
    Unknown(String),
    #[error("scene parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error("infeasible initial configuration: gap {gap} below -{tol}")]
    InfeasibleStart { gap: f64, tol: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Step(#[from] StepError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub shape: Shape<f64>,
    pub pose: Pose2<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingerSpec {
    pub shape: Shape<f64>,
    /// `[x, y]`, or `[x, y, theta]` for polygonal fingers.
    pub q: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManipulatorSpec {
    pub fingers: Vec<FingerSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticSpec {
    pub shape: Shape<f64>,
    pub pose: Pose2<f64>,
}

/// Friction coefficients against the object, one per finger and static body.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrictionSpec {
    pub fingers: Vec<f64>,
    pub statics: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedGain {
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GainSpec {
    Named(NamedGain),
    Dense(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackSpec {
    #[serde(rename = "B")]
    pub b: GainSpec,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LimitSurfaceSpec {
    Ellipsoid {
        #[serde(rename = "A_tilde")]
        a_tilde: [[f64; 3]; 3],
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub h: f64,
    pub duration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation_distance: Option<f64>,
}

/// A complete simulation setup: bodies, gains, commands and step settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Some parameters are choices of this implementation rather than
    /// published values; `notes` lists them.
    #[serde(default)]
    pub reconstructed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub object: ObjectSpec,
    pub manipulator: ManipulatorSpec,
    pub statics: Vec<StaticSpec>,
    pub friction: FrictionSpec,
    pub feedback: FeedbackSpec,
    pub limit_surface: LimitSurfaceSpec,
    pub commands: CommandProfile,
    pub sim: SimSpec,
}

/// Initial gaps down to this depth are accepted.
pub const START_PENETRATION_TOL: f64 = 1e-4;

impl Scene {
    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let scene: Scene = serde_json::from_str(text)?;
        scene.validate()?;
        Ok(scene)
    }

    /// Canonical serialization: fixed field order, pretty-printed, trailing
    /// newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene serializes");
        s.push('\n');
        s
    }

    pub fn manipulator_dim(&self) -> usize {
        self.world::<f64>().manipulator_dim()
    }

    pub fn world<T: Real>(&self) -> World<T> {
        let mu = |v: &Vec<f64>, i: usize| T::lit(v.get(i).copied().unwrap_or(f64::NAN));
        World {
            object: self.object.shape.cast(),
            fingers: self
                .manipulator
                .fingers
                .iter()
                .enumerate()
                .map(|(i, f)| FingerBody {
                    shape: f.shape.cast(),
                    mu: mu(&self.friction.fingers, i),
                })
                .collect(),
            statics: self
                .statics
                .iter()
                .enumerate()
                .map(|(i, s)| StaticBody {
                    shape: s.shape.cast(),
                    pose: s.pose.cast(),
                    mu: mu(&self.friction.statics, i),
                })
                .collect(),
        }
    }

    pub fn gain_matrix<T: Real>(&self) -> DMatrix<T> {
        let m = self.manipulator_dim();
        match &self.feedback.b {
            GainSpec::Named(NamedGain::Identity) => DMatrix::identity(m, m),
            GainSpec::Dense(rows) => {
                let n = rows.len();
                let cols = rows.first().map_or(0, Vec::len);
                DMatrix::from_fn(n, cols, |i, j| T::lit(rows[i].get(j).copied().unwrap_or(f64::NAN)))
            }
        }
    }

    pub fn feedback_model<T: Real>(&self) -> FeedbackModel<T> {
        FeedbackModel {
            b: self.gain_matrix(),
            c: T::lit(self.feedback.c),
        }
    }

    pub fn limit_surface<T: Real>(&self) -> LimitSurface<T> {
        match &self.limit_surface {
            LimitSurfaceSpec::Ellipsoid { a_tilde } => {
                LimitSurface::Ellipsoid(Matrix3::from_fn(|i, j| T::lit(a_tilde[i][j])))
            }
        }
    }

    pub fn plant<T: Real>(&self) -> Plant<T> {
        Plant {
            world: self.world(),
            limit_surface: self.limit_surface(),
            feedback: self.feedback_model(),
        }
    }

    pub fn initial_state<T: Real>(&self) -> State<T> {
        let q: Vec<T> = self
            .manipulator
            .fingers
            .iter()
            .flat_map(|f| f.q.iter().map(|x| T::lit(*x)))
            .collect();
        State::new(self.object.pose.cast(), DVector::from_vec(q))
    }

    pub fn time_step_config<T: Real>(&self) -> TimeStepConfig {
        TimeStepConfig {
            activation_distance: self.sim.activation_distance,
            ..TimeStepConfig::for_scalar::<T>(self.sim.h)
        }
    }

    pub fn with_c(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.feedback.c = c;
        s
    }

    pub fn with_timing(&self, h: Option<f64>, duration: Option<f64>) -> Self {
        let mut s = self.clone();
        if let Some(h) = h {
            s.sim.h = h;
        }
        if let Some(d) = duration {
            s.sim.duration = d;
        }
        s
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |m: String| Err(SceneError::Invalid(m));
        let world = self.world::<f64>();
        world.validate()?;
        if self.friction.fingers.len() != self.manipulator.fingers.len() {
            return bad("friction.fingers needs one coefficient per finger".into());
        }
        if self.friction.statics.len() != self.statics.len() {
            return bad("friction.statics needs one coefficient per static body".into());
        }
        for (i, f) in self.manipulator.fingers.iter().enumerate() {
            let dof = world.fingers[i].dof();
            if f.q.len() != dof {
                return bad(format!("finger {i} needs {dof} coordinates, got {}", f.q.len()));
            }
        }
        if matches!(self.object.shape, Shape::Point) {
            return bad("the object needs an extent".into());
        }
        let m = world.manipulator_dim();
        let b = self.gain_matrix::<f64>();
        if b.nrows() != m || b.ncols() != m {
            return bad(format!("B must be {m}x{m}, got {}x{}", b.nrows(), b.ncols()));
        }
        self.feedback_model::<f64>().validate()?;
        self.limit_surface::<f64>().validate()?;
        self.commands.validate(m, self.sim.duration)?;
        self.time_step_config::<f64>().validate()?;
        let steps = (self.sim.duration / self.sim.h).round();
        if !(self.sim.duration >= 0.0) || (steps * self.sim.h - self.sim.duration).abs() > 1e-9 {
            return bad("sim.duration must be a whole number of steps".into());
        }
        let s0 = self.initial_state::<f64>();
        if let Some(g) = world
            .pair_gaps(&s0.q_o, &s0.q_m)?
            .into_iter()
            .map(|(_, g)| g)
            .reduce(f64::min)
        {
            if g < -START_PENETRATION_TOL {
                return Err(SceneError::InfeasibleStart {
                    gap: g,
                    tol: START_PENETRATION_TOL,
                });
            }
        }
        Ok(())
    }
}
