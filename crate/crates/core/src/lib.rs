//! Quasi-static planar manipulation with compliant finger feedback.
//!
//! Numeric code is generic over [`scalar::Real`]; the aliases below fix the
//! scalar for the common cases.

pub mod geometry;
pub mod lcp;
pub mod model;
pub mod scalar;
pub mod scenes;
pub mod stepper;
pub mod verify;

pub use scalar::Real;

pub type LcpProblemF64 = lcp::LcpProblem<f64>;
pub type LcpSolutionF64 = lcp::LcpSolution<f64>;
pub type WorldF64 = geometry::World<f64>;
pub type Pose2F64 = geometry::Pose2<f64>;
pub type PlantF64 = stepper::Plant<f64>;
pub type StateF64 = stepper::State<f64>;
pub type TrajectoryF64 = stepper::Trajectory<f64>;
pub type ModelSolutionF64 = model::ModelSolution<f64>;

pub type LcpProblemF32 = lcp::LcpProblem<f32>;
pub type LcpSolutionF32 = lcp::LcpSolution<f32>;
pub type WorldF32 = geometry::World<f32>;
pub type Pose2F32 = geometry::Pose2<f32>;
pub type PlantF32 = stepper::Plant<f32>;
pub type StateF32 = stepper::State<f32>;
pub type TrajectoryF32 = stepper::Trajectory<f32>;
pub type ModelSolutionF32 = model::ModelSolution<f32>;
