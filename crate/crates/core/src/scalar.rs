//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar usable by the solver, geometry and simulation code.
///
/// Implemented for `f32` and `f64`. Tolerance defaults depend on the
/// precision, so they are provided here rather than hard-coded at call sites.
pub trait Real:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Feasibility / complementarity / linear-residual tolerance.
    const DEFAULT_TOL: f64;
    /// Pivot magnitude below which a tableau entry counts as zero.
    const PIVOT_TOL: f64;

    /// Lossy conversion from `f64`. Panics only on values the type cannot
    /// represent at all, which never happens for the finite constants used here.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const DEFAULT_TOL: f64 = 1e-9;
    const PIVOT_TOL: f64 = 1e-12;
}

impl Real for f32 {
    const DEFAULT_TOL: f64 = 1e-4;
    const PIVOT_TOL: f64 = 1e-6;
}
