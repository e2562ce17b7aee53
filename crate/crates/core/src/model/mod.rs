//! Instantaneous quasi-static contact model.
//!
//! The object velocity follows the limit-surface force-motion map
//! `v_O = A F_O`, the manipulator deviates from its command in proportion to
//! the contact force it feels (`v_M = v* + c B F_M`), and point contacts obey
//! Coulomb complementarity. Together these form one LCP per instant.
//! `c = 0` recovers perfect velocity tracking.

mod assemble;
mod fixed_point;
mod limit_surface;
mod solve;
mod theorems;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeometryError;
use crate::lcp::{FailureDump, LcpError};
use crate::scalar::Real;

pub use assemble::{assemble_lcp_with_gap, assemble_velocity_lcp, VelocityLcp};
pub use fixed_point::{nonellipsoid_fixed_point, FixedPointSolution};
pub use limit_surface::{force_motion_matrix, GeneralLimitSurface, LimitSurface, PowerOfQuadratic};
pub use solve::{normal_rates, solve_instantaneous, ModelSolution};
pub use theorems::{
    check_force_bound, copositivity_decomposition, internal_force_residual, ForceBound, QuadraticSplit,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(&'static str),
    #[error("invalid feedback model: {0}")]
    InvalidFeedback(String),
    /// Lemke left on a ray although `c > 0` and `B` is positive definite, which
    /// the existence result rules out. Carries the full problem.
    #[error("ray termination with c > 0: existence guarantee violated")]
    TheoremViolation(Box<FailureDump>),
    #[error("LCP solver hit its pivot limit")]
    PivotLimit(Box<FailureDump>),
    #[error(transparent)]
    Lcp(#[from] LcpError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl ModelError {
    pub fn dump(&self) -> Option<&FailureDump> {
        match self {
            ModelError::TheoremViolation(d) | ModelError::PivotLimit(d) => Some(d),
            ModelError::Lcp(LcpError::VerificationFailed(d)) => Some(d),
            _ => None,
        }
    }
}

/// Manipulator feedback: the contact force is balanced by a feedback force
/// `-F_M = (1/c) B^-1 (v* - v_M)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FeedbackModel<T: Real> {
    /// Relative gain matrix, `m x m`.
    pub b: DMatrix<T>,
    /// Overall scaling; `0` means perfect velocity control.
    pub c: T,
}

impl<T: Real> FeedbackModel<T> {
    /// Validated constructor: `B` symmetric positive definite, `c >= 0`.
    pub fn new(b: DMatrix<T>, c: T) -> Result<Self, ModelError> {
        let fb = Self { b, c };
        fb.validate()?;
        Ok(fb)
    }

    pub fn identity(m: usize, c: T) -> Self {
        Self {
            b: DMatrix::identity(m, m),
            c,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.c.is_finite() && self.c >= T::zero()) {
            return Err(ModelError::InvalidFeedback("c must be finite and >= 0".into()));
        }
        if self.b.nrows() != self.b.ncols() {
            return Err(ModelError::InvalidFeedback("B must be square".into()));
        }
        if self.b.nrows() > 0 && min_eigenvalue(&self.b)? <= T::zero() {
            return Err(ModelError::NotPositiveDefinite("feedback gain B"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    /// `c B`.
    pub fn scaled_gain(&self) -> DMatrix<T> {
        &self.b * self.c
    }

    pub fn is_perfect_tracking(&self) -> bool {
        self.c == T::zero() || self.b.iter().all(|x| *x == T::zero())
    }

    pub fn with_c(&self, c: T) -> Self {
        Self { b: self.b.clone(), c }
    }
}

/// Smallest eigenvalue of a symmetric matrix; errors if it is not symmetric.
pub(crate) fn min_eigenvalue<T: Real>(m: &DMatrix<T>) -> Result<T, ModelError> {
    let scale = T::one() + m.amax();
    if (m - m.transpose()).amax() > T::lit(1e-10) * scale {
        return Err(ModelError::NotPositiveDefinite("matrix is not symmetric"));
    }
    let eig = SymmetricEigen::new(m.clone());
    Ok(eig.eigenvalues.iter().copied().fold(T::max_value().unwrap(), |a, b| if b < a { b } else { a }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feedback_validation() {
        assert!(FeedbackModel::new(DMatrix::<f64>::identity(4, 4), 0.0).is_ok());
        assert!(FeedbackModel::new(DMatrix::<f64>::identity(4, 4), -1.0).is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            FeedbackModel::new(indefinite, 1.0),
            Err(ModelError::NotPositiveDefinite(_))
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(FeedbackModel::new(asym, 1.0).is_err());
    }

    #[test]
    fn min_eig_of_diag() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 0.5, 2.0]));
        assert!((min_eigenvalue::<f64>(&m).unwrap() - 0.5).abs() < 1e-14);
    }
}
