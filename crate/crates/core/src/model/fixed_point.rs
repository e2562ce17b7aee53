use nalgebra::{DVector, Vector3};

use super::{
    assemble_velocity_lcp, force_motion_matrix, solve_instantaneous, FeedbackModel, LimitSurface, ModelError,
    ModelSolution,
};
use crate::geometry::{body_twist_transform, ContactSet};
use crate::lcp::SolverConfig;
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct FixedPointSolution<T: Real> {
    pub solution: ModelSolution<T>,
    /// Relinearizations performed after the initial solve.
    pub iterations: usize,
    pub converged: bool,
}

/// Sequential linearization for a non-ellipsoidal limit surface: each LCP uses
/// the Hessian of `H` at the object wrench found by the previous one. The
/// first solve linearizes at the body-frame probe wrench `(1, 0, 0)`; later
/// ones at the normalized mean of the previous point and the latest wrench
/// direction.
#[allow(clippy::too_many_arguments)]
pub fn nonellipsoid_fixed_point<T: Real>(
    contacts: &ContactSet<T>,
    ls: &LimitSurface<T>,
    theta: T,
    feedback: &FeedbackModel<T>,
    v_star: &DVector<T>,
    max_iters: usize,
    tol: T,
    config: &SolverConfig,
) -> Result<FixedPointSolution<T>, ModelError> {
    let solve_at = |f_world: Option<&Vector3<T>>| -> Result<ModelSolution<T>, ModelError> {
        let f_body = f_world.map(|f| body_twist_transform(theta).0.transpose() * f);
        let a = force_motion_matrix(ls, theta, f_body.as_ref())?;
        let lcp = assemble_velocity_lcp(contacts, &a, feedback, v_star)?;
        solve_instantaneous(&lcp, config)
    };

    let mut current = solve_at(None)?;
    let mut lin: Option<Vector3<T>> = None;
    for j in 1..=max_iters {
        if !current.feasible {
            break;
        }
        if current.f_o.norm() <= tol {
            // no object wrench: the answer does not depend on the linearization
            return Ok(FixedPointSolution {
                solution: current,
                iterations: j - 1,
                converged: true,
            });
        }
        // averaging directions damps the period-two cycle plain substitution
        // falls into; fixed points are unchanged
        let dir = current.f_o.normalize();
        let target = match lin {
            Some(prev) if (prev + dir).norm() > T::lit(1e-6) => (prev + dir).normalize(),
            _ => dir,
        };
        lin = Some(target);
        let next = solve_at(Some(&target))?;
        let change = (next.f_o - current.f_o).norm();
        current = next;
        if change <= tol {
            return Ok(FixedPointSolution {
                solution: current,
                iterations: j,
                converged: true,
            });
        }
    }
    Ok(FixedPointSolution {
        solution: current,
        iterations: max_iters,
        converged: false,
    })
}
