use nalgebra::{DMatrix, DVector, Vector3};

use super::{ModelError, VelocityLcp};
use crate::lcp::{solve_lemke, FailureDump, LcpStatus, Residuals, SolverConfig};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct ModelSolution<T: Real> {
    pub z: DVector<T>,
    pub lambda_n: DVector<T>,
    pub lambda_t: DVector<T>,
    pub sigma: DVector<T>,
    /// Net contact wrench on the object, `J_O^T lambda`.
    pub f_o: Vector3<T>,
    /// Contact force on the manipulator, `J_M^T lambda`.
    pub f_m: DVector<T>,
    /// Object twist (or displacement when solving a time step).
    pub v_o: Vector3<T>,
    /// Manipulator velocity (or displacement).
    pub v_m: DVector<T>,
    /// `false` only when `c = 0` and the problem has no solution.
    pub feasible: bool,
    pub status: LcpStatus,
    pub pivots: usize,
    pub residuals: Residuals,
}

impl<T: Real> ModelSolution<T> {
    /// `[lambda_n; lambda_t]`.
    pub fn lambda(&self) -> DVector<T> {
        let k = self.lambda_n.len();
        DVector::from_fn(3 * k, |i, _| if i < k { self.lambda_n[i] } else { self.lambda_t[i - k] })
    }
}

/// Solves the assembled contact LCP and recovers forces and motions.
///
/// A secondary ray is reported as `feasible = false` when the manipulator
/// tracks its command exactly, and as [`ModelError::TheoremViolation`]
/// otherwise.
pub fn solve_instantaneous<T: Real>(
    lcp: &VelocityLcp<T>,
    config: &SolverConfig,
) -> Result<ModelSolution<T>, ModelError> {
    let k = lcp.k();
    if k == 0 {
        return Ok(recover(lcp, DVector::zeros(0), true, LcpStatus::Solved, 0, Residuals::default()));
    }
    let sol = solve_lemke(&lcp.problem, config)?;
    match sol.status {
        LcpStatus::Solved => Ok(recover(lcp, sol.z, true, sol.status, sol.pivots, sol.residuals)),
        LcpStatus::RayTermination if lcp.feedback.is_perfect_tracking() => {
            Ok(recover(lcp, sol.z, false, sol.status, sol.pivots, sol.residuals))
        }
        LcpStatus::RayTermination => Err(ModelError::TheoremViolation(Box::new(FailureDump::new(
            &lcp.problem,
            &sol.z,
        )))),
        LcpStatus::PivotLimit => Err(ModelError::PivotLimit(Box::new(FailureDump::new(
            &lcp.problem,
            &sol.z,
        )))),
    }
}

fn recover<T: Real>(
    lcp: &VelocityLcp<T>,
    z: DVector<T>,
    feasible: bool,
    status: LcpStatus,
    pivots: usize,
    residuals: Residuals,
) -> ModelSolution<T> {
    let k = lcp.k();
    let c = &lcp.contacts;
    let (f_o, f_m) = if k == 0 {
        (Vector3::zeros(), DVector::zeros(lcp.command.len()))
    } else {
        let lambda = z.rows(0, 3 * k).into_owned();
        let fo = c.j_o().transpose() * &lambda;
        (Vector3::new(fo[0], fo[1], fo[2]), c.j_m().transpose() * &lambda)
    };
    let v_o = lcp.a * f_o;
    let v_m = &lcp.command + lcp.feedback.scaled_gain() * &f_m;
    let block = |start: usize, len: usize| {
        if k == 0 {
            DVector::zeros(0)
        } else {
            z.rows(start, len).into_owned()
        }
    };
    ModelSolution {
        lambda_n: block(0, k),
        lambda_t: block(k, 2 * k),
        sigma: block(3 * k, k),
        z,
        f_o,
        f_m,
        v_o,
        v_m,
        feasible,
        status,
        pivots,
        residuals,
    }
}

/// Normal-gap rate `N_O v_O + N_M v_M` for each contact; non-negative for any
/// valid solution.
pub fn normal_rates<T: Real>(lcp: &VelocityLcp<T>, sol: &ModelSolution<T>) -> DVector<T> {
    let c = &lcp.contacts;
    let n_o = DMatrix::from_iterator(c.len(), 3, c.n_o.iter().copied());
    n_o * sol.v_o + &c.n_m * &sol.v_m
}

#[cfg(test)]
mod tests {
    use super::super::{assemble_velocity_lcp, FeedbackModel};
    use super::*;
    use crate::geometry::{contact_candidates, FingerBody, Pose2, Shape, World};
    use crate::lcp::brute_force_solve;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix3;

    fn head_on(c: f64) -> VelocityLcp<f64> {
        let world = World {
            object: Shape::Disk { radius: 1.0 },
            fingers: vec![FingerBody {
                shape: Shape::Point,
                mu: 0.5,
            }],
            statics: vec![],
        };
        let q_m = DVector::from_vec(vec![-1.0, 0.0]);
        let pose = Pose2::identity();
        let set = contact_candidates(&world, &pose, &q_m, 0.01).unwrap();
        assemble_velocity_lcp(
            &set,
            &Matrix3::identity(),
            &FeedbackModel::identity(2, c),
            &DVector::from_vec(vec![1.0, 0.0]),
        )
        .unwrap()
    }

    #[test]
    fn head_on_push_perfect_tracking() {
        let lcp = head_on(0.0);
        let s = solve_instantaneous(&lcp, &SolverConfig::default()).unwrap();
        assert!(s.feasible);
        assert_abs_diff_eq!(s.lambda_n[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.v_o, Vector3::new(1.0, 0.0, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(s.v_m, DVector::from_vec(vec![1.0, 0.0]), epsilon = 1e-12);
        assert_abs_diff_eq!(s.lambda_t.amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn head_on_push_unit_compliance() {
        let lcp = head_on(1.0);
        let s = solve_instantaneous(&lcp, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(s.lambda_n[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.v_o, Vector3::new(0.5, 0.0, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(s.v_m, DVector::from_vec(vec![0.5, 0.0]), epsilon = 1e-12);
        // sticking contact: the tangential pair can carry any equal split, so
        // the oracle sees several vertices that all agree on the normal force
        let oracle = brute_force_solve(&lcp.problem).unwrap();
        assert!(!oracle.is_empty());
        for o in &oracle {
            assert_abs_diff_eq!(o.z[0], 0.5, epsilon = 1e-10);
            assert_abs_diff_eq!(o.z[1] - o.z[2], 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn lcp_matrix_entries() {
        // k = 1: rows [n, t+, t-, sigma]
        let lcp = head_on(1.0);
        let m = lcp.problem.m();
        assert_eq!(m.nrows(), 4);
        // normal-normal: n A n^T + c n_M B n_M^T = 1 + 1
        assert_abs_diff_eq!(m[(0, 0)], 2.0, epsilon = 1e-15);
        // tangent rows see the disk's rotation: t = (0,1), r x t = -1
        assert_abs_diff_eq!(m[(1, 1)], 1.0 + 1.0 + 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 2)], -3.0, epsilon = 1e-15);
        assert_eq!(m[(1, 3)], 1.0);
        assert_eq!(m[(3, 0)], 0.5);
        assert_eq!(m[(3, 1)], -1.0);
        assert_eq!(m[(3, 3)], 0.0);
        assert_eq!(lcp.problem.q().as_slice(), &[-1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn empty_contact_set_passes_command_through() {
        let world = World {
            object: Shape::Disk { radius: 1.0 },
            fingers: vec![FingerBody {
                shape: Shape::Point,
                mu: 0.5,
            }],
            statics: vec![],
        };
        let q_m = DVector::from_vec(vec![-5.0, 0.0]);
        let pose = Pose2::identity();
        let set = contact_candidates(&world, &pose, &q_m, 0.01).unwrap();
        let v = DVector::from_vec(vec![0.3, -0.2]);
        let lcp = assemble_velocity_lcp(&set, &Matrix3::identity(), &FeedbackModel::identity(2, 0.5), &v).unwrap();
        let s = solve_instantaneous(&lcp, &SolverConfig::default()).unwrap();
        assert!(s.feasible);
        assert_eq!(s.v_o, Vector3::zeros());
        assert_eq!(s.v_m, v);
        assert!(s.z.is_empty());
    }

    #[test]
    fn dimension_checks() {
        let lcp = head_on(0.0);
        let err = assemble_velocity_lcp(
            &lcp.contacts,
            &Matrix3::identity(),
            &FeedbackModel::identity(3, 0.0),
            &DVector::zeros(2),
        );
        assert!(matches!(err, Err(ModelError::Dimension { .. })));
    }
}
