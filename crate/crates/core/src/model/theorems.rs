use nalgebra::{DMatrix, DVector};

use super::{min_eigenvalue, FeedbackModel, ModelError, ModelSolution, VelocityLcp};
use crate::geometry::ContactSet;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForceBound {
    pub holds: bool,
    /// `c ||F_M||`.
    pub lhs: f64,
    /// `||v*|| / lambda_min(B)`.
    pub rhs: f64,
}

const BOUND_EPS: f64 = 1e-8;

/// The manipulator's deviation from its command is bounded by the command
/// itself: `c ||F_M|| <= ||v*|| / lambda_min(B)`.
pub fn check_force_bound<T: Real>(
    sol: &ModelSolution<T>,
    feedback: &FeedbackModel<T>,
    v_star: &DVector<T>,
) -> Result<ForceBound, ModelError> {
    let lhs = (feedback.c * sol.f_m.norm()).to_f64_lossy();
    let rhs = if v_star.is_empty() {
        0.0
    } else {
        let lmin = min_eigenvalue(&feedback.b)?;
        if lmin <= T::zero() {
            return Err(ModelError::NotPositiveDefinite("feedback gain B"));
        }
        (v_star.norm() / lmin).to_f64_lossy()
    };
    Ok(ForceBound {
        holds: lhs <= rhs + BOUND_EPS * (1.0 + rhs),
        lhs,
        rhs,
    })
}

/// Distance of `lambda = [lambda_n; lambda_t]` from the set of admissible
/// internal forces: the worst of `||J_O^T lambda||_inf`, friction-cone
/// violation and sign violation.
pub fn internal_force_residual<T: Real>(contacts: &ContactSet<T>, lambda: &DVector<T>) -> Result<f64, ModelError> {
    let k = contacts.len();
    if lambda.len() != 3 * k {
        return Err(ModelError::Dimension {
            what: "contact force vector",
            expected: 3 * k,
            got: lambda.len(),
        });
    }
    if k == 0 {
        return Ok(0.0);
    }
    let wrench = contacts.j_o().transpose() * lambda;
    let ln = lambda.rows(0, k);
    let lt = lambda.rows(k, 2 * k);
    let cone = &contacts.mu * ln - contacts.e.transpose() * lt;
    let worst_neg = |v: &mut dyn Iterator<Item = T>| v.fold(0.0_f64, |acc, x| acc.max((-x).to_f64_lossy()));
    let r = wrench.amax().to_f64_lossy();
    let r = r.max(worst_neg(&mut cone.iter().copied()));
    Ok(r.max(worst_neg(&mut lambda.iter().copied())))
}

/// Term-by-term split of `z^T M z` for an assembled problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticSplit {
    pub quadratic: f64,
    /// `F_O^T A F_O`.
    pub object: f64,
    /// `c F_M^T B F_M`.
    pub manipulator: f64,
    /// `sigma^T mu lambda_n`.
    pub friction: f64,
}

impl QuadraticSplit {
    pub fn residual(&self) -> f64 {
        (self.quadratic - (self.object + self.manipulator + self.friction)).abs()
    }
}

/// Evaluates `z^T M z` and its three non-negative parts independently, from
/// the contact Jacobians rather than from `M`.
pub fn copositivity_decomposition<T: Real>(lcp: &VelocityLcp<T>, z: &DVector<T>) -> Result<QuadraticSplit, ModelError> {
    let k = lcp.k();
    if z.len() != 4 * k {
        return Err(ModelError::Dimension {
            what: "LCP vector",
            expected: 4 * k,
            got: z.len(),
        });
    }
    if k == 0 {
        return Ok(QuadraticSplit {
            quadratic: 0.0,
            object: 0.0,
            manipulator: 0.0,
            friction: 0.0,
        });
    }
    let c = &lcp.contacts;
    let lambda = z.rows(0, 3 * k).into_owned();
    let sigma = z.rows(3 * k, k).into_owned();
    let f_o = c.j_o().transpose() * &lambda;
    let f_m = c.j_m().transpose() * &lambda;
    let a = DMatrix::from_iterator(3, 3, lcp.a.iter().copied());
    let object = f_o.dot(&(a * &f_o));
    let manipulator = f_m.dot(&(&lcp.feedback.b * &f_m)) * lcp.feedback.c;
    let friction = sigma.dot(&(&c.mu * lambda.rows(0, k)));
    let quadratic = z.dot(&(lcp.problem.m() * z));
    Ok(QuadraticSplit {
        quadratic: quadratic.to_f64_lossy(),
        object: object.to_f64_lossy(),
        manipulator: manipulator.to_f64_lossy(),
        friction: friction.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{assemble_velocity_lcp, normal_rates, solve_instantaneous};
    use super::*;
    use crate::geometry::{contact_candidates, FingerBody, Pose2, Shape, World};
    use crate::lcp::{brute_force_solve_with, SolverConfig};
    use approx::assert_abs_diff_eq;
    use nalgebra::{Matrix3, Vector3};

    fn pinch(c: f64) -> VelocityLcp<f64> {
        let finger = || FingerBody {
            shape: Shape::Disk { radius: 0.05 },
            mu: 0.5,
        };
        let world = World {
            object: Shape::square(0.4),
            fingers: vec![finger(), finger(), finger(), finger()],
            statics: vec![],
        };
        let q_m = DVector::from_vec(vec![-0.25, 0.0, 0.25, 0.0, 0.0, -0.25, 0.0, 0.25]);
        let v = DVector::from_vec(vec![1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        let pose = Pose2::identity();
        let set = contact_candidates(&world, &pose, &q_m, 1e-3).unwrap();
        assert_eq!(set.len(), 4);
        assemble_velocity_lcp(&set, &Matrix3::identity(), &FeedbackModel::identity(8, c), &v).unwrap()
    }

    #[test]
    fn pinch_infeasible_under_perfect_tracking() {
        let s = solve_instantaneous(&pinch(0.0), &SolverConfig::default()).unwrap();
        assert!(!s.feasible);
        assert!(brute_force_solve_with(&pinch(0.0).problem, 16, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn pinch_with_compliance() {
        let lcp = pinch(0.01);
        let s = solve_instantaneous(&lcp, &SolverConfig::default()).unwrap();
        assert!(s.feasible);
        assert_abs_diff_eq!(s.v_o, Vector3::zeros(), epsilon = 1e-9);
        for i in 0..4 {
            assert_abs_diff_eq!(s.lambda_n[i], 100.0, epsilon = 1e-7);
        }
        assert_abs_diff_eq!(s.v_m.amax(), 0.0, epsilon = 1e-9);
        let oracle = brute_force_solve_with(&lcp.problem, 16, 1e-9).unwrap();
        assert!(!oracle.is_empty());
        for z in &oracle {
            for i in 0..4 {
                assert_abs_diff_eq!(z.z[i], 100.0, epsilon = 1e-7);
            }
        }

        let fb = check_force_bound(&s, &lcp.feedback, &lcp.command).unwrap();
        assert!(fb.holds);
        assert_abs_diff_eq!(fb.lhs, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fb.rhs, 2.0, epsilon = 1e-12);

        let scaled = s.lambda() * 0.01;
        assert!(internal_force_residual(&lcp.contacts, &scaled).unwrap() <= 1e-6);
    }

    #[test]
    fn head_on_bound_and_residual() {
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
        let v = DVector::from_vec(vec![1.0, 0.0]);
        let lcp = assemble_velocity_lcp(&set, &Matrix3::identity(), &FeedbackModel::identity(2, 1.0), &v).unwrap();
        let s = solve_instantaneous(&lcp, &SolverConfig::default()).unwrap();
        let fb = check_force_bound(&s, &lcp.feedback, &v).unwrap();
        assert!(fb.holds);
        assert_abs_diff_eq!(fb.lhs, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(fb.rhs, 1.0, epsilon = 1e-12);
        let r = internal_force_residual(&set, &(s.lambda() * 1.0)).unwrap();
        assert_abs_diff_eq!(r, 0.5, epsilon = 1e-12);
        assert!(normal_rates(&lcp, &s).iter().all(|&x| x >= -1e-12));

        let zero_cmd = DVector::zeros(2);
        let lcp0 = assemble_velocity_lcp(&set, &Matrix3::identity(), &FeedbackModel::identity(2, 1.0), &zero_cmd).unwrap();
        let s0 = solve_instantaneous(&lcp0, &SolverConfig::default()).unwrap();
        let fb0 = check_force_bound(&s0, &lcp0.feedback, &zero_cmd).unwrap();
        assert_eq!((fb0.lhs, fb0.rhs), (0.0, 0.0));
        assert!(fb0.holds);
        assert_eq!(internal_force_residual(&set, &DVector::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn decomposition_identity_on_pinch() {
        let lcp = pinch(0.3);
        for seed in 0..20u64 {
            let z = DVector::from_fn(16, |i, _| (((i as u64 + 1) * (seed + 7) * 2654435761) % 1000) as f64 / 100.0);
            let d = copositivity_decomposition(&lcp, &z).unwrap();
            assert!(d.residual() <= 1e-10 * (1.0 + z.norm_squared()));
            assert!(d.object >= 0.0 && d.manipulator >= 0.0 && d.friction >= 0.0);
        }
    }
}
