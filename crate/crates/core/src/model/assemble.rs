use nalgebra::{DMatrix, DVector, Matrix3};

use super::{FeedbackModel, ModelError};
use crate::geometry::ContactSet;
use crate::lcp::LcpProblem;
use crate::scalar::Real;

/// The contact LCP together with what is needed to map its solution back to
/// forces and motions.
///
/// Unknowns are `z = [lambda_n (k); lambda_t (2k); sigma (k)]`. The same
/// structure serves both the instantaneous velocity problem and the
/// time-stepping problem; in the latter `command` is the commanded
/// displacement `h v*` and `gap` is the (effective) gap vector.
#[derive(Clone, Debug)]
pub struct VelocityLcp<T: Real> {
    pub problem: LcpProblem<T>,
    pub contacts: ContactSet<T>,
    /// World-frame force-motion matrix.
    pub a: Matrix3<T>,
    pub feedback: FeedbackModel<T>,
    pub command: DVector<T>,
    pub gap: Option<DVector<T>>,
}

impl<T: Real> VelocityLcp<T> {
    pub fn k(&self) -> usize {
        self.contacts.len()
    }
}

/// Instantaneous problem: `q = [N_M v*; T_M v*; 0]`.
pub fn assemble_velocity_lcp<T: Real>(
    contacts: &ContactSet<T>,
    a: &Matrix3<T>,
    feedback: &FeedbackModel<T>,
    v_star: &DVector<T>,
) -> Result<VelocityLcp<T>, ModelError> {
    assemble_lcp_with_gap(contacts, a, feedback, v_star, None)
}

/// General assembly; with `gap = Some(phi)` the normal rows of `q` gain `phi`.
pub fn assemble_lcp_with_gap<T: Real>(
    contacts: &ContactSet<T>,
    a: &Matrix3<T>,
    feedback: &FeedbackModel<T>,
    command: &DVector<T>,
    gap: Option<&DVector<T>>,
) -> Result<VelocityLcp<T>, ModelError> {
    let m = contacts.manipulator_dim();
    let k = contacts.len();
    if feedback.dim() != m {
        return Err(ModelError::Dimension {
            what: "feedback gain B",
            expected: m,
            got: feedback.dim(),
        });
    }
    if command.len() != m {
        return Err(ModelError::Dimension {
            what: "manipulator command",
            expected: m,
            got: command.len(),
        });
    }
    if let Some(g) = gap {
        if g.len() != k {
            return Err(ModelError::Dimension {
                what: "gap vector",
                expected: k,
                got: g.len(),
            });
        }
    }
    let problem = if k == 0 {
        LcpProblem::empty()
    } else {
        let a_dyn = DMatrix::from_iterator(3, 3, a.iter().copied());
        let cb = feedback.scaled_gain();
        let j_o = contacts.j_o();
        let j_m = contacts.j_m();
        let top = &j_o * a_dyn * j_o.transpose() + &j_m * cb * j_m.transpose();

        let n = 4 * k;
        let mut mat = DMatrix::zeros(n, n);
        mat.view_mut((0, 0), (3 * k, 3 * k)).copy_from(&top);
        mat.view_mut((k, 3 * k), (2 * k, k)).copy_from(&contacts.e);
        mat.view_mut((3 * k, 0), (k, k)).copy_from(&contacts.mu);
        mat.view_mut((3 * k, k), (k, 2 * k)).copy_from(&(-contacts.e.transpose()));

        let mut q = DVector::zeros(n);
        let qn = &contacts.n_m * command;
        let qt = &contacts.t_m * command;
        q.rows_mut(0, k).copy_from(&qn);
        if let Some(g) = gap {
            q.rows_mut(0, k).zip_apply(g, |x, y| *x += y);
        }
        q.rows_mut(k, 2 * k).copy_from(&qt);
        LcpProblem::new(mat, q)?
    };
    Ok(VelocityLcp {
        problem,
        contacts: contacts.clone(),
        a: *a,
        feedback: feedback.clone(),
        command: command.clone(),
        gap: gap.cloned(),
    })
}
