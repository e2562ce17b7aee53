use std::time::Instant;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{Plant, State, StepError, TimeStepConfig};
use crate::geometry::{body_twist_transform, contact_candidates, contact_jacobians, BodyRef, Contact, ContactSet, Pose2};
use crate::lcp::FailureDump;
use crate::model::{
    assemble_lcp_with_gap, force_motion_matrix, solve_instantaneous, FeedbackModel, LimitSurface, ModelSolution,
    VelocityLcp,
};
use crate::scalar::Real;

/// Outcome of one time step. Impulses carry the limit-surface scale factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StepResult<T: Real> {
    pub dq_o: Vector3<T>,
    pub dq_m: DVector<T>,
    pub p_n: DVector<T>,
    pub p_t: DVector<T>,
    /// Gaps of the step's contacts at the start of the step.
    pub phi_minus: DVector<T>,
    /// Gaps of the same contact features re-evaluated at the end of the step.
    pub phi_plus: DVector<T>,
    pub contacts: Vec<BodyRef>,
    /// Relinearizations performed after the first solve.
    pub relin_iters: usize,
    pub converged: bool,
    pub pivots: usize,
    /// Wall-clock time spent in LCP solves.
    #[serde(skip)]
    pub solve_seconds: f64,
}

impl<T: Real> StepResult<T> {
    pub fn k(&self) -> usize {
        self.contacts.len()
    }

    pub fn apply(&self, state: &State<T>) -> State<T> {
        State {
            q_o: Pose2::new(
                state.q_o.x + self.dq_o[0],
                state.q_o.y + self.dq_o[1],
                state.q_o.theta + self.dq_o[2],
            ),
            q_m: &state.q_m + &self.dq_m,
        }
    }
}

/// Impulse LCP for one step: the velocity problem's matrix with the commanded
/// displacement `h v*` in place of `v*` and the start-of-step gaps added to
/// the normal rows.
pub fn assemble_timestep_lcp<T: Real>(
    contacts: &ContactSet<T>,
    a: &Matrix3<T>,
    feedback: &FeedbackModel<T>,
    v_star: &DVector<T>,
    h: T,
    penetration_tol: T,
) -> Result<VelocityLcp<T>, StepError> {
    if let Some(g) = contacts.min_gap() {
        if g < -penetration_tol {
            return Err(StepError::InfeasibleStart {
                gap: g.to_f64_lossy(),
                tol: penetration_tol.to_f64_lossy(),
            });
        }
    }
    Ok(assemble_lcp_with_gap(contacts, a, feedback, &(v_star * h), Some(&contacts.phi))?)
}

/// Advances one step of length `config.h` under the constant command `v_star`.
///
/// The contact set is detected once at the start of the step. Each pass
/// relinearizes the gaps (and the force-motion map) about the latest
/// end-of-step estimate; the step has converged when that estimate stops
/// moving by more than `relin_tol`. Features that the converged end state
/// penetrates but the detected set lacks are added and the step is redone.
pub fn step<T: Real>(
    plant: &Plant<T>,
    state: &State<T>,
    v_star: &DVector<T>,
    config: &TimeStepConfig,
) -> Result<StepResult<T>, StepError> {
    config.validate()?;
    let world = &plant.world;
    let m = world.manipulator_dim();
    if v_star.len() != m {
        return Err(StepError::InvalidConfig(format!(
            "command has {} entries, manipulator has {m} coordinates",
            v_star.len()
        )));
    }
    let tol = config.penetration_tol;
    if let Some(g) = world
        .pair_gaps(&state.q_o, &state.q_m)?
        .into_iter()
        .map(|(_, g)| g.to_f64_lossy())
        .reduce(f64::min)
    {
        if g < -tol {
            return Err(StepError::InfeasibleStart { gap: g, tol });
        }
    }

    let activation = T::lit(config.activation_for(v_star));
    let mut features = contact_candidates(world, &state.q_o, &state.q_m, activation)?.contacts;
    let q_minus = state.stacked();
    let mut stats = SolveStats::default();
    let mut rounds = 0;
    let (sol, q_plus, converged) = loop {
        let (sol, q_plus, converged) = relinearize(plant, &features, &q_minus, v_star, config, &mut stats)?;
        if !converged || rounds == MAX_FEATURE_ROUNDS {
            break (sol, q_plus, converged);
        }
        // features the frozen set missed (a round body slipping past a corner)
        let (pose, q_m) = split(&q_plus);
        let missed: Vec<_> = contact_candidates(world, &pose, &q_m, T::zero())?
            .contacts
            .into_iter()
            .filter(|c| {
                c.frame.phi < -T::lit(tol)
                    && !features.iter().any(|f| f.other == c.other && f.feature == c.feature)
            })
            .collect();
        if missed.is_empty() {
            break (sol, q_plus, converged);
        }
        features.extend(missed);
        rounds += 1;
    };

    let (pose_plus, q_m_plus) = split(&q_plus);
    let mut phi_minus = DVector::zeros(features.len());
    let mut phi_plus = DVector::zeros(features.len());
    for (i, c) in features.iter().enumerate() {
        let other = world.body_pose(c.other, &state.q_m);
        phi_minus[i] = c.feature.evaluate(&state.q_o, &other)?.phi;
        let other = world.body_pose(c.other, &q_m_plus);
        phi_plus[i] = c.feature.evaluate(&pose_plus, &other)?.phi;
    }
    Ok(StepResult {
        dq_o: sol.v_o,
        dq_m: sol.v_m.clone(),
        p_n: sol.lambda_n.clone(),
        p_t: sol.lambda_t.clone(),
        phi_minus,
        phi_plus,
        contacts: features.iter().map(|c| c.other).collect(),
        relin_iters: stats.solves - 1,
        converged,
        pivots: stats.pivots,
        solve_seconds: stats.seconds,
    })
}

const MAX_FEATURE_ROUNDS: usize = 3;

#[derive(Default)]
struct SolveStats {
    solves: usize,
    pivots: usize,
    seconds: f64,
}

/// Fixed-point iteration over the end-of-step linearization point for a
/// frozen feature list.
fn relinearize<T: Real>(
    plant: &Plant<T>,
    features: &[Contact<T>],
    q_minus: &DVector<T>,
    v_star: &DVector<T>,
    config: &TimeStepConfig,
    stats: &mut SolveStats,
) -> Result<(ModelSolution<T>, DVector<T>, bool), StepError> {
    let world = &plant.world;
    let relin_tol = T::lit(config.relin_tol);
    let general = matches!(plant.limit_surface, LimitSurface::General(_));
    let displacement = v_star * T::lit(config.h);
    let (pose, q_m) = split(q_minus);
    let mut set = contact_jacobians(features.to_vec(), world, &pose, &q_m)?;
    let mut q_hat = q_minus.clone();
    let mut wrench_dir: Option<Vector3<T>> = None;
    let mut prev_wrench: Option<Vector3<T>> = None;
    let mut solves = 0;
    loop {
        solves += 1;
        stats.solves += 1;
        let f_body = wrench_dir.map(|f| body_twist_transform(q_hat[2]).0.transpose() * f);
        let a = force_motion_matrix(&plant.limit_surface, q_hat[2], f_body.as_ref())?;
        let gap = effective_gap(&set, &q_hat, q_minus);
        let lcp = assemble_lcp_with_gap(&set, &a, &plant.feedback, &displacement, Some(&gap))?;
        let started = Instant::now();
        let sol = solve_instantaneous(&lcp, &config.solver)?;
        stats.seconds += started.elapsed().as_secs_f64();
        stats.pivots += sol.pivots;
        if !sol.feasible {
            return Err(StepError::Infeasible(Box::new(FailureDump::new(&lcp.problem, &sol.z))));
        }

        let q_plus = end_state(q_minus, &sol);
        let change = (&q_plus - &q_hat).amax();
        let wrench_settled = match prev_wrench {
            _ if !general => true,
            Some(prev) => (sol.f_o - prev).norm() <= relin_tol,
            None => sol.f_o.norm() <= relin_tol,
        };
        let converged = set.is_empty() || (change <= relin_tol && wrench_settled);
        if converged || solves >= config.max_relin_iters {
            return Ok((sol, q_plus, converged));
        }

        if general && sol.f_o.norm() > T::zero() {
            let dir = sol.f_o.normalize();
            wrench_dir = Some(match wrench_dir {
                Some(prev) if (prev + dir).norm() > T::lit(1e-6) => (prev + dir).normalize(),
                _ => dir,
            });
        }
        prev_wrench = Some(sol.f_o);
        q_hat = q_plus;
        let (pose, q_m) = split(&q_hat);
        set = contact_jacobians(features.to_vec(), world, &pose, &q_m)?;
    }
}

/// `Phi(q_hat) - N(q_hat) (q_hat - q_minus)`: the gap at the start of the step
/// predicted by the linearization about `q_hat`.
fn effective_gap<T: Real>(set: &ContactSet<T>, q_hat: &DVector<T>, q_minus: &DVector<T>) -> DVector<T> {
    let offset = q_hat - q_minus;
    let m = set.manipulator_dim();
    let n_o = DMatrix::from_iterator(set.len(), 3, set.n_o.iter().copied());
    &set.phi - n_o * offset.rows(0, 3) - &set.n_m * offset.rows(3, m)
}

fn end_state<T: Real>(q_minus: &DVector<T>, sol: &ModelSolution<T>) -> DVector<T> {
    let mut q = q_minus.clone();
    for i in 0..3 {
        q[i] += sol.v_o[i];
    }
    for (i, d) in sol.v_m.iter().enumerate() {
        q[3 + i] += *d;
    }
    q
}

fn split<T: Real>(q: &DVector<T>) -> (Pose2<T>, DVector<T>) {
    (Pose2::new(q[0], q[1], q[2]), q.rows(3, q.len() - 3).into_owned())
}
