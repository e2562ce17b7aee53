use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{step, Plant, State, StepError, StepResult, TimeStepConfig};
use crate::geometry::{GeometryError, World};
use crate::lcp::FailureDump;
use crate::model::ModelError;
use crate::scalar::Real;

/// Commanded manipulator velocity as a function of time and state.
pub trait CommandSource<T: Real> {
    fn command(&self, t: f64, state: &State<T>) -> DVector<T>;
}

impl<T: Real, F> CommandSource<T> for F
where
    F: Fn(f64, &State<T>) -> DVector<T>,
{
    fn command(&self, t: f64, state: &State<T>) -> DVector<T> {
        self(t, state)
    }
}

/// State at the end of a step, with the command and step that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StepRecord<T: Real> {
    pub t: f64,
    pub state: State<T>,
    pub command: DVector<T>,
    pub step: StepResult<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerminationReason {
    /// `c = 0` and no contact forces realize the command.
    Infeasible { dump: FailureDump },
    /// Ray termination with `c > 0`.
    TheoremViolation { dump: FailureDump },
    /// The step hit `max_relin_iters` before reaching a fixed point.
    Unconverged,
    Error { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Termination {
    /// Zero-based index of the step that failed.
    pub step: usize,
    /// Start time of that step.
    pub t: f64,
    pub reason: TerminationReason,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Trajectory<T: Real> {
    pub config: TimeStepConfig,
    pub duration: f64,
    pub steps_planned: usize,
    pub initial: State<T>,
    pub records: Vec<StepRecord<T>>,
    pub termination: Option<Termination>,
}

impl<T: Real> Trajectory<T> {
    pub fn is_complete(&self) -> bool {
        self.termination.is_none() && self.records.len() == self.steps_planned
    }

    pub fn final_state(&self) -> &State<T> {
        self.records.last().map_or(&self.initial, |r| &r.state)
    }

    /// Initial state followed by the state after every step.
    pub fn states(&self) -> impl Iterator<Item = &State<T>> {
        std::iter::once(&self.initial).chain(self.records.iter().map(|r| &r.state))
    }

    pub fn solve_seconds(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.step.solve_seconds).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory serializes")
    }

    /// One row per step:
    /// `t,qO_x,qO_y,qO_th,qM_1..qM_m,k,pn_1..pn_K,pt_1..pt_2K`, where `K` is the
    /// largest contact count; shorter rows are padded with empty fields.
    pub fn to_csv(&self) -> String {
        let m = self.initial.q_m.len();
        let kmax = self.records.iter().map(|r| r.step.k()).max().unwrap_or(0);
        let mut header: Vec<String> = ["t", "qO_x", "qO_y", "qO_th"].iter().map(|s| s.to_string()).collect();
        header.extend((1..=m).map(|i| format!("qM_{i}")));
        header.push("k".into());
        header.extend((1..=kmax).map(|i| format!("pn_{i}")));
        header.extend((1..=2 * kmax).map(|i| format!("pt_{i}")));

        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header).expect("in-memory write");
        for r in &self.records {
            let s = &r.state;
            let mut row = vec![
                r.t.to_string(),
                s.q_o.x.to_string(),
                s.q_o.y.to_string(),
                s.q_o.theta.to_string(),
            ];
            row.extend(s.q_m.iter().map(|x| x.to_string()));
            let k = r.step.k();
            row.push(k.to_string());
            row.extend(r.step.p_n.iter().map(|x| x.to_string()));
            row.extend(std::iter::repeat_n(String::new(), kmax - k));
            row.extend(r.step.p_t.iter().map(|x| x.to_string()));
            row.extend(std::iter::repeat_n(String::new(), 2 * (kmax - k)));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("csv is utf-8")
    }
}

/// Fixed-step rollout. Step errors end the rollout early; the partial
/// trajectory records why in `termination`.
pub fn simulate<T: Real, C: CommandSource<T> + ?Sized>(
    plant: &Plant<T>,
    initial: State<T>,
    commands: &C,
    duration: f64,
    config: &TimeStepConfig,
) -> Result<Trajectory<T>, StepError> {
    config.validate()?;
    let ratio = duration / config.h;
    let steps = ratio.round();
    if !(duration >= 0.0) || ((steps * config.h) - duration).abs() > 1e-9 {
        return Err(StepError::InvalidConfig(format!(
            "duration {duration} is not a whole number of steps of {}",
            config.h
        )));
    }
    let steps = steps as usize;
    let m = plant.world.manipulator_dim();
    if initial.q_m.len() != m {
        return Err(StepError::Geometry(GeometryError::ConfigDimension {
            expected: m,
            got: initial.q_m.len(),
        }));
    }

    let mut traj = Trajectory {
        config: config.clone(),
        duration,
        steps_planned: steps,
        initial: initial.clone(),
        records: Vec::with_capacity(steps),
        termination: None,
    };
    let mut state = initial;
    for i in 0..steps {
        let t0 = i as f64 * config.h;
        let v = commands.command(t0, &state);
        let result = match step(plant, &state, &v, config) {
            Ok(r) => r,
            Err(e) => {
                traj.termination = Some(Termination {
                    step: i,
                    t: t0,
                    reason: reason_for(e),
                });
                return Ok(traj);
            }
        };
        let converged = result.converged;
        state = result.apply(&state);
        traj.records.push(StepRecord {
            t: (i + 1) as f64 * config.h,
            state: state.clone(),
            command: v,
            step: result,
        });
        if !converged && !config.continue_on_unconverged {
            traj.termination = Some(Termination {
                step: i,
                t: t0,
                reason: TerminationReason::Unconverged,
            });
            return Ok(traj);
        }
    }
    Ok(traj)
}

fn reason_for(e: StepError) -> TerminationReason {
    match e {
        StepError::Infeasible(d) => TerminationReason::Infeasible { dump: *d },
        StepError::Model(ModelError::TheoremViolation(d)) => TerminationReason::TheoremViolation { dump: *d },
        other => TerminationReason::Error {
            message: other.to_string(),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenetrationReport {
    /// Largest `-phi` over all recorded states and body pairs, floored at 0.
    pub max_penetration: f64,
    /// State index of the maximum (0 is the initial state).
    pub state_index: Option<usize>,
    /// State indices whose penetration exceeds the tolerance.
    pub flagged: Vec<usize>,
}

/// Recomputes every object/body signed distance along the trajectory.
pub fn check_penetration<T: Real>(
    world: &World<T>,
    trajectory: &Trajectory<T>,
    tol: f64,
) -> Result<PenetrationReport, GeometryError> {
    let mut report = PenetrationReport {
        max_penetration: 0.0,
        state_index: None,
        flagged: Vec::new(),
    };
    for (i, s) in trajectory.states().enumerate() {
        let worst = world
            .pair_gaps(&s.q_o, &s.q_m)?
            .into_iter()
            .map(|(_, g)| -g.to_f64_lossy())
            .fold(0.0_f64, f64::max);
        if worst > report.max_penetration {
            report.max_penetration = worst;
            report.state_index = Some(i);
        }
        if worst > tol {
            report.flagged.push(i);
        }
    }
    Ok(report)
}
