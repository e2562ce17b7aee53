//! Randomized property suites for the solver, the contact model and the time
//! stepper. Reports are deterministic in `(suite, trials, seed)`.

pub mod random;

use nalgebra::{DVector, Matrix3};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::geometry::{contact_candidates, FingerBody, Pose2, Shape, World};
use crate::lcp::{brute_force_solve, solve_lemke, verify_solution, FailureDump, LcpStatus, SolverConfig};
use crate::model::{
    assemble_velocity_lcp, check_force_bound, copositivity_decomposition, internal_force_residual,
    solve_instantaneous, FeedbackModel, LimitSurface,
};
use crate::stepper::{check_penetration, simulate, step, Plant, State, TerminationReason, TimeStepConfig};
use random::{contact_scene, nonnegative_vector, random_lcp, squeeze_scene, ContactScene, Rng64};

/// Contact activation used when building instantaneous problems.
const TOUCH: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lcp,
    Model,
    Timestep,
    All,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lcp" => Ok(Suite::Lcp),
            "model" => Ok(Suite::Model),
            "timestep" => Ok(Suite::Timestep),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite '{s}' (expected lcp, model, timestep or all)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub suite: Suite,
    /// Trials that exercised the property.
    pub checked: usize,
    /// Trials whose random instance did not qualify (e.g. unsolvable LCPs).
    pub skipped: usize,
    pub failures: usize,
    /// Largest violation seen; what it measures depends on the property.
    pub worst: f64,
    pub passed: bool,
    /// First failing instance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

struct Tally {
    result: PropertyResult,
}

impl Tally {
    fn new(name: &str, suite: Suite) -> Self {
        Tally {
            result: PropertyResult {
                name: name.into(),
                suite,
                checked: 0,
                skipped: 0,
                failures: 0,
                worst: 0.0,
                passed: true,
                counterexample: None,
            },
        }
    }

    fn skip(&mut self) {
        self.result.skipped += 1;
    }

    /// Records one checked trial; `violation` is compared against `worst`.
    fn record(&mut self, ok: bool, violation: f64, example: impl FnOnce() -> Value) {
        let r = &mut self.result;
        r.checked += 1;
        if violation.is_nan() || violation > r.worst {
            r.worst = violation;
        }
        if !ok {
            r.failures += 1;
            r.passed = false;
            if r.counterexample.is_none() {
                r.counterexample = Some(example());
            }
        }
    }

    fn finish(self) -> PropertyResult {
        let mut r = self.result;
        if r.checked == 0 {
            r.passed = false;
            r.counterexample.get_or_insert_with(|| json!("no qualifying trials"));
        }
        r
    }
}

/// Independent stream per property so adding a property does not shift the
/// instances drawn by the others.
fn stream(seed: u64, id: u64) -> Rng64 {
    Rng64::seed_from_u64(seed ^ id.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn run_verify(suite: Suite, trials: usize, seed: u64) -> VerifyReport {
    let mut properties = Vec::new();
    if suite.includes(Suite::Lcp) {
        properties.push(lcp_oracle_equivalence(trials, seed));
        properties.push(lcp_determinism(trials, seed));
    }
    if suite.includes(Suite::Model) {
        properties.extend(model_existence_and_bound(trials, seed));
        properties.push(model_decomposition(trials, seed));
        properties.push(model_internal_force_limit(trials, seed));
    }
    if suite.includes(Suite::Timestep) {
        properties.push(timestep_sub_step_impact(trials, seed));
        properties.push(timestep_non_penetration(trials, seed));
        properties.push(timestep_b_zero_reduction(trials, seed));
        properties.push(timestep_quiescence(trials, seed));
    }
    let passed = properties.iter().all(|p| p.passed);
    VerifyReport {
        suite,
        trials,
        seed,
        properties,
        passed,
    }
}

fn lcp_oracle_equivalence(trials: usize, seed: u64) -> PropertyResult {
    let mut t = Tally::new("lcp.oracle_equivalence", Suite::Lcp);
    let mut rng = stream(seed, 1);
    let cfg = SolverConfig::default();
    for trial in 0..trials {
        let (p, class) = random_lcp(&mut rng, 8);
        let solutions = brute_force_solve(&p).expect("n <= 8 is within the enumeration cap");
        if solutions.is_empty() {
            t.skip();
            continue;
        }
        let (ok, viol, err) = match solve_lemke(&p, &cfg) {
            Ok(s) if s.is_solved() => {
                let v = verify_solution(&p, &s.z, &cfg).expect("dimensions match");
                let r = v.residuals;
                let viol = (-r.min_z).max(-r.min_w).max(r.complementarity.abs()).max(0.0);
                (v.valid, viol, None)
            }
            Ok(s) => (false, f64::INFINITY, Some(format!("{:?}", s.status))),
            Err(e) => (false, f64::INFINITY, Some(e.to_string())),
        };
        t.record(ok, viol, || {
            json!({
                "trial": trial,
                "class": format!("{class:?}"),
                "outcome": err,
                "problem": FailureDump::new(&p, &DVector::zeros(p.n())),
            })
        });
    }
    t.finish()
}

fn lcp_determinism(trials: usize, seed: u64) -> PropertyResult {
    let mut t = Tally::new("lcp.determinism", Suite::Lcp);
    let mut rng = stream(seed, 2);
    let cfg = SolverConfig::default();
    for trial in 0..trials.min(200) {
        let (p, _) = random_lcp(&mut rng, 8);
        let a = solve_lemke(&p, &cfg);
        let b = solve_lemke(&p, &cfg);
        let same = match (&a, &b) {
            (Ok(x), Ok(y)) => x == y,
            (Err(x), Err(y)) => x.to_string() == y.to_string(),
            _ => false,
        };
        t.record(same, if same { 0.0 } else { 1.0 }, || json!({ "trial": trial }));
    }
    t.finish()
}

fn scene_json(s: &ContactScene) -> Value {
    json!({
        "object": format!("{:?}", s.world.object),
        "pose": s.pose,
        "q_m": s.q_m.as_slice(),
        "fingers": s.world.fingers.iter().map(|f| format!("{:?} mu={}", f.shape, f.mu)).collect::<Vec<_>>(),
        "statics": s.world.statics.iter().map(|b| format!("{:?} at {:?} mu={}", b.shape, b.pose, b.mu)).collect::<Vec<_>>(),
        "a": s.a.as_slice(),
        "b": s.feedback.b.as_slice(),
        "c": s.feedback.c,
        "v_star": s.v_star.as_slice(),
    })
}

/// Existence (no ray with `c > 0`) and the manipulator force bound, on the
/// same instances.
fn model_existence_and_bound(trials: usize, seed: u64) -> [PropertyResult; 2] {
    let mut exist = Tally::new("model.existence", Suite::Model);
    let mut bound = Tally::new("model.force_bound", Suite::Model);
    let mut rng = stream(seed, 3);
    let cfg = SolverConfig::default();
    for trial in 0..trials {
        let s = contact_scene(&mut rng, 0.0);
        let contacts = match contact_candidates(&s.world, &s.pose, &s.q_m, TOUCH) {
            Ok(c) if !c.is_empty() => c,
            _ => {
                exist.skip();
                bound.skip();
                continue;
            }
        };
        let lcp = assemble_velocity_lcp(&contacts, &s.a, &s.feedback, &s.v_star).expect("consistent sizes");
        match solve_instantaneous(&lcp, &cfg) {
            Ok(sol) => {
                exist.record(sol.status == LcpStatus::Solved && sol.feasible, 0.0, || {
                    json!({ "trial": trial, "scene": scene_json(&s), "status": format!("{:?}", sol.status) })
                });
                let fb = check_force_bound(&sol, &s.feedback, &s.v_star).expect("B validated");
                bound.record(fb.holds, (fb.lhs - fb.rhs).max(0.0), || {
                    json!({ "trial": trial, "scene": scene_json(&s), "lhs": fb.lhs, "rhs": fb.rhs })
                });
            }
            Err(e) => {
                let dump = e.dump().cloned();
                exist.record(false, f64::INFINITY, || {
                    json!({ "trial": trial, "scene": scene_json(&s), "error": e.to_string(), "dump": dump })
                });
                bound.skip();
            }
        }
    }
    [exist.finish(), bound.finish()]
}

fn model_decomposition(trials: usize, seed: u64) -> PropertyResult {
    let mut t = Tally::new("model.copositivity_decomposition", Suite::Model);
    let mut rng = stream(seed, 4);
    for trial in 0..trials {
        let s = contact_scene(&mut rng, 0.0);
        let Ok(contacts) = contact_candidates(&s.world, &s.pose, &s.q_m, TOUCH) else {
            t.skip();
            continue;
        };
        if contacts.is_empty() {
            t.skip();
            continue;
        }
        let lcp = assemble_velocity_lcp(&contacts, &s.a, &s.feedback, &s.v_star).expect("consistent sizes");
        let z = nonnegative_vector(&mut rng, lcp.problem.n(), 10.0);
        let split = copositivity_decomposition(&lcp, &z).expect("sizes match");
        let tol = 1e-10 * (1.0 + z.norm_squared());
        let r = split.residual();
        t.record(r <= tol, r / tol, || json!({ "trial": trial, "z": z.as_slice(), "residual": r }));
    }
    t.finish()
}

const C_LADDER: [f64; 4] = [1.0, 0.1, 0.01, 0.001];

/// Under squeezing commands `c lambda(c)` approaches a force with no net
/// wrench on the object: the residual must not grow as `c` shrinks and must
/// be small at the finest gain.
fn model_internal_force_limit(trials: usize, seed: u64) -> PropertyResult {
    let mut t = Tally::new("model.internal_force_limit", Suite::Model);
    let mut rng = stream(seed, 5);
    let cfg = SolverConfig::default();
    for trial in 0..trials.min(200) {
        let s = squeeze_scene(&mut rng);
        let contacts = contact_candidates(&s.world, &s.pose, &s.q_m, TOUCH).expect("valid scene");
        let mut residuals = Vec::new();
        let mut failed = None;
        for c in C_LADDER {
            let fb = s.feedback.with_c(c);
            let lcp = assemble_velocity_lcp(&contacts, &s.a, &fb, &s.v_star).expect("consistent sizes");
            match solve_instantaneous(&lcp, &cfg) {
                Ok(sol) => {
                    let scaled = sol.lambda() * c;
                    residuals.push(internal_force_residual(&contacts, &scaled).expect("sizes match"));
                }
                Err(e) => {
                    failed = Some(e.to_string());
                    break;
                }
            }
        }
        let speed = s.v_star.norm();
        let last_tol = 1e-2 * speed;
        let monotone = residuals.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        let last = residuals.last().copied().unwrap_or(f64::INFINITY);
        let ok = failed.is_none() && monotone && last <= last_tol;
        t.record(ok, last / last_tol, || {
            json!({ "trial": trial, "scene": scene_json(&s), "residuals": residuals, "error": failed })
        });
    }
    t.finish()
}

fn disk_finger_world(r_obj: f64, r_fin: f64) -> World<f64> {
    World {
        object: Shape::Disk { radius: r_obj },
        fingers: vec![FingerBody {
            shape: Shape::Disk { radius: r_fin },
            mu: 0.5,
        }],
        statics: vec![],
    }
}

/// Head-on push closing a gap `g < v h` within one step: the object moves by
/// `v h - g` and ends exactly in contact.
fn timestep_sub_step_impact(trials: usize, seed: u64) -> PropertyResult {
    use rand::Rng;
    let mut t = Tally::new("timestep.sub_step_impact", Suite::Timestep);
    let mut rng = stream(seed, 6);
    for trial in 0..trials.min(300) {
        let r_obj = rng.random_range(0.1..1.0);
        let r_fin = rng.random_range(0.0..0.1);
        let v = rng.random_range(0.1..2.0);
        let h = rng.random_range(0.01..0.1);
        let g = rng.random_range(0.05..0.95) * v * h;
        let plant = Plant {
            world: disk_finger_world(r_obj, r_fin),
            limit_surface: LimitSurface::Ellipsoid(Matrix3::identity()),
            feedback: FeedbackModel::identity(2, 0.0),
        };
        let state = State::new(Pose2::identity(), DVector::from_vec(vec![-(r_obj + r_fin + g), 0.0]));
        let cfg = TimeStepConfig::for_scalar::<f64>(h);
        let cmd = DVector::from_vec(vec![v, 0.0]);
        let expected = v * h - g;
        let (ok, err) = match step(&plant, &state, &cmd, &cfg) {
            Ok(r) if r.k() == 1 => {
                let err = (r.p_n[0] - expected)
                    .abs()
                    .max((r.dq_o[0] - expected).abs())
                    .max(r.dq_o[1].abs())
                    .max(r.dq_o[2].abs())
                    .max(r.phi_plus[0].abs())
                    .max((r.dq_m[0] - v * h).abs());
                (err <= 1e-9, err)
            }
            _ => (false, f64::INFINITY),
        };
        t.record(ok, err, || json!({ "trial": trial, "r_obj": r_obj, "r_fin": r_fin, "v": v, "h": h, "gap": g }));
    }
    t.finish()
}

fn scene_plant(s: &ContactScene) -> Plant<f64> {
    Plant {
        world: s.world.clone(),
        limit_surface: LimitSurface::Ellipsoid(s.a),
        feedback: s.feedback.clone(),
    }
}

const ROLLOUT_STEPS: usize = 20;
const ROLLOUT_H: f64 = 0.025;

fn timestep_non_penetration(trials: usize, seed: u64) -> PropertyResult {
    let mut t = Tally::new("timestep.non_penetration", Suite::Timestep);
    let mut rng = stream(seed, 7);
    let cfg = TimeStepConfig::for_scalar::<f64>(ROLLOUT_H);
    for trial in 0..trials.min(100) {
        let s = contact_scene(&mut rng, 0.05);
        let plant = scene_plant(&s);
        let v = s.v_star.clone();
        let cmd = move |_: f64, _: &State<f64>| v.clone();
        let traj = simulate(
            &plant,
            State::new(s.pose, s.q_m.clone()),
            &cmd,
            ROLLOUT_STEPS as f64 * ROLLOUT_H,
            &cfg,
        )
        .expect("valid configuration");
        let unconverged = matches!(
            traj.termination.as_ref().map(|t| &t.reason),
            Some(TerminationReason::Unconverged)
        );
        // the guarantee covers converged steps; the state left by a final
        // unconverged step is exempt
        let mut checked = traj.clone();
        if unconverged {
            checked.records.pop();
        }
        let pen = check_penetration(&plant.world, &checked, 1e-4).expect("valid geometry");
        let ok = (traj.is_complete() || unconverged) && pen.flagged.is_empty();
        t.record(ok, pen.max_penetration, || {
            json!({ "trial": trial, "scene": scene_json(&s), "termination": traj.termination, "penetration": pen })
        });
    }
    t.finish()
}

/// `c B = 0` reached through `B = 0` must reproduce the `c = 0` rollout.
fn timestep_b_zero_reduction(trials: usize, seed: u64) -> PropertyResult {
    use rand::Rng;
    let mut t = Tally::new("timestep.b_zero_reduction", Suite::Timestep);
    let mut rng = stream(seed, 8);
    let cfg = TimeStepConfig::for_scalar::<f64>(ROLLOUT_H);
    for trial in 0..trials.min(100) {
        let s = contact_scene(&mut rng, 0.05);
        // one finger pushing keeps c = 0 feasible
        let world = World {
            fingers: s.world.fingers[..1].to_vec(),
            statics: vec![],
            ..s.world.clone()
        };
        let q_m = s.q_m.rows(0, 2).into_owned();
        let toward = (s.pose.position() - nalgebra::Vector2::new(q_m[0], q_m[1])).normalize();
        let speed = rng.random_range(0.1..1.0);
        let v = DVector::from_vec(vec![toward.x * speed, toward.y * speed]);
        let ideal = Plant {
            world: world.clone(),
            limit_surface: LimitSurface::Ellipsoid(s.a),
            feedback: FeedbackModel::identity(2, 0.0),
        };
        let zero_gain = Plant {
            world,
            limit_surface: LimitSurface::Ellipsoid(s.a),
            feedback: FeedbackModel {
                b: nalgebra::DMatrix::zeros(2, 2),
                c: rng.random_range(0.1..2.0),
            },
        };
        let cmd = |_: f64, _: &State<f64>| v.clone();
        let dur = ROLLOUT_STEPS as f64 * ROLLOUT_H;
        let start = State::new(s.pose, q_m);
        let a = simulate(&ideal, start.clone(), &cmd, dur, &cfg).expect("valid configuration");
        let b = simulate(&zero_gain, start, &cmd, dur, &cfg).expect("valid configuration");
        let mut diff: f64 = 0.0;
        let same_len = a.records.len() == b.records.len() && a.termination.is_none() == b.termination.is_none();
        for (x, y) in a.records.iter().zip(&b.records) {
            diff = diff.max((x.state.stacked() - y.state.stacked()).amax());
            if x.step.k() == y.step.k() {
                diff = diff.max((&x.step.p_n - &y.step.p_n).amax());
            } else {
                diff = f64::INFINITY;
            }
        }
        let ok = same_len && diff <= 1e-12;
        t.record(ok, diff, || json!({ "trial": trial, "scene": scene_json(&s), "v": v.as_slice() }));
    }
    t.finish()
}

fn timestep_quiescence(trials: usize, seed: u64) -> PropertyResult {
    let mut t = Tally::new("timestep.quiescence", Suite::Timestep);
    let mut rng = stream(seed, 9);
    // penetration is checked here, relinearization convergence is not
    let cfg = TimeStepConfig {
        continue_on_unconverged: true,
        ..TimeStepConfig::for_scalar::<f64>(ROLLOUT_H)
    };
    for trial in 0..trials.min(100) {
        let s = contact_scene(&mut rng, 0.05);
        let plant = scene_plant(&s);
        let zero = DVector::zeros(s.q_m.len());
        let cmd = |_: f64, _: &State<f64>| zero.clone();
        let start = State::new(s.pose, s.q_m.clone());
        let traj = simulate(&plant, start.clone(), &cmd, 5.0 * ROLLOUT_H, &cfg).expect("valid configuration");
        let drift = (traj.final_state().stacked() - start.stacked()).amax();
        let ok = traj.is_complete() && drift <= 1e-12;
        t.record(ok, drift, || json!({ "trial": trial, "scene": scene_json(&s) }));
    }
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        assert_eq!("lcp".parse::<Suite>().unwrap(), Suite::Lcp);
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn small_run_is_deterministic_and_passes() {
        let a = run_verify(Suite::All, 12, 3);
        let b = run_verify(Suite::All, 12, 3);
        assert_eq!(a.to_json(), b.to_json());
        for p in &a.properties {
            assert!(p.passed, "{}: {:?}", p.name, p.counterexample);
        }
    }
}
