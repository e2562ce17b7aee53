use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Scene, SceneError};
use crate::geometry::Pose2;
use crate::stepper::{check_penetration, simulate, Termination, TerminationReason, Trajectory};

/// Entries with an error at or below this are left out of the log-log fit.
pub const FIT_ERROR_FLOOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("invalid gain list: {0}")]
    InvalidCList(String),
    #[error("the c = 0 reference stopped at step {} (t = {}); use the jamming study", .0.step, .0.t)]
    ReferenceInfeasible(Box<Termination>),
    #[error("run with c = {c} stopped at step {} (t = {})", termination.step, termination.t)]
    FiniteCFailed { c: f64, termination: Box<Termination> },
    #[error(transparent)]
    Scene(#[from] SceneError),
}

impl StudyError {
    pub fn termination(&self) -> Option<&Termination> {
        match self {
            StudyError::ReferenceInfeasible(t) => Some(t),
            StudyError::FiniteCFailed { termination, .. } => Some(termination),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    /// Worker threads for the independent rollouts.
    pub jobs: usize,
    pub h: Option<f64>,
    pub duration: Option<f64>,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            jobs: 1,
            h: None,
            duration: None,
        }
    }
}

/// Least-squares line `log e = slope log c + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// Fits natural-log pairs; `None` with fewer than two usable points or no
/// spread in `c`. Points with non-positive values are skipped.
pub fn loglog_fit(points: &[(f64, f64)]) -> Option<LogLogFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(c, e)| *c > 0.0 && *e > 0.0)
        .map(|(c, e)| (c.ln(), e.ln()))
        .collect();
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Some(LogLogFit {
        slope,
        intercept,
        r_squared,
        n,
    })
}

/// Unweighted Euclidean distance on `(x, y, theta)`.
pub fn pose_error(a: &Pose2<f64>, b: &Pose2<f64>) -> f64 {
    let d = [a.x - b.x, a.y - b.y, a.theta - b.theta];
    d.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEntry {
    pub c: f64,
    pub final_pose: Pose2<f64>,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub scene: Option<String>,
    pub duration: f64,
    pub h: f64,
    /// The c = 0 run every entry is compared against.
    pub reference_final_pose: Pose2<f64>,
    pub entries: Vec<ConvergenceEntry>,
    /// Fit over the entries whose error exceeds [`FIT_ERROR_FLOOR`].
    pub fit: Option<LogLogFit>,
}

impl ConvergenceReport {
    /// `(c, e)` pairs that enter the fit.
    pub fn fit_points(&self) -> Vec<(f64, f64)> {
        self.entries
            .iter()
            .filter(|e| e.error > FIT_ERROR_FLOOR)
            .map(|e| (e.c, e.error))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JammingEntry {
    pub c: f64,
    pub final_pose: Pose2<f64>,
    pub steps: usize,
    pub max_penetration: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JammingReport {
    pub scene: Option<String>,
    pub duration: f64,
    pub h: f64,
    /// How the c = 0 run ended; `None` means it completed and no jam was
    /// observed.
    pub reference_termination: Option<Termination>,
    pub jam_observed: bool,
    pub entries: Vec<JammingEntry>,
    /// `differences[i]` is the pose distance between the final poses of
    /// entries `i` and `i + 1`.
    pub differences: Vec<f64>,
}

/// A finished rollout from a study, in c-list order.
#[derive(Clone, Debug)]
pub struct StudyRun {
    pub c: f64,
    pub trajectory: Trajectory<f64>,
}

fn check_c_list(c_list: &[f64]) -> Result<(), StudyError> {
    if c_list.is_empty() {
        return Err(StudyError::InvalidCList("empty".into()));
    }
    if let Some(c) = c_list.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(StudyError::InvalidCList(format!("{c} is not a positive number")));
    }
    if c_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(StudyError::InvalidCList("values must be strictly decreasing".into()));
    }
    Ok(())
}

fn rollout(scene: &Scene, c: f64) -> Result<Trajectory<f64>, SceneError> {
    let s = scene.with_c(c);
    s.validate()?;
    Ok(simulate(
        &s.plant::<f64>(),
        s.initial_state(),
        &s.commands,
        s.sim.duration,
        &s.time_step_config::<f64>(),
    )?)
}

/// Runs `c = 0` followed by every entry of `c_list`, spreading the rollouts
/// over `jobs` threads. Output order matches input order.
fn run_all(scene: &Scene, c_list: &[f64], jobs: usize) -> Result<Vec<StudyRun>, SceneError> {
    let cs: Vec<f64> = std::iter::once(0.0).chain(c_list.iter().copied()).collect();
    let slots: Vec<Mutex<Option<Result<Trajectory<f64>, SceneError>>>> = cs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, cs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cs.len() {
                    break;
                }
                let r = rollout(scene, cs[i]);
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    cs.into_iter()
        .zip(slots)
        .map(|(c, slot)| {
            let r = slot.into_inner().expect("slot lock").expect("every slot filled");
            r.map(|trajectory| StudyRun { c, trajectory })
        })
        .collect()
}

fn prepare(scene: &Scene, c_list: &[f64], opts: &StudyOptions) -> Result<Scene, StudyError> {
    check_c_list(c_list)?;
    let s = scene.with_timing(opts.h, opts.duration);
    s.validate()?;
    Ok(s)
}

/// Final-pose error of each `c` against the `c = 0` reference. The returned
/// runs start with the reference.
pub fn run_convergence_study(
    scene: &Scene,
    c_list: &[f64],
    opts: &StudyOptions,
) -> Result<(ConvergenceReport, Vec<StudyRun>), StudyError> {
    let s = prepare(scene, c_list, opts)?;
    let runs = run_all(&s, c_list, opts.jobs)?;
    let reference = &runs[0].trajectory;
    if let Some(t) = &reference.termination {
        return Err(StudyError::ReferenceInfeasible(Box::new(t.clone())));
    }
    for r in &runs[1..] {
        if let Some(t) = &r.trajectory.termination {
            return Err(StudyError::FiniteCFailed {
                c: r.c,
                termination: Box::new(t.clone()),
            });
        }
    }
    let q_ref = reference.final_state().q_o;
    let entries: Vec<ConvergenceEntry> = runs[1..]
        .iter()
        .map(|r| {
            let q = r.trajectory.final_state().q_o;
            ConvergenceEntry {
                c: r.c,
                final_pose: q,
                error: pose_error(&q, &q_ref),
            }
        })
        .collect();
    let mut report = ConvergenceReport {
        scene: s.name.clone(),
        duration: s.sim.duration,
        h: s.sim.h,
        reference_final_pose: q_ref,
        entries,
        fit: None,
    };
    report.fit = loglog_fit(&report.fit_points());
    Ok((report, runs))
}

/// The `c = 0` run may stop at a jam; every finite-`c` run must complete.
pub fn run_jamming_study(
    scene: &Scene,
    c_list: &[f64],
    opts: &StudyOptions,
) -> Result<(JammingReport, Vec<StudyRun>), StudyError> {
    let s = prepare(scene, c_list, opts)?;
    let runs = run_all(&s, c_list, opts.jobs)?;
    let world = s.world::<f64>();
    let mut entries = Vec::with_capacity(c_list.len());
    for r in &runs[1..] {
        if let Some(t) = &r.trajectory.termination {
            return Err(StudyError::FiniteCFailed {
                c: r.c,
                termination: Box::new(t.clone()),
            });
        }
        let pen = check_penetration(&world, &r.trajectory, crate::scenes::START_PENETRATION_TOL)
            .map_err(SceneError::from)?;
        entries.push(JammingEntry {
            c: r.c,
            final_pose: r.trajectory.final_state().q_o,
            steps: r.trajectory.records.len(),
            max_penetration: pen.max_penetration,
        });
    }
    let differences = entries
        .windows(2)
        .map(|w| pose_error(&w[0].final_pose, &w[1].final_pose))
        .collect();
    let reference_termination = runs[0].trajectory.termination.clone();
    let jam_observed = matches!(
        reference_termination,
        Some(Termination {
            reason: TerminationReason::Infeasible { .. },
            ..
        })
    );
    let report = JammingReport {
        scene: s.name.clone(),
        duration: s.sim.duration,
        h: s.sim.h,
        reference_termination,
        jam_observed,
        entries,
        differences,
    };
    Ok((report, runs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_a_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 0.1, 0.01, 0.001].iter().map(|c: &f64| (*c, 3.0 * c.powf(0.8))).collect();
        let f = loglog_fit(&pts).unwrap();
        assert!((f.slope - 0.8).abs() < 1e-12);
        assert!((f.intercept - 3.0_f64.ln()).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(f.n, 4);
        assert!(loglog_fit(&pts[..1]).is_none());
        assert!(loglog_fit(&[(1.0, 1.0), (1.0, 2.0)]).is_none());
    }

    #[test]
    fn pose_error_is_zero_against_itself() {
        let p = Pose2::new(0.3, -1.0, 0.2);
        assert_eq!(pose_error(&p, &p), 0.0);
        assert!((pose_error(&p, &Pose2::new(0.3, -1.0, 0.0)) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn c_list_checks() {
        assert!(check_c_list(&[1.0, 0.1]).is_ok());
        assert!(check_c_list(&[]).is_err());
        assert!(check_c_list(&[0.1, 0.1]).is_err());
        assert!(check_c_list(&[0.1, 1.0]).is_err());
        assert!(check_c_list(&[1.0, 0.0]).is_err());
        assert!(check_c_list(&[f64::NAN]).is_err());
    }

    #[test]
    fn short_convergence_study_runs() {
        let scene = super::super::builtin_scene("two_finger_disk_symmetric").unwrap();
        let opts = StudyOptions {
            jobs: 2,
            h: None,
            duration: Some(0.5),
        };
        let (report, runs) = run_convergence_study(&scene, &[1.0, 0.1], &opts).unwrap();
        assert_eq!(runs.len(), 3);
        assert_eq!(runs[0].c, 0.0);
        assert_eq!(report.entries.len(), 2);
        assert!(report.entries.iter().all(|e| e.error >= 0.0));
        assert_eq!(runs[0].trajectory.records.len(), 20);
    }
}
