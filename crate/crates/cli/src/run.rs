use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde_json::json;

use quasistatic::lcp::FailureDump;
use quasistatic::scenes::{
    builtin_scene, run_convergence_study, run_jamming_study, Scene, StudyError, StudyOptions, StudyRun,
    BUILTIN_SCENES,
};
use quasistatic::stepper::{simulate as rollout, Termination, TerminationReason};
use quasistatic::verify::{run_verify, Suite};
use quasistatic::TrajectoryF64;

use crate::manifest::{manifest_path_for, scene_hash, sibling, RunManifest, RunStats};
use crate::{
    Format, SimulateArgs, SuiteArg, SweepArgs, SweepMode, VerifyArgs, EXIT_ERROR, EXIT_EXPECTED_INFEASIBLE, EXIT_OK,
    EXIT_THEOREM_VIOLATION, SCENE_DIR_ENV,
};

/// A file path, a built-in name, or a file in `$QSIM_SCENE_DIR`.
pub fn resolve_scene(arg: &str) -> Result<Scene> {
    let direct = Path::new(arg);
    if direct.is_file() {
        return load_scene(direct);
    }
    if let Ok(s) = builtin_scene(arg) {
        return Ok(s);
    }
    if let Some(dir) = std::env::var_os(SCENE_DIR_ENV) {
        let dir = PathBuf::from(dir);
        for candidate in [dir.join(arg), dir.join(format!("{arg}.json"))] {
            if candidate.is_file() {
                return load_scene(&candidate);
            }
        }
    }
    bail!(
        "no scene file or built-in scene named {arg:?} (built-ins: {}; set {SCENE_DIR_ENV} to search a scene directory)",
        BUILTIN_SCENES.join(", ")
    )
}

fn load_scene(path: &Path) -> Result<Scene> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Scene::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn scene_label(arg: &str, scene: &Scene) -> String {
    scene.name.clone().unwrap_or_else(|| {
        Path::new(arg)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scene".into())
    })
}

pub fn parse_c_list(text: &str) -> Result<Vec<f64>> {
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        bail!("--c-list is empty");
    }
    items
        .iter()
        .map(|s| s.parse::<f64>().with_context(|| format!("bad gain {s:?} in --c-list")))
        .collect()
}

/// Exit code for a rollout that stopped early under gain `c`.
pub fn exit_code_for(termination: Option<&Termination>, c: f64) -> u8 {
    match termination.map(|t| &t.reason) {
        None => EXIT_OK,
        Some(TerminationReason::Infeasible { .. }) if c == 0.0 => EXIT_EXPECTED_INFEASIBLE,
        Some(TerminationReason::Infeasible { .. } | TerminationReason::TheoremViolation { .. }) => {
            EXIT_THEOREM_VIOLATION
        }
        Some(TerminationReason::Unconverged | TerminationReason::Error { .. }) => EXIT_ERROR,
    }
}

fn termination_dump(t: &Termination) -> Option<&FailureDump> {
    match &t.reason {
        TerminationReason::Infeasible { dump } | TerminationReason::TheoremViolation { dump } => Some(dump),
        _ => None,
    }
}

fn describe(t: &Termination) -> String {
    let what = match &t.reason {
        TerminationReason::Infeasible { .. } => "no feasible contact forces".to_string(),
        TerminationReason::TheoremViolation { .. } => "LCP ray termination with c > 0".to_string(),
        TerminationReason::Unconverged => "relinearization did not converge".to_string(),
        TerminationReason::Error { message } => message.clone(),
    };
    format!("stopped at step {} (t = {}): {what}", t.step, t.t)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_trajectory(path: &Path, traj: &TrajectoryF64, format: Format) -> Result<()> {
    let text = match format {
        Format::Csv => traj.to_csv(),
        Format::Json => traj.to_json(),
    };
    write_file(path, &text)
}

pub fn simulate(a: &SimulateArgs, command_line: &[String]) -> Result<u8> {
    let mut scene = resolve_scene(&a.scene)?.with_timing(a.h, a.duration);
    if let Some(c) = a.c_override {
        scene = scene.with_c(c);
    }
    scene.validate().context("invalid scene after overrides")?;
    let label = scene_label(&a.scene, &scene);
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{label}.{}", a.format.extension())));

    let started = Instant::now();
    let config = scene.time_step_config::<f64>();
    let traj = rollout(
        &scene.plant::<f64>(),
        scene.initial_state(),
        &scene.commands,
        scene.sim.duration,
        &config,
    )?;
    let wall = started.elapsed().as_secs_f64();

    write_trajectory(&out, &traj, a.format)?;
    let scene_path = sibling(&out, "scene.json");
    write_file(&scene_path, &scene.to_json())?;
    let mut artifacts = vec![out.clone(), scene_path];

    let code = exit_code_for(traj.termination.as_ref(), scene.feedback.c);
    if let Some(t) = &traj.termination {
        eprintln!("{label}: {}", describe(t));
        if let Some(d) = termination_dump(t) {
            let p = sibling(&out, "dump.json");
            write_file(&p, &d.to_json())?;
            if code == EXIT_THEOREM_VIOLATION {
                eprintln!("problem dump: {}", p.display());
            }
            artifacts.push(p);
        }
    }

    let manifest = RunManifest {
        command_line: command_line.to_vec(),
        scene: Some(a.scene.clone()),
        scene_hash: Some(scene_hash(&scene)),
        config: json!({ "time_step": config, "c": scene.feedback.c, "format": a.format.extension() }),
        seed: None,
        artifacts,
        stats: RunStats::from_trajectories([&traj], wall),
        exit_code: code,
        termination: traj.termination.clone(),
    };
    let mpath = manifest_path_for(&out);
    manifest.write(&mpath)?;
    println!(
        "{label}: {} of {} steps written to {} (manifest {})",
        traj.records.len(),
        traj.steps_planned,
        out.display(),
        mpath.display()
    );
    Ok(code)
}

fn gain_tag(c: f64) -> String {
    format!("c_{c}")
}

/// `(log10 c, log10 e)` rows for every positive error.
fn loglog_csv(rows: &[(f64, f64)]) -> String {
    let mut s = String::from("log10_c,log10_e\n");
    for (c, e) in rows.iter().filter(|(c, e)| *c > 0.0 && *e > 0.0) {
        let _ = writeln!(s, "{},{}", c.log10(), e.log10());
    }
    s
}

pub fn sweep(a: &SweepArgs, command_line: &[String]) -> Result<u8> {
    let c_list = parse_c_list(&a.c_list)?;
    if a.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    let scene = resolve_scene(&a.scene)?;
    let label = scene_label(&a.scene, &scene);
    let opts = StudyOptions {
        jobs: a.jobs,
        h: a.h,
        duration: a.duration,
    };
    let effective = scene.with_timing(a.h, a.duration);
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;

    let started = Instant::now();
    let outcome = match a.mode {
        SweepMode::Converge => run_convergence_study(&scene, &c_list, &opts).map(|(r, runs)| {
            let rows = r.fit_points();
            (serde_json::to_value(&r).expect("report serializes"), rows, runs)
        }),
        SweepMode::Jam => run_jamming_study(&scene, &c_list, &opts).map(|(r, runs)| {
            // successive final-pose differences against the smaller gain
            let rows: Vec<(f64, f64)> =
                r.entries.iter().skip(1).map(|e| e.c).zip(r.differences.iter().copied()).collect();
            (serde_json::to_value(&r).expect("report serializes"), rows, runs)
        }),
    };
    let wall = started.elapsed().as_secs_f64();

    let mut artifacts = Vec::new();
    let mut manifest = RunManifest {
        command_line: command_line.to_vec(),
        scene: Some(a.scene.clone()),
        scene_hash: Some(scene_hash(&effective)),
        config: json!({
            "mode": match a.mode { SweepMode::Converge => "converge", SweepMode::Jam => "jam" },
            "c_list": c_list,
            "jobs": a.jobs,
            "time_step": effective.time_step_config::<f64>(),
            "format": a.format.extension(),
        }),
        seed: None,
        artifacts: Vec::new(),
        stats: RunStats::default(),
        exit_code: EXIT_OK,
        termination: None,
    };
    let scene_path = a.out_dir.join("scene.json");
    write_file(&scene_path, &effective.to_json())?;
    artifacts.push(scene_path);

    match outcome {
        Ok((report, rows, runs)) => {
            for StudyRun { c, trajectory } in &runs {
                let p = a.out_dir.join(format!("{}.{}", gain_tag(*c), a.format.extension()));
                write_trajectory(&p, trajectory, a.format)?;
                artifacts.push(p);
            }
            let report_path = a.out_dir.join("report.json");
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            write_file(&report_path, &text)?;
            let csv_path = a.out_dir.join("loglog.csv");
            write_file(&csv_path, &loglog_csv(&rows))?;
            artifacts.extend([report_path, csv_path]);
            manifest.stats = RunStats::from_trajectories(runs.iter().map(|r| &r.trajectory), wall);
            if let Some(t) = runs.first().and_then(|r| r.trajectory.termination.as_ref()) {
                eprintln!("{label}: c = 0 {}", describe(t));
            }
            println!("{label}: {} runs written to {}", runs.len(), a.out_dir.display());
        }
        Err(e) => {
            let code = match &e {
                StudyError::ReferenceInfeasible(_) => EXIT_EXPECTED_INFEASIBLE,
                StudyError::FiniteCFailed { c, termination } => exit_code_for(Some(termination), *c).max(EXIT_ERROR),
                StudyError::InvalidCList(_) | StudyError::Scene(_) => return Err(e.into()),
            };
            eprintln!("{label}: {e}");
            if matches!(e, StudyError::ReferenceInfeasible(_)) {
                eprintln!("the c = 0 run jams; use --mode jam");
            }
            if let Some(t) = e.termination() {
                if let Some(d) = termination_dump(t) {
                    let p = a.out_dir.join("dump.json");
                    write_file(&p, &d.to_json())?;
                    if code == EXIT_THEOREM_VIOLATION {
                        eprintln!("problem dump: {}", p.display());
                    }
                    artifacts.push(p);
                }
                manifest.termination = Some(t.clone());
            }
            manifest.stats.wall_seconds = wall;
            manifest.exit_code = code;
        }
    }
    manifest.artifacts = artifacts;
    manifest.write(&a.out_dir.join("manifest.json"))?;
    Ok(manifest.exit_code)
}

pub fn verify(a: &VerifyArgs, command_line: &[String]) -> Result<u8> {
    let suite = match a.suite {
        SuiteArg::Lcp => Suite::Lcp,
        SuiteArg::Model => Suite::Model,
        SuiteArg::Timestep => Suite::Timestep,
        SuiteArg::All => Suite::All,
    };
    let started = Instant::now();
    let report = run_verify(suite, a.trials, a.seed);
    let wall = started.elapsed().as_secs_f64();
    for p in &report.properties {
        eprintln!(
            "{:<40} {} checked {:>5} skipped {:>4} failures {:>4} worst {:.3e}",
            p.name,
            if p.passed { "PASS" } else { "FAIL" },
            p.checked,
            p.skipped,
            p.failures,
            p.worst
        );
    }
    let code = if report.passed { EXIT_OK } else { EXIT_ERROR };
    match &a.out {
        None => print!("{}", report.to_json()),
        Some(out) => {
            write_file(out, &report.to_json())?;
            let manifest = RunManifest {
                command_line: command_line.to_vec(),
                scene: None,
                scene_hash: None,
                config: json!({ "suite": report.suite, "trials": a.trials }),
                seed: Some(a.seed),
                artifacts: vec![out.clone()],
                stats: RunStats {
                    wall_seconds: wall,
                    ..RunStats::default()
                },
                exit_code: code,
                termination: None,
            };
            manifest.write(&manifest_path_for(out))?;
        }
    }
    Ok(code)
}
