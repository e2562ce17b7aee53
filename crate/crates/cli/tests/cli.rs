use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn qsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsim"))
        .args(args)
        .current_dir(dir)
        .env_remove("QSIM_SCENE_DIR")
        .output()
        .expect("spawn qsim")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn simulate_writes_400_steps_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsim(
        dir.path(),
        &["simulate", "two_finger_disk_symmetric", "--duration", "10", "--h", "0.025", "--out", "t.csv"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(csv.lines().count(), 401);
    assert!(csv.starts_with("t,qO_x,qO_y,qO_th,qM_1"));

    let m = read_json(&dir.path().join("t.manifest.json"));
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["stats"]["steps"], 400);
    let artifacts: Vec<String> = m["artifacts"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().to_string()).collect();
    for a in &artifacts {
        assert!(dir.path().join(a).is_file(), "missing artifact {a}");
    }
    let scene = std::fs::read(dir.path().join("t.scene.json")).unwrap();
    assert_eq!(m["scene_hash"].as_str().unwrap(), sha256_hex(&scene));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.json", "b.json"] {
        let out = qsim(
            dir.path(),
            &["simulate", "square_pinch", "--duration", "1", "--format", "json", "--out", name],
        );
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(
        std::fs::read(dir.path().join("a.json")).unwrap(),
        std::fs::read(dir.path().join("b.json")).unwrap()
    );
}

#[test]
fn pinch_without_compliance_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsim(dir.path(), &["simulate", "four_finger_pinch", "--c-override", "0", "--out", "p.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let m = read_json(&dir.path().join("p.manifest.json"));
    assert_eq!(m["exit_code"], 2);
    assert_eq!(m["termination"]["step"], 0);
    assert_eq!(m["termination"]["reason"]["kind"], "infeasible");
    assert!(dir.path().join("p.dump.json").is_file());
}

#[test]
fn missing_or_unknown_scene_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsim(dir.path(), &["simulate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = qsim(dir.path(), &["simulate", "not_a_scene"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("disk_wall_roll"));
}

#[test]
fn scene_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let scenes = dir.path().join("scenes");
    std::fs::create_dir(&scenes).unwrap();
    let scene = quasistatic::scenes::builtin_scene("two_finger_disk_asymmetric").unwrap();
    std::fs::write(scenes.join("mine.json"), scene.with_timing(None, Some(0.5)).to_json()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qsim"))
        .args(["simulate", "mine", "--out", "m.csv"])
        .current_dir(dir.path())
        .env("QSIM_SCENE_DIR", &scenes)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(dir.path().join("m.csv")).unwrap().lines().count(), 21);
}

#[test]
fn converge_sweep_writes_report_and_loglog_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsim(
        dir.path(),
        &[
            "sweep",
            "two_finger_disk_semicircle",
            "--c-list",
            "1,0.1,0.01",
            "--mode",
            "converge",
            "--duration",
            "2",
            "--jobs",
            "2",
            "--out-dir",
            "conv",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let conv = dir.path().join("conv");
    let report = read_json(&conv.join("report.json"));
    assert_eq!(report["entries"].as_array().unwrap().len(), 3);
    assert!(report["fit"]["r_squared"].as_f64().unwrap() > 0.0);
    let csv = std::fs::read_to_string(conv.join("loglog.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "log10_c,log10_e");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,"));
    for name in ["c_0.csv", "c_1.csv", "c_0.1.csv", "c_0.01.csv", "manifest.json", "scene.json"] {
        assert!(conv.join(name).is_file(), "missing {name}");
    }
}

#[test]
fn jam_sweep_records_reference_termination() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsim(dir.path(), &["sweep", "disk_wall_roll", "--mode", "jam", "--c-list", "0.1,0.01", "--out-dir", "jam"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("jam/report.json"));
    assert_eq!(report["jam_observed"], true);
    assert!(report["reference_termination"]["step"].as_u64().unwrap() > 0);
    assert_eq!(report["entries"][1]["steps"], 400);
}

#[test]
fn converge_sweep_on_jamming_scene_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsim(dir.path(), &["sweep", "four_finger_pinch", "--c-list", "0.1", "--out-dir", "x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--mode jam"));
}

#[test]
fn bad_gain_lists_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    for list in ["", "0.1,0.1", "0.1,1", "-1"] {
        let out = qsim(dir.path(), &["sweep", "two_finger_disk_symmetric", "--c-list", list]);
        assert_eq!(out.status.code(), Some(1), "c-list {list:?}");
    }
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = || qsim(dir.path(), &["verify", "--suite", "all", "--trials", "15", "--seed", "11"]);
    let a = run();
    let b = run();
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["properties"].as_array().unwrap().len() >= 9);
}

#[test]
fn verify_report_file_gets_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsim(dir.path(), &["verify", "--suite", "lcp", "--trials", "20", "--seed", "7", "--out", "v.json"]);
    assert_eq!(out.status.code(), Some(0));
    let m = read_json(&dir.path().join("v.manifest.json"));
    assert_eq!(m["seed"], 7);
    assert_eq!(m["artifacts"][0], "v.json");
}
