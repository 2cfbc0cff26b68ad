//! Drives the `delaylqr` binary end to end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delaylqr"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_config(dir: &TempDir, body: &str) -> String {
    let path = dir.path().join("case.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const UNSTABILIZABLE: &str = r#"
[plant]
delay = 1
a11 = [[2.0]]
a12 = [[0.0]]
a21 = [[0.0]]
a22 = [[2.0]]
b1 = [[0.0]]
b2 = [[0.0]]
q = [[1.0, 0.0], [0.0, 1.0]]
r = [[1.0, 0.0], [0.0, 1.0]]
w1 = [[1.0]]
w2 = [[1.0]]

[delay]
pmf = [{ delay = 1, prob = 1.0 }]
"#;

#[test]
fn synth_writes_report_matrices_and_graph() {
    let out = TempDir::new().unwrap();
    let o = run(&["synth", "--config", config("scalar_d2.toml").to_str().unwrap()], out.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out.path().join("report.txt")).unwrap();
    assert!(report.contains("regime: delayed-sharing"));
    assert!(report.contains("predicted average cost"));
    let dot = fs::read_to_string(out.path().join("graph.dot")).unwrap();
    assert!(dot.starts_with("digraph"));
    let csv = fs::read_to_string(out.path().join("matrices.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("node,matrix,row,col,value"));
}

#[test]
fn centralized_report_marks_regime_and_full_sharing() {
    let out = TempDir::new().unwrap();
    let o = run(&["synth", "--config", config("centralized.toml").to_str().unwrap()], out.path());
    assert_eq!(code(&o), 0);
    let report = fs::read_to_string(out.path().join("report.txt")).unwrap();
    assert!(report.contains("regime: centralized-equivalent"), "{report}");
    let probs = fs::read_to_string(out.path().join("probabilities.csv")).unwrap();
    for line in probs.lines().skip(1) {
        let p: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(p, 1.0, "{line}");
    }
}

#[test]
fn report_lists_the_stationary_effective_delay_distribution() {
    let out = TempDir::new().unwrap();
    run(&["synth", "--config", config("scalar_d2.toml").to_str().unwrap()], out.path());
    let report = fs::read_to_string(out.path().join("report.txt")).unwrap();
    assert!(report.lines().any(|l| l.contains("stationary pi") && l.contains("0.5") && l.contains("0.25")), "{report}");
}

#[test]
fn simulate_is_deterministic_for_a_fixed_seed() {
    let cfg = config("scalar_d2.toml");
    let args = ["simulate", "--config", cfg.to_str().unwrap(), "--seed", "9", "--episodes", "20"];
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert_eq!(code(&run(&args, a.path())), 0);
    assert_eq!(code(&run(&args, b.path())), 0);
    for file in ["trajectory.csv", "cost.csv"] {
        let x = fs::read(a.path().join(file)).unwrap();
        assert_eq!(x, fs::read(b.path().join(file)).unwrap(), "{file} differs");
    }
    let traj = fs::read_to_string(a.path().join("trajectory.csv")).unwrap();
    let header = traj.lines().next().unwrap();
    assert!(header.starts_with("t,e1,e2,x") && header.ends_with(",stage_cost"), "{header}");
}

#[test]
fn study_writes_cost_curves() {
    let out = TempDir::new().unwrap();
    let o = run(
        &["study", "--config", config("scalar_d2.toml").to_str().unwrap(), "--episodes", "20"],
        out.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let curves: Vec<_> = fs::read_dir(out.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            name.starts_with("study_") && name != "study_summary.csv"
        })
        .collect();
    assert_eq!(curves.len(), 5, "one curve per node");
    for c in curves {
        let text = fs::read_to_string(c.path()).unwrap();
        assert_eq!(text.lines().next(), Some("epsilon,cost_mean,cost_se"));
    }
}

#[test]
fn verify_passes_and_faults_exit_with_invariant_code() {
    let cfg = config("d3.toml");
    let out = TempDir::new().unwrap();
    let ok = run(&["verify", "--config", cfg.to_str().unwrap()], out.path());
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    for fault in ["skip-absorption", "keep-fresh-private"] {
        let bad = run(&["verify", "--config", cfg.to_str().unwrap(), "--fault", fault], out.path());
        assert_eq!(code(&bad), 4, "{fault}");
        assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));
    }
}

#[test]
fn invalid_inputs_exit_with_validation_code() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, &UNSTABILIZABLE.replace("prob = 1.0", "prob = 0.7"));
    let o = run(&["synth", "--config", &cfg], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("delay.pmf"));

    let o = run(&["verify", "--config", config("d2.toml").to_str().unwrap(), "--fault", "nope"], dir.path());
    assert_eq!(code(&o), 2);

    let cfg = write_config(&dir, "[plant]\ndelay = 1\nbogus = 3\n");
    assert_eq!(code(&run(&["synth", "--config", &cfg], dir.path())), 2);
}

#[test]
fn unstabilizable_plant_exits_with_numerical_code() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, UNSTABILIZABLE);
    let o = run(&["synth", "--config", &cfg], dir.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}
