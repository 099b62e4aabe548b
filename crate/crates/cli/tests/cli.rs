use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_curvedcc"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const GEODESIC: &str = r#"
command = "solve-geodesic"
seed = 11

[[case]]
sigma = -1
masses = [1.0, 1.0, 1.0]
c = 1.0

[[random_cases]]
sigma = 1
n = [3]
count = 2
mass_range = [0.5, 2.0]
c = [0.4]
c_relative_to = "min_mass"
"#;

fn envelope(dir: &Path) -> Value {
    let text = std::fs::read_to_string(dir.join("envelope.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

#[test]
fn passing_run_exits_zero_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.toml", GEODESIC);
    let out = dir.path().join("out");
    let o = bin()
        .args(["solve-geodesic", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let env = envelope(&out);
    assert_eq!(env["passed"], true);
    assert_eq!(env["cases"][0]["result"]["classes"], 3);
    for inertia in env["cases"][0]["result"]["inertia"].as_array().unwrap() {
        assert_eq!(inertia, &serde_json::json!({"n0": 0, "n_plus": 3, "n_minus": 1}));
    }
    let csv = std::fs::read_to_string(out.join("geodesic_classes.csv")).unwrap();
    assert!(csv.starts_with("case,sigma,class,"));
    assert_eq!(csv.lines().count(), 1 + 3 * 3);
}

#[test]
fn envelopes_are_deterministic_across_runs_and_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.toml", GEODESIC);
    let mut envs = Vec::new();
    for (k, jobs) in ["1", "2", "2"].iter().enumerate() {
        let out = dir.path().join(format!("o{k}"));
        let o = bin()
            .arg("solve-geodesic")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--jobs", jobs])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        envs.push(envelope(&out));
    }
    assert_eq!(envs[0], envs[1]);
    assert_eq!(envs[1], envs[2]);
}

#[test]
fn seed_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.toml", GEODESIC);
    let out = dir.path().join("o");
    let o = bin()
        .arg("solve-geodesic")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--seed", "5"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(envelope(&out)["seed"], 5);
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "command = \"solve-geodesic\"\nbogus = 1\n");
    let o = bin().arg("solve-geodesic").arg("--config").arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bogus") && err.contains("line"), "{err}");

    let good = write(dir.path(), "g.toml", GEODESIC);
    let o = bin().arg("index").arg("--config").arg(&good).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let o = bin()
        .arg("solve-geodesic")
        .arg("--config")
        .arg(dir.path().join("missing.toml"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));

    let o = bin().args(["no-such-command", "--config", "x"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn assertion_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
command = "palmore-count"
[planar]
starts = 30
min_total = 50
[[case]]
sigma = -1
masses = [1.0, 1.0, 1.0]
c = 1.0
"#;
    let cfg = write(dir.path(), "p.toml", text);
    let o = bin().arg("palmore-count").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL class_total"));
}

#[test]
fn numerical_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // Two bodies at total collision: no multiplier can be extracted.
    let conf = write(
        dir.path(),
        "c.toml",
        "sigma = -1\nmasses = [1.0, 1.0]\nangles = [[0.3, 0.0], [0.3, 0.0]]\n",
    );
    let text = format!(
        "command = \"index\"\n[[case]]\nsigma = -1\nmasses = [1.0, 1.0]\nconfiguration = \"{}\"\n",
        conf.display()
    );
    let cfg = write(dir.path(), "i.toml", &text);
    let o = bin().arg("index").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn index_on_supplied_configuration() {
    let dir = tempfile::tempdir().unwrap();
    // Symmetric equal-mass collinear triple on H¹: an OCC by symmetry.
    let conf = write(
        dir.path(),
        "c.toml",
        "sigma = -1\nmasses = [1.0, 1.0, 1.0]\nangles = [[-0.5, 0.0], [0.0, 0.0], [0.5, 0.0]]\n",
    );
    let text = format!(
        "command = \"index\"\n[[case]]\nsigma = -1\nmasses = [1.0, 1.0, 1.0]\nconfiguration = \"{}\"\n",
        conf.display()
    );
    let cfg = write(dir.path(), "i.toml", &text);
    let out = dir.path().join("o");
    let o = bin()
        .arg("index")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let env = envelope(&out);
    let r = &env["cases"][0]["result"];
    assert_eq!(r["geodesic"], true);
    assert_eq!(
        r["report"]["inertia_total"]["triple"],
        serde_json::json!({"n0": 0, "n_plus": 3, "n_minus": 1})
    );
}

#[test]
fn every_recipe_parses() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../recipes");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            curvedcc::runner::ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert_eq!(n, 12);
}
