use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_soliton-lab"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("soliton-lab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn profile_writes_csv_and_closed_forms() {
    let out = scratch("profile");
    let st = bin()
        .args(["profile", "--omega", "1", "--c", "2", "--b", "-0.1", "--L", "200", "--N", "4096", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let mut rdr = csv::Reader::from_path(out.join("profile.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["x", "Phi", "re_phi", "im_phi"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4096);
    for r in &rows {
        let phi: f64 = r[1].parse().unwrap();
        let re: f64 = r[2].parse().unwrap();
        let im: f64 = r[3].parse().unwrap();
        assert!((re.hypot(im) - phi).abs() < 1e-12 * phi.max(1.0));
    }
    let s = summary(&out);
    assert_eq!(s["command"], "profile");
    let gamma = (3.0 - 1.6) / 3.0;
    let mass = s["closed_form"]["mass"].as_f64().unwrap();
    assert!((mass - 4.0 * std::f64::consts::PI / f64::sqrt(gamma)).abs() < 1e-12);
    assert!(out.join("config.toml").exists());
}

#[test]
fn inadmissible_parameters_exit_with_validation_status() {
    let out = scratch("bad");
    let o = bin().args(["profile", "--omega", "1", "--c", "-1", "--b", "-0.28125", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("inadmissible"), "{err}");
}

#[test]
fn conflicting_speed_and_velocity_rejected() {
    let out = scratch("conflict");
    let o = bin().args(["profile", "--omega", "4", "--c", "1", "--s", "0.9", "--out"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn saved_config_reproduces_run() {
    let a = scratch("rerun-a");
    let b = scratch("rerun-b");
    let st = bin()
        .args(["evolve", "--b", "0", "--omega", "1", "--c", "1", "--L", "30", "--N", "256", "--T", "0.05", "--out"])
        .arg(&a)
        .status()
        .unwrap();
    assert!(st.success());
    let st = bin().args(["evolve", "--config"]).arg(a.join("config.toml")).arg("--out").arg(&b).status().unwrap();
    assert!(st.success());
    for f in ["invariants.csv", "summary.json", "config.toml", "final.bin"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_for_another_command_is_rejected() {
    let a = scratch("wrongcmd");
    let st = bin().args(["sstar", "--b", "0.5", "--out"]).arg(&a).status().unwrap();
    assert!(st.success());
    let o = bin().args(["threshold", "--config"]).arg(a.join("config.toml")).arg("--out").arg(&a).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn non_convergence_exits_numerical() {
    let out = scratch("noconv");
    let o = bin()
        .args(["nehari", "--omega", "1", "--c", "0.5", "--b", "0", "--L", "30", "--N", "256", "--max-iters", "1", "--tol", "1e-14", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    let s = summary(&out);
    assert_eq!(s["converged"], false);
    assert!(out.join("minimizer.bin").exists());
}

#[test]
fn report_collects_summaries() {
    let root = scratch("report");
    for (name, b) in [("one", "0.5"), ("two", "0.25")] {
        let st = bin().args(["sstar", "--b", b, "--out"]).arg(root.join(name)).status().unwrap();
        assert!(st.success());
    }
    let st = bin().args(["report"]).arg(&root).status().unwrap();
    assert!(st.success());
    let mut rdr = csv::Reader::from_path(root.join("report.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "command"));
    assert_eq!(rdr.records().count(), 2);
}
