use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nhsense(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhsense"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

const HN_QFI: &str = r#"
task = "qfi"

[model]
family = "HatanoNelson"
size = 40
bc = "obc"
params = { J_L = 1.0, J_R = -1.0 }

[grid]
lambdas = [-1.0, -0.9]
sizes = [20, 40]
path = "numeric"
"#;

#[test]
fn identical_runs_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.toml"), HN_QFI).unwrap();
    for d in ["a", "b"] {
        let o = nhsense(&["qfi", "--config", "run.toml", "--out", d], tmp.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read(tmp.path().join("a/fisher.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/fisher.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("model,lambda,L,selector,F_Q,F_C,fd_step,gauge_overlap,flags\n"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 5);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["cells"], 4);
    assert_eq!(manifest["model"]["params"]["J_R"], -1.0);
}

#[test]
fn unknown_key_is_fatal_and_named() {
    let tmp = tempfile::tempdir().unwrap();
    let text = HN_QFI.replace("[grid]", "[grid]\nlambda_max_typo = 2.0");
    fs::write(tmp.path().join("run.toml"), text).unwrap();
    let o = nhsense(&["qfi", "--config", "run.toml", "--out", "x"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("lambda_max_typo") && err.contains("line"), "{err}");
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn empty_grid_rejected_before_compute() {
    let tmp = tempfile::tempdir().unwrap();
    let text = HN_QFI.replace("lambdas = [-1.0, -0.9]", "lambdas = []");
    fs::write(tmp.path().join("run.toml"), text).unwrap();
    let o = nhsense(&["qfi", "--config", "run.toml", "--out", "x"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.lambdas"));
    assert!(!tmp.path().join("x").exists());
}

#[test]
fn untrusted_cells_make_a_partial_run() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nhsense(
        &[
            "qfi", "--family", "hatano_nelson", "--param", "J_L=1", "--param", "J_R=-1", "--size", "200",
            "--path", "numeric", "--lambdas", "-1,0.25", "--out", "p",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("p/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["status"], "partial");
    let f = &m["failures"][0];
    assert_eq!(f["lambda"], 0.25);
    assert_eq!(f["L"], 200);
    assert!(f["error"].as_str().unwrap().contains("untrusted"));
}

#[test]
fn fig2c_recipe_scales_quadratically() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nhsense(&["reproduce", "fig2c", "--out", "f"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for mode in ["m1", "m2", "mL"] {
        let fit = fs::read_to_string(tmp.path().join(format!("f/fig2c_{mode}/fit.csv"))).unwrap();
        let row: Vec<&str> = fit.lines().nth(1).unwrap().split(',').collect();
        let b: f64 = row[2].parse().unwrap();
        assert!((b - 2.0).abs() < 0.1, "{mode}: b = {b}");
    }
}

#[test]
fn json_output_and_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nhsense(
        &[
            "spectrum", "--family", "nh_ssh", "--param", "J1L=1", "--param", "J1R=-0.5", "--param", "J2=1",
            "--size", "10", "--curves", "--nk", "128", "--format", "json", "--out", "s",
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("s/spectrum.json")).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 20);
    let text = fs::read_to_string(tmp.path().join("s/curves/lam0_c0.json")).unwrap();
    assert!(text.starts_with("[\n  {\"index\": 0, \"re\": "), "{text:.40}");
    let c: serde_json::Value = serde_json::from_str(&text).unwrap();
    // a loop that visits both bands before closing carries 2·nk points
    let n = c.as_array().unwrap().len();
    assert!(n == 128 || n == 256, "{n}");
}

#[test]
fn unknown_recipe_is_fatal() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nhsense(&["reproduce", "fig99", "--out", "r"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}
