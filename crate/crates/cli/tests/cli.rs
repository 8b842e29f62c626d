use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spindle(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spindle"))
        .args(args)
        .current_dir(dir)
        .env_remove("SPINDLE_LOG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&read(path)).unwrap()
}

#[test]
fn simulate_writes_records_moments_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = spindle(
        dir.path(),
        &[
            "simulate",
            "--model",
            "circle",
            "--rho",
            "1",
            "--r",
            "2",
            "--n",
            "1024,4096",
            "--reps",
            "100",
            "--seed",
            "7",
            "--out",
            "runs/a",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let run = dir.path().join("runs/a");
    let records = read(run.join("records.csv"));
    assert!(records.starts_with("n,rep,f0,hull_area,missed_area\n"));
    assert_eq!(records.lines().count(), 201);
    let moments = read(run.join("moments.csv"));
    assert!(moments
        .starts_with("n,M,mean_f0,se_mean_f0,var_f0,se_var_f0,mean_missed,se_mean_missed,var_missed,se_var_missed\n"));
    assert_eq!(moments.lines().count(), 3);
    assert_eq!(read(run.join("incidents.log")), "");
    let manifest = json(run.join("manifest.json"));
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["config"]["seed"], 7);
    assert_eq!(manifest["config"]["reps"], 100);
    assert_eq!(manifest["config"]["model"]["kind"], "circle");
    assert_eq!(manifest["config"]["n"], serde_json::json!([1024, 4096]));
}

#[test]
fn radius_below_r_m_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = spindle(
        dir.path(),
        &[
            "simulate", "--model", "circle", "--rho", "1", "--r", "0.5", "--n", "10,20", "--out", "x",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("r_M"), "{}", stderr(&out));
    assert!(!dir.path().join("x").exists());
}

#[test]
fn constants_prints_limit_constants() {
    let dir = tempfile::tempdir().unwrap();
    let out = spindle(
        dir.path(),
        &[
            "constants",
            "--model",
            "ellipse",
            "--a",
            "1",
            "--b",
            "0.8",
            "--r",
            "2",
            "--out",
            "k",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let vc = v["vertex_coeff"].as_f64().unwrap();
    assert!((vc - 2.727_939_929_178_628).abs() < 1e-8, "{vc}");
    assert_eq!(v, json(dir.path().join("k/constants.json")));
    assert!(dir.path().join("k/manifest.json").exists());
}

#[test]
fn rerunning_from_manifest_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("pts.csv"),
        "x,y\n0,0\n0.5,0.1\n-0.3,0.4\n0.1,-0.6\n0.05,0.05\n",
    )
    .unwrap();
    let cases: [(&[&str], &[&str]); 5] = [
        (
            &[
                "simulate",
                "--model",
                "ellipse",
                "--a",
                "1",
                "--b",
                "0.8",
                "--r",
                "2",
                "--n",
                "50,100,200",
                "--reps",
                "20",
                "--seed",
                "3",
                "--workers",
                "2",
            ],
            &["records.csv", "moments.csv", "moments_jackknife.csv", "incidents.log"],
        ),
        (
            &[
                "cap",
                "--model",
                "ellipse",
                "--a",
                "1",
                "--b",
                "0.8",
                "--r",
                "2",
                "--theta",
                "0.3",
                "--t-grid",
                "0.01,0.001",
            ],
            &["cap.csv"],
        ),
        (
            &[
                "lemma1",
                "--model",
                "ellipse",
                "--a",
                "0.9",
                "--b",
                "0.7",
                "--samples",
                "1000",
                "--seed",
                "5",
            ],
            &["lemma1.csv"],
        ),
        (
            &[
                "hull", "--input", "pts.csv", "--r", "2", "--model", "circle", "--rho", "1",
            ],
            &["vertices.csv", "summary.json"],
        ),
        (
            &["constants", "--model", "trefoil-oval", "--r", "2"],
            &["constants.json"],
        ),
    ];
    for (args, files) in cases {
        let cmd = args[0];
        let mut first: Vec<&str> = args.to_vec();
        first.extend(["--out", "first"]);
        let out = spindle(dir.path(), &first);
        assert_eq!(code(&out), 0, "{cmd}: {}", stderr(&out));
        let out = spindle(dir.path(), &[cmd, "--config", "first/manifest.json", "--out", "second"]);
        assert_eq!(code(&out), 0, "{cmd}: {}", stderr(&out));
        for f in files {
            assert_eq!(
                fs::read(dir.path().join("first").join(f)).unwrap(),
                fs::read(dir.path().join("second").join(f)).unwrap(),
                "{cmd}: {f}"
            );
        }
        let (mut a, mut b) = (
            json(dir.path().join("first/manifest.json")),
            json(dir.path().join("second/manifest.json")),
        );
        a["config"]["out"] = Value::Null;
        b["config"]["out"] = Value::Null;
        assert_eq!(a, b, "{cmd}");
        fs::remove_dir_all(dir.path().join("first")).unwrap();
        fs::remove_dir_all(dir.path().join("second")).unwrap();
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.json"),
        r#"{"model": {"kind": "circle", "rho": 1.0}, "r": 3.0, "n": [20, 40], "reps": 4, "seed": 1}"#,
    )
    .unwrap();
    let out = spindle(
        dir.path(),
        &[
            "simulate", "--config", "c.json", "--seed", "9", "--rho", "0.5", "--out", "o",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let m = json(dir.path().join("o/manifest.json"));
    assert_eq!(m["config"]["seed"], 9);
    assert_eq!(m["config"]["r"], 3.0);
    assert_eq!(m["config"]["model"]["rho"], 0.5);
}

#[test]
fn bad_invocations_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.json"),
        r#"{"model": {"kind": "circle", "rho": 1.0}, "r": 2.0, "colour": 1}"#,
    )
    .unwrap();
    fs::write(dir.path().join("outside.csv"), "x,y\n0,0\n3,0\n").unwrap();
    let cases: [&[&str]; 9] = [
        &[
            "simulate", "--model", "circle", "--rho", "1", "--r", "2", "--bogus", "1",
        ],
        &[],
        &["simulate", "--config", "bad.json"],
        &["simulate", "--config", "missing.json"],
        &["simulate", "--model", "circle", "--r", "2"],
        &["simulate", "--model", "blob", "--r", "2"],
        &["cap", "--model", "circle", "--rho", "1", "--r", "2", "--t-grid", "5"],
        &[
            "hull",
            "--input",
            "outside.csv",
            "--r",
            "2",
            "--model",
            "circle",
            "--rho",
            "1",
        ],
        &[
            "lemma1",
            "--model",
            "ellipse",
            "--a",
            "0.9",
            "--b",
            "0.7",
            "--samples",
            "10",
        ],
    ];
    for args in cases {
        let out = spindle(dir.path(), args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).contains("panicked"), "{args:?}");
    }
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("blocker"), "").unwrap();
    let out = spindle(
        dir.path(),
        &[
            "constants",
            "--model",
            "circle",
            "--rho",
            "1",
            "--r",
            "2",
            "--out",
            "blocker/sub",
        ],
    );
    assert_eq!(code(&out), 1, "{}", stderr(&out));
}

#[test]
fn fit_reads_moments_csv() {
    let dir = tempfile::tempdir().unwrap();
    let sim = spindle(
        dir.path(),
        &[
            "simulate",
            "--model",
            "circle",
            "--rho",
            "1",
            "--r",
            "2",
            "--n",
            "256,1024,4096,16384",
            "--reps",
            "40",
            "--out",
            "s",
        ],
    );
    assert_eq!(code(&sim), 0, "{}", stderr(&sim));
    for extra in [&[][..], &["--weighted"][..]] {
        let mut args = vec!["fit", "--input", "s/moments.csv", "--column", "mean_f0", "--out", "f"];
        args.extend(extra);
        let out = spindle(dir.path(), &args);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        let slope = v["slope"].as_f64().unwrap();
        // Expected vertex count grows like n^(1/3).
        assert!((slope - 1.0 / 3.0).abs() < 0.05, "{slope}");
        assert_eq!(v["points_used"], 4);
    }
    let out = spindle(dir.path(), &["fit", "--input", "s/moments.csv", "--column", "nope"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn hull_without_model_omits_missed_area() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.csv"), "x,y\n0,1\n0,-1\n").unwrap();
    let out = spindle(dir.path(), &["hull", "--input", "p.csv", "--r", "1", "--out", "h"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["f0"], 2);
    assert!(v["missed_area"].is_null());
    let lens = std::f64::consts::PI;
    assert!((v["hull_area"].as_f64().unwrap() - lens).abs() < 1e-12);
    assert_eq!(read(dir.path().join("h/vertices.csv")), "x,y\n0,-1\n0,1\n");
}
