use bandforge::{fixtures, format};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bandforge"));
    c.env_remove("BANDFORGE_BUDGET");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_complex(dir: &Path, name: &str, c: &bandforge::BandComplex) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, format::serialize(c)).unwrap();
    p
}

fn spec_file(dir: &Path) -> PathBuf {
    let p = dir.join("spec.json");
    fs::write(&p, r#"{"m": [1, 1], "n": [1, 1], "K": 2, "seed": ["1", "1", "1", "1", "1"]}"#).unwrap();
    p
}

#[test]
fn inspect_reports_annulus() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_complex(dir.path(), "annulus.json", &fixtures::annulus());
    let o = run(&["inspect", f.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("annulus-free: no"), "{text}");
    assert!(text.contains("excess: 0"), "{text}");
}

#[test]
fn inspect_json_with_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_complex(dir.path(), "rot.json", &fixtures::rotation(bandforge::rational::rat(1, 3)));
    let o = run(&["inspect", f.to_str().unwrap(), "--json", "--sigma", "support:0:0:1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["first_return"]["families"].as_array().unwrap().len(), 2);
    assert_eq!(v["blocks"]["blocks"].as_array().unwrap().len(), 3);
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    fs::write(&f, "{ not json").unwrap();
    let o = run(&["inspect", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["inspect", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_sigma_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_complex(dir.path(), "a.json", &fixtures::annulus());
    let o = run(&["inspect", f.to_str().unwrap(), "--sigma", "nowhere"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn violated_hypothesis_exits_3() {
    let o = run(&["spectral", "--mu", "5", "--lambda", "3"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn exhausted_budget_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path());
    let o = bin().args(["gallery", spec.to_str().unwrap(), "--verify-step"]).env("BANDFORGE_BUDGET", "2").output().unwrap();
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn spectral_constant_gallery() {
    let o = run(&["spectral", "--m", "1", "--n", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let d = v["dimension"].as_f64().unwrap();
    assert!(d > 1.0 && d < 2.0);
    assert_eq!(v["seed"], 0);
}

#[test]
fn ends_on_compact_leaves_are_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_complex(dir.path(), "shift.json", &fixtures::shift_band());
    let out = dir.path().join("out");
    let o = run(&[
        "ends",
        f.to_str().unwrap(),
        "--samples",
        "25",
        "--radius",
        "8",
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
        "--emit",
        "csv",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["counts"]["0"], 25);
    let csv = fs::read_to_string(out.join("histogram.csv")).unwrap();
    assert!(csv.starts_with("# seed=11"));
    assert!(csv.contains("0,25,1"));
    assert!(!out.join("histogram.json").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path());
    let mut outputs = Vec::new();
    for run_no in 0..2 {
        let out = dir.path().join(format!("out{run_no}"));
        let o = run(&[
            "ends",
            spec.to_str().unwrap(),
            "--samples",
            "30",
            "--radius",
            "24",
            "--seed",
            "9",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        let files: Vec<Vec<u8>> = ["histogram.csv", "histogram.json", "ball.svg", "ball.json"]
            .iter()
            .map(|f| fs::read(out.join(f)).unwrap())
            .collect();
        outputs.push((o.stdout, files));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn rips_writes_trace_and_final_state() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_complex(dir.path(), "r.json", &fixtures::remark_three_band_unit());
    let out = dir.path().join("out");
    let o = run(&["rips", f.to_str().unwrap(), "--policy", "random", "--seed", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["seed"], 4);
    assert_eq!(v["policy"], "random(4)");
    let lines = fs::read_to_string(out.join("trace.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), v["collapses"].as_u64().unwrap() as usize + 1);
    let last = format::deserialize(&fs::read_to_string(out.join("final.json")).unwrap()).unwrap();
    assert_eq!(bandforge::rational::format(&last.excess()), v["excess"].as_str().unwrap());
}

#[test]
fn gallery_writes_stage_complex() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path());
    let out = dir.path().join("out");
    let o = run(&["gallery", spec.to_str().unwrap(), "--areas", "--complex", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(format::deserialize(&fs::read_to_string(out.join("stage1.json")).unwrap()).is_ok());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("gallery.json")).unwrap()).unwrap();
    assert!(v["areas"].is_object());
}
