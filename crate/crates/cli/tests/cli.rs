use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fidmark(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fidmark")).args(args).env_remove("FIDMARK_SEED").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = fidmark(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str]) -> String {
    let out = fidmark(args);
    assert_eq!(out.status.code(), Some(1), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn jsonl(path: &Path) -> Vec<Value> {
    fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn marker_gen_writes_codebook_and_bitmaps() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["marker-gen", "--codebook", "--id", "19", "23", "--size", "256", "--out", p(dir.path())]);
    let csv = fs::read_to_string(dir.path().join("codebook.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("id,bits"));
    assert_eq!(lines.count(), 36);
    let img = image::open(dir.path().join("marker_19.png")).unwrap();
    assert_eq!((img.width(), img.height()), (256, 256));
    assert!(dir.path().join("marker_23.png").is_file());

    let err = fails(&["marker-gen", "--id", "6", "--out", p(dir.path())]);
    assert!(err.contains('6'), "{err}");
    fails(&["marker-gen", "--out", p(dir.path())]);
}

#[test]
fn render_presets_with_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let ew = dir.path().join("ew");
    ok(&["render", "--preset", "east-west", "--out", p(&ew)]);
    let gt = jsonl(&ew.join("ground_truth.jsonl"));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(ew.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(gt.len(), manifest["frames"].as_array().unwrap().len());
    let east: Vec<f64> = gt.iter().map(|g| g["position_target"][0].as_f64().unwrap()).collect();
    assert!(east.iter().any(|&e| e < -0.3) && east.iter().any(|&e| e > 0.3));

    let st = dir.path().join("static");
    ok(&["render", "--preset", "static-2m", "--out", p(&st)]);
    let gt = jsonl(&st.join("ground_truth.jsonl"));
    assert!(gt.iter().all(|g| g["pose"] == gt[0]["pose"]));

    let err = fails(&["render", "--preset", "nope", "--out", p(&st)]);
    assert!(err.contains("static-2m"), "{err}");
}

#[test]
fn missing_inputs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let err = fails(&["detect", "--frames", p(&dir.path().join("absent")), "--out", p(&dir.path().join("t.jsonl"))]);
    assert!(err.contains("manifest.json"), "{err}");
    let err = fails(&["evaluate", p(&dir.path().join("none.jsonl")), "--out", p(dir.path())]);
    assert!(err.contains("none.jsonl"), "{err}");

    let seq = dir.path().join("seq");
    ok(&["render", "--preset", "static-2m", "--out", p(&seq)]);
    fs::remove_file(seq.join("frame_00003.png")).unwrap();
    let err = fails(&["detect", "--frames", p(&seq), "--out", p(&dir.path().join("t.jsonl"))]);
    assert!(err.contains("frame_00003.png"), "{err}");
}

#[test]
fn multi_emits_one_bundle_record_per_frame() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq");
    ok(&["render", "--preset", "north-south", "--layout", "bundle", "--out", p(&seq)]);
    let trace = dir.path().join("multi/ns.jsonl");
    ok(&["detect", "--frames", p(&seq), "--variant", "multi", "--out", p(&trace)]);
    let records = jsonl(&trace);
    let frames: Vec<u64> = records.iter().map(|r| r["frame"].as_u64().unwrap()).collect();
    assert_eq!(frames, (0..frames.len() as u64).collect::<Vec<_>>());
    assert!(records.iter().all(|r| r["id"] == 19));
}

#[test]
fn variants_differ_only_in_orientation_fields() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq");
    ok(&["render", "--preset", "pan-tilt", "--seed", "5", "--out", p(&seq)]);
    let orig = dir.path().join("orig.jsonl");
    let ellipse = dir.path().join("ellipse.jsonl");
    ok(&["detect", "--frames", p(&seq), "--variant", "orig", "--out", p(&orig)]);
    ok(&["detect", "--frames", p(&seq), "--variant", "ellipse", "--out", p(&ellipse)]);
    let (a, b) = (jsonl(&orig), jsonl(&ellipse));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        for key in ["frame", "t", "id", "un", "vn"] {
            assert_eq!(x[key], y[key], "{key}");
        }
        let range = |r: &Value| ["e", "n", "u"].iter().map(|k| r[k].as_f64().unwrap().powi(2)).sum::<f64>().sqrt();
        assert!((range(x) - range(y)).abs() < 1e-6);
    }
}

#[test]
fn config_and_env_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_fidmark"));
        cmd.args(args).env_remove("FIDMARK_SEED");
        if let Some(seed) = env {
            cmd.env("FIDMARK_SEED", seed);
        }
        assert!(cmd.output().unwrap().status.success());
    };
    let seed_of = |d: &Path| -> u64 {
        let m: Value = serde_json::from_str(&fs::read_to_string(d.join("manifest.json")).unwrap()).unwrap();
        m["seed"].as_u64().unwrap()
    };
    let out = dir.path().join("a");
    run(&["render", "--preset", "static-2m", "--out", p(&out)], Some("99"));
    assert_eq!(seed_of(&out), 99);
    run(&["render", "--preset", "static-2m", "--seed", "7", "--out", p(&out)], Some("99"));
    assert_eq!(seed_of(&out), 7);
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"seed": 3}"#).unwrap();
    run(&["--config", p(&cfg), "render", "--preset", "static-2m", "--seed", "7", "--out", p(&out)], Some("99"));
    assert_eq!(seed_of(&out), 3);

    fs::write(&cfg, r#"{"detector": {"no_such_key": 1}}"#).unwrap();
    let err = fails(&["--config", p(&cfg), "detect", "--frames", p(&out), "--out", p(&dir.path().join("t.jsonl"))]);
    assert!(err.contains("no_such_key"), "{err}");
}

#[test]
fn evaluate_and_bench_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq");
    ok(&["render", "--preset", "east-west", "--out", p(&seq)]);
    let trace = dir.path().join("orig/east-west.jsonl");
    ok(&["detect", "--frames", p(&seq), "--out", p(&trace)]);
    let bench = dir.path().join("bench.json");
    let line = ok(&["bench", "--frames", p(&seq), "--case", "east-west", "--out", p(&bench)]);
    assert!(line.contains("F="), "{line}");
    let report = dir.path().join("report");
    let printed = ok(&["evaluate", p(&trace), "--bench", p(&bench), "--out", p(&report)]);
    assert!(printed.contains("orig"), "{printed}");
    let cases = fs::read_to_string(report.join("cases.csv")).unwrap();
    assert!(cases.starts_with("system,case,n,d,r_d\norig,east-west,"), "{cases}");
    let rates = fs::read_to_string(report.join("rates.csv")).unwrap();
    assert!(rates.starts_with("system,case,len_s,n,F\norig,east-west,"), "{rates}");
    assert!(report.join("orig__east-west__targets.svg").is_file());
}

#[test]
fn pipeline_is_byte_identical_across_runs() {
    let run = |root: &Path| {
        ok(&["marker-gen", "--id", "19", "--codebook", "--out", p(&root.join("markers"))]);
        ok(&["render", "--preset", "in-out", "--seed", "11", "--out", p(&root.join("seq"))]);
        ok(&["detect", "--frames", p(&root.join("seq")), "--variant", "ellipse", "--out", p(&root.join("ellipse/in-out.jsonl"))]);
        ok(&["evaluate", p(&root.join("ellipse/in-out.jsonl")), "--out", p(&root.join("report"))]);
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(a.path());
    run(b.path());
    let files = walk(a.path());
    assert!(files.len() > 10);
    for rel in files {
        assert_eq!(fs::read(a.path().join(&rel)).unwrap(), fs::read(b.path().join(&rel)).unwrap(), "{rel}");
    }
}

fn walk(root: &Path) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(root).unwrap().to_string_lossy().into_owned());
            }
        }
    }
    out.sort();
    out
}
