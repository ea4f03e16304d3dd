use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqc"))
        .args(args)
        .env_remove("SQC_THREADS")
        .output()
        .expect("failed to launch sqc")
}

fn ok(args: &[&str]) -> String {
    let out = sqc(args);
    assert!(
        out.status.success(),
        "sqc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gate_count_tables() {
    let t15 = ok(&["gate-count"]);
    let last = t15.lines().last().unwrap();
    assert!(last.ends_with("2430"), "{t15}");
    assert!(t15.contains("XXA") && t15.lines().any(|l| l.starts_with("X ") && l.ends_with("20")));
    let t25 = ok(&["gate-count", "--blocks", "25"]);
    assert!(t25.lines().last().unwrap().ends_with("4050"));

    let dir = tempfile::tempdir().unwrap();
    let listing = dir.path().join("gates.txt");
    ok(&["gate-count", "--blocks", "15", "--emit-gates", s(&listing), "--out", s(dir.path())]);
    let text = fs::read_to_string(&listing).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 2430);
    assert!(dir.path().join("gate_counts.csv").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn gen_data_is_reproducible_and_echoes_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        ok(&["gen-data", "--out", s(d), "--seed", "4", "--set", "n_samples=10000"]);
    }
    for f in ["train.sqcd", "test.sqcd", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(fs::metadata(a.join("train.sqcd")).unwrap().len(), 48 + 144 * 9990);
    assert_eq!(fs::metadata(a.join("test.sqcd")).unwrap().len(), 48 + 144 * 10);

    let m = json(&a.join("manifest.json"));
    assert_eq!(m["seed"], 4);
    assert_eq!(m["command"], "gen-data");
    let data = &m["config"]["data"];
    assert_eq!(data["rho_range"], serde_json::json!([0.95, 1.05]));
    assert_eq!(data["speed_range"], serde_json::json!([0.0, 0.01]));
    assert_eq!(data["sigma_neq_range"], serde_json::json!([0.0, 5e-4]));
    assert_eq!(data["tau"], 1.0);
    assert_eq!(data["test_split"], 0.001);

    let out = sqc(&["gen-data", "--out", s(&dir.path().join("c")), "--set", "rho_min=2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho"));
}

#[test]
fn config_file_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "seed = 1\nlearning_rte = 0.1\n").unwrap();
    let out = sqc(&["gen-data", "--config", s(&cfg), "--out", s(dir.path())]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":2:") && err.contains("learning_rte"), "{err}");

    fs::write(&cfg, "tau = 0.4\n").unwrap();
    let out = sqc(&["simulate", "--config", s(&cfg), "--out", s(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("1/2"));
}

#[test]
fn train_resume_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["gen-data", "--out", s(&data), "--set", "n_samples=5000", "--set", "test_split=0.02"]);
    let common = ["--set", "blocks=2", "--set", "val_every=100", "--set", "val_size=50"];

    let first = dir.path().join("first");
    let mut args = vec!["train", "--data", s(&data), "--out", s(&first), "--set", "iterations=300"];
    args.extend(common);
    let stdout = ok(&args);
    assert!(stdout.contains("relative momentum loss"));
    let ck = json(&first.join("checkpoint.json"));
    assert_eq!(ck["iteration"], 300);
    assert_eq!(ck["theta"].as_array().unwrap().len(), 8);
    let curve = fs::read_to_string(first.join("loss_curve.csv")).unwrap();
    assert!(curve.starts_with("iteration,train_loss,val_mse,alpha\n"));

    let second = dir.path().join("second");
    let ck_path = first.join("checkpoint.json");
    let mut args = vec![
        "train", "--data", s(&data), "--out", s(&second), "--set", "iterations=600", "--resume", s(&ck_path),
    ];
    args.extend(common);
    ok(&args);
    assert_eq!(json(&second.join("checkpoint.json"))["iteration"], 600);
    let iters: Vec<u64> = fs::read_to_string(second.join("loss_curve.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(iters.first().copied().unwrap() >= 300 && iters.windows(2).all(|w| w[0] < w[1]), "{iters:?}");

    let eval = dir.path().join("eval");
    ok(&["evaluate", "--checkpoint", s(&second.join("checkpoint.json")), "--data", s(&data), "--out", s(&eval)]);
    let ev = json(&eval.join("evaluation.json"));
    assert_eq!(ev["test_samples"], 100);
    assert_eq!(ev["accuracy"].as_array().unwrap().len(), 9);
}

#[test]
fn simulate_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let init = dir.path().join("init");
    ok(&["simulate", "--out", s(&init), "--steps", "0", "--set", "nx=16", "--set", "ny=16"]);
    let dumps: Vec<String> = fs::read_dir(&init)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".sqcf"))
        .collect();
    assert_eq!(dumps.len(), 2, "{dumps:?}");
    assert_eq!(fs::metadata(init.join("field_final.sqcf")).unwrap().len(), 24 + 24 * 256);

    let tg = dir.path().join("tg");
    let stdout = ok(&["simulate", "--out", s(&tg), "--case", "taylor-green", "--backend", "bgk"]);
    assert!(stdout.contains("decay rate"));
    let summary = json(&tg.join("summary.json"));
    assert!(summary["decay"]["relative_error"].as_f64().unwrap() < 0.02);
    assert!(summary["mass"]["max_relative_drift"].as_f64().unwrap() < 1e-10);
    for f in ["centerlines.csv", "peak_speed.csv", "snapshot_final.csv", "mass_audit.json", "manifest.json"] {
        assert!(tg.join(f).exists(), "{f}");
    }

    let cmp = dir.path().join("cmp");
    ok(&["compare", s(&tg), s(&tg), "--out", s(&cmp)]);
    let c = json(&cmp.join("comparison.json"));
    assert_eq!(c["relative"]["max"], 0.0);
    assert_eq!(c["absolute"]["max"], 0.0);
    assert!(cmp.join("centerline_overlay.csv").exists());

    let out = sqc(&["compare", s(&tg), s(&init), "--out", s(&cmp)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("shape"));
}

#[test]
fn sqc_backend_needs_a_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = sqc(&["simulate", "--out", s(dir.path()), "--backend", "sqc"]);
    assert!(!out.status.success());
}

#[test]
fn identity_checkpoint_reproduces_pure_streaming() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("zero.json");
    let theta = vec![0.0; 4];
    let cfg = serde_json::json!({
        "format_version": 1,
        "architecture": ["X", "Z", "XXA", "ZZD"],
        "theta": theta,
        "config": serde_json::from_str::<serde_json::Value>(&{
            // the default training configuration, as echoed by any manifest
            let d = dir.path().join("m");
            ok(&["gen-data", "--out", s(&d), "--set", "n_samples=10"]);
            json(&d.join("manifest.json"))["config"]["train"].to_string()
        })
        .unwrap(),
        "iteration": 0,
        "seed": 0
    });
    fs::write(&ck, cfg.to_string()).unwrap();
    let run = dir.path().join("run");
    ok(&[
        "simulate", "--out", s(&run), "--backend", "sqc", "--checkpoint", s(&ck), "--steps", "16", "--set", "nx=16",
        "--set", "ny=16",
    ]);
    // sixteen streaming steps on a periodic 16x16 grid return every population home
    let values = |name: &str| -> Vec<f64> {
        fs::read(run.join(name)).unwrap()[24..]
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect()
    };
    let (start, end) = (values("field_000000.sqcf"), values("field_final.sqcf"));
    assert_eq!(start.len(), 3 * 256);
    for (a, b) in start.iter().zip(&end) {
        assert!((a - b).abs() < 1e-14, "{a} vs {b}");
    }
}
