use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;
use sqc::circuit::{decompose_layer, gate_listing, total_gate_count, Architecture, LayerKind, NativeGateCount};
use sqc::lattice::Q;
use sqc::persistence::{
    load_checkpoint, read_dataset, read_field_dump, resolve_config, save_checkpoint, write_centerline_overlay_csv,
    write_centerlines_csv, write_csv, write_dataset, write_error_fields_csv, write_field_dump, write_loss_curve_csv,
    write_series_csv, write_snapshot_csv, Entry, RunConfig,
};
use sqc::sim::{
    bgk_backend, centerline_profiles, error_fields, fit_decay_rate, run, taylor_green_decay_rate, Backend, Case,
    FieldStats,
};
use sqc::training::{
    accuracy, generate_dataset, metrics::dataset_mse, relative_momentum_loss, train, Dataset,
};

use crate::args::*;
use crate::manifest::Manifest;

pub const TRAIN_FILE: &str = "train.sqcd";
pub const TEST_FILE: &str = "test.sqcd";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const FINAL_FIELD_FILE: &str = "field_final.sqcf";
pub const SUMMARY_FILE: &str = "summary.json";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn resolve(common: &Common, extra: Vec<Entry>) -> Result<(RunConfig, Vec<Entry>)> {
    let mut overrides = common.overrides()?;
    overrides.extend(extra);
    let cfg = resolve_config(common.config.as_deref(), &overrides)?;
    Ok((cfg, overrides))
}

fn manifest(command: &'static str, common: &Common, overrides: Vec<Entry>, cfg: &RunConfig, seed: u64) -> Manifest {
    Manifest::new(command).with_config(common.config.as_deref(), overrides, cfg, seed)
}

fn fmt_accuracy(acc: &[f64; Q]) -> String {
    acc.iter()
        .enumerate()
        .map(|(i, a)| format!("f{i}={a:.4}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn gen_data(args: &GenDataArgs) -> Result<()> {
    let (cfg, overrides) = resolve(&args.common, vec![])?;
    let out = &args.common.out;
    create_dir(out)?;
    let data = generate_dataset(&cfg.data)?;
    write_dataset(&out.join(TRAIN_FILE), &data.train)?;
    write_dataset(&out.join(TEST_FILE), &data.test)?;
    println!(
        "train {} samples, test {} samples, {} draws rejected, max |f_neq| {:.3e}",
        data.train.len(),
        data.test.len(),
        data.rejected,
        data.max_abs_neq
    );
    let mut m = manifest("gen-data", &args.common, overrides, &cfg, cfg.data.seed);
    m.inputs = json!({ "rejected": data.rejected, "max_abs_neq": data.max_abs_neq });
    m.outputs = vec![TRAIN_FILE.into(), TEST_FILE.into()];
    m.write(out)
}

/// Train and test sets from `dir`, or freshly generated from the configuration.
fn load_or_generate(dir: Option<&Path>, cfg: &RunConfig) -> Result<(Dataset, Dataset)> {
    match dir {
        Some(d) => Ok((read_dataset(&d.join(TRAIN_FILE))?, read_dataset(&d.join(TEST_FILE))?)),
        None => {
            let g = generate_dataset(&cfg.data)?;
            Ok((g.train, g.test))
        }
    }
}

fn load_test(dir: Option<&Path>, cfg: &RunConfig) -> Result<Dataset> {
    match dir {
        Some(d) => Ok(read_dataset(&d.join(TEST_FILE))?),
        None => Ok(generate_dataset(&cfg.data)?.test),
    }
}

pub fn train_cmd(args: &TrainArgs) -> Result<()> {
    let extra = args.alpha_max.map(|a| Entry::new("alpha_max", a)).into_iter().collect();
    let (cfg, overrides) = resolve(&args.common, extra)?;
    let out = &args.common.out;
    let resume = args.resume.as_deref().map(load_checkpoint).transpose()?;
    let (train_set, test_set) = load_or_generate(args.data.as_deref(), &cfg)?;
    if test_set.is_empty() {
        bail!("the test set is empty; raise test_split or n_samples");
    }
    create_dir(out)?;

    let (ck, report) = train(&cfg.train, &train_set, &test_set, resume.as_ref())?;
    save_checkpoint(&out.join(CHECKPOINT_FILE), &ck)?;
    write_loss_curve_csv(&out.join("loss_curve.csv"), &report.loss_curve)?;
    write_json(&out.join("report.json"), &report)?;

    println!("iterations {}", ck.iteration);
    println!(
        "validation MSE {:.4e} -> {:.4e} (ratio {:.2})",
        report.initial_val_mse,
        report.final_val_mse,
        report.initial_val_mse / report.final_val_mse
    );
    println!("accuracy at eps={:e}: {}", cfg.train.epsilon_acc, fmt_accuracy(&report.accuracy));
    println!("relative momentum loss {:.6}", report.relative_momentum_loss);

    let mut m = manifest("train", &args.common, overrides, &cfg, cfg.train.seed);
    m.inputs = json!({
        "data": args.data,
        "resume": args.resume,
        "train_samples": train_set.len(),
        "test_samples": test_set.len(),
    });
    m.outputs = vec![CHECKPOINT_FILE.into(), "loss_curve.csv".into(), "report.json".into()];
    m.write(out)
}

#[derive(Serialize)]
struct Evaluation {
    checkpoint_iteration: u64,
    test_samples: usize,
    epsilon: f64,
    accuracy: [f64; Q],
    relative_momentum_loss: f64,
    mse: f64,
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let (cfg, overrides) = resolve(&args.common, vec![])?;
    let ck = load_checkpoint(&args.checkpoint)?;
    let test = load_test(args.data.as_deref(), &cfg)?;
    if test.is_empty() {
        bail!("the test set is empty");
    }
    let out = &args.common.out;
    create_dir(out)?;
    let eps = cfg.train.epsilon_acc;
    let ev = Evaluation {
        checkpoint_iteration: ck.iteration,
        test_samples: test.len(),
        epsilon: eps,
        accuracy: accuracy(&test, &ck.architecture, &ck.theta, eps)?,
        relative_momentum_loss: relative_momentum_loss(&test, &ck.architecture, &ck.theta)?,
        mse: dataset_mse(&test, &ck.circuit()?)?,
    };
    println!("test samples {}, MSE {:.4e}", ev.test_samples, ev.mse);
    println!("accuracy at eps={eps:e}: {}", fmt_accuracy(&ev.accuracy));
    println!("relative momentum loss {:.6}", ev.relative_momentum_loss);
    write_json(&out.join("evaluation.json"), &ev)?;

    let mut m = manifest("evaluate", &args.common, overrides, &cfg, ck.seed);
    m.inputs = json!({ "checkpoint": args.checkpoint, "data": args.data });
    m.outputs = vec!["evaluation.json".into()];
    m.write(out)
}

/// Gate table with one row per layer kind present, then the total.
pub fn gate_table(arch: &Architecture) -> (String, Vec<(String, NativeGateCount)>) {
    let mut per_kind: BTreeMap<usize, (LayerKind, usize)> = BTreeMap::new();
    for &k in &arch.layers {
        per_kind.entry(k as usize).or_insert((k, 0)).1 += 1;
    }
    let mut rows = Vec::new();
    let mut text = format!("{:<8}{:>8}{:>8}{:>8}{:>8}{:>8}\n", "Layer", "Count", "RZ", "SX", "CZ", "Total");
    for (kind, n) in per_kind.into_values() {
        let c = decompose_layer(kind, 0.0).1;
        text += &format!("{:<8}{:>8}{:>8}{:>8}{:>8}{:>8}\n", kind.name(), n, c.rz, c.sx, c.cz, c.total());
        rows.push((kind.name().to_string(), c));
    }
    let t = total_gate_count(arch);
    text += &format!(
        "{:<8}{:>8}{:>8}{:>8}{:>8}{:>8}\n",
        "Circuit",
        arch.layers.len(),
        t.rz,
        t.sx,
        t.cz,
        t.total()
    );
    rows.push(("circuit".into(), t));
    (text, rows)
}

pub fn gate_count(args: &GateCountArgs) -> Result<()> {
    let (arch, theta) = if let Some(p) = &args.checkpoint {
        let ck = load_checkpoint(p)?;
        (ck.architecture, ck.theta.0)
    } else if let Some(list) = &args.architecture {
        let a = Architecture::parse_list(list)?;
        let n = a.n_params();
        (a, vec![0.0; n])
    } else {
        let a = Architecture::standard(args.blocks.unwrap_or(15));
        let n = a.n_params();
        (a, vec![0.0; n])
    };
    let (text, rows) = gate_table(&arch);
    print!("{text}");
    if let Some(p) = &args.emit_gates {
        fs::write(p, gate_listing(&arch, &theta)).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(out) = &args.out {
        create_dir(out)?;
        write_csv(
            &out.join("gate_counts.csv"),
            &["layer", "rz", "sx", "cz", "total"],
            rows.iter()
                .map(|(name, c)| vec![name.clone(), c.rz.to_string(), c.sx.to_string(), c.cz.to_string(), c.total().to_string()]),
        )?;
        let mut m = Manifest::new("gate-count");
        m.inputs = json!({
            "checkpoint": args.checkpoint,
            "architecture": arch.to_list(),
            "emit_gates": args.emit_gates,
        });
        m.outputs = vec!["gate_counts.csv".into()];
        m.write(out)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DecayReport {
    fitted_rate: f64,
    analytic_rate: f64,
    relative_error: f64,
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut extra = Vec::new();
    if let Some(c) = args.case {
        extra.push(Entry::new("case", c));
    }
    if let Some(s) = args.steps {
        extra.push(Entry::new("steps", s));
    }
    let (cfg, overrides) = resolve(&args.common, extra)?;
    let sim = &cfg.sim;
    let backend = match args.backend {
        BackendKind::Bgk => bgk_backend(sim)?,
        BackendKind::Sqc => {
            let p = args.checkpoint.as_deref().context("--backend sqc needs --checkpoint")?;
            Backend::Sqc(load_checkpoint(p)?.circuit()?)
        }
    };
    let out = &args.common.out;
    create_dir(out)?;

    let result = run(sim, &backend)?;
    let mut outputs = Vec::new();
    for s in &result.snapshots {
        let name = format!("field_{:06}.sqcf", s.t);
        write_field_dump(&out.join(&name), s)?;
        outputs.push(name);
    }
    let last = result.final_snapshot();
    write_field_dump(&out.join(FINAL_FIELD_FILE), last)?;
    write_snapshot_csv(&out.join("snapshot_final.csv"), last)?;
    write_centerlines_csv(&out.join("centerlines.csv"), &centerline_profiles(last, sim.velocity.abs().max(f64::MIN_POSITIVE))?)?;
    write_series_csv(&out.join("peak_speed.csv"), "peak_speed", &result.peak_series)?;
    write_json(&out.join("mass_audit.json"), &result.mass)?;
    outputs.extend(
        [FINAL_FIELD_FILE, "snapshot_final.csv", "centerlines.csv", "peak_speed.csv", "mass_audit.json", SUMMARY_FILE]
            .map(String::from),
    );

    let decay = if sim.case == Case::TaylorGreen && sim.steps > 0 {
        let analytic = taylor_green_decay_rate(result.tau, sim.nx, sim.ny)?;
        let fitted = fit_decay_rate(&result.peak_series)?;
        Some(DecayReport {
            fitted_rate: fitted,
            analytic_rate: analytic,
            relative_error: (fitted - analytic).abs() / analytic,
        })
    } else {
        None
    };
    println!(
        "{} on {}x{} with {} backend, tau {}, {} steps",
        sim.case,
        sim.nx,
        sim.ny,
        result.backend,
        result.tau,
        sim.steps
    );
    println!(
        "mass {:.12e} -> {:.12e}, max relative drift {:.3e}, max per-node collision error {:.3e}",
        result.mass.initial, result.mass.final_mass, result.mass.max_relative_drift, result.mass.max_node_collision_error
    );
    if let Some(d) = &decay {
        println!(
            "decay rate fitted {:.6e}, analytic {:.6e}, relative error {:.4}",
            d.fitted_rate, d.analytic_rate, d.relative_error
        );
    }
    write_json(
        &out.join(SUMMARY_FILE),
        &json!({
            "case": sim.case,
            "backend": result.backend,
            "tau": result.tau,
            "velocity": sim.velocity,
            "steps": sim.steps,
            "final_peak_speed": result.peak_series.last().map(|p| p.1),
            "mass": result.mass,
            "decay": decay,
        }),
    )?;

    let mut m = manifest("simulate", &args.common, overrides, &cfg, cfg.train.seed);
    m.inputs = json!({ "backend": result.backend, "checkpoint": args.checkpoint });
    m.outputs = outputs;
    m.write(out)
}

/// Normalisation velocity recorded by `simulate`.
fn run_velocity(dir: &Path) -> Result<f64> {
    let path = dir.join(SUMMARY_FILE);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    v["velocity"]
        .as_f64()
        .with_context(|| format!("{} has no numeric `velocity`", path.display()))
}

#[derive(Serialize)]
struct Comparison {
    run_a: PathBuf,
    run_b: PathBuf,
    t_a: u64,
    t_b: u64,
    relative: FieldStats,
    absolute: FieldStats,
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let a = read_field_dump(&args.run_a.join(FINAL_FIELD_FILE))?;
    let b = read_field_dump(&args.run_b.join(FINAL_FIELD_FILE))?;
    let e = error_fields(&a, &b)?;
    create_dir(&args.out)?;
    write_error_fields_csv(&args.out.join("error_fields.csv"), &e)?;

    let scale = run_velocity(&args.run_b)?.abs();
    let scale = if scale > 0.0 { scale } else { 1.0 };
    write_centerline_overlay_csv(
        &args.out.join("centerline_overlay.csv"),
        &centerline_profiles(&a, scale)?,
        &centerline_profiles(&b, scale)?,
    )?;
    let c = Comparison {
        run_a: args.run_a.clone(),
        run_b: args.run_b.clone(),
        t_a: a.t,
        t_b: b.t,
        relative: e.relative_stats,
        absolute: e.absolute_stats,
    };
    for (name, s) in [("relative", &c.relative), ("absolute", &c.absolute)] {
        println!(
            "{name} |u| error: mean {:.4e}, max {:.4e} at ({}, {})",
            s.mean, s.max, s.argmax.0, s.argmax.1
        );
    }
    write_json(&args.out.join("comparison.json"), &c)?;

    let mut m = Manifest::new("compare");
    m.inputs = json!({ "run_a": args.run_a, "run_b": args.run_b });
    m.outputs = vec!["error_fields.csv".into(), "centerline_overlay.csv".into(), "comparison.json".into()];
    m.write(&args.out)
}
