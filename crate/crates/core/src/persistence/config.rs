//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Omitted keys keep their
//! defaults. Every key is listed in [`KEYS`]; anything else is an error that
//! names the key and its line.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::Architecture;
use crate::error::{Error, Result};
use crate::lattice::viscosity;
use crate::sim::{Case, SimConfig};
use crate::training::{DataGenConfig, TrainConfig};

/// Recognised keys, grouped by the section they feed.
pub const KEYS: &[&str] = &[
    // data generation
    "n_samples",
    "rho_min",
    "rho_max",
    "speed_min",
    "speed_max",
    "sigma_neq_min",
    "sigma_neq_max",
    "data_tau",
    "test_split",
    "data_seed",
    // training
    "architecture",
    "blocks",
    "learning_rate",
    "iterations",
    "batch_size",
    "alpha0",
    "alpha_step_every",
    "alpha_max",
    "epsilon_acc",
    "init_range",
    "val_every",
    "val_size",
    "train_seed",
    // both
    "seed",
    // simulation
    "case",
    "nx",
    "ny",
    "tau",
    "u0",
    "u_lid",
    "reynolds",
    "steps",
    "snapshot_every",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: DataGenConfig,
    pub train: TrainConfig,
    pub sim: SimConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: DataGenConfig::default(),
            train: TrainConfig::default(),
            sim: SimConfig::taylor_green(),
        }
    }
}

/// One `key = value` assignment with its origin.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub key: String,
    pub value: String,
    /// 1-based line in the file; 0 for command-line overrides.
    pub line: usize,
}

impl Entry {
    pub fn new(key: &str, value: impl ToString) -> Self {
        Entry {
            key: key.into(),
            value: value.to_string(),
            line: 0,
        }
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path, &[])
}

/// Reads the file at `path` (or starts empty when `None`) and applies
/// `overrides` on top.
pub fn resolve_config(path: Option<&Path>, overrides: &[Entry]) -> Result<RunConfig> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            parse_config_str(&text, p, overrides)
        }
        None => parse_config_str("", Path::new("<defaults>"), overrides),
    }
}

pub fn parse_entries(text: &str, path: &Path) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            path: path.into(),
            line,
            message: format!("expected `key = value`, found `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Config {
                path: path.into(),
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        if let Some(prev) = entries.iter().find(|e: &&Entry| e.key == key) {
            return Err(Error::Config {
                path: path.into(),
                line,
                message: format!("duplicate key `{key}` (first set on line {})", prev.line),
            });
        }
        entries.push(Entry {
            key: key.into(),
            value: value.into(),
            line,
        });
    }
    Ok(entries)
}

/// File entries first, then overrides. Within each group `case` resets the
/// simulation defaults and `seed`/`blocks` are applied before the more
/// specific keys they would otherwise clobber.
pub fn parse_config_str(text: &str, path: &Path, overrides: &[Entry]) -> Result<RunConfig> {
    let file = parse_entries(text, path)?;
    for e in overrides {
        if !KEYS.contains(&e.key.as_str()) {
            return Err(Error::Config {
                path: path.into(),
                line: 0,
                message: format!("unknown key `{}`", e.key),
            });
        }
    }
    let rank = |e: &Entry| match e.key.as_str() {
        "seed" | "blocks" => 0,
        _ => 1,
    };
    let mut ordered: Vec<(usize, &Entry)> = file
        .iter()
        .map(|e| (0, e))
        .chain(overrides.iter().map(|e| (1, e)))
        .collect();
    ordered.sort_by_key(|&(group, e)| (group, rank(e)));

    let mut cfg = RunConfig::default();
    let ctx = Ctx { path };

    let case = ordered
        .iter()
        .rev()
        .find(|(_, e)| e.key == "case")
        .map(|(_, e)| ctx.parse::<Case>(e))
        .transpose()?
        .unwrap_or(Case::TaylorGreen);
    cfg.sim = SimConfig::for_case(case);

    let mut last = Lines::default();
    for &(_, e) in &ordered {
        let key = e.key.as_str();
        match key {
            "n_samples" => cfg.data.n_samples = ctx.parse(e)?,
            "rho_min" => cfg.data.rho_range.0 = ctx.parse(e)?,
            "rho_max" => cfg.data.rho_range.1 = ctx.parse(e)?,
            "speed_min" => cfg.data.speed_range.0 = ctx.parse(e)?,
            "speed_max" => cfg.data.speed_range.1 = ctx.parse(e)?,
            "sigma_neq_min" => cfg.data.sigma_neq_range.0 = ctx.parse(e)?,
            "sigma_neq_max" => cfg.data.sigma_neq_range.1 = ctx.parse(e)?,
            "data_tau" => cfg.data.tau = ctx.tau(e)?,
            "test_split" => cfg.data.test_split = ctx.parse(e)?,
            "data_seed" => cfg.data.seed = ctx.parse(e)?,
            "architecture" => {
                cfg.train.architecture =
                    Architecture::parse_list(&e.value).map_err(|err| ctx.err(e, err.to_string()))?
            }
            "blocks" => cfg.train.architecture = Architecture::standard(ctx.parse(e)?),
            "learning_rate" => cfg.train.learning_rate = ctx.parse(e)?,
            "iterations" => cfg.train.iterations = ctx.parse(e)?,
            "batch_size" => cfg.train.batch_size = ctx.parse(e)?,
            "alpha0" => cfg.train.alpha.alpha0 = ctx.parse(e)?,
            "alpha_step_every" => cfg.train.alpha.step_every = ctx.parse(e)?,
            "alpha_max" => cfg.train.alpha.alpha_max = ctx.parse(e)?,
            "epsilon_acc" => cfg.train.epsilon_acc = ctx.parse(e)?,
            "init_range" => cfg.train.init_range = ctx.parse(e)?,
            "val_every" => cfg.train.val_every = ctx.parse(e)?,
            "val_size" => cfg.train.val_size = ctx.parse(e)?,
            "train_seed" => cfg.train.seed = ctx.parse(e)?,
            "seed" => {
                let s = ctx.parse(e)?;
                cfg.data.seed = s;
                cfg.train.seed = s;
            }
            "case" => {}
            "nx" => cfg.sim.nx = ctx.parse(e)?,
            "ny" => cfg.sim.ny = ctx.parse(e)?,
            "tau" => cfg.sim.tau = Some(ctx.tau(e)?),
            "u0" if case == Case::TaylorGreen => cfg.sim.velocity = ctx.parse(e)?,
            "u_lid" if case == Case::LidCavity => cfg.sim.velocity = ctx.parse(e)?,
            // the velocity of the other case; still type-checked
            "u0" | "u_lid" => {
                ctx.parse::<f64>(e)?;
            }
            "reynolds" => cfg.sim.reynolds = ctx.parse(e)?,
            "steps" => cfg.sim.steps = ctx.parse(e)?,
            "snapshot_every" => cfg.sim.snapshot_every = ctx.parse(e)?,
            _ => unreachable!("key list and match arms disagree on `{key}`"),
        }
        last.note(key, e.line);
    }

    let section = |line: usize, r: Result<()>| {
        r.map_err(|err| Error::Config {
            path: path.into(),
            line,
            message: err.to_string(),
        })
    };
    section(last.data, cfg.data.validate())?;
    section(last.train, cfg.train.validate())?;
    section(last.sim, cfg.sim.validate())?;
    Ok(cfg)
}

struct Ctx<'a> {
    path: &'a Path,
}

impl Ctx<'_> {
    fn err(&self, e: &Entry, message: String) -> Error {
        Error::Config {
            path: PathBuf::from(self.path),
            line: e.line,
            message: format!("{} = {}: {message}", e.key, e.value),
        }
    }

    fn parse<T: FromStr>(&self, e: &Entry) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        e.value.parse().map_err(|err: T::Err| self.err(e, err.to_string()))
    }

    fn tau(&self, e: &Entry) -> Result<f64> {
        let tau: f64 = self.parse(e)?;
        viscosity(tau).map_err(|_| {
            self.err(
                e,
                "relaxation time must exceed 1/2 so that the viscosity (tau - 1/2)/3 is positive".into(),
            )
        })?;
        Ok(tau)
    }
}

/// Line of the last entry touching each section, for validation errors.
#[derive(Default)]
struct Lines {
    data: usize,
    train: usize,
    sim: usize,
}

impl Lines {
    fn note(&mut self, key: &str, line: usize) {
        let i = KEYS.iter().position(|k| *k == key).unwrap();
        if key == "seed" {
            self.data = line;
            self.train = line;
        } else if i < 10 {
            self.data = line;
        } else if i < 23 {
            self.train = line;
        } else {
            self.sim = line;
        }
    }
}

/// Renders a resolved configuration back as a key = value file.
pub fn render_config(cfg: &RunConfig) -> String {
    let d = &cfg.data;
    let t = &cfg.train;
    let s = &cfg.sim;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
    kv("n_samples", d.n_samples.to_string());
    kv("rho_min", d.rho_range.0.to_string());
    kv("rho_max", d.rho_range.1.to_string());
    kv("speed_min", d.speed_range.0.to_string());
    kv("speed_max", d.speed_range.1.to_string());
    kv("sigma_neq_min", d.sigma_neq_range.0.to_string());
    kv("sigma_neq_max", d.sigma_neq_range.1.to_string());
    kv("data_tau", d.tau.to_string());
    kv("test_split", d.test_split.to_string());
    kv("data_seed", d.seed.to_string());
    kv("architecture", t.architecture.to_list());
    kv("learning_rate", t.learning_rate.to_string());
    kv("iterations", t.iterations.to_string());
    kv("batch_size", t.batch_size.to_string());
    kv("alpha0", t.alpha.alpha0.to_string());
    kv("alpha_step_every", t.alpha.step_every.to_string());
    kv("alpha_max", t.alpha.alpha_max.to_string());
    kv("epsilon_acc", t.epsilon_acc.to_string());
    kv("init_range", t.init_range.to_string());
    kv("val_every", t.val_every.to_string());
    kv("val_size", t.val_size.to_string());
    kv("train_seed", t.seed.to_string());
    kv("case", s.case.to_string());
    kv("nx", s.nx.to_string());
    kv("ny", s.ny.to_string());
    if let Some(tau) = s.tau {
        kv("tau", tau.to_string());
    }
    let vkey = match s.case {
        Case::TaylorGreen => "u0",
        Case::LidCavity => "u_lid",
    };
    kv(vkey, s.velocity.to_string());
    kv("reynolds", s.reynolds.to_string());
    kv("steps", s.steps.to_string());
    kv("snapshot_every", s.snapshot_every.to_string());
    out
}
