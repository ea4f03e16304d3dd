use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sqc::persistence::Entry;
use sqc::sim::Case;

#[derive(Parser, Debug)]
#[command(name = "sqc", version, about = "Surrogate quantum circuit for the D2Q9 BGK collision")]
pub struct Cli {
    /// Worker threads for training batches and simulation nodes.
    #[arg(long, global = true, env = "SQC_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate train and test datasets of BGK collisions.
    GenData(GenDataArgs),
    /// Train circuit angles by mini-batch gradient descent.
    Train(TrainArgs),
    /// Score a checkpoint on a test dataset.
    Evaluate(EvaluateArgs),
    /// Native RZ/SX/CZ gate counts of an architecture.
    GateCount(GateCountArgs),
    /// Run a Taylor-Green or lid-driven cavity simulation.
    Simulate(SimulateArgs),
    /// Velocity-magnitude error between two simulation runs.
    Compare(CompareArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// key = value configuration file; omitted keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for data generation and training.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Extra `key=value` override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Common {
    pub fn overrides(&self) -> anyhow::Result<Vec<Entry>> {
        let mut out = Vec::new();
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| anyhow::anyhow!("--set expects KEY=VALUE, got `{s}`"))?;
            out.push(Entry::new(k.trim(), v.trim()));
        }
        if let Some(seed) = self.seed {
            out.push(Entry::new("seed", seed));
        }
        Ok(out)
    }
}

#[derive(Args, Debug)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Directory holding train.sqcd and test.sqcd; generated from the
    /// configuration when omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Final momentum-penalty weight.
    #[arg(long)]
    pub alpha_max: Option<f64>,
    /// Continue from a checkpoint up to the configured iteration count.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Directory holding test.sqcd; generated from the configuration when omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GateCountArgs {
    /// Count the architecture stored in this checkpoint.
    #[arg(long, conflicts_with_all = ["blocks", "architecture"])]
    pub checkpoint: Option<PathBuf>,
    /// Standard {X, Z, XXA, ZZD} blocks.
    #[arg(long, conflicts_with = "architecture")]
    pub blocks: Option<usize>,
    /// Explicit layer list, e.g. `X,Z,XXA,ZZD`.
    #[arg(long)]
    pub architecture: Option<String>,
    /// Write the full native gate listing to this file.
    #[arg(long)]
    pub emit_gates: Option<PathBuf>,
    /// Directory for gate_counts.csv and the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Bgk,
    Sqc,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub case: Option<Case>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long, value_enum, default_value = "bgk")]
    pub backend: BackendKind,
    /// Trained angles for the sqc backend.
    #[arg(long, required_if_eq("backend", "sqc"))]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Run under test.
    pub run_a: PathBuf,
    /// Reference run.
    pub run_b: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}
