//! Plain mini-batch gradient descent on MSE + α·L_m.
//!
//! Batches are drawn without replacement from a fresh permutation of the
//! training set each epoch. The permutation for epoch `e` comes from its own
//! ChaCha stream, so the batch at any iteration depends only on the seed and
//! the iteration number and a resumed run reproduces an uninterrupted one.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{circuit_loss_gradient, Architecture, Circuit, ParamVector};
use crate::error::{Error, Result};
use crate::lattice::Q;
use crate::qstate::{embed, Slots};

use super::data::Dataset;
use super::metrics::{self, accuracy_of, relative_momentum_loss_of};
use super::schedule::AlphaSchedule;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub architecture: Architecture,
    pub learning_rate: f64,
    /// Total iterations; on resume this is the target, not an increment.
    pub iterations: u64,
    pub batch_size: usize,
    pub alpha: AlphaSchedule,
    pub epsilon_acc: f64,
    /// Initial angles are drawn uniformly from [-init_range, init_range].
    pub init_range: f64,
    pub seed: u64,
    pub val_every: u64,
    /// Size of the fixed validation slice used for the loss curve.
    pub val_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            architecture: Architecture::standard(15),
            learning_rate: 0.05,
            iterations: 750_000,
            batch_size: 5,
            alpha: AlphaSchedule::default(),
            epsilon_acc: 1e-5,
            init_range: PI,
            seed: 0,
            val_every: 1_000,
            val_size: 1_000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.architecture.is_empty() {
            return Err(Error::InvalidInput("architecture has no layers".into()));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidParameter {
                name: "learning_rate",
                value: self.learning_rate,
                reason: "must be finite and non-negative",
            });
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidInput("batch_size must be positive".into()));
        }
        if self.val_every == 0 || self.val_size == 0 {
            return Err(Error::InvalidInput("val_every and val_size must be positive".into()));
        }
        if !(self.epsilon_acc > 0.0) {
            return Err(Error::InvalidParameter {
                name: "epsilon_acc",
                value: self.epsilon_acc,
                reason: "must be positive",
            });
        }
        if !(self.init_range >= 0.0) || !self.init_range.is_finite() {
            return Err(Error::InvalidParameter {
                name: "init_range",
                value: self.init_range,
                reason: "must be finite and non-negative",
            });
        }
        self.alpha.validate()
    }

    pub fn initial_params(&self) -> ParamVector {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(0);
        let r = self.init_range;
        ParamVector(
            (0..self.architecture.n_params())
                .map(|_| if r == 0.0 { 0.0 } else { rng.random_range(-r..=r) })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub architecture: Architecture,
    pub theta: ParamVector,
    pub config: TrainConfig,
    pub iteration: u64,
    pub seed: u64,
}

impl Checkpoint {
    pub fn new(config: &TrainConfig, theta: ParamVector, iteration: u64) -> Self {
        Checkpoint {
            format_version: CHECKPOINT_VERSION,
            architecture: config.architecture.clone(),
            theta,
            config: config.clone(),
            iteration,
            seed: config.seed,
        }
    }

    /// Untrained parameters for `arch` with every angle zero.
    pub fn identity(arch: &Architecture) -> Self {
        let config = TrainConfig {
            architecture: arch.clone(),
            iterations: 0,
            ..TrainConfig::default()
        };
        Checkpoint::new(&config, ParamVector::zeros(arch.n_params()), 0)
    }

    pub fn circuit(&self) -> Result<Circuit> {
        Circuit::new(&self.architecture, &self.theta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossPoint {
    pub iteration: u64,
    /// Mean batch loss since the previous point; absent for the first point.
    pub train_loss: Option<f64>,
    pub val_mse: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss_curve: Vec<LossPoint>,
    pub accuracy: [f64; Q],
    pub relative_momentum_loss: f64,
    pub relative_momentum_loss_definition: String,
    pub final_params: ParamVector,
    pub initial_val_mse: f64,
    pub final_val_mse: f64,
}

/// Index into the training set for global sample position `pos`.
struct BatchSampler {
    n: usize,
    seed: u64,
    epoch: u64,
    perm: Vec<usize>,
}

impl BatchSampler {
    fn new(n: usize, seed: u64) -> Self {
        BatchSampler {
            n,
            seed,
            epoch: u64::MAX,
            perm: Vec::new(),
        }
    }

    fn index(&mut self, pos: u64) -> usize {
        let epoch = pos / self.n as u64;
        if epoch != self.epoch {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(epoch + 1);
            self.perm = (0..self.n).collect();
            self.perm.shuffle(&mut rng);
            self.epoch = epoch;
        }
        self.perm[(pos % self.n as u64) as usize]
    }
}

fn slot_pairs(data: &Dataset) -> Vec<(Slots, Slots)> {
    data.samples
        .iter()
        .map(|s| (embed(&s.pre), embed(&s.post)))
        .collect()
}

/// Train on `train_set`; the loss curve and final metrics use `validation`.
///
/// With `resume`, optimisation continues from the checkpoint's angles and
/// iteration count up to `cfg.iterations`.
pub fn train(
    cfg: &TrainConfig,
    train_set: &Dataset,
    validation: &Dataset,
    resume: Option<&Checkpoint>,
) -> Result<(Checkpoint, TrainReport)> {
    cfg.validate()?;
    if train_set.is_empty() || validation.is_empty() {
        return Err(Error::InvalidInput("training and validation sets must be non-empty".into()));
    }
    let (mut theta, start) = match resume {
        Some(ck) => {
            if ck.architecture != cfg.architecture {
                return Err(Error::InvalidInput(format!(
                    "checkpoint architecture [{}] differs from configured [{}]",
                    ck.architecture.to_list(),
                    cfg.architecture.to_list()
                )));
            }
            if ck.theta.len() != ck.architecture.n_params() {
                return Err(Error::ParamCount {
                    expected: ck.architecture.n_params(),
                    found: ck.theta.len(),
                });
            }
            if cfg.iterations <= ck.iteration {
                return Err(Error::InvalidInput(format!(
                    "target of {} iterations is not beyond the checkpoint at {}",
                    cfg.iterations, ck.iteration
                )));
            }
            (ck.theta.clone(), ck.iteration)
        }
        None => (cfg.initial_params(), 0),
    };

    let pairs = slot_pairs(train_set);
    let val_slice = validation.head(cfg.val_size);
    let mut sampler = BatchSampler::new(pairs.len(), cfg.seed);
    let mut batch = Vec::with_capacity(cfg.batch_size);
    let mut curve = Vec::new();
    let mut loss_sum = 0.0;
    let mut loss_count = 0u64;

    let val_mse = |theta: &ParamVector| -> Result<f64> {
        metrics::dataset_mse(&val_slice, &Circuit::new(&cfg.architecture, theta)?)
    };
    curve.push(LossPoint {
        iteration: start,
        train_loss: None,
        val_mse: val_mse(&theta)?,
        alpha: cfg.alpha.alpha(start, cfg.iterations),
    });

    for t in start..cfg.iterations {
        let alpha = cfg.alpha.alpha(t, cfg.iterations);
        batch.clear();
        for j in 0..cfg.batch_size as u64 {
            batch.push(pairs[sampler.index(t * cfg.batch_size as u64 + j)]);
        }
        let circuit = Circuit::new(&cfg.architecture, &theta)?;
        let g = circuit_loss_gradient(&circuit, &batch, alpha)?;
        if !g.loss.is_finite() {
            return Err(Error::NonFinite {
                what: "loss",
                iteration: t,
                theta: theta.0,
            });
        }
        if g.grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "gradient",
                iteration: t,
                theta: theta.0,
            });
        }
        for (p, d) in theta.0.iter_mut().zip(&g.grad) {
            *p -= cfg.learning_rate * d;
        }
        loss_sum += g.loss;
        loss_count += 1;

        let done = t + 1;
        if done % cfg.val_every == 0 || done == cfg.iterations {
            curve.push(LossPoint {
                iteration: done,
                train_loss: Some(loss_sum / loss_count as f64),
                val_mse: val_mse(&theta)?,
                alpha,
            });
            loss_sum = 0.0;
            loss_count = 0;
        }
    }

    let circuit = Circuit::new(&cfg.architecture, &theta)?;
    let preds = metrics::predict(validation, &circuit)?;
    let targets = metrics::targets(validation);
    let report = TrainReport {
        initial_val_mse: curve[0].val_mse,
        final_val_mse: curve[curve.len() - 1].val_mse,
        loss_curve: curve,
        accuracy: accuracy_of(&preds, &targets, cfg.epsilon_acc),
        relative_momentum_loss: relative_momentum_loss_of(&preds, &targets),
        relative_momentum_loss_definition: metrics::RELATIVE_MOMENTUM_LOSS_DEFINITION.into(),
        final_params: theta.clone(),
    };
    Ok((Checkpoint::new(cfg, theta, cfg.iterations), report))
}
