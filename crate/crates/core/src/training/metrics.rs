//! Loss terms and evaluation metrics. Predictions and targets are
//! basis-ordered 16-slot arrays; momentum uses only the physical slots.

use rayon::prelude::*;

use crate::circuit::{Architecture, Circuit, ParamVector};
use crate::error::Result;
use crate::lattice::Q;
use crate::qstate::{embed, slot_momentum, Slots, DIM, POP_TO_BASIS};

use super::data::Dataset;

/// Mean squared error over all 16 slots of every sample.
pub fn mse_loss(pred: &[Slots], target: &[Slots]) -> f64 {
    assert_eq!(pred.len(), target.len());
    let mut sum = 0.0;
    for (p, t) in pred.iter().zip(target) {
        for k in 0..DIM {
            let d = p[k] - t[k];
            sum += d * d;
        }
    }
    sum / (DIM * pred.len()) as f64
}

/// Mean squared momentum error per sample.
pub fn momentum_penalty(pred: &[Slots], target: &[Slots]) -> f64 {
    assert_eq!(pred.len(), target.len());
    let mut sum = 0.0;
    for (p, t) in pred.iter().zip(target) {
        let (a, b) = (slot_momentum(p), slot_momentum(t));
        sum += (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    }
    sum / pred.len() as f64
}

/// Circuit output for every sample, in dataset order.
pub fn predict(data: &Dataset, circuit: &Circuit) -> Result<Vec<Slots>> {
    data.samples
        .par_iter()
        .map(|s| circuit.collide(&embed(&s.pre)))
        .collect()
}

pub fn targets(data: &Dataset) -> Vec<Slots> {
    data.samples.iter().map(|s| embed(&s.post)).collect()
}

/// Fraction of samples with |f̂_i - f_i| < ε, per physical population.
pub fn accuracy_of(pred: &[Slots], target: &[Slots], epsilon: f64) -> [f64; Q] {
    let mut hits = [0usize; Q];
    for (p, t) in pred.iter().zip(target) {
        for (i, &k) in POP_TO_BASIS.iter().enumerate() {
            if (p[k] - t[k]).abs() < epsilon {
                hits[i] += 1;
            }
        }
    }
    let n = pred.len().max(1) as f64;
    hits.map(|h| h as f64 / n)
}

/// Mean of ‖p - p̂‖/‖p‖, skipping samples whose true momentum is below 1e-12.
pub fn relative_momentum_loss_of(pred: &[Slots], target: &[Slots]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (p, t) in pred.iter().zip(target) {
        let (a, b) = (slot_momentum(p), slot_momentum(t));
        let norm = b[0].hypot(b[1]);
        if norm < 1e-12 {
            continue;
        }
        sum += (a[0] - b[0]).hypot(a[1] - b[1]) / norm;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub const RELATIVE_MOMENTUM_LOSS_DEFINITION: &str =
    "mean over samples of |p_true - p_pred|_2 / |p_true|_2, samples with |p_true|_2 < 1e-12 excluded";

pub fn accuracy(
    test: &Dataset,
    arch: &Architecture,
    params: &ParamVector,
    epsilon: f64,
) -> Result<[f64; Q]> {
    let circuit = Circuit::new(arch, params)?;
    Ok(accuracy_of(&predict(test, &circuit)?, &targets(test), epsilon))
}

pub fn relative_momentum_loss(test: &Dataset, arch: &Architecture, params: &ParamVector) -> Result<f64> {
    let circuit = Circuit::new(arch, params)?;
    Ok(relative_momentum_loss_of(&predict(test, &circuit)?, &targets(test)))
}

/// MSE of the circuit over a whole dataset.
pub fn dataset_mse(data: &Dataset, circuit: &Circuit) -> Result<f64> {
    Ok(mse_loss(&predict(data, circuit)?, &targets(data)))
}
