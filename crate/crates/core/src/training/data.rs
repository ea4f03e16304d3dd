//! Synthetic (pre, post) collision pairs from the BGK operator.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::{self, bgk_collide, Populations};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataGenConfig {
    /// Total samples generated, before the test split.
    pub n_samples: usize,
    pub rho_range: (f64, f64),
    /// Range of |u|; the direction is uniform on [0, 2π).
    pub speed_range: (f64, f64),
    /// Range of the per-sample standard deviation of the non-equilibrium noise.
    pub sigma_neq_range: (f64, f64),
    pub tau: f64,
    pub test_split: f64,
    pub seed: u64,
}

impl Default for DataGenConfig {
    fn default() -> Self {
        DataGenConfig {
            n_samples: 1_000_000,
            rho_range: (0.95, 1.05),
            speed_range: (0.0, 0.01),
            sigma_neq_range: (0.0, 5e-4),
            tau: 1.0,
            test_split: 0.001,
            seed: 0,
        }
    }
}

/// `lo <= hi`, both finite, and `lo > 0` (strict) or `lo >= 0`.
fn check_range(name: &'static str, (lo, hi): (f64, f64), strict: bool) -> Result<()> {
    let floor_ok = if strict { lo > 0.0 } else { lo >= 0.0 };
    if !(lo.is_finite() && hi.is_finite()) || !floor_ok || lo > hi {
        let rel = if strict { "<" } else { "<=" };
        return Err(Error::InvalidInput(format!(
            "{name} range [{lo}, {hi}] must satisfy 0 {rel} low <= high"
        )));
    }
    Ok(())
}

impl DataGenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidInput("n_samples must be positive".into()));
        }
        check_range("rho", self.rho_range, true)?;
        check_range("speed", self.speed_range, false)?;
        check_range("sigma_neq", self.sigma_neq_range, false)?;
        lattice::check_tau(self.tau)?;
        if !(0.0..1.0).contains(&self.test_split) {
            return Err(Error::InvalidParameter {
                name: "test_split",
                value: self.test_split,
                reason: "test split must lie in [0, 1)",
            });
        }
        Ok(())
    }

    pub fn n_test(&self) -> usize {
        (self.n_samples as f64 * self.test_split).round() as usize
    }

    /// SHA-256 of a canonical rendering; f64 fields are rendered by bit pattern.
    pub fn digest(&self) -> [u8; 32] {
        let text = format!(
            "n_samples={}\nrho={:016x},{:016x}\nspeed={:016x},{:016x}\nsigma_neq={:016x},{:016x}\ntau={:016x}\ntest_split={:016x}\nseed={}\n",
            self.n_samples,
            self.rho_range.0.to_bits(),
            self.rho_range.1.to_bits(),
            self.speed_range.0.to_bits(),
            self.speed_range.1.to_bits(),
            self.sigma_neq_range.0.to_bits(),
            self.sigma_neq_range.1.to_bits(),
            self.tau.to_bits(),
            self.test_split.to_bits(),
            self.seed,
        );
        Sha256::digest(text.as_bytes()).into()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub pre: Populations,
    pub post: Populations,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// Digest of the generating configuration, carried into the file header.
    pub config_digest: [u8; 32],
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(config_digest: [u8; 32], samples: Vec<Sample>) -> Self {
        Dataset {
            config_digest,
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// First `n` samples (or all of them).
    pub fn head(&self, n: usize) -> Dataset {
        Dataset {
            config_digest: self.config_digest,
            samples: self.samples[..n.min(self.len())].to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedData {
    pub train: Dataset,
    pub test: Dataset,
    /// Draws discarded because a pre-collision population was not positive.
    pub rejected: u64,
    /// Largest |f^neq| component actually drawn.
    pub max_abs_neq: f64,
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

pub fn generate_dataset(cfg: &DataGenConfig) -> Result<GeneratedData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = Vec::with_capacity(cfg.n_samples);
    let mut rejected = 0u64;
    let mut max_abs_neq: f64 = 0.0;

    while samples.len() < cfg.n_samples {
        let rho = uniform(&mut rng, cfg.rho_range);
        let speed = uniform(&mut rng, cfg.speed_range);
        let angle = rng.random_range(0.0..TAU);
        let sigma = uniform(&mut rng, cfg.sigma_neq_range);
        let u = [speed * angle.cos(), speed * angle.sin()];

        let mut pre = lattice::equilibrium_raw(rho, u);
        let mut largest: f64 = 0.0;
        for v in pre.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            let neq = sigma * z;
            largest = largest.max(neq.abs());
            *v += neq;
        }
        if pre.iter().any(|&v| !(v > 0.0)) {
            rejected += 1;
            continue;
        }
        max_abs_neq = max_abs_neq.max(largest);
        let pre = Populations(pre);
        let post = bgk_collide(&pre, cfg.tau)?;
        samples.push(Sample { pre, post });
    }

    let digest = cfg.digest();
    let test = samples.split_off(cfg.n_samples - cfg.n_test());
    Ok(GeneratedData {
        train: Dataset::new(digest, samples),
        test: Dataset::new(digest, test),
        rejected,
        max_abs_neq,
    })
}

/// Largest mass and momentum residual between pre and post populations.
pub fn conservation_residual(s: &Sample) -> (f64, f64) {
    let dm = (s.post.mass() - s.pre.mass()).abs();
    let (a, b) = (s.post.momentum(), s.pre.momentum());
    let dp = (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
    (dm, dp)
}
