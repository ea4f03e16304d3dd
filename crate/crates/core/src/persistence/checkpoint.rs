//! JSON checkpoints. Angles are written as shortest round-trip decimals, so
//! save/load preserves every bit.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::training::{Checkpoint, CHECKPOINT_VERSION};

pub fn save_checkpoint(path: &Path, ck: &Checkpoint) -> Result<()> {
    let text = serde_json::to_string_pretty(ck).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(path, &text)
}

fn parse_checkpoint(path: &Path, text: &str) -> Result<Checkpoint> {
    let json = |e| Error::Json {
        path: path.into(),
        source: e,
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(json)?;
    let version = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Format {
            path: path.into(),
            message: "missing or non-integer format_version".into(),
        })?;
    if version != CHECKPOINT_VERSION as u64 {
        return Err(Error::UnsupportedVersion {
            path: path.into(),
            found: version.min(u32::MAX as u64) as u32,
            supported: CHECKPOINT_VERSION,
        });
    }
    let ck: Checkpoint = serde_json::from_value(value).map_err(json)?;
    if ck.theta.len() != ck.architecture.n_params() {
        return Err(Error::ParamCount {
            expected: ck.architecture.n_params(),
            found: ck.theta.len(),
        });
    }
    if ck.theta.0.iter().any(|t| !t.is_finite()) {
        return Err(Error::Format {
            path: path.into(),
            message: "theta contains a non-finite angle".into(),
        });
    }
    Ok(ck)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Architecture, ParamVector};
    use crate::training::TrainConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_checkpoint() -> Checkpoint {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cfg = TrainConfig {
            architecture: Architecture::standard(15),
            iterations: 1234,
            seed: 99,
            ..TrainConfig::default()
        };
        let theta = ParamVector((0..60).map(|_| rng.random_range(-10.0..10.0)).collect());
        Checkpoint::new(&cfg, theta, 1234)
    }

    #[test]
    fn round_trip_keeps_every_bit() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ck.json");
        let ck = random_checkpoint();
        save_checkpoint(&p, &ck).unwrap();
        let back = load_checkpoint(&p).unwrap();
        assert_eq!(back, ck);
        for (a, b) in back.theta.0.iter().zip(&ck.theta.0) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn short_theta_is_rejected() {
        let mut v = serde_json::to_value(random_checkpoint()).unwrap();
        v["theta"].as_array_mut().unwrap().pop();
        let text = v.to_string();
        assert!(matches!(
            parse_checkpoint(Path::new("x"), &text),
            Err(Error::ParamCount { expected: 60, found: 59 })
        ));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let mut v = serde_json::to_value(random_checkpoint()).unwrap();
        v["format_version"] = 2.into();
        assert!(matches!(
            parse_checkpoint(Path::new("x"), &v.to_string()),
            Err(Error::UnsupportedVersion { found: 2, supported: 1, .. })
        ));
        assert!(matches!(parse_checkpoint(Path::new("x"), "{"), Err(Error::Json { .. })));
    }
}
