//! Binary dataset file.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "SQCD"
//! 4       4     format version, u32 LE
//! 8       8     sample count N, u64 LE
//! 16      32    SHA-256 digest of the generating configuration
//! 48      144N  N records of 18 f64 LE: 9 pre-collision, 9 post-collision
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::{Populations, Q};
use crate::training::{conservation_residual, Dataset, Sample};

pub const DATASET_MAGIC: [u8; 4] = *b"SQCD";
pub const DATASET_VERSION: u32 = 1;
pub const DATASET_HEADER_LEN: u64 = 48;
pub const RECORD_LEN: u64 = 2 * Q as u64 * 8;
/// Largest mass or momentum residual accepted for a stored record.
pub const CONSERVATION_TOLERANCE: f64 = 1e-12;

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
    put(&DATASET_MAGIC)?;
    put(&DATASET_VERSION.to_le_bytes())?;
    put(&(data.len() as u64).to_le_bytes())?;
    put(&data.config_digest)?;
    for s in &data.samples {
        for v in s.pre.0.iter().chain(s.post.0.iter()) {
            put(&v.to_le_bytes())?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_dataset(path, &bytes)
}

fn decode_dataset(path: &Path, bytes: &[u8]) -> Result<Dataset> {
    if bytes.len() < 4 || bytes[..4] != DATASET_MAGIC {
        return Err(Error::BadMagic {
            path: path.into(),
            expected: DATASET_MAGIC,
            found: bytes[..bytes.len().min(4)].to_vec(),
        });
    }
    if (bytes.len() as u64) < DATASET_HEADER_LEN {
        return Err(Error::Length {
            path: path.into(),
            expected: DATASET_HEADER_LEN,
            found: bytes.len() as u64,
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != DATASET_VERSION {
        return Err(Error::UnsupportedVersion {
            path: path.into(),
            found: version,
            supported: DATASET_VERSION,
        });
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let expected = count
        .checked_mul(RECORD_LEN)
        .and_then(|b| b.checked_add(DATASET_HEADER_LEN))
        .ok_or_else(|| Error::Format {
            path: path.into(),
            message: format!("sample count {count} overflows the file size"),
        })?;
    if expected != bytes.len() as u64 {
        return Err(Error::Length {
            path: path.into(),
            expected,
            found: bytes.len() as u64,
        });
    }
    let config_digest: [u8; 32] = bytes[16..48].try_into().unwrap();

    let mut samples = Vec::with_capacity(count as usize);
    for (n, rec) in bytes[DATASET_HEADER_LEN as usize..]
        .chunks_exact(RECORD_LEN as usize)
        .enumerate()
    {
        let v = |i: usize| f64::from_le_bytes(rec[8 * i..8 * i + 8].try_into().unwrap());
        let sample = Sample {
            pre: Populations(std::array::from_fn(v)),
            post: Populations(std::array::from_fn(|i| v(Q + i))),
        };
        if sample.pre.0.iter().chain(sample.post.0.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Format {
                path: path.into(),
                message: format!("record {n} contains a non-finite value"),
            });
        }
        let (dm, dp) = conservation_residual(&sample);
        for (quantity, residual) in [("mass", dm), ("momentum", dp)] {
            if !(residual <= CONSERVATION_TOLERANCE) {
                return Err(Error::Conservation {
                    path: path.into(),
                    record: n as u64,
                    quantity,
                    residual,
                });
            }
        }
        samples.push(sample);
    }
    Ok(Dataset::new(config_digest, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::training::{generate_dataset, DataGenConfig};

    fn data(n: usize) -> Dataset {
        generate_dataset(&DataGenConfig {
            n_samples: n,
            test_split: 0.0,
            seed: 1,
            ..DataGenConfig::default()
        })
        .unwrap()
        .train
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.sqcd");
        let d = data(1000);
        write_dataset(&p, &d).unwrap();
        let back = read_dataset(&p).unwrap();
        assert_eq!(back.config_digest, d.config_digest);
        for (a, b) in back.samples.iter().zip(&d.samples) {
            for i in 0..Q {
                assert_eq!(a.pre[i].to_bits(), b.pre[i].to_bits());
                assert_eq!(a.post[i].to_bits(), b.post[i].to_bits());
            }
        }
        assert_eq!(fs::metadata(&p).unwrap().len(), 48 + 144 * 1000);
    }

    #[test]
    fn corrupt_headers_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.sqcd");
        write_dataset(&p, &data(10)).unwrap();
        let good = fs::read(&p).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(decode_dataset(&p, &bad), Err(Error::BadMagic { .. })));

        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(
            decode_dataset(&p, &bad),
            Err(Error::UnsupportedVersion { found: 2, .. })
        ));

        let bad = &good[..good.len() - 7];
        match decode_dataset(&p, bad) {
            Err(Error::Length { expected, found, .. }) => {
                assert_eq!(expected, 48 + 1440);
                assert_eq!(found, 48 + 1440 - 7);
            }
            other => panic!("{other:?}"),
        }

        let mut bad = good.clone();
        bad[8] = 11;
        assert!(matches!(decode_dataset(&p, &bad), Err(Error::Length { .. })));
        assert!(matches!(decode_dataset(&p, &good[..2]), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn non_conservative_record_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.sqcd");
        let mut d = data(20);
        d.samples[7].post[3] += 1e-9;
        write_dataset(&p, &d).unwrap();
        match read_dataset(&p) {
            Err(Error::Conservation { record, quantity, .. }) => {
                assert_eq!(record, 7);
                assert_eq!(quantity, "mass");
            }
            other => panic!("{other:?}"),
        }
    }
}
