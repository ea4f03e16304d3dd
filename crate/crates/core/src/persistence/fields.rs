//! Field dumps and CSV outputs.
//!
//! Field dump layout:
//!
//! ```text
//! offset  size      field
//! 0       4         magic "SQCF"
//! 4       4         format version, u32 LE
//! 8       4         nx, u32 LE
//! 12      4         ny, u32 LE
//! 16      8         time step t, u64 LE
//! 24      24·nx·ny  (rho, ux, uy) f64 LE per node, row-major (index y·nx + x)
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::{Centerlines, ErrorFields, FieldSnapshot};
use crate::training::LossPoint;

pub const FIELD_MAGIC: [u8; 4] = *b"SQCF";
pub const FIELD_VERSION: u32 = 1;
pub const FIELD_HEADER_LEN: u64 = 24;

pub fn write_field_dump(path: &Path, s: &FieldSnapshot) -> Result<()> {
    s.check_shape()?;
    let dim = |n: usize| {
        u32::try_from(n).map_err(|_| Error::Shape(format!("grid dimension {n} does not fit in u32")))
    };
    let mut buf = Vec::with_capacity(FIELD_HEADER_LEN as usize + 24 * s.rho.len());
    buf.extend_from_slice(&FIELD_MAGIC);
    buf.extend_from_slice(&FIELD_VERSION.to_le_bytes());
    buf.extend_from_slice(&dim(s.nx)?.to_le_bytes());
    buf.extend_from_slice(&dim(s.ny)?.to_le_bytes());
    buf.extend_from_slice(&s.t.to_le_bytes());
    for i in 0..s.rho.len() {
        for v in [s.rho[i], s.ux[i], s.uy[i]] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_field_dump(path: &Path) -> Result<FieldSnapshot> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 4 || bytes[..4] != FIELD_MAGIC {
        return Err(Error::BadMagic {
            path: path.into(),
            expected: FIELD_MAGIC,
            found: bytes[..bytes.len().min(4)].to_vec(),
        });
    }
    if (bytes.len() as u64) < FIELD_HEADER_LEN {
        return Err(Error::Length {
            path: path.into(),
            expected: FIELD_HEADER_LEN,
            found: bytes.len() as u64,
        });
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != FIELD_VERSION {
        return Err(Error::UnsupportedVersion {
            path: path.into(),
            found: version,
            supported: FIELD_VERSION,
        });
    }
    let (nx, ny) = (u32_at(8) as usize, u32_at(12) as usize);
    let t = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let n = nx * ny;
    let expected = FIELD_HEADER_LEN + 24 * n as u64;
    if expected != bytes.len() as u64 {
        return Err(Error::Length {
            path: path.into(),
            expected,
            found: bytes.len() as u64,
        });
    }
    let (mut rho, mut ux, mut uy) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for node in bytes[FIELD_HEADER_LEN as usize..].chunks_exact(24) {
        let v = |k: usize| f64::from_le_bytes(node[8 * k..8 * k + 8].try_into().unwrap());
        rho.push(v(0));
        ux.push(v(1));
        uy.push(v(2));
    }
    Ok(FieldSnapshot { t, nx, ny, rho, ux, uy })
}

/// Writes a CSV with `header` and one line per row. Values use Rust's
/// shortest round-trip formatting.
pub fn write_csv<R>(path: &Path, header: &[&str], rows: R) -> Result<()>
where
    R: IntoIterator<Item = Vec<String>>,
{
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    for row in rows {
        writeln!(w, "{}", row.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn cells<const N: usize>(values: [&dyn ToString; N]) -> Vec<String> {
    values.iter().map(|v| v.to_string()).collect()
}

/// `x,y,rho,ux,uy`, one line per node.
pub fn write_snapshot_csv(path: &Path, s: &FieldSnapshot) -> Result<()> {
    s.check_shape()?;
    let rows = (0..s.rho.len()).map(|i| {
        let (x, y) = (i % s.nx, i / s.nx);
        cells([&x, &y, &s.rho[i], &s.ux[i], &s.uy[i]])
    });
    write_csv(path, &["x", "y", "rho", "ux", "uy"], rows)
}

/// `line,pos,ux,uy` with `line` either `horizontal` or `vertical`.
pub fn write_centerlines_csv(path: &Path, c: &Centerlines) -> Result<()> {
    let rows = c
        .horizontal
        .iter()
        .map(|p| ("horizontal", p))
        .chain(c.vertical.iter().map(|p| ("vertical", p)))
        .map(|(line, p)| cells([&line, &p.pos, &p.ux, &p.uy]));
    write_csv(path, &["line", "pos", "ux", "uy"], rows)
}

/// Two centreline sets side by side: `line,pos,ux_a,uy_a,ux_b,uy_b`.
pub fn write_centerline_overlay_csv(path: &Path, a: &Centerlines, b: &Centerlines) -> Result<()> {
    if a.horizontal.len() != b.horizontal.len() || a.vertical.len() != b.vertical.len() {
        return Err(Error::Shape("centreline lengths differ".into()));
    }
    let pair = |line: &'static str, xs: &[crate::sim::ProfilePoint], ys: &[crate::sim::ProfilePoint]| {
        xs.iter()
            .zip(ys)
            .map(move |(p, q)| cells([&line, &p.pos, &p.ux, &p.uy, &q.ux, &q.uy]))
            .collect::<Vec<_>>()
    };
    let rows = pair("horizontal", &a.horizontal, &b.horizontal)
        .into_iter()
        .chain(pair("vertical", &a.vertical, &b.vertical));
    write_csv(path, &["line", "pos", "ux_a", "uy_a", "ux_b", "uy_b"], rows)
}

/// `x,y,relative,absolute`.
pub fn write_error_fields_csv(path: &Path, e: &ErrorFields) -> Result<()> {
    let rows = (0..e.relative.len()).map(|i| cells([&(i % e.nx), &(i / e.nx), &e.relative[i], &e.absolute[i]]));
    write_csv(path, &["x", "y", "relative", "absolute"], rows)
}

/// `iteration,train_loss,val_mse,alpha`; an unmeasured train loss is empty.
pub fn write_loss_curve_csv(path: &Path, curve: &[LossPoint]) -> Result<()> {
    let rows = curve.iter().map(|p| {
        let train = p.train_loss.map(|v| v.to_string()).unwrap_or_default();
        cells([&p.iteration, &train, &p.val_mse, &p.alpha])
    });
    write_csv(path, &["iteration", "train_loss", "val_mse", "alpha"], rows)
}

/// `t,value`.
pub fn write_series_csv(path: &Path, value_name: &str, series: &[(u64, f64)]) -> Result<()> {
    write_csv(path, &["t", value_name], series.iter().map(|(t, v)| cells([t, v])))
}
