use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::viscosity;

use super::grid::{Grid, NodeKind};

/// Stagnant-flow floor for relative errors.
pub const SPEED_FLOOR: f64 = 1e-12;

/// Macroscopic fields at one time, row-major with index `y * nx + x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSnapshot {
    pub t: u64,
    pub nx: usize,
    pub ny: usize,
    pub rho: Vec<f64>,
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
}

impl FieldSnapshot {
    pub fn capture(grid: &Grid, t: u64) -> Self {
        let n = grid.len();
        let (mut rho, mut ux, mut uy) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for y in 0..grid.ny {
            for x in 0..grid.nx {
                let (r, u) = grid.macroscopic(x, y);
                rho.push(r);
                ux.push(u[0]);
                uy.push(u[1]);
            }
        }
        FieldSnapshot {
            t,
            nx: grid.nx,
            ny: grid.ny,
            rho,
            ux,
            uy,
        }
    }

    pub fn speed(&self, i: usize) -> f64 {
        self.ux[i].hypot(self.uy[i])
    }

    pub fn max_speed(&self) -> f64 {
        (0..self.rho.len()).map(|i| self.speed(i)).fold(0.0, f64::max)
    }

    pub fn at(&self, x: usize, y: usize) -> (f64, f64, f64) {
        let i = y * self.nx + x;
        (self.rho[i], self.ux[i], self.uy[i])
    }

    pub fn check_shape(&self) -> Result<()> {
        let n = self.nx * self.ny;
        if self.rho.len() != n || self.ux.len() != n || self.uy.len() != n {
            return Err(Error::Shape(format!(
                "snapshot arrays do not match {}x{}",
                self.nx, self.ny
            )));
        }
        Ok(())
    }
}

/// Largest |u| over fluid nodes.
pub fn peak_speed(grid: &Grid) -> f64 {
    let mut peak: f64 = 0.0;
    for y in 0..grid.ny {
        for x in 0..grid.nx {
            if grid.kind(x, y) == NodeKind::Fluid {
                let (_, u) = grid.macroscopic(x, y);
                peak = peak.max(u[0].hypot(u[1]));
            }
        }
    }
    peak
}

/// One sample of a centreline profile: position, ux/U, uy/U.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub pos: usize,
    pub ux: f64,
    pub uy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centerlines {
    /// Along the row y = ny/2, indexed by x.
    pub horizontal: Vec<ProfilePoint>,
    /// Along the column x = nx/2, indexed by y.
    pub vertical: Vec<ProfilePoint>,
}

/// Mid-line velocity profiles normalised by `scale` (u0 or the lid speed).
/// Both components are kept on both lines.
pub fn centerline_profiles(s: &FieldSnapshot, scale: f64) -> Result<Centerlines> {
    s.check_shape()?;
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter {
            name: "scale",
            value: scale,
            reason: "normalisation velocity must be positive",
        });
    }
    let (ym, xm) = (s.ny / 2, s.nx / 2);
    let point = |pos, x, y| {
        let (_, ux, uy) = s.at(x, y);
        ProfilePoint {
            pos,
            ux: ux / scale,
            uy: uy / scale,
        }
    };
    Ok(Centerlines {
        horizontal: (0..s.nx).map(|x| point(x, x, ym)).collect(),
        vertical: (0..s.ny).map(|y| point(y, xm, y)).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub mean: f64,
    pub max: f64,
    /// Node (x, y) of the maximum.
    pub argmax: (usize, usize),
}

impl FieldStats {
    fn of(values: &[f64], nx: usize) -> Self {
        let mut max = f64::NEG_INFINITY;
        let mut at = 0;
        for (i, &v) in values.iter().enumerate() {
            if v > max {
                max = v;
                at = i;
            }
        }
        FieldStats {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            max,
            argmax: (at % nx, at / nx),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorFields {
    pub nx: usize,
    pub ny: usize,
    /// | |u_a| − |u_b| | / max(|u_b|, floor)
    pub relative: Vec<f64>,
    /// | |u_a| − |u_b| |
    pub absolute: Vec<f64>,
    pub relative_stats: FieldStats,
    pub absolute_stats: FieldStats,
}

/// Velocity-magnitude error of `a` against the reference `b`.
pub fn error_fields(a: &FieldSnapshot, b: &FieldSnapshot) -> Result<ErrorFields> {
    a.check_shape()?;
    b.check_shape()?;
    if (a.nx, a.ny) != (b.nx, b.ny) {
        return Err(Error::Shape(format!(
            "cannot compare a {}x{} field with a {}x{} field",
            a.nx, a.ny, b.nx, b.ny
        )));
    }
    let n = a.nx * a.ny;
    let absolute: Vec<f64> = (0..n).map(|i| (a.speed(i) - b.speed(i)).abs()).collect();
    let relative: Vec<f64> = (0..n)
        .map(|i| absolute[i] / b.speed(i).max(SPEED_FLOOR))
        .collect();
    Ok(ErrorFields {
        nx: a.nx,
        ny: a.ny,
        relative_stats: FieldStats::of(&relative, a.nx),
        absolute_stats: FieldStats::of(&absolute, a.nx),
        relative,
        absolute,
    })
}

/// Analytic decay rate ν(kx² + ky²) of the Taylor–Green velocity.
pub fn taylor_green_decay_rate(tau: f64, nx: usize, ny: usize) -> Result<f64> {
    let (kx, ky) = (TAU / nx as f64, TAU / ny as f64);
    Ok(viscosity(tau)? * (kx * kx + ky * ky))
}

/// Least-squares slope of −ln(peak) against t.
pub fn fit_decay_rate(series: &[(u64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|&(t, v)| (t as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidInput("decay fit needs two positive samples".into()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("decay fit needs distinct times".into()));
    }
    Ok(-sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::init_taylor_green;

    fn snap(ux: Vec<f64>, uy: Vec<f64>, nx: usize) -> FieldSnapshot {
        let ny = ux.len() / nx;
        FieldSnapshot {
            t: 0,
            nx,
            ny,
            rho: vec![1.0; ux.len()],
            ux,
            uy,
        }
    }

    #[test]
    fn identical_fields_have_zero_error() {
        let g = init_taylor_green(16, 16, 0.01).unwrap();
        let s = FieldSnapshot::capture(&g, 0);
        let e = error_fields(&s, &s).unwrap();
        assert!(e.relative.iter().chain(&e.absolute).all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_scaling_gives_uniform_relative_error() {
        let b = snap(vec![0.01, -0.02, 0.003, 0.0004], vec![0.002, 0.001, -0.004, 0.0003], 2);
        let a = snap(b.ux.iter().map(|v| v * 1.05).collect(), b.uy.iter().map(|v| v * 1.05).collect(), 2);
        let e = error_fields(&a, &b).unwrap();
        for &r in &e.relative {
            assert!((r - 0.05).abs() < 1e-12);
        }
        assert!((e.relative_stats.mean - 0.05).abs() < 1e-12);
        assert_eq!(e.absolute_stats.argmax, (1, 0));
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = snap(vec![0.0; 4], vec![0.0; 4], 2);
        let b = snap(vec![0.0; 6], vec![0.0; 6], 3);
        assert!(matches!(error_fields(&a, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn centerlines_of_rest_and_vortex() {
        let rest = snap(vec![0.0; 16], vec![0.0; 16], 4);
        let c = centerline_profiles(&rest, 0.1).unwrap();
        assert!(c.horizontal.iter().chain(&c.vertical).all(|p| p.ux == 0.0 && p.uy == 0.0));

        let n = 32;
        let s = FieldSnapshot::capture(&init_taylor_green(n, n, 0.01).unwrap(), 0);
        let c = centerline_profiles(&s, 0.01).unwrap();
        let k = TAU / n as f64;
        // y = n/2 gives cos(ky) = -1
        for p in &c.horizontal {
            assert!((p.ux + (k * p.pos as f64).sin()).abs() < 1e-12);
        }
        // x = n/2 gives cos(kx) = -1
        for p in &c.vertical {
            assert!((p.uy - (k * p.pos as f64).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn decay_fit_recovers_exponent() {
        let series: Vec<(u64, f64)> = (0..100).map(|t| (t, 0.3 * (-0.004 * t as f64).exp())).collect();
        assert!((fit_decay_rate(&series).unwrap() - 0.004).abs() < 1e-12);
        let rate = taylor_green_decay_rate(1.0, 64, 64).unwrap();
        assert!((rate - 2.0 / 6.0 * (TAU / 64.0).powi(2)).abs() < 1e-15);
    }
}
