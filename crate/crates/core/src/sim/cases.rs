use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{check_tau, equilibrium_raw, tau_for_viscosity};
use crate::qstate::{embed, Slots};
use crate::lattice::Populations;

use super::diagnostics::{peak_speed, FieldSnapshot};
use super::grid::{Backend, Grid, NodeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    TaylorGreen,
    LidCavity,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::TaylorGreen => "taylor-green",
            Case::LidCavity => "lid-cavity",
        })
    }
}

impl FromStr for Case {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "taylor-green" | "tg" => Ok(Case::TaylorGreen),
            "lid-cavity" | "cavity" | "ldc" => Ok(Case::LidCavity),
            _ => Err(Error::InvalidInput(format!(
                "unknown case `{s}` (expected taylor-green or lid-cavity)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub case: Case,
    pub nx: usize,
    pub ny: usize,
    /// Relaxation time for the BGK backend. For the cavity, `None` derives
    /// it from `reynolds`.
    pub tau: Option<f64>,
    /// Vortex amplitude u0 or lid speed.
    pub velocity: f64,
    /// Cavity Reynolds number u_lid·nx/ν.
    pub reynolds: f64,
    pub steps: u64,
    /// Field snapshot cadence; 0 keeps only the initial and final fields.
    pub snapshot_every: u64,
}

impl SimConfig {
    pub fn taylor_green() -> Self {
        SimConfig {
            case: Case::TaylorGreen,
            nx: 64,
            ny: 64,
            tau: Some(1.0),
            velocity: 0.01,
            reynolds: 10.0,
            steps: 1000,
            snapshot_every: 0,
        }
    }

    pub fn lid_cavity() -> Self {
        SimConfig {
            case: Case::LidCavity,
            tau: None,
            velocity: 0.026,
            ..Self::taylor_green()
        }
    }

    pub fn for_case(case: Case) -> Self {
        match case {
            Case::TaylorGreen => Self::taylor_green(),
            Case::LidCavity => Self::lid_cavity(),
        }
    }

    pub fn effective_tau(&self) -> Result<f64> {
        let tau = match (self.tau, self.case) {
            (Some(t), _) => t,
            (None, Case::LidCavity) => {
                if !(self.reynolds > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "reynolds",
                        value: self.reynolds,
                        reason: "must be positive",
                    });
                }
                tau_for_viscosity(self.velocity * self.nx as f64 / self.reynolds)
            }
            (None, Case::TaylorGreen) => 1.0,
        };
        check_tau(tau)?;
        Ok(tau)
    }

    pub fn validate(&self) -> Result<()> {
        let min = match self.case {
            Case::TaylorGreen => 1,
            Case::LidCavity => 3,
        };
        if self.nx < min || self.ny < min {
            return Err(Error::InvalidInput(format!(
                "{} needs at least {min}x{min} nodes, got {}x{}",
                self.case, self.nx, self.ny
            )));
        }
        if !self.velocity.is_finite() {
            return Err(Error::InvalidParameter {
                name: "velocity",
                value: self.velocity,
                reason: "must be finite",
            });
        }
        self.effective_tau().map(|_| ())
    }

    pub fn init(&self) -> Result<Grid> {
        self.validate()?;
        match self.case {
            Case::TaylorGreen => init_taylor_green(self.nx, self.ny, self.velocity),
            Case::LidCavity => init_lid_cavity(self.nx, self.ny, self.velocity),
        }
    }
}

/// Analytic Taylor–Green velocity at node (x, y).
pub fn taylor_green_velocity(nx: usize, ny: usize, u0: f64, x: usize, y: usize) -> [f64; 2] {
    let (kx, ky) = (TAU / nx as f64, TAU / ny as f64);
    let (x, y) = (x as f64, y as f64);
    [
        u0 * (kx * x).sin() * (ky * y).cos(),
        -u0 * (kx * x).cos() * (ky * y).sin(),
    ]
}

/// Periodic vortex array at equilibrium with ρ = 1.
pub fn init_taylor_green(nx: usize, ny: usize, u0: f64) -> Result<Grid> {
    let mut g = Grid::new(nx, ny)?;
    for y in 0..ny {
        for x in 0..nx {
            let u = taylor_green_velocity(nx, ny, u0, x, y);
            *g.node_mut(x, y) = embed(&Populations(equilibrium_raw(1.0, u)));
        }
    }
    Ok(g)
}

/// Closed box at rest. The whole top row is the lid, moving with
/// `(u_lid, 0)`; the other three sides are stationary walls.
pub fn init_lid_cavity(nx: usize, ny: usize, u_lid: f64) -> Result<Grid> {
    if nx < 3 || ny < 3 {
        return Err(Error::InvalidInput(format!(
            "lid cavity needs at least 3x3 nodes, got {nx}x{ny}"
        )));
    }
    let mut g = Grid::new(nx, ny)?;
    let rest: Slots = embed(&Populations(equilibrium_raw(1.0, [0.0; 2])));
    for y in 0..ny {
        for x in 0..nx {
            let kind = if y == ny - 1 {
                NodeKind::MovingLid
            } else if x == 0 || x == nx - 1 || y == 0 {
                NodeKind::Wall
            } else {
                NodeKind::Fluid
            };
            g.set_kind(x, y, kind);
            if kind == NodeKind::Fluid {
                *g.node_mut(x, y) = rest;
            }
        }
    }
    g.set_lid_velocity([u_lid, 0.0]);
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassAudit {
    pub initial: f64,
    pub final_mass: f64,
    /// Largest |M(t) − M(0)| / M(0) over the run.
    pub max_relative_drift: f64,
    /// Largest per-node collision mass change over all steps.
    pub max_node_collision_error: f64,
}

#[derive(Clone, Debug)]
pub struct SimOutput {
    pub config: SimConfig,
    pub tau: f64,
    pub backend: &'static str,
    /// Initial field, any cadence snapshots, and the final field.
    pub snapshots: Vec<FieldSnapshot>,
    /// Peak |u| over fluid nodes at every step, starting at t = 0.
    pub peak_series: Vec<(u64, f64)>,
    pub mass: MassAudit,
    pub grid: Grid,
}

impl SimOutput {
    pub fn final_snapshot(&self) -> &FieldSnapshot {
        self.snapshots.last().expect("a run always records its initial field")
    }
}

/// Backend from the configuration's relaxation time.
pub fn bgk_backend(cfg: &SimConfig) -> Result<Backend> {
    Backend::bgk(cfg.effective_tau()?)
}

pub fn run(cfg: &SimConfig, backend: &Backend) -> Result<SimOutput> {
    let grid = cfg.init()?;
    run_from(cfg, grid, backend)
}

/// Advance an already initialised grid by `cfg.steps`.
pub fn run_from(cfg: &SimConfig, mut grid: Grid, backend: &Backend) -> Result<SimOutput> {
    let tau = cfg.effective_tau()?;
    let m0 = grid.fluid_mass();
    let mut audit = MassAudit {
        initial: m0,
        final_mass: m0,
        max_relative_drift: 0.0,
        max_node_collision_error: 0.0,
    };
    let mut snapshots = vec![FieldSnapshot::capture(&grid, 0)];
    let mut peak_series = vec![(0, peak_speed(&grid))];

    for t in 1..=cfg.steps {
        let stats = grid.step(backend)?;
        audit.max_node_collision_error = audit.max_node_collision_error.max(stats.max_collision_mass_error);
        let m = grid.fluid_mass();
        if !m.is_finite() {
            return Err(Error::Degenerate(format!("non-finite mass at step {t}")));
        }
        audit.max_relative_drift = audit.max_relative_drift.max((m - m0).abs() / m0);
        audit.final_mass = m;
        peak_series.push((t, peak_speed(&grid)));
        if t == cfg.steps || (cfg.snapshot_every > 0 && t % cfg.snapshot_every == 0) {
            snapshots.push(FieldSnapshot::capture(&grid, t));
        }
    }
    Ok(SimOutput {
        config: cfg.clone(),
        tau,
        backend: backend.name(),
        snapshots,
        peak_series,
        mass: audit,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::moments;
    use crate::qstate::physical;

    #[test]
    fn defaults() {
        let tg = SimConfig::taylor_green();
        assert_eq!((tg.nx, tg.ny, tg.velocity, tg.steps), (64, 64, 0.01, 1000));
        assert_eq!(tg.effective_tau().unwrap(), 1.0);
        let c = SimConfig::lid_cavity();
        assert_eq!(c.velocity, 0.026);
        let tau = c.effective_tau().unwrap();
        assert!((tau - 0.9992).abs() < 1e-12, "{tau}");
        assert!("tg".parse::<Case>().is_ok() && "bogus".parse::<Case>().is_err());
    }

    #[test]
    fn taylor_green_initial_field() {
        let g = init_taylor_green(64, 64, 0.01).unwrap();
        let mut sum = [0.0; 2];
        let mut peak: f64 = 0.0;
        for y in 0..64 {
            for x in 0..64 {
                let m = moments(&physical(g.node(x, y))).unwrap();
                let u = taylor_green_velocity(64, 64, 0.01, x, y);
                assert!((m.rho - 1.0).abs() < 1e-14);
                assert!((m.u[0] - u[0]).abs() < 1e-14 && (m.u[1] - u[1]).abs() < 1e-14);
                sum[0] += m.u[0];
                sum[1] += m.u[1];
                peak = peak.max(m.u[0].hypot(m.u[1]));
            }
        }
        assert!(sum[0].abs() < 1e-13 && sum[1].abs() < 1e-13);
        assert!((peak - 0.01).abs() < 1e-15);
    }

    #[test]
    fn zero_amplitude_is_a_fixed_point() {
        let cfg = SimConfig {
            velocity: 0.0,
            nx: 16,
            ny: 16,
            steps: 20,
            ..SimConfig::taylor_green()
        };
        let out = run(&cfg, &bgk_backend(&cfg).unwrap()).unwrap();
        let (a, b) = (&out.snapshots[0], out.final_snapshot());
        assert!(a.max_speed() == 0.0 && b.max_speed() < 1e-17);
        for (x, y) in a.rho.iter().zip(&b.rho) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn cavity_geometry_and_rest_state() {
        let g = init_lid_cavity(10, 8, 0.026).unwrap();
        let count = |k| g.kinds().iter().filter(|&&n| n == k).count();
        assert_eq!(count(NodeKind::MovingLid), 10);
        assert_eq!(count(NodeKind::Wall), 2 * 7 + 8);
        assert_eq!(count(NodeKind::Fluid), 8 * 6);
        for y in 1..7 {
            for x in 1..9 {
                let (rho, u) = g.macroscopic(x, y);
                assert!((rho - 1.0).abs() < 1e-15 && u == [0.0, 0.0]);
            }
        }
        assert!(init_lid_cavity(2, 5, 0.1).is_err());
    }

    #[test]
    fn resting_cavity_stays_at_rest() {
        let cfg = SimConfig {
            nx: 12,
            ny: 12,
            velocity: 0.0,
            tau: Some(0.9),
            steps: 100,
            ..SimConfig::lid_cavity()
        };
        let out = run(&cfg, &bgk_backend(&cfg).unwrap()).unwrap();
        assert!(out.final_snapshot().max_speed() < 1e-16);
        assert!(out.mass.max_relative_drift < 1e-14);
    }

    #[test]
    fn zero_steps_returns_initial_field() {
        let cfg = SimConfig {
            steps: 0,
            nx: 8,
            ny: 8,
            ..SimConfig::taylor_green()
        };
        let out = run(&cfg, &bgk_backend(&cfg).unwrap()).unwrap();
        assert_eq!(out.snapshots.len(), 1);
        assert_eq!(out.snapshots[0], FieldSnapshot::capture(&cfg.init().unwrap(), 0));
    }
}
