use rayon::prelude::*;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::lattice::{bgk_raw, check_tau, D8Element, OPPOSITE, Q, VELOCITIES, WEIGHTS, CS2};
use crate::qstate::{basis_velocity, permute_slots, total_mass, Slots, DIM, POP_TO_BASIS};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Fluid,
    Wall,
    MovingLid,
}

/// Collision applied at fluid nodes.
#[derive(Clone, Debug)]
pub enum Backend {
    Bgk { tau: f64 },
    Sqc(Circuit),
}

impl Backend {
    pub fn bgk(tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(Backend::Bgk { tau })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Bgk { .. } => "bgk",
            Backend::Sqc(_) => "sqc",
        }
    }
}

/// Periodic lattice of 16-slot nodes, double-buffered.
///
/// Node `(x, y)` lives at `y * nx + x`. Slots are in basis order; surplus
/// slots carry zero velocity and stay on their node under streaming.
#[derive(Clone, Debug)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    f: Vec<Slots>,
    scratch: Vec<Slots>,
    kind: Vec<NodeKind>,
    lid_velocity: [f64; 2],
}

/// Outcome of one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    /// Largest per-node |Σ₁₆ f* − Σ₁₆ f| produced by the collision.
    pub max_collision_mass_error: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidInput(format!("grid must be non-empty, got {nx}x{ny}")));
        }
        Ok(Grid {
            nx,
            ny,
            f: vec![[0.0; DIM]; nx * ny],
            scratch: vec![[0.0; DIM]; nx * ny],
            kind: vec![NodeKind::Fluid; nx * ny],
            lid_velocity: [0.0; 2],
        })
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize) -> usize {
        y * self.nx + x
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn node(&self, x: usize, y: usize) -> &Slots {
        &self.f[self.idx(x, y)]
    }

    pub fn node_mut(&mut self, x: usize, y: usize) -> &mut Slots {
        let i = self.idx(x, y);
        &mut self.f[i]
    }

    pub fn nodes(&self) -> &[Slots] {
        &self.f
    }

    pub fn kind(&self, x: usize, y: usize) -> NodeKind {
        self.kind[self.idx(x, y)]
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kind
    }

    pub fn set_kind(&mut self, x: usize, y: usize, kind: NodeKind) {
        let i = self.idx(x, y);
        self.kind[i] = kind;
    }

    pub fn lid_velocity(&self) -> [f64; 2] {
        self.lid_velocity
    }

    pub fn set_lid_velocity(&mut self, u: [f64; 2]) {
        self.lid_velocity = u;
    }

    pub fn has_solids(&self) -> bool {
        self.kind.iter().any(|&k| k != NodeKind::Fluid)
    }

    /// Σ over fluid nodes of all 16 slots.
    pub fn fluid_mass(&self) -> f64 {
        self.f
            .iter()
            .zip(&self.kind)
            .filter(|(_, &k)| k == NodeKind::Fluid)
            .map(|(s, _)| s.iter().sum::<f64>())
            .sum()
    }

    /// Density from all 16 slots and velocity from the nine physical ones.
    /// Solid nodes report zero density and the wall velocity.
    pub fn macroscopic(&self, x: usize, y: usize) -> (f64, [f64; 2]) {
        let i = self.idx(x, y);
        match self.kind[i] {
            NodeKind::Fluid => node_moments(&self.f[i]),
            NodeKind::Wall => (0.0, [0.0; 2]),
            NodeKind::MovingLid => (0.0, self.lid_velocity),
        }
    }

    /// Collision on every fluid node.
    pub fn collide(&mut self, backend: &Backend) -> Result<StepStats> {
        let kinds = &self.kind;
        let errs: Vec<Result<f64>> = self
            .f
            .par_iter_mut()
            .zip(kinds.par_iter())
            .map(|(node, &k)| {
                if k != NodeKind::Fluid {
                    return Ok(0.0);
                }
                let before = total_mass(node);
                match backend {
                    Backend::Bgk { tau } => bgk_node(node, 1.0 / tau)?,
                    Backend::Sqc(circuit) => *node = circuit.collide(node)?,
                }
                Ok((total_mass(node) - before).abs())
            })
            .collect();
        let mut stats = StepStats::default();
        for e in errs {
            stats.max_collision_mass_error = stats.max_collision_mass_error.max(e?);
        }
        Ok(stats)
    }

    /// Halfway bounce-back. Each post-collision population headed into a
    /// solid node is written to that node's opposite slot so the following
    /// stream carries it back; a moving wall adds −2 w_i ρ (e_i·u_w)/cs².
    pub fn apply_bounce_back(&mut self) {
        if !self.has_solids() {
            return;
        }
        let (nx, ny) = (self.nx, self.ny);
        for y in 0..ny {
            for x in 0..nx {
                let i = self.idx(x, y);
                if self.kind[i] != NodeKind::Fluid {
                    continue;
                }
                let rho = self.f[i].iter().sum::<f64>();
                for q in 1..Q {
                    let e = VELOCITIES[q];
                    let xs = (x as i64 + e[0] as i64).rem_euclid(nx as i64) as usize;
                    let ys = (y as i64 + e[1] as i64).rem_euclid(ny as i64) as usize;
                    let s = self.idx(xs, ys);
                    let wall_u = match self.kind[s] {
                        NodeKind::Fluid => continue,
                        NodeKind::Wall => [0.0; 2],
                        NodeKind::MovingLid => self.lid_velocity,
                    };
                    let eu = e[0] as f64 * wall_u[0] + e[1] as f64 * wall_u[1];
                    let out = self.f[i][POP_TO_BASIS[q]] - 2.0 * WEIGHTS[q] * rho * eu / CS2;
                    self.f[s][POP_TO_BASIS[OPPOSITE[q]]] = out;
                }
            }
        }
    }

    /// f_k(x + e_k) ← f_k(x), periodic wrap.
    pub fn stream(&mut self) {
        let (nx, ny) = (self.nx, self.ny);
        let src = &self.f;
        self.scratch
            .par_chunks_mut(nx)
            .enumerate()
            .for_each(|(y, row)| {
                for (x, dst) in row.iter_mut().enumerate() {
                    for k in 0..DIM {
                        let e = basis_velocity(k);
                        let xs = (x + nx - e[0].rem_euclid(nx as i32) as usize) % nx;
                        let ys = (y + ny - e[1].rem_euclid(ny as i32) as usize) % ny;
                        dst[k] = src[ys * nx + xs][k];
                    }
                }
            });
        std::mem::swap(&mut self.f, &mut self.scratch);
    }

    /// Collide, bounce back, stream.
    pub fn step(&mut self, backend: &Backend) -> Result<StepStats> {
        let stats = self.collide(backend)?;
        self.apply_bounce_back();
        self.stream();
        Ok(stats)
    }

    /// Image of the grid under a square symmetry about the origin, with
    /// periodic wrap. Requires a square grid unless σ maps axes to themselves.
    pub fn transformed(&self, sigma: &D8Element) -> Result<Grid> {
        let m = sigma.matrix();
        let swaps_axes = m[0][0] == 0;
        if swaps_axes && self.nx != self.ny {
            return Err(Error::Shape(format!(
                "symmetry {} needs a square grid, got {}x{}",
                sigma.label, self.nx, self.ny
            )));
        }
        let mut out = self.clone();
        for y in 0..self.ny {
            for x in 0..self.nx {
                let v = sigma.apply_vector([x as i32, y as i32]);
                let xt = v[0].rem_euclid(self.nx as i32) as usize;
                let yt = v[1].rem_euclid(self.ny as i32) as usize;
                let i = self.idx(x, y);
                let j = out.idx(xt, yt);
                out.f[j] = permute_slots(sigma, &self.f[i]);
                out.kind[j] = self.kind[i];
            }
        }
        let u = self.lid_velocity;
        let r = |row: [i32; 2]| row[0] as f64 * u[0] + row[1] as f64 * u[1];
        out.lid_velocity = [r(m[0]), r(m[1])];
        Ok(out)
    }
}

pub(crate) fn node_moments(s: &Slots) -> (f64, [f64; 2]) {
    let rho: f64 = s.iter().sum();
    let mut p = [0.0; 2];
    for (i, &k) in POP_TO_BASIS.iter().enumerate() {
        p[0] += s[k] * VELOCITIES[i][0] as f64;
        p[1] += s[k] * VELOCITIES[i][1] as f64;
    }
    if rho > 0.0 {
        (rho, [p[0] / rho, p[1] / rho])
    } else {
        (rho, [0.0; 2])
    }
}

fn bgk_node(node: &mut Slots, omega: f64) -> Result<()> {
    let f: [f64; Q] = POP_TO_BASIS.map(|k| node[k]);
    let rho: f64 = f.iter().sum();
    if !(rho > 0.0) {
        return Err(Error::Degenerate(format!("fluid node with density {rho}")));
    }
    let p = crate::lattice::momentum_of(&f);
    let out = bgk_raw(&f, rho, [p[0] / rho, p[1] / rho], omega);
    for (i, &k) in POP_TO_BASIS.iter().enumerate() {
        node[k] = out[i];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{equilibrium, Populations};
    use crate::qstate::embed;

    #[test]
    fn single_node_streams_to_neighbours() {
        let mut g = Grid::new(5, 5).unwrap();
        *g.node_mut(2, 2) = std::array::from_fn(|k| 1.0 + k as f64);
        let before = g.fluid_mass();
        g.stream();
        for (i, e) in VELOCITIES.iter().enumerate() {
            let k = POP_TO_BASIS[i];
            let x = (2 + e[0]) as usize;
            let y = (2 + e[1]) as usize;
            assert_eq!(g.node(x, y)[k], 1.0 + k as f64);
        }
        for &k in &crate::qstate::SURPLUS {
            assert_eq!(g.node(2, 2)[k], 1.0 + k as f64);
        }
        assert_eq!(g.fluid_mass(), before);
    }

    #[test]
    fn streaming_is_periodic() {
        let mut g = Grid::new(8, 6).unwrap();
        for y in 0..6 {
            for x in 0..8 {
                *g.node_mut(x, y) = std::array::from_fn(|k| (x * 100 + y * 10 + k) as f64);
            }
        }
        let start = g.nodes().to_vec();
        for _ in 0..24 {
            g.stream();
        }
        assert_eq!(g.nodes(), &start[..]);
    }

    #[test]
    fn rest_box_bounce_back_conserves_mass() {
        let mut g = Grid::new(6, 6).unwrap();
        for y in 0..6 {
            for x in 0..6 {
                if x == 0 || y == 0 || x == 5 || y == 5 {
                    g.set_kind(x, y, NodeKind::Wall);
                } else {
                    let f = equilibrium(1.0 + 0.01 * x as f64, [0.002 * y as f64, -0.001]).unwrap();
                    *g.node_mut(x, y) = embed(&f);
                }
            }
        }
        let backend = Backend::bgk(0.8).unwrap();
        let m0 = g.fluid_mass();
        for _ in 0..50 {
            g.step(&backend).unwrap();
        }
        assert!((g.fluid_mass() - m0).abs() < 1e-13 * m0);
    }

    #[test]
    fn hand_worked_near_lid_node() {
        // 3x3 box: centre fluid, top row lid, the rest wall
        let mut g = Grid::new(3, 3).unwrap();
        for y in 0..3 {
            for x in 0..3 {
                let k = match (x, y) {
                    (1, 1) => NodeKind::Fluid,
                    (_, 2) => NodeKind::MovingLid,
                    _ => NodeKind::Wall,
                };
                g.set_kind(x, y, k);
            }
        }
        let u = 0.05;
        g.set_lid_velocity([u, 0.0]);
        let f: [f64; Q] = [0.4, 0.11, 0.12, 0.10, 0.09, 0.03, 0.025, 0.028, 0.027];
        *g.node_mut(1, 1) = embed(&Populations(f));
        let rho: f64 = f.iter().sum();
        g.apply_bounce_back();
        g.stream();
        let out = crate::qstate::physical(g.node(1, 1));
        assert_eq!(out[0], f[0]);
        // walls: plain reversal
        assert_eq!(out[3], f[1]);
        assert_eq!(out[1], f[3]);
        assert_eq!(out[2], f[4]);
        assert_eq!(out[5], f[7]);
        assert_eq!(out[6], f[8]);
        // lid: f4 ← f2 (e·u = 0), f7 ← f5 − 6 w ρ u, f8 ← f6 + 6 w ρ u
        assert_eq!(out[4], f[2]);
        assert!((out[7] - (f[5] - 6.0 / 36.0 * rho * u)).abs() < 1e-17);
        assert!((out[8] - (f[6] + 6.0 / 36.0 * rho * u)).abs() < 1e-17);
        assert!((out.mass() - rho).abs() < 1e-15);
    }

    #[test]
    fn lid_rule_reduces_to_plain_reversal() {
        let mut g = Grid::new(3, 3).unwrap();
        for y in 0..3 {
            for x in 0..3 {
                if (x, y) != (1, 1) {
                    g.set_kind(x, y, if y == 2 { NodeKind::MovingLid } else { NodeKind::Wall });
                }
            }
        }
        let f: Slots = embed(&Populations([0.4, 0.11, 0.12, 0.10, 0.09, 0.03, 0.025, 0.028, 0.027]));
        *g.node_mut(1, 1) = f;
        g.apply_bounce_back();
        g.stream();
        let out = g.node(1, 1);
        for (i, &k) in POP_TO_BASIS.iter().enumerate() {
            assert_eq!(out[k], f[POP_TO_BASIS[OPPOSITE[i]]]);
        }
    }
}
