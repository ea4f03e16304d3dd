//! D2Q9 lattice: stencil constants, equilibrium, BGK collision, moments and
//! the dihedral symmetry group of the square acting on populations.
//!
//! ```text
//!   6   2   5
//!    \  |  /
//!   3 - 0 - 1
//!    /  |  \
//!   7   4   8
//! ```

use std::fmt;
use std::ops::{Index, IndexMut};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Number of discrete velocities.
pub const Q: usize = 9;

/// Discrete velocities e_i.
pub const VELOCITIES: [[i32; 2]; Q] = [
    [0, 0],
    [1, 0],
    [0, 1],
    [-1, 0],
    [0, -1],
    [1, 1],
    [-1, 1],
    [-1, -1],
    [1, -1],
];

/// Weights as exact numerators over [`WEIGHT_DENOMINATOR`].
pub const WEIGHT_NUMERATORS: [u32; Q] = [16, 4, 4, 4, 4, 1, 1, 1, 1];
pub const WEIGHT_DENOMINATOR: u32 = 36;

/// Weights in double precision (correctly rounded from the rationals above).
pub const WEIGHTS: [f64; Q] = [
    4.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
];

/// Squared lattice speed of sound as the exact rational 1/3.
pub const CS2_NUM: u32 = 1;
pub const CS2_DEN: u32 = 3;
pub const CS2: f64 = 1.0 / 3.0;

/// `OPPOSITE[i]` is the index of -e_i.
pub const OPPOSITE: [usize; Q] = [0, 3, 4, 1, 2, 7, 8, 5, 6];

/// Look up the population index for an integer velocity.
pub fn velocity_index(e: [i32; 2]) -> Option<usize> {
    VELOCITIES.iter().position(|&v| v == e)
}

/// Populations of one lattice node, in lattice units.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Populations(pub [f64; Q]);

impl Populations {
    pub fn new(f: [f64; Q]) -> Self {
        Populations(f)
    }

    pub fn weights() -> Self {
        Populations(WEIGHTS)
    }

    pub fn mass(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn momentum(&self) -> [f64; 2] {
        momentum_of(&self.0)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Populations(self.0.map(|v| v * lambda))
    }

    pub fn as_array(&self) -> &[f64; Q] {
        &self.0
    }
}

impl Index<usize> for Populations {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Populations {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Σ f_i e_i over the nine physical populations.
pub fn momentum_of(f: &[f64; Q]) -> [f64; 2] {
    let mut p = [0.0; 2];
    for (fi, e) in f.iter().zip(VELOCITIES.iter()) {
        p[0] += fi * e[0] as f64;
        p[1] += fi * e[1] as f64;
    }
    p
}

/// Density and velocity at a node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MacroFields {
    pub rho: f64,
    pub u: [f64; 2],
}

/// Second-order equilibrium with cs² = 1/3.
pub fn equilibrium(rho: f64, u: [f64; 2]) -> Result<Populations> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidInput(format!(
            "equilibrium requires rho > 0, got {rho}"
        )));
    }
    Ok(Populations(equilibrium_raw(rho, u)))
}

#[inline]
pub(crate) fn equilibrium_raw(rho: f64, u: [f64; 2]) -> [f64; Q] {
    let usq = u[0] * u[0] + u[1] * u[1];
    let mut f = [0.0; Q];
    for i in 0..Q {
        let eu = VELOCITIES[i][0] as f64 * u[0] + VELOCITIES[i][1] as f64 * u[1];
        f[i] = WEIGHTS[i] * rho * (1.0 + eu / CS2 + (eu * eu - CS2 * usq) / (2.0 * CS2 * CS2));
    }
    f
}

/// Zeroth and first moments.
pub fn moments(f: &Populations) -> Result<MacroFields> {
    let rho = f.mass();
    if !(rho > 0.0) {
        return Err(Error::Degenerate(format!(
            "moments of a state with non-positive density {rho}"
        )));
    }
    let p = f.momentum();
    Ok(MacroFields {
        rho,
        u: [p[0] / rho, p[1] / rho],
    })
}

/// Kinematic viscosity ν = cs²(τ - 1/2).
pub fn viscosity(tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(CS2 * (tau - 0.5))
}

/// Relaxation time giving viscosity `nu`.
pub fn tau_for_viscosity(nu: f64) -> f64 {
    nu / CS2 + 0.5
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.5 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "tau",
            value: tau,
            reason: "relaxation time must exceed 1/2 for positive viscosity",
        })
    }
}

/// Single-relaxation-time collision f* = f - (f - f^eq)/τ.
pub fn bgk_collide(f: &Populations, tau: f64) -> Result<Populations> {
    check_tau(tau)?;
    let m = moments(f)?;
    Ok(Populations(bgk_raw(&f.0, m.rho, m.u, 1.0 / tau)))
}

#[inline]
pub(crate) fn bgk_raw(f: &[f64; Q], rho: f64, u: [f64; 2], omega: f64) -> [f64; Q] {
    let feq = equilibrium_raw(rho, u);
    let mut out = [0.0; Q];
    for i in 0..Q {
        out[i] = f[i] - omega * (f[i] - feq[i]);
    }
    out
}

/// Labels of the eight symmetries of the square; `r` is a 90° anticlockwise
/// rotation and `s` the reflection across the horizontal axis. `RkS` means
/// `s` applied first, then `r^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum D8Label {
    I,
    R,
    R2,
    R3,
    S,
    RS,
    R2S,
    R3S,
}

impl D8Label {
    pub const ALL: [D8Label; 8] = [
        D8Label::I,
        D8Label::R,
        D8Label::R2,
        D8Label::R3,
        D8Label::S,
        D8Label::RS,
        D8Label::R2S,
        D8Label::R3S,
    ];

    fn rotations_and_reflection(self) -> (u32, bool) {
        match self {
            D8Label::I => (0, false),
            D8Label::R => (1, false),
            D8Label::R2 => (2, false),
            D8Label::R3 => (3, false),
            D8Label::S => (0, true),
            D8Label::RS => (1, true),
            D8Label::R2S => (2, true),
            D8Label::R3S => (3, true),
        }
    }

    /// Integer 2×2 matrix acting on velocities.
    pub fn matrix(self) -> [[i32; 2]; 2] {
        const ROT: [[i32; 2]; 2] = [[0, -1], [1, 0]];
        const REF: [[i32; 2]; 2] = [[1, 0], [0, -1]];
        let (k, reflect) = self.rotations_and_reflection();
        let mut m = if reflect { REF } else { [[1, 0], [0, 1]] };
        for _ in 0..k {
            m = mat_mul(ROT, m);
        }
        m
    }
}

impl fmt::Display for D8Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            D8Label::I => "I",
            D8Label::R => "r",
            D8Label::R2 => "r2",
            D8Label::R3 => "r3",
            D8Label::S => "s",
            D8Label::RS => "rs",
            D8Label::R2S => "r2s",
            D8Label::R3S => "r3s",
        };
        f.write_str(s)
    }
}

fn mat_mul(a: [[i32; 2]; 2], b: [[i32; 2]; 2]) -> [[i32; 2]; 2] {
    let mut c = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn mat_apply(m: [[i32; 2]; 2], v: [i32; 2]) -> [i32; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// A symmetry of the square together with the population permutation it
/// induces; `perm[i]` is the index that population `i` moves to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct D8Element {
    pub label: D8Label,
    pub perm: [usize; Q],
}

impl D8Element {
    /// All eight elements in the order I, r, r², r³, s, rs, r²s, r³s.
    pub fn all() -> &'static [D8Element; 8] {
        static GROUP: OnceLock<[D8Element; 8]> = OnceLock::new();
        GROUP.get_or_init(|| D8Label::ALL.map(D8Element::derive))
    }

    pub fn get(label: D8Label) -> D8Element {
        Self::all()[label as usize]
    }

    pub fn identity() -> D8Element {
        Self::get(D8Label::I)
    }

    pub fn rotation() -> D8Element {
        Self::get(D8Label::R)
    }

    pub fn reflection() -> D8Element {
        Self::get(D8Label::S)
    }

    /// Builds the permutation by mapping every velocity through the matrix.
    fn derive(label: D8Label) -> D8Element {
        let m = label.matrix();
        let mut perm = [0; Q];
        for (i, e) in VELOCITIES.iter().enumerate() {
            perm[i] = velocity_index(mat_apply(m, *e))
                .expect("lattice velocity set is closed under the square symmetries");
        }
        D8Element { label, perm }
    }

    pub fn matrix(&self) -> [[i32; 2]; 2] {
        self.label.matrix()
    }

    pub fn inverse(&self) -> D8Element {
        *Self::all()
            .iter()
            .find(|g| d8_compose(self, g).label == D8Label::I)
            .expect("every group element has an inverse")
    }

    /// Apply to a lattice displacement or velocity.
    pub fn apply_vector(&self, v: [i32; 2]) -> [i32; 2] {
        mat_apply(self.matrix(), v)
    }
}

/// Permute populations: (σ·f)[perm[i]] = f[i].
pub fn apply_d8(sigma: &D8Element, f: &Populations) -> Populations {
    let mut out = [0.0; Q];
    for i in 0..Q {
        out[sigma.perm[i]] = f.0[i];
    }
    Populations(out)
}

/// Composition `a ∘ b` (apply `b` first).
pub fn d8_compose(a: &D8Element, b: &D8Element) -> D8Element {
    let m = mat_mul(a.matrix(), b.matrix());
    *D8Element::all()
        .iter()
        .find(|g| g.matrix() == m)
        .expect("D8 is closed under composition")
}
