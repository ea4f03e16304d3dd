//! Lowering of circuit layers to the {RZ, SX, CZ} native gate set.
//!
//! Identities used (all up to global phase):
//! - H = RZ(π/2) · SX · RZ(π/2)
//! - RX(θ) = H · RZ(θ) · H, merged to RZ(π/2) SX RZ(θ+π) SX RZ(π/2)
//! - ZZ(θ) = CX · RZ_b(θ) · CX with CX = H_b · CZ · H_b
//! - XX(θ) = (H ⊗ H) · ZZ(θ) · (H ⊗ H)
//!
//! No peephole merging is done beyond the RX form, so counts are fixed per
//! layer kind.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::{Add, AddAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::DenseMatrix;
use crate::qstate::N_QUBITS;

use super::{Architecture, LayerKind};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NativeGate {
    Rz { qubit: usize, angle: f64 },
    Sx { qubit: usize },
    Cz { a: usize, b: usize },
}

impl NativeGate {
    pub fn matrix(&self) -> DenseMatrix {
        match *self {
            NativeGate::Rz { qubit, angle } => {
                let (m, p) = (
                    Complex64::from_polar(1.0, -angle / 2.0),
                    Complex64::from_polar(1.0, angle / 2.0),
                );
                let z = Complex64::new(0.0, 0.0);
                DenseMatrix::single_qubit([[m, z], [z, p]], qubit)
            }
            NativeGate::Sx { qubit } => {
                let a = Complex64::new(0.5, 0.5);
                let b = Complex64::new(0.5, -0.5);
                DenseMatrix::single_qubit([[a, b], [b, a]], qubit)
            }
            NativeGate::Cz { a, b } => DenseMatrix::diagonal(|k| {
                if k >> a & 1 == 1 && k >> b & 1 == 1 {
                    Complex64::new(-1.0, 0.0)
                } else {
                    Complex64::new(1.0, 0.0)
                }
            }),
        }
    }
}

impl fmt::Display for NativeGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NativeGate::Rz { qubit, angle } => write!(f, "rz q{qubit} {angle:?}"),
            NativeGate::Sx { qubit } => write!(f, "sx q{qubit}"),
            NativeGate::Cz { a, b } => write!(f, "cz q{a} q{b}"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NativeGateCount {
    pub rz: u64,
    pub sx: u64,
    pub cz: u64,
}

impl NativeGateCount {
    pub fn total(&self) -> u64 {
        self.rz + self.sx + self.cz
    }

    pub fn of(gates: &[NativeGate]) -> Self {
        let mut c = NativeGateCount::default();
        for g in gates {
            match g {
                NativeGate::Rz { .. } => c.rz += 1,
                NativeGate::Sx { .. } => c.sx += 1,
                NativeGate::Cz { .. } => c.cz += 1,
            }
        }
        c
    }
}

impl Add for NativeGateCount {
    type Output = NativeGateCount;
    fn add(self, o: NativeGateCount) -> NativeGateCount {
        NativeGateCount {
            rz: self.rz + o.rz,
            sx: self.sx + o.sx,
            cz: self.cz + o.cz,
        }
    }
}

impl AddAssign for NativeGateCount {
    fn add_assign(&mut self, o: NativeGateCount) {
        *self = *self + o;
    }
}

fn hadamard(out: &mut Vec<NativeGate>, qubit: usize) {
    out.push(NativeGate::Rz {
        qubit,
        angle: FRAC_PI_2,
    });
    out.push(NativeGate::Sx { qubit });
    out.push(NativeGate::Rz {
        qubit,
        angle: FRAC_PI_2,
    });
}

fn rx(out: &mut Vec<NativeGate>, qubit: usize, theta: f64) {
    out.push(NativeGate::Rz {
        qubit,
        angle: FRAC_PI_2,
    });
    out.push(NativeGate::Sx { qubit });
    out.push(NativeGate::Rz {
        qubit,
        angle: theta + PI,
    });
    out.push(NativeGate::Sx { qubit });
    out.push(NativeGate::Rz {
        qubit,
        angle: FRAC_PI_2,
    });
}

fn zz(out: &mut Vec<NativeGate>, a: usize, b: usize, theta: f64) {
    hadamard(out, b);
    out.push(NativeGate::Cz { a, b });
    hadamard(out, b);
    out.push(NativeGate::Rz { qubit: b, angle: theta });
    hadamard(out, b);
    out.push(NativeGate::Cz { a, b });
    hadamard(out, b);
}

fn xx(out: &mut Vec<NativeGate>, a: usize, b: usize, theta: f64) {
    hadamard(out, a);
    hadamard(out, b);
    zz(out, a, b, theta);
    hadamard(out, a);
    hadamard(out, b);
}

/// Native gates in time order (first element applied first).
pub fn decompose_layer(kind: LayerKind, theta: f64) -> (Vec<NativeGate>, NativeGateCount) {
    let mut gates = Vec::new();
    match kind {
        LayerKind::X => (0..N_QUBITS).for_each(|q| rx(&mut gates, q, theta)),
        LayerKind::Z => (0..N_QUBITS).for_each(|q| {
            gates.push(NativeGate::Rz {
                qubit: q,
                angle: theta,
            })
        }),
        LayerKind::XxA | LayerKind::XxD => {
            for &(a, b) in kind.pairs() {
                xx(&mut gates, a, b, theta);
            }
        }
        LayerKind::ZzA | LayerKind::ZzD => {
            for &(a, b) in kind.pairs() {
                zz(&mut gates, a, b, theta);
            }
        }
    }
    let count = NativeGateCount::of(&gates);
    (gates, count)
}

pub fn total_gate_count(arch: &Architecture) -> NativeGateCount {
    arch.layers
        .iter()
        .map(|&k| decompose_layer(k, 0.0).1)
        .fold(NativeGateCount::default(), Add::add)
}

/// Matrix product of a gate sequence applied in time order.
pub fn reconstruct_unitary(gates: &[NativeGate]) -> DenseMatrix {
    gates
        .iter()
        .fold(DenseMatrix::identity(), |acc, g| &g.matrix() * &acc)
}

/// One gate per line: `name qubit(s) [angle]`, with a comment per layer.
pub fn gate_listing(arch: &Architecture, theta: &[f64]) -> String {
    let mut s = String::new();
    for (l, (&kind, &t)) in arch.layers.iter().zip(theta.iter()).enumerate() {
        s.push_str(&format!("# layer {l} {kind} theta={t:?}\n"));
        for g in decompose_layer(kind, t).0 {
            s.push_str(&format!("{g}\n"));
        }
    }
    s
}
