//! The surrogate collision circuit: symmetric rotation and Ising layers,
//! forward evaluation, the collision map and its exact gradient.
//!
//! Every layer shares one angle across all qubits (or all coupled pairs) of
//! a symmetric pattern, so it commutes with every qubit permutation induced
//! by the square symmetries.

mod decompose;
mod gradient;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{decode, encode, Slots, StateVector, DIM, N_QUBITS};

pub use decompose::{
    decompose_layer, gate_listing, reconstruct_unitary, total_gate_count, NativeGate,
    NativeGateCount,
};
pub use gradient::{loss_gradient, LossGradient};
pub(crate) use gradient::circuit_loss_gradient;

/// Edge links of the qubit square.
pub const AXIAL_PAIRS: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (3, 0)];
/// Opposite-corner links of the qubit square.
pub const DIAGONAL_PAIRS: [(usize, usize); 2] = [(0, 2), (1, 3)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerKind {
    /// Rx(θ) on every qubit.
    #[serde(rename = "X")]
    X,
    /// Rz(θ) on every qubit.
    #[serde(rename = "Z")]
    Z,
    /// XX Ising coupling on the edge pairs.
    #[serde(rename = "XXA")]
    XxA,
    /// XX Ising coupling on the diagonal pairs.
    #[serde(rename = "XXD")]
    XxD,
    /// ZZ Ising coupling on the edge pairs.
    #[serde(rename = "ZZA")]
    ZzA,
    /// ZZ Ising coupling on the diagonal pairs.
    #[serde(rename = "ZZD")]
    ZzD,
}

impl LayerKind {
    pub const ALL: [LayerKind; 6] = [
        LayerKind::X,
        LayerKind::Z,
        LayerKind::XxA,
        LayerKind::XxD,
        LayerKind::ZzA,
        LayerKind::ZzD,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LayerKind::X => "X",
            LayerKind::Z => "Z",
            LayerKind::XxA => "XXA",
            LayerKind::XxD => "XXD",
            LayerKind::ZzA => "ZZA",
            LayerKind::ZzD => "ZZD",
        }
    }

    pub fn pairs(self) -> &'static [(usize, usize)] {
        match self {
            LayerKind::XxA | LayerKind::ZzA => &AXIAL_PAIRS,
            LayerKind::XxD | LayerKind::ZzD => &DIAGONAL_PAIRS,
            LayerKind::X | LayerKind::Z => &[],
        }
    }

    /// Z-type layers are diagonal in the computational basis.
    pub fn is_diagonal(self) -> bool {
        matches!(self, LayerKind::Z | LayerKind::ZzA | LayerKind::ZzD)
    }

    /// Eigenvalue of the generator on basis state `k` (diagonal kinds only).
    fn diagonal_eigenvalue(self, k: usize) -> f64 {
        let z = |q: usize| if k >> q & 1 == 0 { 1.0 } else { -1.0 };
        match self {
            LayerKind::Z => (0..N_QUBITS).map(z).sum(),
            LayerKind::ZzA | LayerKind::ZzD => self.pairs().iter().map(|&(a, b)| z(a) * z(b)).sum(),
            _ => unreachable!("not a diagonal layer"),
        }
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LayerKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown layer kind `{s}`")))
    }
}

/// Ordered list of layers; one trainable angle per layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Architecture {
    pub layers: Vec<LayerKind>,
}

impl Architecture {
    /// The block used throughout: X, Z, XX on edges, ZZ on diagonals.
    pub const BLOCK: [LayerKind; 4] = [LayerKind::X, LayerKind::Z, LayerKind::XxA, LayerKind::ZzD];

    pub fn new(layers: Vec<LayerKind>) -> Self {
        Architecture { layers }
    }

    pub fn repeated(block: &[LayerKind], blocks: usize) -> Self {
        Architecture {
            layers: block.iter().copied().cycle().take(block.len() * blocks).collect(),
        }
    }

    /// `blocks` repetitions of [`Architecture::BLOCK`].
    pub fn standard(blocks: usize) -> Self {
        Self::repeated(&Self::BLOCK, blocks)
    }

    pub fn n_params(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    /// Comma-separated layer names, e.g. `X,Z,XXA,ZZD`.
    pub fn parse_list(s: &str) -> Result<Self> {
        let layers = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(LayerKind::from_str)
            .collect::<Result<Vec<_>>>()?;
        Ok(Architecture { layers })
    }

    pub fn to_list(&self) -> String {
        self.layers.iter().map(|k| k.name()).collect::<Vec<_>>().join(",")
    }
}

/// One angle per layer, in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn zeros(n: usize) -> Self {
        ParamVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A layer with its trigonometric tables precomputed.
#[derive(Clone, Copy, Debug)]
pub struct Layer {
    pub kind: LayerKind,
    pub theta: f64,
    cos: f64,
    sin: f64,
    phases: [Complex64; DIM],
}

impl Layer {
    pub fn new(kind: LayerKind, theta: f64) -> Self {
        let half = 0.5 * theta;
        let mut phases = [Complex64::new(1.0, 0.0); DIM];
        if kind.is_diagonal() {
            for (k, p) in phases.iter_mut().enumerate() {
                *p = Complex64::from_polar(1.0, -half * kind.diagonal_eigenvalue(k));
            }
        }
        Layer {
            kind,
            theta,
            cos: half.cos(),
            sin: half.sin(),
            phases,
        }
    }

    /// The inverse layer U(θ)† = U(-θ).
    pub fn inverse(&self) -> Layer {
        Layer::new(self.kind, -self.theta)
    }

    /// ψ ← exp(-iθ/2 K) ψ.
    #[inline]
    pub fn apply(&self, s: &mut StateVector) {
        match self.kind {
            LayerKind::Z | LayerKind::ZzA | LayerKind::ZzD => {
                for (a, p) in s.0.iter_mut().zip(self.phases.iter()) {
                    *a *= p;
                }
            }
            LayerKind::X => {
                for q in 0..N_QUBITS {
                    self.rotate_pairs(s, 1 << q);
                }
            }
            LayerKind::XxA | LayerKind::XxD => {
                for &(a, b) in self.kind.pairs() {
                    self.rotate_pairs(s, 1 << a | 1 << b);
                }
            }
        }
    }

    /// exp(-iθ/2 P) for a Pauli string P that flips the bits in `mask`.
    #[inline]
    fn rotate_pairs(&self, s: &mut StateVector, mask: usize) {
        let c = self.cos;
        let ms = Complex64::new(0.0, -self.sin);
        for k in 0..DIM {
            let j = k ^ mask;
            if k < j {
                let (a, b) = (s.0[k], s.0[j]);
                s.0[k] = a * c + ms * b;
                s.0[j] = b * c + ms * a;
            }
        }
    }
}

/// K ψ for the Hermitian generator K of `kind` (U = exp(-iθ/2 K)).
pub fn apply_generator(kind: LayerKind, s: &StateVector) -> StateVector {
    let mut out = StateVector::zero();
    match kind {
        LayerKind::Z | LayerKind::ZzA | LayerKind::ZzD => {
            for k in 0..DIM {
                out.0[k] = s.0[k] * kind.diagonal_eigenvalue(k);
            }
        }
        LayerKind::X => {
            for q in 0..N_QUBITS {
                for k in 0..DIM {
                    out.0[k] += s.0[k ^ 1 << q];
                }
            }
        }
        LayerKind::XxA | LayerKind::XxD => {
            for &(a, b) in kind.pairs() {
                let mask = 1 << a | 1 << b;
                for k in 0..DIM {
                    out.0[k] += s.0[k ^ mask];
                }
            }
        }
    }
    out
}

pub fn apply_layer(state: &StateVector, kind: LayerKind, theta: f64) -> StateVector {
    let mut s = *state;
    Layer::new(kind, theta).apply(&mut s);
    s
}

/// An architecture bound to a parameter vector, ready for repeated use.
#[derive(Clone, Debug)]
pub struct Circuit {
    layers: Vec<Layer>,
}

impl Circuit {
    pub fn new(arch: &Architecture, params: &ParamVector) -> Result<Self> {
        if arch.n_params() != params.len() {
            return Err(Error::ParamCount {
                expected: arch.n_params(),
                found: params.len(),
            });
        }
        let layers = arch
            .layers
            .iter()
            .zip(params.0.iter())
            .map(|(&k, &t)| Layer::new(k, t))
            .collect();
        Ok(Circuit { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn apply(&self, s: &mut StateVector) {
        for layer in &self.layers {
            layer.apply(s);
        }
    }

    /// Encode, evolve, read out. Mass is conserved exactly up to rounding.
    pub fn collide(&self, f16: &Slots) -> Result<Slots> {
        let (mut s, rho) = encode(f16)?;
        self.apply(&mut s);
        Ok(decode(&s, rho))
    }
}

pub fn forward(arch: &Architecture, params: &ParamVector, state: &StateVector) -> Result<StateVector> {
    let circuit = Circuit::new(arch, params)?;
    let mut s = *state;
    circuit.apply(&mut s);
    Ok(s)
}

pub fn collide_sqc(arch: &Architecture, params: &ParamVector, f16: &Slots) -> Result<Slots> {
    Circuit::new(arch, params)?.collide(f16)
}
