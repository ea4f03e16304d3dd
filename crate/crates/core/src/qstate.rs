//! Four-qubit velocity register: rooted-density encoding, probability
//! read-out and the square symmetries realised as qubit permutations.
//!
//! Basis states are indexed by the integer value of |Q3 Q2 Q1 Q0⟩. Qubit `q`
//! carries the axial velocity of population `q + 1`, so a diagonal velocity
//! sets the two qubits of its neighbouring axes.

use std::ops::{Index, IndexMut};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{D8Element, D8Label, Populations, Q};

pub const N_QUBITS: usize = 4;
pub const DIM: usize = 1 << N_QUBITS;

/// Basis index of every physical population.
pub const POP_TO_BASIS: [usize; Q] = [0, 1, 2, 4, 8, 3, 6, 12, 9];

/// Basis states that carry no physical velocity.
pub const SURPLUS: [usize; DIM - Q] = [5, 7, 10, 11, 13, 14, 15];

/// Sixteen real slots in basis order: nine populations plus surplus mass.
pub type Slots = [f64; DIM];

/// Place nine populations at their basis indices, surplus slots zero.
pub fn embed(f: &Populations) -> Slots {
    let mut out = [0.0; DIM];
    for (i, &k) in POP_TO_BASIS.iter().enumerate() {
        out[k] = f[i];
    }
    out
}

/// Extract the nine physical populations from basis-ordered slots.
pub fn physical(slots: &Slots) -> Populations {
    Populations(POP_TO_BASIS.map(|k| slots[k]))
}

/// Discrete velocity attached to basis state `k`; zero for surplus states.
#[inline]
pub fn basis_velocity(k: usize) -> [i32; 2] {
    const TABLE: [[i32; 2]; DIM] = {
        let mut t = [[0; 2]; DIM];
        let mut i = 0;
        while i < Q {
            t[POP_TO_BASIS[i]] = crate::lattice::VELOCITIES[i];
            i += 1;
        }
        t
    };
    TABLE[k]
}

/// Momentum carried by basis-ordered slots; surplus slots contribute nothing.
pub fn slot_momentum(slots: &Slots) -> [f64; 2] {
    physical(slots).momentum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVector(pub [Complex64; DIM]);

impl StateVector {
    pub fn zero() -> Self {
        StateVector([Complex64::new(0.0, 0.0); DIM])
    }

    pub fn basis(k: usize) -> Self {
        let mut s = Self::zero();
        s.0[k] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> [f64; DIM] {
        self.0.map(|a| a.norm_sqr())
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for StateVector {
    type Output = Complex64;
    fn index(&self, k: usize) -> &Complex64 {
        &self.0[k]
    }
}

impl IndexMut<usize> for StateVector {
    fn index_mut(&mut self, k: usize) -> &mut Complex64 {
        &mut self.0[k]
    }
}

/// amp_k = √(f_k / Σf); returns the state and the total mass.
pub fn encode(f16: &Slots) -> Result<(StateVector, f64)> {
    let rho = total_mass(f16);
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Degenerate(format!(
            "cannot encode populations with total mass {rho}"
        )));
    }
    if let Some(k) = f16.iter().position(|&v| v < 0.0 || v.is_nan()) {
        return Err(Error::InvalidInput(format!(
            "negative population {} in slot {k}",
            f16[k]
        )));
    }
    let inv = 1.0 / rho.sqrt();
    let amp = f16.map(|v| Complex64::new(v.sqrt() * inv, 0.0));
    Ok((StateVector(amp), rho))
}

/// Σ f summed in sorted order, so the result does not depend on slot order.
pub fn total_mass(f16: &Slots) -> f64 {
    let mut sorted = *f16;
    sorted.sort_unstable_by(f64::total_cmp);
    sorted.iter().sum()
}

/// f̂_k = ρ |amp_k|².
pub fn decode(state: &StateVector, rho: f64) -> Slots {
    state.0.map(|a| rho * a.norm_sqr())
}

/// A square symmetry realised on the register as a permutation of qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QubitPermutation {
    pub sigma: D8Element,
    /// `qubits[q]` is where qubit `q` is moved.
    pub qubits: [usize; N_QUBITS],
    /// `basis[k]` is the image of basis state `k`.
    pub basis: [usize; DIM],
}

impl QubitPermutation {
    pub fn all() -> &'static [QubitPermutation; 8] {
        static TABLE: OnceLock<[QubitPermutation; 8]> = OnceLock::new();
        TABLE.get_or_init(|| D8Label::ALL.map(|l| Self::derive(D8Element::get(l))))
    }

    pub fn of(sigma: &D8Element) -> QubitPermutation {
        Self::all()[sigma.label as usize]
    }

    fn derive(sigma: D8Element) -> QubitPermutation {
        // qubit q ↔ axial population q+1
        let qubits: [usize; N_QUBITS] = std::array::from_fn(|q| sigma.perm[q + 1] - 1);
        let basis = std::array::from_fn(|k| {
            (0..N_QUBITS)
                .filter(|q| k >> q & 1 == 1)
                .fold(0, |acc, q| acc | 1 << qubits[q])
        });
        QubitPermutation {
            sigma,
            qubits,
            basis,
        }
    }
}

/// amp'[basis_perm(k)] = amp[k].
pub fn apply_qubit_permutation(sigma: &D8Element, state: &StateVector) -> StateVector {
    let p = QubitPermutation::of(sigma);
    let mut out = StateVector::zero();
    for k in 0..DIM {
        out.0[p.basis[k]] = state.0[k];
    }
    out
}

/// The same permutation acting on real, basis-ordered slots.
pub fn permute_slots(sigma: &D8Element, slots: &Slots) -> Slots {
    let p = QubitPermutation::of(sigma);
    let mut out = [0.0; DIM];
    for k in 0..DIM {
        out[p.basis[k]] = slots[k];
    }
    out
}
