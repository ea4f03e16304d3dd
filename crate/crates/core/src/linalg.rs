//! Dense 16×16 complex matrices. Only used off the hot path: reconstructing
//! decomposed circuits and building reference unitaries for verification.

use std::ops::Mul;

use num_complex::Complex64;

use crate::qstate::{StateVector, DIM};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix(pub Box<[[Complex64; DIM]; DIM]>);

impl DenseMatrix {
    pub fn zeros() -> Self {
        DenseMatrix(Box::new([[ZERO; DIM]; DIM]))
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for k in 0..DIM {
            m.0[k][k] = ONE;
        }
        m
    }

    /// Matrix whose columns are the images of the basis states under `op`.
    pub fn from_operator(op: impl Fn(&StateVector) -> StateVector) -> Self {
        let mut m = Self::zeros();
        for col in 0..DIM {
            let image = op(&StateVector::basis(col));
            for row in 0..DIM {
                m.0[row][col] = image[row];
            }
        }
        m
    }

    /// Embed a single-qubit gate acting on `qubit`.
    pub fn single_qubit(gate: [[Complex64; 2]; 2], qubit: usize) -> Self {
        let mut m = Self::zeros();
        let bit = 1 << qubit;
        for col in 0..DIM {
            let b = (col & bit != 0) as usize;
            for a in 0..2 {
                let row = if a == 1 { col | bit } else { col & !bit };
                m.0[row][col] += gate[a][b];
            }
        }
        m
    }

    /// Diagonal matrix from a function of the basis index.
    pub fn diagonal(f: impl Fn(usize) -> Complex64) -> Self {
        let mut m = Self::zeros();
        for k in 0..DIM {
            m.0[k][k] = f(k);
        }
        m
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut m = self.clone();
        for row in m.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= c;
            }
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut m = self.clone();
        for (r, o) in m.0.iter_mut().zip(other.0.iter()) {
            for (v, w) in r.iter_mut().zip(o.iter()) {
                *v += w;
            }
        }
        m
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn apply(&self, s: &StateVector) -> StateVector {
        let mut out = StateVector::zero();
        for i in 0..DIM {
            out[i] = (0..DIM).map(|j| self.0[i][j] * s[j]).sum();
        }
        out
    }

    pub fn norm_inf(&self) -> f64 {
        self.0
            .iter()
            .map(|r| r.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                d = d.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        d
    }

    /// Largest elementwise difference after removing the best global phase.
    pub fn max_abs_diff_up_to_phase(&self, other: &Self) -> f64 {
        let mut overlap = ZERO;
        for i in 0..DIM {
            for j in 0..DIM {
                overlap += self.0[i][j].conj() * other.0[i][j];
            }
        }
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        self.scale(phase).max_abs_diff(other)
    }

    /// exp(self) by scaling and squaring of a truncated Taylor series.
    pub fn expm(&self) -> Self {
        let norm = self.norm_inf();
        let squarings = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let a = self.scale(Complex64::new(0.5f64.powi(squarings as i32), 0.0));
        let mut result = Self::identity();
        let mut term = Self::identity();
        for n in 1..=30 {
            term = (&term * &a).scale(Complex64::new(1.0 / n as f64, 0.0));
            result = result.add(&term);
        }
        for _ in 0..squarings {
            result = &result * &result;
        }
        result
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;

    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        let mut m = DenseMatrix::zeros();
        for i in 0..DIM {
            for k in 0..DIM {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..DIM {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

/// Pauli X and Z as 2×2 matrices.
pub fn pauli_x() -> [[Complex64; 2]; 2] {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn pauli_z() -> [[Complex64; 2]; 2] {
    [[ONE, ZERO], [ZERO, -ONE]]
}
