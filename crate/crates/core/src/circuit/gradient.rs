//! Reverse-mode (adjoint) gradient of the training loss.
//!
//! With ψ = U_L ⋯ U_1 ψ₀ and U_l = exp(-iθ_l/2 K_l), the derivative of a
//! real loss with cotangent g = ∂L/∂ψ* is
//!   ∂L/∂θ_l = Re⟨λ_l | (-i/2) K_l | φ_l⟩ = ½ Im⟨λ_l | K_l φ_l⟩,
//! where φ_l is the state after layer l and λ_l = U_{l+1}† ⋯ U_L† g. Both are
//! recovered by uncomputing layers backwards, so no tape is stored.

use crate::error::Result;
use crate::qstate::{basis_velocity, decode, encode, Slots, StateVector, DIM};
use crate::training::metrics::{mse_loss, momentum_penalty};

use super::{apply_generator, Architecture, Circuit, ParamVector};

#[derive(Clone, Debug, PartialEq)]
pub struct LossGradient {
    pub mse: f64,
    pub momentum: f64,
    /// mse + α·momentum
    pub loss: f64,
    pub grad: Vec<f64>,
}

/// Loss MSE + α·L_m over the batch and its exact gradient in θ.
pub fn loss_gradient(
    arch: &Architecture,
    params: &ParamVector,
    batch: &[(Slots, Slots)],
    alpha: f64,
) -> Result<LossGradient> {
    let circuit = Circuit::new(arch, params)?;
    circuit_loss_gradient(&circuit, batch, alpha)
}

pub(crate) fn circuit_loss_gradient(
    circuit: &Circuit,
    batch: &[(Slots, Slots)],
    alpha: f64,
) -> Result<LossGradient> {
    assert!(!batch.is_empty(), "loss_gradient needs a non-empty batch");
    let b = batch.len() as f64;
    let mut grad = vec![0.0; circuit.layers().len()];
    let mut preds = Vec::with_capacity(batch.len());
    let mut targets = Vec::with_capacity(batch.len());

    for (pre, post) in batch {
        let (mut psi, rho) = encode(pre)?;
        circuit.apply(&mut psi);
        let pred = decode(&psi, rho);

        let (mut dpx, mut dpy) = (0.0, 0.0);
        for k in 0..DIM {
            let e = basis_velocity(k);
            dpx += (pred[k] - post[k]) * e[0] as f64;
            dpy += (pred[k] - post[k]) * e[1] as f64;
        }
        // cotangent g_k = 2ρ (∂L/∂f̂_k) ψ_k
        let mut lambda = StateVector::zero();
        for k in 0..DIM {
            let e = basis_velocity(k);
            let dl_df = 2.0 * (pred[k] - post[k]) / (DIM as f64 * b)
                + alpha * 2.0 / b * (dpx * e[0] as f64 + dpy * e[1] as f64);
            lambda.0[k] = psi.0[k] * (2.0 * rho * dl_df);
        }

        let mut phi = psi;
        for (l, layer) in circuit.layers().iter().enumerate().rev() {
            let k_phi = apply_generator(layer.kind, &phi);
            grad[l] += 0.5 * lambda.inner(&k_phi).im;
            let inv = layer.inverse();
            inv.apply(&mut phi);
            inv.apply(&mut lambda);
        }

        preds.push(pred);
        targets.push(*post);
    }

    let mse = mse_loss(&preds, &targets);
    let momentum = momentum_penalty(&preds, &targets);
    Ok(LossGradient {
        mse,
        momentum,
        loss: mse + alpha * momentum,
        grad,
    })
}
