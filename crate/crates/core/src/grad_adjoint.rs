//! Production gradient engine: one reverse sweep per evaluation point.
//!
//! # From per-parameter recursions to a single reverse pass
//!
//! The forward sensitivity engine ([`crate::grad_sensitivity`]) pushes a
//! pair (P, Q) = (∂a/∂θ, ∂ȧ/∂θ) through the layers once *per parameter*.
//! Both propagation rules are linear in (P, Q):
//!
//! ```text
//! ⎡P⁽ᵐ⁾⎤   ⎡ diag(φ′) W⁽ᵐ⁾              0          ⎤ ⎡P⁽ᵐ⁻¹⁾⎤
//! ⎢    ⎥ = ⎢                                       ⎥ ⎢      ⎥
//! ⎣Q⁽ᵐ⁾⎦   ⎣ diag(φ″⊙ż) W⁽ᵐ⁾      diag(φ′) W⁽ᵐ⁾   ⎦ ⎣Q⁽ᵐ⁻¹⁾⎦
//! ```
//!
//! and every loss term is a scalar function of the read-out (ŷ, ŷ′) at one
//! point, so each parameter's contribution has the form
//! w_y·∂ŷ/∂θ + w_ẏ·∂ŷ′/∂θ with point weights (w_y, w_ẏ) shared by *all*
//! parameters. Pushing 22 seed vectors forward through the same linear maps
//! and then dotting each result with the same weights is equivalent to
//! pulling the single weight pair backward through the **transposed** maps
//! and dotting it with each seed where the parameter lives. One reverse
//! sweep therefore yields every entry of the gradient at once.
//!
//! Writing `ā_k = ∂G/∂a_k` and `ā̇_k = ∂G/∂ȧ_k` for the scalar
//! G = w_y·ŷ + w_ẏ·ŷ′, the transposed recursions are, per layer from the
//! output down:
//!
//! ```text
//! output (identity, width 1):
//!   z̄ = w_y          z̄̇ = w_ẏ
//! hidden layer ℓ:
//!   z̄_j  = ā_j·φ′(z_j) + ā̇_j·φ″(z_j)·ż_j
//!   z̄̇_j = ā̇_j·φ′(z_j)
//! accumulation (both cases, inputs a⁽ℓ⁻¹⁾/ȧ⁽ℓ⁻¹⁾ from the stored trace):
//!   ∂G/∂W_j,k += z̄_j·a_k⁽ℓ⁻¹⁾ + z̄̇_j·ȧ_k⁽ℓ⁻¹⁾
//!   ∂G/∂b_j   += z̄_j                       (ż has no bias term)
//! pull-back to the previous layer:
//!   ā_k⁽ℓ⁻¹⁾  = Σ_j W_j,k·z̄_j      ā̇_k⁽ℓ⁻¹⁾ = Σ_j W_j,k·z̄̇_j
//! ```
//!
//! Each forward term maps to exactly one reverse term under transposition:
//! the φ″⊙ż product-rule block that feeds P into Q on the way forward is
//! the block that feeds ā̇ into z̄ on the way back, and the weight-matrix
//! products swap their index roles (row sums become column sums).
//!
//! The point weights are read off the loss: a collocation point t_i of the
//! mean squared residual contributes w_y = w_ẏ = (2/N_c)·R(t_i) (the
//! residual ŷ′ + ŷ moves with both read-outs), and the initial-condition
//! term contributes w_y = λ·2·(ŷ(t_ic) − y_ic), w_ẏ = 0.
//!
//! Cost: one dual forward pass plus one reverse sweep per point —
//! independent of the parameter count, which is the entire payoff over the
//! forward engine. Both engines consume the same stored trace and the same
//! `derivatives_from_phi` values, so they agree to accumulation rounding.

use crate::dual::{forward_dual, DualTrace};
use crate::loss::{residual, Problem};
use crate::net::{Gradients, MlpParams};

/// Cotangents of one layer's activations during a reverse sweep:
/// `bar_a[k] = ∂G/∂a_k`, `bar_a_dot[k] = ∂G/∂ȧ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointState {
    pub bar_a: Vec<f64>,
    pub bar_a_dot: Vec<f64>,
}

/// Work counter for a reverse sweep, used to check the advertised scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepStats {
    /// Number of layer visits — depends on depth only, never on width or
    /// parameter count.
    pub layer_ops: usize,
}

/// Runs one reverse sweep for the scalar G = `w_y`·ŷ + `w_y_dot`·ŷ′ and
/// **adds** ∂G/∂θ into `grads` for every parameter θ.
pub fn reverse_sweep(
    trace: &DualTrace,
    params: &MlpParams,
    w_y: f64,
    w_y_dot: f64,
    grads: &mut Gradients,
) -> SweepStats {
    let last = params.n_layers() - 1;
    let mut layer_ops = 0;

    // Output layer: identity activation and width 1, so the z-cotangents
    // are the point weights themselves.
    let (a_prev, ad_prev) = trace.inputs_to(last);
    let w_out = &params.layers[last].weights[0];
    for (k, g) in grads.layers[last].d_weights[0].iter_mut().enumerate() {
        *g += w_y * a_prev[k] + w_y_dot * ad_prev[k];
    }
    grads.layers[last].d_biases[0] += w_y;
    let mut state = AdjointState {
        bar_a: w_out.iter().map(|w| w * w_y).collect(),
        bar_a_dot: w_out.iter().map(|w| w * w_y_dot).collect(),
    };
    layer_ops += 1;

    // Hidden layers, top down.
    for l in (0..last).rev() {
        let rec = &trace.layers[l];
        let (a_prev, ad_prev) = trace.inputs_to(l);
        let width = rec.z.len();

        let mut bar_z = Vec::with_capacity(width);
        let mut bar_z_dot = Vec::with_capacity(width);
        for j in 0..width {
            let (phi1, phi2) = trace.activation.derivatives_from_phi(rec.a[j]);
            bar_z.push(state.bar_a[j] * phi1 + state.bar_a_dot[j] * phi2 * rec.z_dot[j]);
            bar_z_dot.push(state.bar_a_dot[j] * phi1);
        }

        let g = &mut grads.layers[l];
        for j in 0..width {
            for (k, gw) in g.d_weights[j].iter_mut().enumerate() {
                *gw += bar_z[j] * a_prev[k] + bar_z_dot[j] * ad_prev[k];
            }
            g.d_biases[j] += bar_z[j];
        }

        if l > 0 {
            let fan_in = a_prev.len();
            let weights = &params.layers[l].weights;
            let mut bar_a = vec![0.0; fan_in];
            let mut bar_a_dot = vec![0.0; fan_in];
            for j in 0..width {
                for k in 0..fan_in {
                    bar_a[k] += weights[j][k] * bar_z[j];
                    bar_a_dot[k] += weights[j][k] * bar_z_dot[j];
                }
            }
            state = AdjointState { bar_a, bar_a_dot };
        }
        layer_ops += 1;
    }
    SweepStats { layer_ops }
}

/// Full loss gradient via reverse sweeps: one per collocation point in index
/// order, then one for the initial-condition term. Matches
/// [`crate::grad_sensitivity::gradient_full`] to accumulation rounding.
pub fn gradient_adjoint(params: &MlpParams, problem: &Problem) -> Gradients {
    let mut grads = Gradients::zeros(params);
    let n_c = problem.n_collocation() as f64;
    for &t in &problem.collocation {
        let trace = forward_dual(params, t);
        let w = 2.0 * residual(&trace) / n_c;
        reverse_sweep(&trace, params, w, w, &mut grads);
    }
    let ic_trace = forward_dual(params, problem.t_ic);
    let w_ic = problem.lambda * 2.0 * (ic_trace.y_hat - problem.y_ic);
    reverse_sweep(&ic_trace, params, w_ic, 0.0, &mut grads);
    grads
}
