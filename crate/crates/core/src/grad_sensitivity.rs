//! Reference gradient engine: forward sensitivity recursions per parameter.
//!
//! For one scalar parameter θ (a weight or bias of layer ℓ), define at every
//! neuron j of a layer m ≥ ℓ the two sensitivities
//!
//! ```text
//! P_j⁽ᵐ⁾ = ∂a_j⁽ᵐ⁾/∂θ        Q_j⁽ᵐ⁾ = ∂ȧ_j⁽ᵐ⁾/∂θ
//! ```
//!
//! Because ȧ = φ′(z)·ż and θ affects both factors, Q carries a product-rule
//! term with the second derivative φ″ — even though the ODE is first order.
//!
//! At the parameter's own layer only its neuron i is live:
//!
//! ```text
//! weight (i,j):  P_i = φ′(z_i⁽ℓ⁾)·a_j⁽ℓ⁻¹⁾
//!                Q_i = φ″(z_i⁽ℓ⁾)·a_j⁽ℓ⁻¹⁾·ż_i⁽ℓ⁾ + φ′(z_i⁽ℓ⁾)·ȧ_j⁽ℓ⁻¹⁾
//! bias (i):      same with a_j⁽ℓ⁻¹⁾ → 1 and ȧ_j⁽ℓ⁻¹⁾ → 0
//! ```
//!
//! Subsequent hidden layers m propagate both vectors:
//!
//! ```text
//! P_j⁽ᵐ⁾ = φ′(z_j⁽ᵐ⁾)·Σ_k W_j,k⁽ᵐ⁾ P_k⁽ᵐ⁻¹⁾
//! Q_j⁽ᵐ⁾ = φ″(z_j⁽ᵐ⁾)·(Σ_k W_j,k⁽ᵐ⁾ P_k⁽ᵐ⁻¹⁾)·ż_j⁽ᵐ⁾ + φ′(z_j⁽ᵐ⁾)·Σ_k W_j,k⁽ᵐ⁾ Q_k⁽ᵐ⁻¹⁾
//! ```
//!
//! and the identity output layer reads out ∂ŷ/∂θ = Σ_j W⁽ᴸ⁾₁,j P_j and
//! ∂ŷ′/∂θ = Σ_j W⁽ᴸ⁾₁,j Q_j. For a parameter of the output layer itself the
//! initialization already *is* the read-out (identity activation collapses
//! the recursion).
//!
//! The engine runs one P/Q sweep per parameter per evaluation point —
//! O(#params) forward sweeps. That is perfectly affordable at desk scale
//! and is the most literal transcription of the recursions, which is this
//! module's job: it is the reference the vectorized adjoint engine is
//! checked against. Index convention: names like `W2[1,2]` in comments use
//! 1-based math notation; code indices are 0-based (`layers[1].weights[0][1]`).

use crate::dual::{forward_dual, DualTrace};
use crate::error::{Error, Result};
use crate::loss::{residual, Problem};
use crate::net::{Gradients, MlpParams, ParamKind};

/// P/Q sensitivity vectors of one layer for one tracked parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityState {
    /// Layer the vectors currently describe.
    pub layer: usize,
    /// P_j = ∂a_j/∂θ per neuron.
    pub p: Vec<f64>,
    /// Q_j = ∂ȧ_j/∂θ per neuron.
    pub q: Vec<f64>,
}

/// Seeds the recursion at the tracked parameter's own layer.
///
/// All entries are zero except the parameter's neuron (see module docs for
/// the formulas). On the output layer the identity activation makes the
/// seed the read-out itself: P_i = a_j⁽ᴸ⁻¹⁾ (or 1 for a bias), Q_i = ȧ_j⁽ᴸ⁻¹⁾
/// (or 0).
pub fn init_sensitivity(trace: &DualTrace, layer: usize, kind: ParamKind) -> Result<SensitivityState> {
    let n_layers = trace.layers.len();
    if layer >= n_layers {
        return Err(Error::InvalidArgument(format!(
            "layer index {layer} out of range for a {n_layers}-layer trace"
        )));
    }
    let width = trace.layers[layer].z.len();
    let (a_prev, ad_prev) = trace.inputs_to(layer);
    let (row, a_j, ad_j) = match kind {
        ParamKind::Weight { row, col } => {
            if col >= a_prev.len() {
                return Err(Error::InvalidArgument(format!(
                    "weight column {col} out of range for layer {layer} (fan-in {})",
                    a_prev.len()
                )));
            }
            (row, a_prev[col], ad_prev[col])
        }
        ParamKind::Bias { row } => (row, 1.0, 0.0),
    };
    if row >= width {
        return Err(Error::InvalidArgument(format!(
            "neuron index {row} out of range for layer {layer} (width {width})"
        )));
    }

    let mut p = vec![0.0; width];
    let mut q = vec![0.0; width];
    if layer == n_layers - 1 {
        // Identity output layer: ∂a/∂θ = ∂z/∂θ directly.
        p[row] = a_j;
        q[row] = ad_j;
    } else {
        let rec = &trace.layers[layer];
        let (phi1, phi2) = trace.activation.derivatives_from_phi(rec.a[row]);
        p[row] = phi1 * a_j;
        q[row] = phi2 * a_j * rec.z_dot[row] + phi1 * ad_j;
    }
    Ok(SensitivityState { layer, p, q })
}

/// Advances a sensitivity state through hidden layer `m` (one layer at a
/// time; `m` must be the state's layer plus one and must not be the output
/// layer — the read-out happens in [`output_sensitivity`]).
pub fn propagate_sensitivity(
    state: &SensitivityState,
    trace: &DualTrace,
    params: &MlpParams,
    m: usize,
) -> Result<SensitivityState> {
    let n_layers = trace.layers.len();
    if m != state.layer + 1 {
        return Err(Error::InvalidArgument(format!(
            "propagation must advance layer by layer: state is at {}, requested {m}",
            state.layer
        )));
    }
    if m >= n_layers - 1 {
        return Err(Error::InvalidArgument(format!(
            "layer {m} is the output layer; apply output_sensitivity instead"
        )));
    }
    let rec = &trace.layers[m];
    let weights = &params.layers[m].weights;
    let width = rec.z.len();
    let mut p = Vec::with_capacity(width);
    let mut q = Vec::with_capacity(width);
    for ((row, &a_j), &z_dot_j) in weights.iter().zip(&rec.a).zip(&rec.z_dot) {
        let mut sum_p = 0.0;
        let mut sum_q = 0.0;
        for (k, w) in row.iter().enumerate() {
            sum_p += w * state.p[k];
            sum_q += w * state.q[k];
        }
        let (phi1, phi2) = trace.activation.derivatives_from_phi(a_j);
        p.push(phi1 * sum_p);
        // Product rule: the parameter moves both φ′(z_j) (through z_j, hence
        // the φ″·ż term weighted by the P-path) and ż_j (the Q-path).
        q.push(phi2 * sum_p * z_dot_j + phi1 * sum_q);
    }
    Ok(SensitivityState { layer: m, p, q })
}

/// Reads a state at the last hidden layer out through the identity output
/// layer: `(∂ŷ/∂θ, ∂ŷ′/∂θ)`.
///
/// # Panics
/// If the state does not sit at the last hidden layer.
pub fn output_sensitivity(state: &SensitivityState, params: &MlpParams) -> (f64, f64) {
    let last = params.n_layers() - 1;
    assert!(
        state.layer + 1 == last,
        "output read-out needs a state at the last hidden layer ({}), got {}",
        last - 1,
        state.layer
    );
    let w_out = &params.layers[last].weights[0];
    let mut dy = 0.0;
    let mut dy_dot = 0.0;
    for (j, w) in w_out.iter().enumerate() {
        dy += w * state.p[j];
        dy_dot += w * state.q[j];
    }
    (dy, dy_dot)
}

/// `(∂ŷ/∂θ, ∂ŷ′/∂θ)` at one evaluation point for one parameter: seed,
/// propagate through the remaining hidden layers, read out.
pub fn param_sensitivity(
    trace: &DualTrace,
    params: &MlpParams,
    layer: usize,
    kind: ParamKind,
) -> Result<(f64, f64)> {
    let n_layers = params.n_layers();
    let mut state = init_sensitivity(trace, layer, kind)?;
    if layer == n_layers - 1 {
        // Output-layer parameters: the seed is already the read-out, and the
        // output width is 1.
        return Ok((state.p[0], state.q[0]));
    }
    for m in layer + 1..n_layers - 1 {
        state = propagate_sensitivity(&state, trace, params, m)?;
    }
    Ok(output_sensitivity(&state, params))
}

/// Full loss gradient via per-parameter sensitivity sweeps:
///
/// ```text
/// ∂L/∂θ = Σ_i (2/N_c)·R(t_i)·(∂ŷ/∂θ + ∂ŷ′/∂θ)│t_i
///       + λ·2·(ŷ(t_ic) − y_ic)·(∂ŷ/∂θ)│t_ic
/// ```
///
/// The initial-condition term involves only ∂ŷ/∂θ — it contributes through
/// P alone. Accumulation order is deterministic: parameters in canonical
/// flat order, residual points in index order, the IC term last.
pub fn gradient_full(params: &MlpParams, problem: &Problem) -> Gradients {
    let traces: Vec<DualTrace> = problem
        .collocation
        .iter()
        .map(|&t| forward_dual(params, t))
        .collect();
    let residuals: Vec<f64> = traces.iter().map(residual).collect();
    let n_c = traces.len() as f64;
    let ic_trace = forward_dual(params, problem.t_ic);
    let ic_weight = problem.lambda * 2.0 * (ic_trace.y_hat - problem.y_ic);

    let mut grads = Gradients::zeros(params);
    for (layer, kind) in params.param_ids() {
        let mut g = 0.0;
        for (trace, r) in traces.iter().zip(&residuals) {
            let (dy, dy_dot) = param_sensitivity(trace, params, layer, kind)
                .expect("parameter addresses from param_ids are in range");
            g += (2.0 / n_c) * r * (dy + dy_dot);
        }
        let (dy0, _) = param_sensitivity(&ic_trace, params, layer, kind)
            .expect("parameter addresses from param_ids are in range");
        g += ic_weight * dy0;
        grads.set(layer, kind, g);
    }
    grads
}
