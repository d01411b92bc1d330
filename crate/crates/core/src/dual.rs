//! Dual forward propagation: one pass computes both the prediction ŷ(t) and
//! its input derivative ŷ′(t).
//!
//! Alongside the usual layer quantities z (pre-activation) and a
//! (activation), each layer carries their derivatives with respect to the
//! scalar input t, written ż and ȧ. The input seeds the recursion with
//! a⁽⁰⁾ = t, ȧ⁽⁰⁾ = 1, and each layer advances both tracks:
//!
//! ```text
//! z⁽ℓ⁾ = W⁽ℓ⁾ a⁽ℓ⁻¹⁾ + b⁽ℓ⁾          ż⁽ℓ⁾ = W⁽ℓ⁾ ȧ⁽ℓ⁻¹⁾
//! a⁽ℓ⁾ = φ(z⁽ℓ⁾)                      ȧ⁽ℓ⁾ = φ′(z⁽ℓ⁾) ⊙ ż⁽ℓ⁾
//! ```
//!
//! (⊙ is the element-wise product; the output layer applies the identity,
//! so there a = z and ȧ = ż.) This is forward-mode tangent propagation with
//! tangent seed 1; no graph or tape is involved.
//!
//! Every layer's (z, ż, a, ȧ) is retained in the returned [`DualTrace`]
//! because the gradient engines consume all four vectors at every layer;
//! recomputing them would duplicate the forward pass.

use crate::error::{Error, Result};
use crate::net::{activation_eval, ActivationKind, MlpParams};

/// All quantities one layer produces during a dual forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct DualLayerRecord {
    /// Pre-activation z⁽ℓ⁾.
    pub z: Vec<f64>,
    /// Input derivative ż⁽ℓ⁾ of the pre-activation.
    pub z_dot: Vec<f64>,
    /// Activation a⁽ℓ⁾ (equals z on the output layer).
    pub a: Vec<f64>,
    /// Input derivative ȧ⁽ℓ⁾ of the activation (equals ż on the output layer).
    pub a_dot: Vec<f64>,
}

/// Complete record of one dual forward evaluation at a single input.
#[derive(Debug, Clone, PartialEq)]
pub struct DualTrace {
    /// The input the network was evaluated at.
    pub t: f64,
    /// Hidden activation the trace was produced with (needed to recompute
    /// φ′/φ″ from stored values).
    pub activation: ActivationKind,
    /// Per-layer records, input side first.
    pub layers: Vec<DualLayerRecord>,
    /// Network output ŷ(t); equals the last record's `a[0]`.
    pub y_hat: f64,
    /// Output derivative ŷ′(t); equals the last record's `a_dot[0]`.
    pub y_hat_dot: f64,
}

impl DualTrace {
    /// The activation pair feeding layer `layer`: the input seed
    /// `([t], [1])` for the first layer, the previous record's `(a, ȧ)`
    /// otherwise.
    pub fn inputs_to(&self, layer: usize) -> (Vec<f64>, Vec<f64>) {
        if layer == 0 {
            (vec![self.t], vec![1.0])
        } else {
            let prev = &self.layers[layer - 1];
            (prev.a.clone(), prev.a_dot.clone())
        }
    }
}

/// Runs one dual forward pass, returning the full trace.
///
/// Summation order is fixed (bias first, then weighted terms in input-index
/// order), so identical inputs give bit-identical traces.
///
/// # Panics
/// If `t` is not finite, or if `params` is internally inconsistent (which
/// cannot happen for values built through [`MlpParams::new`]).
pub fn forward_dual(params: &MlpParams, t: f64) -> DualTrace {
    assert!(t.is_finite(), "forward_dual requires a finite input, got {t}");
    let n_layers = params.n_layers();
    let mut layers = Vec::with_capacity(n_layers);
    let mut a_prev = vec![t];
    let mut ad_prev = vec![1.0];

    for (l, layer) in params.layers.iter().enumerate() {
        assert!(
            layer.n_in() == a_prev.len(),
            "layer {l} expects {} inputs, got {}",
            layer.n_in(),
            a_prev.len()
        );
        let n_out = layer.n_out();
        let mut z = Vec::with_capacity(n_out);
        let mut z_dot = Vec::with_capacity(n_out);
        for i in 0..n_out {
            let mut zi = layer.biases[i];
            let mut zdi = 0.0;
            for (j, w) in layer.weights[i].iter().enumerate() {
                zi += w * a_prev[j];
                zdi += w * ad_prev[j];
            }
            z.push(zi);
            z_dot.push(zdi);
        }
        let is_output = l == n_layers - 1;
        let (a, a_dot) = if is_output {
            (z.clone(), z_dot.clone())
        } else {
            let mut a = Vec::with_capacity(n_out);
            let mut a_dot = Vec::with_capacity(n_out);
            for i in 0..n_out {
                let ev = activation_eval(params.activation, z[i]);
                a.push(ev.phi);
                a_dot.push(ev.phi1 * z_dot[i]);
            }
            (a, a_dot)
        };
        a_prev = a.clone();
        ad_prev = a_dot.clone();
        layers.push(DualLayerRecord { z, z_dot, a, a_dot });
    }

    let last = layers.last().expect("validated params have >= 1 layer");
    let y_hat = last.a[0];
    let y_hat_dot = last.a_dot[0];
    DualTrace {
        t,
        activation: params.activation,
        layers,
        y_hat,
        y_hat_dot,
    }
}

/// Evaluates [`forward_dual`] at each point of `ts`, preserving order.
///
/// Errors on an empty input; each element equals the corresponding
/// single-point call.
pub fn forward_batch(params: &MlpParams, ts: &[f64]) -> Result<Vec<DualTrace>> {
    if ts.is_empty() {
        return Err(Error::InvalidArgument(
            "forward_batch requires at least one evaluation point".into(),
        ));
    }
    Ok(ts.iter().map(|&t| forward_dual(params, t)).collect())
}
