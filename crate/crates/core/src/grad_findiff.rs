//! Numerical gradient oracle: central finite differences on the total loss.
//!
//! For each parameter θ the derivative is estimated as
//!
//! ```text
//! ∂L/∂θ ≈ (L(θ + h) − L(θ − h)) / (2h)
//! ```
//!
//! with truncation error O(h²). This engine shares *no* code with the
//! analytic ones beyond the loss evaluation itself, which is what makes it
//! a useful referee: it cannot inherit a sign or indexing mistake from the
//! sensitivity recursions. The price is the usual step-size trade-off —
//! truncation error grows with h, subtractive cancellation grows as h
//! shrinks — so [`DEFAULT_H`] sits at the conventional sweet spot for
//! double precision and loss values of order one.

use crate::error::{Error, Result};
use crate::loss::{evaluate_loss, Problem};
use crate::net::{Gradients, MlpParams};

/// Default central-difference step.
pub const DEFAULT_H: f64 = 1e-6;

/// Central-difference gradient of the total loss, parameter by parameter in
/// canonical flat order. Rejects non-positive or non-finite `h`.
pub fn gradient_findiff(params: &MlpParams, problem: &Problem, h: f64) -> Result<Gradients> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive and finite, got {h}"
        )));
    }
    let mut grads = Gradients::zeros(params);
    for (layer, kind) in params.param_ids() {
        let base = params.get(layer, kind);
        let mut plus = params.clone();
        plus.set(layer, kind, base + h);
        let mut minus = params.clone();
        minus.set(layer, kind, base - h);
        let l_plus = evaluate_loss(&plus, problem).l_total;
        let l_minus = evaluate_loss(&minus, problem).l_total;
        grads.set(layer, kind, (l_plus - l_minus) / (2.0 * h));
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grad_sensitivity::gradient_full;
    use crate::net::reference_params;

    #[test]
    fn default_step_is_the_documented_one() {
        assert_eq!(DEFAULT_H, 1e-6);
    }

    #[test]
    fn worked_example_output_bias() {
        let g = gradient_findiff(&reference_params(), &Problem::worked_example(), DEFAULT_H)
            .unwrap();
        let d_b3_1 = g.layers[2].d_biases[0];
        // Full-precision target first: the analytic value of dL/db3[1].
        assert!((d_b3_1 - (-20.9615156508)).abs() <= 1e-6, "dL/db3[1] = {d_b3_1}");
        // The 4-decimal reference composes two rounded intermediates, one of
        // them scaled by lambda = 10, so it sits ~2.3e-3 away from the true
        // derivative; the band below covers that composition error.
        assert!((d_b3_1 - (-20.9638)).abs() <= 2.4e-3, "dL/db3[1] = {d_b3_1}");
    }

    #[test]
    fn rejects_bad_step_sizes() {
        let params = reference_params();
        let problem = Problem::worked_example();
        assert!(gradient_findiff(&params, &problem, 0.0).is_err());
        assert!(gradient_findiff(&params, &problem, -1e-6).is_err());
        assert!(gradient_findiff(&params, &problem, f64::NAN).is_err());
        assert!(gradient_findiff(&params, &problem, f64::INFINITY).is_err());
    }

    #[test]
    fn exact_for_quadratic_dependence_even_with_a_huge_step() {
        // The loss is exactly quadratic in the output bias (the residual and
        // the initial-condition error are both affine in it), so the central
        // difference is exact up to roundoff no matter the step.
        let params = reference_params();
        let problem = Problem::worked_example();
        let analytic = gradient_full(&params, &problem);
        let numeric = gradient_findiff(&params, &problem, 0.25).unwrap();
        let a = analytic.layers[2].d_biases[0];
        let n = numeric.layers[2].d_biases[0];
        assert!((a - n).abs() <= 1e-9, "analytic {a} vs h = 0.25 numeric {n}");
    }

    #[test]
    fn truncation_error_scales_quadratically_in_h() {
        // Halving h must shrink the (L1-aggregated) error against the
        // analytic gradient by ~4x; [3, 5] leaves room for roundoff.
        let params = reference_params();
        let problem = Problem::worked_example();
        let analytic = gradient_full(&params, &problem);
        let err_norm = |h: f64| {
            let g = gradient_findiff(&params, &problem, h).unwrap();
            params
                .param_ids()
                .into_iter()
                .map(|(l, k)| (g.get(l, k) - analytic.get(l, k)).abs())
                .sum::<f64>()
        };
        let ratio = err_norm(1e-4) / err_norm(5e-5);
        assert!((3.0..=5.0).contains(&ratio), "error ratio {ratio}");
    }

    #[test]
    fn agrees_with_the_analytic_engines_at_the_default_step() {
        let params = reference_params();
        let problem = Problem::worked_example();
        let analytic = gradient_full(&params, &problem);
        let numeric = gradient_findiff(&params, &problem, DEFAULT_H).unwrap();
        for (layer, kind) in params.param_ids() {
            let a = analytic.get(layer, kind);
            let n = numeric.get(layer, kind);
            assert!(
                (a - n).abs() <= 1e-5 * a.abs().max(1e-7),
                "layer {layer} {kind:?}: analytic {a} vs numeric {n}"
            );
        }
    }
}
