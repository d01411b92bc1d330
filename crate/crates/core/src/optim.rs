//! Optimizers: plain gradient descent and Adam.
//!
//! Both steps are pure functions from (parameters, gradient) to new
//! parameters; Adam additionally threads its moment estimates through an
//! explicit [`AdamState`] value instead of hiding them in the optimizer.
//! That keeps training loops trivially replayable: identical inputs produce
//! bit-identical outputs, with parameters updated in canonical flat order.

use crate::error::{Error, Result};
use crate::net::{Gradients, MlpParams};

/// Gradient-descent settings: θ ← θ − η·∂L/∂θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdConfig {
    /// Learning rate η. Zero is allowed (a no-op step is occasionally
    /// useful as a control), negative or non-finite values are not.
    pub eta: f64,
}

impl GdConfig {
    pub fn new(eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be finite and non-negative, got {eta}"
            )));
        }
        Ok(Self { eta })
    }
}

/// Adam moment estimates plus hyper-parameters.
///
/// The update with bias-corrected moments is
///
/// ```text
/// m ← β₁·m + (1 − β₁)·g          m̂ = m / (1 − β₁ᵗ)
/// v ← β₂·v + (1 − β₂)·g²         v̂ = v / (1 − β₂ᵗ)
/// θ ← θ − η·m̂ / (√v̂ + ε)
/// ```
///
/// with t the 1-based step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    /// First-moment estimate per parameter.
    pub m: Gradients,
    /// Second-moment estimate per parameter.
    pub v: Gradients,
    /// Completed steps (0 for a fresh state).
    pub step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub eta: f64,
}

impl AdamState {
    /// Fresh state with zero moments and the standard defaults
    /// β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
    pub fn new(params: &MlpParams, eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be finite and positive, got {eta}"
            )));
        }
        Ok(Self {
            m: Gradients::zeros(params),
            v: Gradients::zeros(params),
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            eta,
        })
    }
}

fn check_same_shape(params: &MlpParams, grads: &Gradients, what: &str) -> Result<()> {
    if grads.layers.len() != params.layers.len() {
        return Err(Error::Shape {
            layer: grads.layers.len().min(params.layers.len()),
            detail: format!(
                "{what} has {} layers, parameters have {}",
                grads.layers.len(),
                params.layers.len()
            ),
        });
    }
    for (l, (p, g)) in params.layers.iter().zip(&grads.layers).enumerate() {
        let weights_ok = g.d_weights.len() == p.weights.len()
            && g.d_weights.iter().zip(&p.weights).all(|(gr, pr)| gr.len() == pr.len());
        if !weights_ok || g.d_biases.len() != p.biases.len() {
            return Err(Error::Shape {
                layer: l,
                detail: format!("{what} entries do not match the parameter shapes"),
            });
        }
    }
    Ok(())
}

/// One gradient-descent step. Fails with a shape error if `grads` was built
/// for a different architecture.
pub fn gd_step(params: &MlpParams, grads: &Gradients, cfg: &GdConfig) -> Result<MlpParams> {
    check_same_shape(params, grads, "gradient")?;
    let mut out = params.clone();
    for (layer, kind) in params.param_ids() {
        let theta = out.get(layer, kind) - cfg.eta * grads.get(layer, kind);
        out.set(layer, kind, theta);
    }
    Ok(out)
}

/// One Adam step. Consumes the state and returns the advanced one alongside
/// the new parameters; βᵗ factors use integer exponentiation so replays are
/// bit-exact.
pub fn adam_step(
    params: &MlpParams,
    grads: &Gradients,
    mut state: AdamState,
) -> Result<(MlpParams, AdamState)> {
    check_same_shape(params, grads, "gradient")?;
    check_same_shape(params, &state.m, "first-moment state")?;
    check_same_shape(params, &state.v, "second-moment state")?;
    let t = state.step_count + 1;
    let bc1 = 1.0 - state.beta1.powi(t as i32);
    let bc2 = 1.0 - state.beta2.powi(t as i32);
    let mut out = params.clone();
    for (layer, kind) in params.param_ids() {
        let g = grads.get(layer, kind);
        let m = state.beta1 * state.m.get(layer, kind) + (1.0 - state.beta1) * g;
        let v = state.beta2 * state.v.get(layer, kind) + (1.0 - state.beta2) * g * g;
        state.m.set(layer, kind, m);
        state.v.set(layer, kind, v);
        let m_hat = m / bc1;
        let v_hat = v / bc2;
        let theta = out.get(layer, kind) - state.eta * m_hat / (v_hat.sqrt() + state.eps);
        out.set(layer, kind, theta);
    }
    state.step_count = t;
    Ok((out, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grad_sensitivity::gradient_full;
    use crate::loss::{evaluate_loss, Problem};
    use crate::net::{init_random, reference_params, SplitMix64};

    #[test]
    fn gd_reproduces_the_reference_update() {
        // W3[1,2] = -0.6 with eta = 0.01 steps to -0.5986 (4 decimals).
        let params = reference_params();
        let grads = gradient_full(&params, &Problem::worked_example());
        let next = gd_step(&params, &grads, &GdConfig::new(0.01).unwrap()).unwrap();
        let updated = next.layers[2].weights[0][1];
        assert!((updated - (-0.5986)).abs() <= 1e-4, "W3[1,2] -> {updated}");
        assert!((updated - (-0.5985580823365076)).abs() <= 1e-12);
    }

    #[test]
    fn gd_with_zero_gradient_or_zero_rate_is_identity() {
        let params = reference_params();
        let zero = Gradients::zeros(&params);
        let stepped = gd_step(&params, &zero, &GdConfig::new(0.5).unwrap()).unwrap();
        assert_eq!(stepped, params);

        let grads = gradient_full(&params, &Problem::worked_example());
        let frozen = gd_step(&params, &grads, &GdConfig::new(0.0).unwrap()).unwrap();
        assert_eq!(frozen, params);
    }

    #[test]
    fn gd_step_is_reversed_by_the_negated_gradient() {
        let params = reference_params();
        let grads = gradient_full(&params, &Problem::worked_example());
        let mut negated = Gradients::zeros(&params);
        for (layer, kind) in params.param_ids() {
            negated.set(layer, kind, -grads.get(layer, kind));
        }
        let cfg = GdConfig::new(0.02).unwrap();
        let there = gd_step(&params, &grads, &cfg).unwrap();
        let back = gd_step(&there, &negated, &cfg).unwrap();
        for (layer, kind) in params.param_ids() {
            assert!((back.get(layer, kind) - params.get(layer, kind)).abs() <= 1e-15);
        }
    }

    #[test]
    fn gd_decreases_the_loss_for_a_small_enough_rate() {
        let params = init_random(&[1, 3, 3, 1], 3).unwrap();
        let problem = Problem::new(vec![0.0, 0.5, 1.0], 10.0, 0.0, 1.0).unwrap();
        let before = evaluate_loss(&params, &problem).l_total;
        let grads = gradient_full(&params, &problem);
        let improved = [1e-2, 1e-3, 1e-4].iter().any(|&eta| {
            let next = gd_step(&params, &grads, &GdConfig::new(eta).unwrap()).unwrap();
            evaluate_loss(&next, &problem).l_total < before
        });
        assert!(improved, "no tested rate decreased the loss from {before}");
    }

    #[test]
    fn invalid_rates_are_rejected() {
        assert!(GdConfig::new(-0.1).is_err());
        assert!(GdConfig::new(f64::NAN).is_err());
        assert!(GdConfig::new(0.0).is_ok());
        let params = reference_params();
        assert!(AdamState::new(&params, 0.0).is_err());
        assert!(AdamState::new(&params, -1e-3).is_err());
        assert!(AdamState::new(&params, f64::INFINITY).is_err());
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let params = reference_params();
        let other = init_random(&[1, 2, 1], 1).unwrap();
        let wrong = Gradients::zeros(&other);
        assert!(matches!(
            gd_step(&params, &wrong, &GdConfig::new(0.1).unwrap()),
            Err(Error::Shape { .. })
        ));
        let state = AdamState::new(&params, 1e-3).unwrap();
        assert!(matches!(
            adam_step(&params, &wrong, state.clone()),
            Err(Error::Shape { .. })
        ));
        // A state built for a different net is caught too.
        let foreign = AdamState::new(&other, 1e-3).unwrap();
        let grads = Gradients::zeros(&params);
        assert!(matches!(
            adam_step(&params, &grads, foreign),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn adam_first_step_moves_by_roughly_eta_toward_minus_sign_of_g() {
        // With zero moments, m-hat = g and v-hat = g^2, so the first update
        // is -eta * g / (|g| + eps): eta times the negated sign, up to eps.
        let params = reference_params();
        let mut rng = SplitMix64::new(77);
        let mut grads = Gradients::zeros(&params);
        for (layer, kind) in params.param_ids() {
            let mut g = rng.next_uniform(2.0);
            if g.abs() < 1e-3 {
                g = 1e-3_f64.copysign(g + f64::MIN_POSITIVE);
            }
            grads.set(layer, kind, g);
        }
        let eta = 0.05;
        let state = AdamState::new(&params, eta).unwrap();
        let (next, state) = adam_step(&params, &grads, state).unwrap();
        assert_eq!(state.step_count, 1);
        for (layer, kind) in params.param_ids() {
            let delta = next.get(layer, kind) - params.get(layer, kind);
            let expected = -eta * grads.get(layer, kind).signum();
            assert!((delta - expected).abs() <= 1e-6, "delta {delta} vs {expected}");
            assert!(delta.abs() < eta, "first step must stay below eta");
        }
    }

    #[test]
    fn adam_with_zero_gradients_never_moves() {
        let params = reference_params();
        let zero = Gradients::zeros(&params);
        let mut state = AdamState::new(&params, 1e-3).unwrap();
        let mut current = params.clone();
        for _ in 0..5 {
            let (next, s) = adam_step(&current, &zero, state).unwrap();
            current = next;
            state = s;
        }
        assert_eq!(current, params);
        assert_eq!(state.step_count, 5);
    }

    #[test]
    fn adam_matches_the_quadratic_trajectory_oracle() {
        // Independently computed 10-step run on L = sum_k (theta_k - c_k)^2
        // over the 7 parameters of a (1, 2, 1) net: theta0_k = 0.5 - 0.05k,
        // c_k = 0.1k, gradient 2(theta_k - c_k), eta = 0.1.
        let expected = [
            -0.2033228261019803,
            -0.03372859510145074,
            0.2360675941207687,
            0.274857903407196,
            0.38086376151041174,
            0.5234662394111502,
            0.770452131702546,
        ];
        let mut params = init_random(&[1, 2, 1], 0).unwrap();
        let ids = params.param_ids();
        assert_eq!(ids.len(), 7);
        for (k, &(layer, kind)) in ids.iter().enumerate() {
            params.set(layer, kind, 0.5 - 0.05 * k as f64);
        }
        let eta = 0.1;
        let mut state = AdamState::new(&params, eta).unwrap();
        for _ in 0..10 {
            let mut grads = Gradients::zeros(&params);
            for (k, &(layer, kind)) in ids.iter().enumerate() {
                let c = 0.1 * k as f64;
                grads.set(layer, kind, 2.0 * (params.get(layer, kind) - c));
            }
            let before = params.clone();
            let (next, s) = adam_step(&params, &grads, state).unwrap();
            for &(layer, kind) in &ids {
                let step = (next.get(layer, kind) - before.get(layer, kind)).abs();
                assert!(step <= 10.0 * eta, "implausibly large Adam step {step}");
            }
            params = next;
            state = s;
        }
        assert_eq!(state.step_count, 10);
        for (k, &(layer, kind)) in ids.iter().enumerate() {
            assert!(
                (params.get(layer, kind) - expected[k]).abs() <= 1e-12,
                "parameter {k}: {} vs oracle {}",
                params.get(layer, kind),
                expected[k]
            );
        }
    }
}
