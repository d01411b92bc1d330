//! Accuracy metrics of a trained network against the closed-form solution.
//!
//! The initial-value problem y′ + y = 0, y(0) = 1 has the exact solution
//! y(t) = e^(−t), so validation needs no reference data: the network is
//! evaluated on a dense uniform grid (denser than the training grid — 500
//! points against 30 in the default configuration) and compared to
//! [`exact_solution`] pointwise. All sums run in grid order so repeated
//! validations of the same checkpoint are bit-identical.

use serde::{Deserialize, Serialize};

use crate::dual::forward_dual;
use crate::error::{Error, Result};
use crate::net::MlpParams;
use crate::train::collocation_grid;

/// The closed-form solution e^(−t) of y′ + y = 0 with y(0) = 1.
pub fn exact_solution(t: f64) -> f64 {
    (-t).exp()
}

/// One row of the prediction-versus-solution table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseRow {
    pub t: f64,
    pub y_hat: f64,
    pub y_exact: f64,
    pub abs_err: f64,
}

/// Aggregate error metrics over the evaluation grid, plus a small pointwise
/// table at the quarter points of the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Mean squared error (1/n)·Σ (ŷ_i − y_i)².
    pub mse: f64,
    /// Relative L2 error √Σ(ŷ_i − y_i)² / √Σ y_i².
    pub rel_l2: f64,
    /// Largest absolute error on the grid ...
    pub max_abs_err: f64,
    /// ... and the grid point where it occurs (first one on ties).
    pub max_err_location: f64,
    /// Mean of the absolute errors.
    pub mean_abs_err: f64,
    /// Population standard deviation of the absolute errors.
    pub std_abs_err: f64,
    /// Predictions at t_min + q·(t_max − t_min) for q ∈ {0, ¼, ½, ¾, 1},
    /// evaluated directly at those points (not snapped to the grid).
    pub pointwise: Vec<PointwiseRow>,
}

fn predict(params: &MlpParams, t: f64) -> Result<f64> {
    let y_hat = forward_dual(params, t).y_hat;
    if !y_hat.is_finite() {
        return Err(Error::NonFinite {
            context: format!("prediction at t = {t}"),
        });
    }
    Ok(y_hat)
}

/// Evaluates `params` on an `n_eval`-point uniform grid over `domain`
/// (endpoints included, `n_eval` ≥ 2) and aggregates the error statistics.
pub fn validate(params: &MlpParams, n_eval: usize, domain: [f64; 2]) -> Result<Metrics> {
    if n_eval < 2 {
        return Err(Error::InvalidArgument(format!(
            "validation needs at least 2 evaluation points, got {n_eval}"
        )));
    }
    let grid = collocation_grid(n_eval, domain)?;

    let mut abs_errs = Vec::with_capacity(n_eval);
    let mut sum_sq_err = 0.0;
    let mut sum_sq_exact = 0.0;
    let mut sum_abs = 0.0;
    let mut max_abs_err = f64::NEG_INFINITY;
    let mut max_err_location = grid[0];
    for &t in &grid {
        let y_hat = predict(params, t)?;
        let y = exact_solution(t);
        let err = y_hat - y;
        sum_sq_err += err * err;
        sum_sq_exact += y * y;
        let abs = err.abs();
        sum_abs += abs;
        if abs > max_abs_err {
            max_abs_err = abs;
            max_err_location = t;
        }
        abs_errs.push(abs);
    }
    let n = n_eval as f64;
    let mean_abs_err = sum_abs / n;
    let var = abs_errs
        .iter()
        .map(|&e| (e - mean_abs_err) * (e - mean_abs_err))
        .sum::<f64>()
        / n;

    let [t_min, t_max] = domain;
    let mut pointwise = Vec::with_capacity(5);
    for q in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let t = t_min + q * (t_max - t_min);
        let y_hat = predict(params, t)?;
        let y_exact = exact_solution(t);
        pointwise.push(PointwiseRow {
            t,
            y_hat,
            y_exact,
            abs_err: (y_hat - y_exact).abs(),
        });
    }

    Ok(Metrics {
        mse: sum_sq_err / n,
        rel_l2: sum_sq_err.sqrt() / sum_sq_exact.sqrt(),
        max_abs_err,
        max_err_location,
        mean_abs_err,
        std_abs_err: var.sqrt(),
        pointwise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{reference_params, ActivationKind, LayerParams};
    use crate::train::TrainConfig;

    /// ŷ(t) = t: an identity-activation pass-through, handy because its
    /// error against e^(−t) is known in closed form.
    fn linear_net() -> MlpParams {
        MlpParams::new(
            ActivationKind::Identity,
            vec![
                LayerParams {
                    weights: vec![vec![1.0]],
                    biases: vec![0.0],
                },
                LayerParams {
                    weights: vec![vec![1.0]],
                    biases: vec![0.0],
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn exact_solution_is_the_decaying_exponential() {
        assert_eq!(exact_solution(0.0), 1.0);
        assert!((exact_solution(1.0) - 0.367879441171).abs() <= 1e-12);
        assert!((exact_solution(0.25) - 0.778800783071).abs() <= 1e-12);
        assert_eq!(exact_solution(0.5), (-0.5f64).exp());
    }

    #[test]
    fn aggregates_match_an_independent_recomputation() {
        let params = reference_params();
        let m = validate(&params, 101, [0.0, 1.0]).unwrap();

        let grid = collocation_grid(101, [0.0, 1.0]).unwrap();
        let errs: Vec<f64> = grid
            .iter()
            .map(|&t| forward_dual(&params, t).y_hat - exact_solution(t))
            .collect();
        let n = errs.len() as f64;
        let sum_sq: f64 = errs.iter().map(|e| e * e).sum();
        let sum_sq_exact: f64 = grid.iter().map(|&t| exact_solution(t).powi(2)).sum();
        let mean_abs: f64 = errs.iter().map(|e| e.abs()).sum::<f64>() / n;
        let var: f64 = errs.iter().map(|e| (e.abs() - mean_abs).powi(2)).sum::<f64>() / n;

        assert!((m.mse - sum_sq / n).abs() <= 1e-15);
        assert!((m.rel_l2 - (sum_sq / sum_sq_exact).sqrt()).abs() <= 1e-12);
        assert!((m.mean_abs_err - mean_abs).abs() <= 1e-15);
        assert!((m.std_abs_err - var.sqrt()).abs() <= 1e-15);
        // Identities tying the aggregates together.
        assert!((m.mse * n - m.rel_l2.powi(2) * sum_sq_exact).abs() <= 1e-10);
        assert!(m.max_abs_err >= m.mean_abs_err);
        assert!(m.std_abs_err <= m.max_abs_err);
    }

    #[test]
    fn max_error_location_is_reported() {
        // |t − e^(−t)| on [0, 1] peaks at the left edge (|−1| = 1).
        let m = validate(&linear_net(), 500, [0.0, 1.0]).unwrap();
        assert_eq!(m.max_err_location, 0.0);
        assert!((m.max_abs_err - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pointwise_rows_sit_at_the_quarter_points() {
        let params = reference_params();
        let m = validate(&params, 500, [0.0, 1.0]).unwrap();
        let ts: Vec<f64> = m.pointwise.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        for row in &m.pointwise {
            assert_eq!(row.y_exact, exact_solution(row.t));
            assert_eq!(row.y_hat, forward_dual(&params, row.t).y_hat);
            assert_eq!(row.abs_err, (row.y_hat - row.y_exact).abs());
        }
    }

    #[test]
    fn quarter_points_follow_the_domain() {
        let m = validate(&reference_params(), 50, [0.5, 2.5]).unwrap();
        let ts: Vec<f64> = m.pointwise.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![0.5, 1.0, 1.5, 2.0, 2.5]);
    }

    #[test]
    fn degenerate_requests_are_rejected() {
        let params = reference_params();
        assert!(validate(&params, 0, [0.0, 1.0]).is_err());
        assert!(validate(&params, 1, [0.0, 1.0]).is_err());
        assert!(validate(&params, 10, [1.0, 0.0]).is_err());
    }

    #[test]
    fn evaluation_grid_is_denser_than_the_training_grid() {
        // 500 evaluation points against 30 training points: the metrics
        // probe between collocation points rather than re-scoring them.
        assert!(500 > 2 * TrainConfig::default().n_collocation);
    }

    #[test]
    fn validation_is_deterministic() {
        let params = reference_params();
        let a = validate(&params, 500, [0.0, 1.0]).unwrap();
        let b = validate(&params, 500, [0.0, 1.0]).unwrap();
        assert_eq!(a, b);
    }
}
