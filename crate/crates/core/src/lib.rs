//! Physics-informed training engine for the initial-value problem
//! y′(t) + y(t) = 0, y(0) = 1 on [0, 1], whose exact solution is e^(−t).
//!
//! A small tanh MLP ŷ(t; θ) is trained to satisfy the differential equation
//! itself: the loss penalizes the squared residual ŷ′ + ŷ on a collocation
//! grid plus a weighted initial-condition error, so no solution data enters
//! training. Everything — forward derivatives, two independent analytic
//! gradient engines, a finite-difference oracle, optimizers, training loop,
//! validation and artifact I/O — is implemented from first principles on
//! plain `f64`, with determinism as a design constraint: a seed fully
//! determines a run, bit for bit.
//!
//! Module map, roughly bottom-up:
//!
//! - [`net`]: parameter containers, activations, seeded initialization
//! - [`dual`]: forward pass carrying value and time-derivative together
//! - [`loss`]: residual + initial-condition composite loss
//! - [`grad_sensitivity`]: per-parameter forward-sensitivity gradients
//! - [`grad_adjoint`]: reverse-sweep gradients (the production engine)
//! - [`grad_findiff`]: central-difference gradient oracle
//! - [`optim`]: gradient descent and Adam
//! - [`train`]: configuration and the full-batch training loop
//! - [`validate`]: error metrics against the closed-form solution
//! - [`io`]: checkpoint / history / metrics / plot-data files
//! - [`verify`]: recomputation of the printed reference tables

pub mod dual;
pub mod error;
pub mod grad_adjoint;
pub mod grad_findiff;
pub mod grad_sensitivity;
pub mod io;
pub mod loss;
pub mod net;
pub mod optim;
pub mod train;
pub mod validate;
pub mod verify;

pub use error::{Error, Result};
