//! Non-Markovian quantum state diffusion for two qubits coupled to one common
//! Lorentzian bath.
//!
//! The crate is organised by stage of a simulation:
//!
//! - [`model`]: basis conventions, [`model::ModelParams`], the fixed
//!   two-qubit operators and the bath correlation function;
//! - [`noise`]: Ornstein–Uhlenbeck coloured noise with the bath correlation;
//! - [`coeffs`]: the time-dependent coefficients of the O-operator for the
//!   exact, zeroth-order and weak-coupling models;
//! - [`trajectory`]: the linear and nonlinear stochastic Schrödinger
//!   equations integrated on a single noise path;
//! - [`ensemble`]: parallel, thread-count independent ensemble averages of
//!   the reduced density matrix with standard errors;
//! - [`deterministic`]: the zeroth-order master equation, closed-form
//!   solutions and steady states used as oracles;
//! - [`metrics`]: Wootters concurrence and Uhlmann fidelity;
//! - [`cli`] and [`io`]: the `nmqsd` command-line front end, CSV tables and
//!   run manifests.
//!
//! Runnable examples live in `examples/`, one per capability:
//! `bath_noise`, `coefficient_tracks`, `weak_coupling`, `single_trajectory`,
//! `ensemble_rdm`, `fidelity_floor`, `analytic_solution`, `steady_state`,
//! `entanglement_generation`, `entanglement_metrics` and `cli_run`.
//!
//! ```
//! use nmqsd::coeffs::Model;
//! use nmqsd::ensemble::run_ensemble;
//! use nmqsd::model::{InitialState, ModelParams};
//!
//! let p = ModelParams::with_detuning(1.0, 1.0, 0.5, 1.0)?;
//! let psi0 = InitialState::Ten.state();
//! let est = run_ensemble(psi0, &p, Model::Zeroth, 32, 7, 0.01, 1.0, 10)?;
//! assert!(est.physicality().iter().all(|r| r.pass));
//! # Ok::<(), nmqsd::Error>(())
//! ```

// `!(x >= y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coeffs;
pub mod deterministic;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod noise;
mod ode;
pub mod trajectory;

pub use error::{Error, Result};
