//! Periodic solutions of delayed semilinear evolution systems
//! `u'(t) + A u(t) = F(t, u(t), u(t - tau))` by monotone iteration.
//!
//! The state space is `R^n` with the componentwise order. Starting from a
//! lower solution `v0` and an upper solution `w0` with `v0 <= w0`, the solver
//! runs the twin fixed-point iteration `v_i = Q v_{i-1}`, `w_i = Q w_{i-1}`,
//! where `Q` composes the periodic forced-response map of the shifted linear
//! system with the (shifted) nonlinearity. When the one-sided monotonicity
//! hypothesis on `F` holds, the sequences squeeze monotonically onto the
//! minimal and maximal periodic solutions between `v0` and `w0`; a
//! contraction certificate additionally guarantees uniqueness.
//!
//! Modules:
//! - [`order`]: componentwise cone order on `R^n`.
//! - [`semigroup`]: generator analysis and `exp(-t(A + C I))` evaluation.
//! - [`grid`]: periodic grid functions (uniform time grid, periodic indexing).
//! - [`periodic`]: the periodic forced-response operator and its residuals.
//! - [`solver`]: hypothesis checkers, the monotone iteration, certificates.
//! - [`problems`]: built-in problem families and independent oracles.
//! - [`cli`]: batch front-end (config parsing, runs, reports).

pub mod cli;
pub mod error;
pub mod grid;
pub mod order;
pub mod periodic;
pub mod problems;
pub mod semigroup;
pub mod solver;

pub use error::SolverError;
pub use grid::PeriodicGridFunction;
pub use order::ConeOrder;
pub use periodic::PeriodicOperator;
pub use semigroup::Generator;
pub use solver::{
    DelayedProblem, HypothesisConstants, IterationReport, SolveStatus, UniquenessCertificate,
};
