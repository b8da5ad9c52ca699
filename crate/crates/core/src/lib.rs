//! Zero-sum stochastic games under the risk-sensitive average cost criterion.
//!
//! Player 1 (the minimizer, actions `A(i)`) and player 2 (the maximizer,
//! actions `B(i)`) play on a finite state space. The pay-off of a pair of
//! strategies from state `i` is
//! `J = limsup (theta n)^{-1} ln E_i[exp(theta sum_{k<n} c(X_k, A_k, B_k))]`.
//!
//! The crate provides the model and its validation, the local matrix-game
//! solver, the game operator, the irreducibility coefficient, a doubling
//! value iteration, an epsilon-saddle-point construction and independent
//! verification tools (spectral radius, best responses, Monte Carlo).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod generate;
pub mod irreducibility;
pub mod matrix_game;
pub mod model;
pub mod operator;
pub mod policy;
pub mod report;
pub mod saddle;
mod serde_float;
pub mod smartgrid;
pub mod value_iteration;
pub mod verification;

pub use error::{Error, Result};
pub use irreducibility::{analyze, gamma_bruteforce, IrreducibilityReport};
pub use matrix_game::{solve_matrix_game, MatrixGameSolution, PayoffMatrix};
pub use model::{GameModel, Player, StateData, ValidationReport};
pub use operator::{apply_operator, SelectorPair, ValueFunction};
pub use policy::{PolicyFile, StationaryPolicy};
pub use saddle::{compute_saddle, SaddleResult, ThetaAdmissibility};
pub use smartgrid::{build_smartgrid, SmartGridParams};
pub use value_iteration::{approximate_value, sandwich_certificate, ValueApproxResult};
pub use verification::{
    best_response, simulate_cost, stationary_value, verify_saddle, SaddleCertificate,
};
