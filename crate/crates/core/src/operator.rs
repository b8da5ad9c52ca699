//! The game operator `L h(i) = inf_mu sup_nu sum_{a,b,j} e^{theta c(i,a,b)}
//! h(j) P(j|i,a,b) mu(a) nu(b)` and its fixed-policy counterpart.
//!
//! Repeated application grows like `lambda^n`, so [`ValueFunction`] keeps a
//! normalized vector (max entry 1) plus an accumulated log scale. `L` is
//! positively homogeneous, so the split is exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_game::{solve_matrix_game, MatrixGameSolution, PayoffMatrix};
use crate::model::{GameModel, Player};
use crate::policy::StationaryPolicy;

/// Nonnegative function on states, represented as `exp(log_scale) * values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueFunction {
    values: Vec<f64>,
    log_scale: f64,
}

impl ValueFunction {
    pub fn ones(n: usize) -> Self {
        ValueFunction {
            values: vec![1.0; n],
            log_scale: 0.0,
        }
    }

    pub fn new(values: Vec<f64>, log_scale: f64) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Input(
                "value function entries must be finite and nonnegative".into(),
            ));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::Input("value function is identically zero".into()));
        }
        if !log_scale.is_finite() {
            return Err(Error::Input("log scale must be finite".into()));
        }
        Ok(ValueFunction { values, log_scale })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 0.0)
    }

    /// Divides by the largest entry and folds it into the log scale.
    pub fn normalized(mut self) -> Self {
        let max = self.max_value();
        if max > 0.0 && max != 1.0 {
            for v in &mut self.values {
                *v /= max;
            }
            self.log_scale += max.ln();
        }
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `ln` of the represented function at each state (`-inf` where zero).
    pub fn log_values(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| v.ln() + self.log_scale)
            .collect()
    }

    /// The represented function; may overflow for large log scales.
    pub fn represented(&self) -> Vec<f64> {
        let s = self.log_scale.exp();
        self.values.iter().map(|v| v * s).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorPair {
    pub phi: StationaryPolicy,
    pub psi: StationaryPolicy,
}

impl SelectorPair {
    pub fn check_admissible(&self, model: &GameModel) -> Result<()> {
        self.phi.check_admissible(model, Player::Minimizer)?;
        self.psi.check_admissible(model, Player::Maximizer)
    }
}

/// Local game at state `i`: `entry(a, b) = e^{theta c(i,a,b)} sum_j h(j) P(j|i,a,b)`
/// on the stored (normalized) values of `h`.
pub fn local_payoff_matrix(model: &GameModel, h: &ValueFunction, i: usize) -> PayoffMatrix {
    payoff_matrix_raw(model, h.values(), i)
}

pub(crate) fn payoff_matrix_raw(model: &GameModel, h: &[f64], i: usize) -> PayoffMatrix {
    let s = model.state(i);
    let theta = model.theta;
    PayoffMatrix::from_fn(s.n_a(), s.n_b(), |a, b| {
        let expected: f64 = s.transition[a][b].iter().zip(h).map(|(p, v)| p * v).sum();
        (theta * s.cost[a][b]).exp() * expected
    })
    .expect("valid model yields a finite payoff matrix")
}

/// Solves every local game on raw values `h`; returns `L h` and each state's
/// matrix-game solution.
pub(crate) fn apply_raw(
    model: &GameModel,
    h: &[f64],
) -> Result<(Vec<f64>, Vec<MatrixGameSolution>)> {
    let mut out = Vec::with_capacity(model.n_states());
    let mut sols = Vec::with_capacity(model.n_states());
    for i in 0..model.n_states() {
        let m = payoff_matrix_raw(model, h, i);
        let sol = solve_matrix_game(&m).map_err(|e| match e {
            Error::SolverFailure { reason, matrix, .. } => Error::SolverFailure {
                state: Some(i),
                reason,
                matrix,
            },
            other => other,
        })?;
        out.push(sol.value);
        sols.push(sol);
    }
    Ok((out, sols))
}

pub(crate) fn selectors_from(sols: Vec<MatrixGameSolution>) -> SelectorPair {
    let (phi, psi): (Vec<_>, Vec<_>) = sols
        .into_iter()
        .map(|s| (s.row_strategy, s.col_strategy))
        .unzip();
    SelectorPair {
        phi: StationaryPolicy::new(phi),
        psi: StationaryPolicy::new(psi),
    }
}

/// One application of `L`, renormalized, with a mini-max selector of `h`.
pub fn apply_operator(
    model: &GameModel,
    h: &ValueFunction,
) -> Result<(ValueFunction, SelectorPair)> {
    let (values, sols) = apply_raw(model, h.values())?;
    let next = ValueFunction::new(values, h.log_scale())?.normalized();
    Ok((next, selectors_from(sols)))
}

/// `L^k h`, selectors discarded.
pub fn apply_operator_pow(model: &GameModel, h: &ValueFunction, k: u64) -> Result<ValueFunction> {
    let mut cur = h.clone();
    for _ in 0..k {
        cur = apply_operator(model, &cur)?.0;
    }
    Ok(cur)
}

/// `L^{mu,nu} h` with `(mu, nu)` drawn from a stationary pair.
pub fn apply_policy_operator(
    model: &GameModel,
    h: &ValueFunction,
    pair: &SelectorPair,
) -> Result<ValueFunction> {
    pair.check_admissible(model)?;
    let values = (0..model.n_states())
        .map(|i| {
            let m = local_payoff_matrix(model, h, i);
            m.mixed_payoff(pair.phi.at(i), pair.psi.at(i))
        })
        .collect();
    Ok(ValueFunction::new(values, h.log_scale())?.normalized())
}
