//! Doubling value iteration for the game value.
//!
//! With nonnegative costs, `h_0 = L 1` and `h_n = L^{2^{n-1}} h_{n-1}` give
//! `h_n = L^{2^n} 1`. The quantities `theta^{-1} ln max h_n / 2^n` and
//! `theta^{-1} ln min h_n / 2^n` are respectively nonincreasing and
//! nondecreasing in `n` and squeeze the value, so the run stops once they are
//! within `eps` of each other and reports the upper one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irreducibility::analyze;
use crate::model::GameModel;
use crate::operator::{apply_operator, ValueFunction};

pub const DEFAULT_MAX_OUTER: u32 = 30;
/// Default cap on the total number of operator applications.
pub const DEFAULT_MAX_APPLICATIONS: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueIterationConfig {
    pub eps: f64,
    pub max_outer: u32,
    pub max_applications: u64,
}

impl ValueIterationConfig {
    pub fn new(eps: f64) -> Self {
        ValueIterationConfig {
            eps,
            max_outer: DEFAULT_MAX_OUTER,
            max_applications: DEFAULT_MAX_APPLICATIONS,
        }
    }

    pub fn with_max_outer(mut self, max_outer: u32) -> Self {
        self.max_outer = max_outer;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueApproxResult {
    /// Upper estimate `theta^{-1} ln lambda_n`, on the original cost scale.
    pub rho_tilde: f64,
    /// `theta^{-1} ln lambda_n` for `n = 1, 2, ...` (original cost scale).
    #[serde(with = "crate::serde_float::vec")]
    pub lambda_trace: Vec<f64>,
    /// `theta^{-1} ln zeta_n` for `n = 1, 2, ...` (original cost scale).
    #[serde(with = "crate::serde_float::vec")]
    pub zeta_trace: Vec<f64>,
    pub n_outer: u32,
    pub applications: u64,
    pub eps: f64,
    pub shift: f64,
    pub converged: bool,
}

impl ValueApproxResult {
    pub fn gap(&self) -> f64 {
        match (self.lambda_trace.last(), self.zeta_trace.last()) {
            (Some(l), Some(z)) => l - z,
            _ => f64::INFINITY,
        }
    }
}

pub fn approximate_value(model: &GameModel, eps: f64, max_outer: u32) -> Result<ValueApproxResult> {
    approximate_value_with(
        model,
        &ValueIterationConfig::new(eps).with_max_outer(max_outer),
    )
}

pub fn approximate_value_with(
    model: &GameModel,
    cfg: &ValueIterationConfig,
) -> Result<ValueApproxResult> {
    model.ensure_valid()?;
    if !(cfg.eps > 0.0) {
        return Err(Error::Input(format!(
            "eps must be positive, got {}",
            cfg.eps
        )));
    }
    let report = analyze(model);
    if !report.irreducible {
        return Err(Error::Reducible {
            gamma: report.gamma,
        });
    }
    let (shifted, shift) = model.shift_costs();
    run_doubling(&shifted, shift.shift, cfg)
}

/// `model` must already have nonnegative costs; `shift` is subtracted from
/// every reported quantity.
pub(crate) fn run_doubling(
    model: &GameModel,
    shift: f64,
    cfg: &ValueIterationConfig,
) -> Result<ValueApproxResult> {
    let theta = model.theta;
    let mut h = apply_operator(model, &ValueFunction::ones(model.n_states()))?.0;
    let mut applications: u64 = 1;
    let mut result = ValueApproxResult {
        rho_tilde: f64::NAN,
        lambda_trace: Vec::new(),
        zeta_trace: Vec::new(),
        n_outer: 0,
        applications,
        eps: cfg.eps,
        shift,
        converged: false,
    };
    for n in 1..=cfg.max_outer {
        let steps = 1u64 << (n - 1);
        if applications + steps > cfg.max_applications {
            break;
        }
        for _ in 0..steps {
            h = apply_operator(model, &h)?.0;
        }
        applications += steps;
        let horizon = theta * (1u64 << n) as f64;
        // h is normalized so max(values) = 1
        let upper = (h.log_scale() + h.max_value().ln()) / horizon - shift;
        let lower = (h.log_scale() + h.min_value().ln()) / horizon - shift;
        result.lambda_trace.push(upper);
        result.zeta_trace.push(lower);
        result.n_outer = n;
        result.applications = applications;
        result.rho_tilde = upper;
        if upper - lower <= cfg.eps {
            result.converged = true;
            return Ok(result);
        }
    }
    Err(Error::NonConvergence(Box::new(result)))
}

/// `(lower, upper)` bracket of the value from a converged run.
pub fn sandwich_certificate(result: &ValueApproxResult) -> Result<(f64, f64)> {
    if !result.converged {
        return Err(Error::Input("value approximation did not converge".into()));
    }
    match (result.zeta_trace.last(), result.lambda_trace.last()) {
        (Some(&lo), Some(&hi)) => Ok((lo, hi)),
        _ => Err(Error::Input("empty value-iteration trace".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{markov_chain, single_state};

    #[test]
    fn single_state_value_is_its_cost() {
        for k in [-2.0, 0.0, 3.5] {
            let r = approximate_value(&single_state(0.3, k), 1e-6, 30).unwrap();
            assert_eq!(r.n_outer, 1);
            assert!((r.rho_tilde - k).abs() < 1e-12);
            let (lo, hi) = sandwich_certificate(&r).unwrap();
            assert!((lo - k).abs() < 1e-12 && (hi - k).abs() < 1e-12);
        }
    }

    #[test]
    fn huge_eps_still_runs_one_step() {
        let m = markov_chain(1.0, &[vec![0.5, 0.5], vec![0.5, 0.5]], &[0.0, 1.0]);
        let r = approximate_value(&m, 1e6, 30).unwrap();
        assert_eq!(r.n_outer, 1);
        assert_eq!(r.applications, 2);
    }

    #[test]
    fn reducible_rejected() {
        let m = markov_chain(1.0, &[vec![1.0, 0.0], vec![0.5, 0.5]], &[0.0, 1.0]);
        assert!(matches!(
            approximate_value(&m, 0.1, 30),
            Err(Error::Reducible { .. })
        ));
    }

    #[test]
    fn non_convergence_carries_trace() {
        let m = markov_chain(1.0, &[vec![0.9, 0.1], vec![0.1, 0.9]], &[0.0, 1.0]);
        match approximate_value(&m, 1e-9, 2) {
            Err(Error::NonConvergence(r)) => {
                assert_eq!(r.lambda_trace.len(), 2);
                assert!(!r.converged);
                assert!(sandwich_certificate(&r).is_err());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn periodic_chain_matches_cycle_mean() {
        let m = markov_chain(1.0, &[vec![0.0, 1.0], vec![1.0, 0.0]], &[0.0, 1.0]);
        let r = approximate_value(&m, 1e-4, 30).unwrap();
        assert!((r.rho_tilde - 0.5).abs() <= 1e-4 + 1e-12);
    }
}
