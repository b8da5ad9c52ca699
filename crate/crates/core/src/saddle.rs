//! epsilon-saddle points.
//!
//! With `i*` the state whose worst-case avoidance probability is smallest and
//! `eta = 1 - max_i V^{i*}_{|E|}(i)`, the recursion
//! `U_0 = 1_{i*}`, `U_{n+1}(i*) = 1`, `U_{n+1}(i) = e^{-theta rho} L U_n(i)`
//! run for `N = k |E|` steps with a slightly pessimistic value estimate
//! `rho` ends close enough to the normalized eigenfunction of `L` that its
//! mini-max selectors are an epsilon-saddle point. `k` comes from a
//! contraction bound that needs `theta < -ln(1 - eta) / (|E| M_c)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irreducibility::{analyze, IrreducibilityReport};
use crate::model::GameModel;
use crate::operator::{apply_raw, selectors_from};
use crate::policy::StationaryPolicy;
use crate::value_iteration::{run_doubling, ValueApproxResult, ValueIterationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaAdmissibility {
    pub theta: f64,
    #[serde(with = "crate::serde_float")]
    pub theta_max: f64,
    pub admissible: bool,
}

impl ThetaAdmissibility {
    pub fn new(theta: f64, theta_max: f64) -> Self {
        ThetaAdmissibility {
            theta,
            theta_max,
            admissible: theta > 0.0 && theta < theta_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleResult {
    /// Value estimate used by the recursion, on the original cost scale.
    pub rho_eps: f64,
    pub phi_eps: StationaryPolicy,
    pub psi_eps: StationaryPolicy,
    pub i_star: usize,
    pub eta: f64,
    pub k_eps: u64,
    pub n_eps: u64,
    pub u_final: Vec<f64>,
    pub eps: f64,
    /// Accuracy requested from the inner value approximation, `eps / (2 n_eps)`.
    pub inner_eps: f64,
    pub constant_cost: bool,
    pub value: Option<ValueApproxResult>,
}

/// Least `k >= 1` strictly above the contraction bound; `1` when `eta = 1`.
pub fn compute_k_eps(eta: f64, theta: f64, e_size: usize, m_c: f64, eps: f64) -> Result<u64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Input(format!("eta must lie in (0, 1], got {eta}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Input(format!("eps must be positive, got {eps}")));
    }
    if eta == 1.0 {
        return Ok(1);
    }
    let spread = theta * e_size as f64 * m_c;
    let denom = spread + (1.0 - eta).ln();
    if !(theta > 0.0) || denom >= 0.0 {
        let theta_max = crate::irreducibility::theta_bound(eta, e_size, m_c);
        return Err(Error::InadmissibleTheta(ThetaAdmissibility::new(
            theta, theta_max,
        )));
    }
    let numer =
        eta.ln() + (1.0 - (1.0 - eta) * spread.exp()).ln() + (theta * eps / 2.0).exp_m1().ln()
            - 2.0 * spread;
    let ratio = numer / denom;
    if !ratio.is_finite() {
        return Err(Error::Input(format!(
            "contraction bound is not finite ({ratio})"
        )));
    }
    least_integer_above(ratio)
}

/// Least integer `k >= 1` with `k > ratio`.
fn least_integer_above(ratio: f64) -> Result<u64> {
    let k = ratio.floor() + 1.0;
    if k > u64::MAX as f64 / 2.0 {
        return Err(Error::Input(format!("iteration count {k} is too large")));
    }
    Ok(if k < 1.0 { 1 } else { k as u64 })
}

/// `U_{n_steps}` for the pinned recursion; `rho` must be on the same cost
/// scale as `model` (i.e. after shifting).
pub fn u_iteration(model: &GameModel, rho: f64, i_star: usize, n_steps: u64) -> Result<Vec<f64>> {
    let n = model.n_states();
    if i_star >= n {
        return Err(Error::Input(format!("i_star = {i_star} out of range")));
    }
    if !rho.is_finite() {
        return Err(Error::Input("rho must be finite".into()));
    }
    let discount = (-model.theta * rho).exp();
    let mut u = vec![0.0; n];
    u[i_star] = 1.0;
    for _ in 0..n_steps {
        let (lu, _) = apply_raw(model, &u)?;
        u = lu.into_iter().map(|v| discount * v).collect();
        u[i_star] = 1.0;
    }
    Ok(u)
}

/// Runs the whole pipeline and returns the selector pair of `U_{N}`.
pub fn compute_saddle(model: &GameModel, eps: f64) -> Result<SaddleResult> {
    compute_saddle_with(model, eps, &ValueIterationConfig::new(eps))
}

/// As [`compute_saddle`]; `cfg.eps` is ignored in favour of `eps / (2 N)` but
/// its iteration limits apply to the inner value approximation.
pub fn compute_saddle_with(
    model: &GameModel,
    eps: f64,
    cfg: &ValueIterationConfig,
) -> Result<SaddleResult> {
    model.ensure_valid()?;
    if !(eps > 0.0) {
        return Err(Error::Input(format!("eps must be positive, got {eps}")));
    }
    let report: IrreducibilityReport = analyze(model);
    if !report.irreducible {
        return Err(Error::Reducible {
            gamma: report.gamma,
        });
    }
    let (shifted, shift) = model.shift_costs();
    let n = model.n_states();

    if report.m_c == 0.0 {
        let (_, sols) = apply_raw(&shifted, &vec![1.0; n])?;
        let pair = selectors_from(sols);
        return Ok(SaddleResult {
            rho_eps: model.cost(0, 0, 0),
            phi_eps: pair.phi,
            psi_eps: pair.psi,
            i_star: report.i_star,
            eta: report.eta,
            k_eps: 1,
            n_eps: n as u64,
            u_final: vec![1.0; n],
            eps,
            inner_eps: 0.0,
            constant_cost: true,
            value: None,
        });
    }

    let adm = ThetaAdmissibility::new(model.theta, report.theta_max);
    if !adm.admissible {
        return Err(Error::InadmissibleTheta(adm));
    }
    let k_eps = compute_k_eps(report.eta, model.theta, n, report.m_c, eps)?;
    let n_eps = k_eps * n as u64;
    let inner_eps = eps / (2.0 * n_eps as f64);
    let inner_cfg = ValueIterationConfig {
        eps: inner_eps,
        ..*cfg
    };
    let value = run_doubling(&shifted, shift.shift, &inner_cfg)?;
    let rho_shifted = value.rho_tilde + shift.shift;

    let u = u_iteration(&shifted, rho_shifted, report.i_star, n_eps)?;
    let (_, sols) = apply_raw(&shifted, &u)?;
    let pair = selectors_from(sols);
    Ok(SaddleResult {
        rho_eps: value.rho_tilde,
        phi_eps: pair.phi,
        psi_eps: pair.psi,
        i_star: report.i_star,
        eta: report.eta,
        k_eps,
        n_eps,
        u_final: u,
        eps,
        inner_eps,
        constant_cost: false,
        value: Some(value),
    })
}
