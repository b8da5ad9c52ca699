//! Energy-management game between a prosumer with storage (player 2) and the
//! rest of the market (player 1).
//!
//! The state is the storage level `0..=n_s`. Player 1 chooses the aggregate
//! demand `a` of the other prosumers; player 2 chooses a purchase `b_p` and a
//! consumption `b_c <= min(i + b_p, n_c)`. The next level is
//! `clamp(G + i + b_p - b_c, 0, n_s)` with `G` the effective generation, whose
//! integer cells `Q(k) = P(k <= G < k + 1)` come from a Gaussian. The stored
//! cost is the prosumer's payoff `R(b_c) - C(a, b_p)`, so player 2 maximizes
//! it and player 1 minimizes it.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::model::{GameModel, StateData};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmartGridParams {
    /// Storage capacity.
    pub n_s: u32,
    /// Maximum consumption per period.
    pub n_c: u32,
    /// Maximum purchase per period.
    pub n_p: u32,
    /// Maximum demand of the other prosumers.
    pub m: u32,
    pub gen_mean: f64,
    pub gen_std: f64,
    pub theta: f64,
}

impl Default for SmartGridParams {
    fn default() -> Self {
        SmartGridParams {
            n_s: 2,
            n_c: 3,
            n_p: 2,
            m: 2,
            gen_mean: 1.0,
            gen_std: 2.0,
            theta: 0.01,
        }
    }
}

fn normal_cdf(x: f64, mean: f64, std: f64) -> f64 {
    0.5 * erfc(-(x - mean) / (std * std::f64::consts::SQRT_2))
}

/// Mass of `Normal(mean, std^2)` on `[k, k + 1)`.
pub fn gaussian_cell(k: i64, mean: f64, std: f64) -> f64 {
    let lo = k as f64;
    // Subtract in the tail where the CDF is small to avoid cancellation.
    if lo + 0.5 > mean {
        let upper_tail = |x: f64| 0.5 * erfc((x - mean) / (std * std::f64::consts::SQRT_2));
        upper_tail(lo) - upper_tail(lo + 1.0)
    } else {
        normal_cdf(lo + 1.0, mean, std) - normal_cdf(lo, mean, std)
    }
}

/// Utility of consuming `b_c` units.
pub fn consumption_reward(b_c: u32) -> f64 {
    (b_c as f64 + 0.4).ln() - 0.4f64.ln()
}

/// Purchase cost of `b_p` units when the rest of the market buys `a`.
pub fn purchase_cost(a: u32, b_p: u32) -> f64 {
    let price = (a + b_p) as f64 / 10.0;
    let surcharge = if b_p > a { 0.25 } else { 0.0 };
    b_p as f64 * price + surcharge
}

/// Player-2 action set at storage level `i`, as `(b_p, b_c)` pairs in
/// lexicographic order.
pub fn prosumer_actions(params: &SmartGridParams, i: u32) -> Vec<(u32, u32)> {
    (0..=params.n_p)
        .flat_map(|b_p| (0..=(i + b_p).min(params.n_c)).map(move |b_c| (b_p, b_c)))
        .collect()
}

/// Distribution of the next storage level from `net = i + b_p - b_c`.
fn next_level_row(params: &SmartGridParams, net: i64) -> Vec<f64> {
    let n_s = params.n_s as i64;
    let (mu, sd) = (params.gen_mean, params.gen_std);
    if n_s == 0 {
        return vec![1.0];
    }
    let mut row = vec![0.0; n_s as usize + 1];
    // P(G + net <= 0) = P(G < 1 - net)
    row[0] = normal_cdf((1 - net) as f64, mu, sd);
    for j in 1..n_s {
        row[j as usize] = gaussian_cell(j - net, mu, sd);
    }
    let interior: f64 = row[..n_s as usize].iter().sum();
    row[n_s as usize] = 1.0 - interior;
    row
}

pub fn build_smartgrid(params: &SmartGridParams) -> Result<GameModel> {
    if params.n_c < 1 || params.n_p < 1 || params.m < 1 {
        return Err(Error::Input("n_c, n_p and m must be at least 1".into()));
    }
    if !(params.gen_std > 0.0) || !params.gen_std.is_finite() || !params.gen_mean.is_finite() {
        return Err(Error::Input(
            "generation std must be positive and finite".into(),
        ));
    }
    if !(params.theta > 0.0) || !params.theta.is_finite() {
        return Err(Error::Input("theta must be positive and finite".into()));
    }
    let lo = -(params.n_c as i64);
    let hi = params.n_s as i64;
    if let Some(k) = (lo..=hi).find(|&k| !(gaussian_cell(k, params.gen_mean, params.gen_std) > 0.0))
    {
        return Err(Error::Input(format!(
            "generation cell Q({k}) is zero; every cell in [{lo}, {hi}] must carry positive mass"
        )));
    }

    let actions_a: Vec<String> = (0..=params.m).map(|a| a.to_string()).collect();
    let states = (0..=params.n_s)
        .map(|i| {
            let pairs = prosumer_actions(params, i);
            let actions_b = pairs.iter().map(|(p, c)| format!("({p},{c})")).collect();
            let rows: Vec<Vec<f64>> = pairs
                .iter()
                .map(|&(b_p, b_c)| next_level_row(params, i as i64 + b_p as i64 - b_c as i64))
                .collect();
            let cost = (0..=params.m)
                .map(|a| {
                    pairs
                        .iter()
                        .map(|&(b_p, b_c)| consumption_reward(b_c) - purchase_cost(a, b_p))
                        .collect()
                })
                .collect();
            let transition = (0..=params.m).map(|_| rows.clone()).collect();
            StateData {
                actions_a: actions_a.clone(),
                actions_b,
                cost,
                transition,
            }
        })
        .collect();
    let model = GameModel {
        theta: params.theta,
        states,
        metadata: Some(serde_json::json!({ "generator": "smartgrid", "params": params })),
    };
    model.ensure_valid()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson rule on the Gaussian density; independent of erfc.
    fn simpson_cell(k: f64, mean: f64, std: f64) -> f64 {
        let n = 20_000;
        let h = 1.0 / n as f64;
        let f = |x: f64| {
            (-(x - mean).powi(2) / (2.0 * std * std)).exp()
                / (std * (2.0 * std::f64::consts::PI).sqrt())
        };
        let mut s = f(k) + f(k + 1.0);
        for m in 1..n {
            let w = if m % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(k + m as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn cell_matches_quadrature() {
        // frozen from scipy.integrate.quad: 0.19146246127401312
        let q0 = gaussian_cell(0, 1.0, 2.0);
        assert!((q0 - 0.191_462_461_274_013_12).abs() < 1e-12);
        for k in -6..6 {
            let want = simpson_cell(k as f64, 1.0, 2.0);
            assert!((gaussian_cell(k, 1.0, 2.0) - want).abs() < 1e-10, "k = {k}");
        }
    }

    #[test]
    fn cell_symmetric_about_mean() {
        assert!((gaussian_cell(0, 1.0, 2.0) - gaussian_cell(1, 1.0, 2.0)).abs() < 1e-15);
    }

    #[test]
    fn cells_normalize() {
        let total: f64 = (-50..=50).map(|k| gaussian_cell(k, 1.0, 2.0)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn action_counts() {
        let p = SmartGridParams::default();
        let m = build_smartgrid(&p).unwrap();
        assert_eq!(m.n_states(), 3);
        let counts: Vec<_> = m.states.iter().map(|s| (s.n_a(), s.n_b())).collect();
        assert_eq!(counts, vec![(3, 6), (3, 9), (3, 11)]);
        assert!(m.states[2].actions_b.contains(&"(2,3)".to_string()));
    }

    #[test]
    fn cost_extremes() {
        let m = build_smartgrid(&SmartGridParams::default()).unwrap();
        let (lo, hi) = m.cost_range();
        // exhaustive scan: min at (a=1, b=(2,0)), max at (a=1, b=(1,3)), i=2
        assert!((lo + 0.85).abs() < 1e-12);
        assert!((hi - (8.5f64.ln() - 0.2)).abs() < 1e-12);
        assert!((m.cost_span() - 2.7901).abs() < 1e-4);
    }

    #[test]
    fn rows_are_exactly_stochastic() {
        let m = build_smartgrid(&SmartGridParams::default()).unwrap();
        for (i, a, b) in m.admissible() {
            let s: f64 = m.transition_row(i, a, b).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_capacity_is_single_state() {
        let p = SmartGridParams {
            n_s: 0,
            ..Default::default()
        };
        let m = build_smartgrid(&p).unwrap();
        assert_eq!(m.n_states(), 1);
        assert!(m.validate().is_valid());
    }

    #[test]
    fn rejects_underflowing_generation() {
        let p = SmartGridParams {
            gen_mean: 1e4,
            gen_std: 1.0,
            ..Default::default()
        };
        assert!(matches!(build_smartgrid(&p), Err(Error::Input(_))));
    }
}
