//! Irreducibility coefficient and the constants derived from it.
//!
//! `V^j_k(i)` is the largest probability, over joint Markov decision rules of
//! both players, of staying away from `j` for `k` steps starting at `i`:
//! `V_0 = 1`, `V_{k+1}(i) = max_{a,b} sum_{l != j} P(l|i,a,b) V_k(l)`. The
//! coefficient `gamma = 1 - max_{i,j} V^j_{|E|}(i)` is the worst-case
//! probability of a return within `|E|` steps, and it is positive exactly
//! when every deterministic stationary pair induces an irreducible chain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GameModel;

/// `gamma` at or below this is treated as zero: transition rows are only
/// stochastic to within `1e-9`, so an escape-free row can leave `1 - V` at
/// that order instead of exactly zero.
pub const GAMMA_TOLERANCE: f64 = 1e-8;

/// Brute-force enumeration budget (decision-rule sequences per `(i, j)`).
pub const BRUTEFORCE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrreducibilityReport {
    pub gamma: f64,
    pub eta: f64,
    pub i_star: usize,
    /// `v_table[j][i] = V^j_{|E|}(i)`
    pub v_table: Vec<Vec<f64>>,
    pub m_c: f64,
    /// `-ln(1 - eta) / (|E| m_c)`; infinite when `eta = 1` or `m_c = 0`.
    #[serde(with = "crate::serde_float")]
    pub theta_max: f64,
    pub irreducible: bool,
}

pub fn v_recursion(model: &GameModel, j: usize, k: usize) -> Vec<f64> {
    let n = model.n_states();
    let mut v = vec![1.0; n];
    for _ in 0..k {
        v = (0..n)
            .map(|i| {
                model
                    .admissible()
                    .filter(|&(s, _, _)| s == i)
                    .map(|(_, a, b)| {
                        model
                            .transition_row(i, a, b)
                            .iter()
                            .enumerate()
                            .filter(|&(l, _)| l != j)
                            .map(|(l, p)| p * v[l])
                            .sum::<f64>()
                    })
                    .fold(0.0, f64::max)
                    .min(1.0)
            })
            .collect();
    }
    v
}

/// `-ln(1 - eta) / (n m_c)` with `-ln 0 = inf` and `inf` for constant costs.
pub fn theta_bound(eta: f64, n_states: usize, m_c: f64) -> f64 {
    if m_c <= 0.0 || eta >= 1.0 {
        f64::INFINITY
    } else {
        -(1.0 - eta).ln() / (n_states as f64 * m_c)
    }
}

pub fn analyze(model: &GameModel) -> IrreducibilityReport {
    let n = model.n_states();
    let v_table: Vec<Vec<f64>> = (0..n).map(|j| v_recursion(model, j, n)).collect();
    let row_max: Vec<f64> = v_table
        .iter()
        .map(|v| v.iter().copied().fold(0.0, f64::max))
        .collect();
    let overall = row_max.iter().copied().fold(0.0, f64::max);
    let (i_star, best) =
        row_max
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |(bi, bv), (j, v)| if v < bv { (j, v) } else { (bi, bv) },
            );
    let gamma = 1.0 - overall;
    let eta = 1.0 - best;
    let m_c = model.cost_span();
    IrreducibilityReport {
        gamma,
        eta,
        i_star,
        v_table,
        m_c,
        theta_max: theta_bound(eta, n, m_c),
        irreducible: gamma > GAMMA_TOLERANCE,
    }
}

/// Minimum over all `(i, j)` and all length-`|E|` sequences of joint
/// deterministic Markov decision rules of `P_i(tau_j <= |E|)`, by exhaustive
/// enumeration and forward recursion on the chain killed at `j`.
pub fn gamma_bruteforce(model: &GameModel) -> Result<f64> {
    let n = model.n_states();
    let joint: Vec<u64> = model
        .action_counts()
        .iter()
        .map(|&(a, b)| (a * b) as u64)
        .collect();
    if n > 4 || model.states.iter().any(|s| s.n_a() > 3 || s.n_b() > 3) {
        return Err(Error::GuardExceeded(
            "brute force needs at most 4 states and 3 actions per player".into(),
        ));
    }
    let mut best = f64::INFINITY;
    for j in 0..n {
        // at time 0 only the start state's rule matters; later only states != j
        let per_step: u64 = (0..n).filter(|&s| s != j).map(|s| joint[s]).product();
        for i in 0..n {
            let count = (1..n).try_fold(joint[i], |acc: u64, _| acc.checked_mul(per_step));
            match count {
                Some(c) if c <= BRUTEFORCE_BUDGET => {}
                _ => {
                    return Err(Error::GuardExceeded(format!(
                        "more than {BRUTEFORCE_BUDGET} decision-rule sequences for (i={i}, j={j})"
                    )))
                }
            }
            let mut start = vec![0.0; n];
            start[i] = 1.0;
            let p = min_return_probability(model, j, &start, 0, 0.0, n);
            best = best.min(p);
        }
    }
    Ok(best)
}

/// Enumerates every joint pure decision rule at step `t` over the states
/// carrying mass, then recurses.
fn min_return_probability(
    model: &GameModel,
    j: usize,
    mass: &[f64],
    t: usize,
    hit: f64,
    horizon: usize,
) -> f64 {
    if t == horizon {
        return hit;
    }
    let n = model.n_states();
    let active: Vec<usize> = (0..n)
        .filter(|&s| s != j || t == 0)
        .filter(|&s| mass[s] > 0.0)
        .collect();
    if active.is_empty() {
        return hit;
    }
    let mut choice = vec![(0usize, 0usize); active.len()];
    let mut best = f64::INFINITY;
    loop {
        let mut next = vec![0.0; n];
        let mut hit_now = hit;
        for (slot, &s) in active.iter().enumerate() {
            let (a, b) = choice[slot];
            for (l, p) in model.transition_row(s, a, b).iter().enumerate() {
                if l == j {
                    hit_now += mass[s] * p;
                } else {
                    next[l] += mass[s] * p;
                }
            }
        }
        best = best.min(min_return_probability(
            model,
            j,
            &next,
            t + 1,
            hit_now,
            horizon,
        ));

        // odometer over joint actions of the active states
        let mut slot = 0;
        loop {
            if slot == active.len() {
                return best;
            }
            let st = model.state(active[slot]);
            let (a, b) = &mut choice[slot];
            *b += 1;
            if *b == st.n_b() {
                *b = 0;
                *a += 1;
            }
            if *a == st.n_a() {
                *a = 0;
                slot += 1;
            } else {
                break;
            }
        }
    }
}
