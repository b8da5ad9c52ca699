//! Checks that do not go through the saddle-point construction.
//!
//! For a fixed stationary pair the risk-sensitive average cost is
//! `theta^{-1} ln rho(Q)` where `Q(i, j) = sum_{a,b} e^{theta c(i,a,b)}
//! P(j|i,a,b) phi(a|i) psi(b|i)` is the twisted kernel. Best responses to a
//! frozen stationary opponent are one-player problems, solved by the same
//! doubling iteration on the induced game.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GameModel, Player, StateData};
use crate::policy::StationaryPolicy;
use crate::value_iteration::{approximate_value, sandwich_certificate, DEFAULT_MAX_OUTER};

/// Relative agreement of the Collatz-Wielandt bounds at convergence.
pub const POWER_TOLERANCE: f64 = 1e-12;
const DIRECT_ITERATIONS: usize = 10_000;
const SHIFTED_ITERATIONS: usize = 1_000_000;
/// Slack added to the certification tolerance for float noise.
pub const CERTIFICATION_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TwistedKernel {
    pub entries: Vec<Vec<f64>>,
}

impl TwistedKernel {
    pub fn new(model: &GameModel, phi: &StationaryPolicy, psi: &StationaryPolicy) -> Result<Self> {
        phi.check_admissible(model, Player::Minimizer)?;
        psi.check_admissible(model, Player::Maximizer)?;
        let n = model.n_states();
        let entries = (0..n)
            .map(|i| {
                let s = model.state(i);
                let mut row = vec![0.0; n];
                for a in 0..s.n_a() {
                    for b in 0..s.n_b() {
                        let w = phi.at(i)[a] * psi.at(i)[b];
                        if w == 0.0 {
                            continue;
                        }
                        let w = w * (model.theta * s.cost[a][b]).exp();
                        for (r, p) in row.iter_mut().zip(&s.transition[a][b]) {
                            *r += w * p;
                        }
                    }
                }
                row
            })
            .collect();
        Ok(TwistedKernel { entries })
    }
}

/// Power iteration bracketing `rho` between the min and max of `(Ax)_i / x_i`.
fn bracket_radius(a: &[Vec<f64>], shift: f64, max_iter: usize) -> Option<f64> {
    let n = a.len();
    let mut x = vec![1.0; n];
    for _ in 0..max_iter {
        let y: Vec<f64> = (0..n)
            .map(|i| a[i].iter().zip(&x).map(|(q, v)| q * v).sum::<f64>() + shift * x[i])
            .collect();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            if x[i] > 0.0 {
                let r = y[i] / x[i];
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        let norm = y.iter().copied().fold(0.0, f64::max);
        if !(norm > 0.0) {
            return Some(0.0);
        }
        if hi - lo <= POWER_TOLERANCE * hi {
            return Some(0.5 * (lo + hi));
        }
        x = y.into_iter().map(|v| v / norm).collect();
    }
    None
}

/// Spectral radius of a nonnegative square matrix.
pub fn spectral_radius(a: &[Vec<f64>]) -> Result<f64> {
    let scale = a.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let scaled: Vec<Vec<f64>> = a
        .iter()
        .map(|r| r.iter().map(|x| x / scale).collect())
        .collect();
    if let Some(r) = bracket_radius(&scaled, 0.0, DIRECT_ITERATIONS) {
        return Ok(r * scale);
    }
    // periodic kernels: rho(A + I) = rho(A) + 1 with an aperiodic iteration
    match bracket_radius(&scaled, 1.0, SHIFTED_ITERATIONS) {
        Some(r) => Ok((r - 1.0) * scale),
        None => Err(Error::PowerIteration(format!(
            "no convergence after {SHIFTED_ITERATIONS} shifted iterations"
        ))),
    }
}

/// Risk-sensitive average cost of a stationary pair.
pub fn stationary_value(
    model: &GameModel,
    phi: &StationaryPolicy,
    psi: &StationaryPolicy,
) -> Result<f64> {
    model.ensure_valid()?;
    let q = TwistedKernel::new(model, phi, psi)?;
    Ok(spectral_radius(&q.entries)?.ln() / model.theta)
}

/// One-player game obtained by freezing `fixed` for the opponent of `free`.
/// Each remaining action gets the certainty-equivalent cost
/// `theta^{-1} ln sum_x w(x) e^{theta c}` and the correspondingly tilted row,
/// which leaves every twisted kernel unchanged.
pub fn induced_game(
    model: &GameModel,
    free: Player,
    fixed: &StationaryPolicy,
) -> Result<GameModel> {
    let opponent = match free {
        Player::Minimizer => Player::Maximizer,
        Player::Maximizer => Player::Minimizer,
    };
    fixed.check_admissible(model, opponent)?;
    let theta = model.theta;
    let n = model.n_states();
    let states = model
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let w = fixed.at(i);
            let (n_free, n_fixed) = match free {
                Player::Minimizer => (s.n_a(), s.n_b()),
                Player::Maximizer => (s.n_b(), s.n_a()),
            };
            let cell = |f: usize, x: usize| match free {
                Player::Minimizer => (s.cost[f][x], &s.transition[f][x]),
                Player::Maximizer => (s.cost[x][f], &s.transition[x][f]),
            };
            let mut costs = Vec::with_capacity(n_free);
            let mut rows = Vec::with_capacity(n_free);
            for f in 0..n_free {
                let top = (0..n_fixed)
                    .filter(|&x| w[x] > 0.0)
                    .map(|x| cell(f, x).0)
                    .fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                let mut row = vec![0.0; n];
                for x in (0..n_fixed).filter(|&x| w[x] > 0.0) {
                    let (c, p) = cell(f, x);
                    let weight = w[x] * (theta * (c - top)).exp();
                    total += weight;
                    for (r, q) in row.iter_mut().zip(p) {
                        *r += weight * q;
                    }
                }
                for r in &mut row {
                    *r /= total;
                }
                costs.push(top + total.ln() / theta);
                rows.push(row);
            }
            let frozen = vec!["fixed".to_string()];
            match free {
                Player::Minimizer => StateData {
                    actions_a: s.actions_a.clone(),
                    actions_b: frozen,
                    cost: costs.into_iter().map(|c| vec![c]).collect(),
                    transition: rows.into_iter().map(|r| vec![r]).collect(),
                },
                Player::Maximizer => StateData {
                    actions_a: frozen,
                    actions_b: s.actions_b.clone(),
                    cost: vec![costs],
                    transition: vec![rows],
                },
            }
        })
        .collect();
    Ok(GameModel {
        theta,
        states,
        metadata: None,
    })
}

/// Width-`eps` bracket of `inf_pi J(pi, fixed)` (`free = Minimizer`) or
/// `sup_sigma J(fixed, sigma)` (`free = Maximizer`).
pub fn best_response(
    model: &GameModel,
    free: Player,
    fixed: &StationaryPolicy,
    eps: f64,
) -> Result<(f64, f64)> {
    model.ensure_valid()?;
    let induced = induced_game(model, free, fixed)?;
    let r = approximate_value(&induced, eps, DEFAULT_MAX_OUTER)?;
    sandwich_certificate(&r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleCertificate {
    pub rho_bracket: (f64, f64),
    /// Bracket of `inf_pi J(pi, psi)`.
    pub best_response_vs_psi: (f64, f64),
    /// Bracket of `sup_sigma J(phi, sigma)`.
    pub best_response_vs_phi: (f64, f64),
    /// How much player 2 can gain against `phi`, over-estimated.
    pub slack_player1: f64,
    /// How much player 1 can gain against `psi`, over-estimated.
    pub slack_player2: f64,
    pub certified_eps: f64,
    pub eps: f64,
    pub tolerance: f64,
    pub passes: bool,
}

pub fn verify_saddle(
    model: &GameModel,
    phi: &StationaryPolicy,
    psi: &StationaryPolicy,
    eps: f64,
) -> Result<SaddleCertificate> {
    model.ensure_valid()?;
    if !(eps > 0.0) {
        return Err(Error::Input(format!("eps must be positive, got {eps}")));
    }
    let acc = eps / 10.0;
    let value = approximate_value(model, acc, DEFAULT_MAX_OUTER)?;
    let rho = sandwich_certificate(&value)?;
    let vs_phi = best_response(model, Player::Maximizer, phi, acc)?;
    let vs_psi = best_response(model, Player::Minimizer, psi, acc)?;
    let slack_player1 = vs_phi.1 - rho.0;
    let slack_player2 = rho.1 - vs_psi.0;
    let certified_eps = slack_player1.max(slack_player2);
    let width = |b: (f64, f64)| b.1 - b.0;
    let tolerance = width(rho) + width(vs_phi).max(width(vs_psi)) + CERTIFICATION_FLOOR;
    Ok(SaddleCertificate {
        rho_bracket: rho,
        best_response_vs_psi: vs_psi,
        best_response_vs_phi: vs_phi,
        slack_player1,
        slack_player2,
        certified_eps,
        eps,
        tolerance,
        passes: certified_eps <= eps + tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationEstimate {
    pub estimate: f64,
    /// Delta-method standard error of the estimate.
    pub std_error: f64,
    pub start: usize,
    pub horizon: u64,
    pub trials: u64,
    pub seed: u64,
}

fn sample<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = k;
            if u < acc {
                return k;
            }
        }
    }
    last
}

/// Monte Carlo estimate of `(theta n)^{-1} ln E[exp(theta sum_{k<n} c)]`.
/// Each trial draws from its own generator seeded from a master stream, so
/// the result depends only on `(seed, trials, horizon)`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_cost_detailed(
    model: &GameModel,
    phi: &StationaryPolicy,
    psi: &StationaryPolicy,
    start: usize,
    horizon: u64,
    trials: u64,
    seed: u64,
) -> Result<SimulationEstimate> {
    model.ensure_valid()?;
    phi.check_admissible(model, Player::Minimizer)?;
    psi.check_admissible(model, Player::Maximizer)?;
    if horizon == 0 || trials == 0 {
        return Err(Error::Input("horizon and trials must be at least 1".into()));
    }
    if start >= model.n_states() {
        return Err(Error::Input(format!("start state {start} out of range")));
    }
    let theta = model.theta;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let sub_seeds: Vec<u64> = (0..trials).map(|_| master.next_u64()).collect();
    let log_weights: Vec<f64> = sub_seeds
        .iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let mut state = start;
            let mut total = 0.0;
            for _ in 0..horizon {
                let a = sample(&mut rng, phi.at(state));
                let b = sample(&mut rng, psi.at(state));
                total += model.cost(state, a, b);
                state = sample(&mut rng, model.transition_row(state, a, b));
            }
            theta * total
        })
        .collect();
    let top = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_weights.iter().map(|l| (l - top).exp()).collect();
    let t = trials as f64;
    let mean = w.iter().sum::<f64>() / t;
    let var = if trials > 1 {
        w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1.0)
    } else {
        0.0
    };
    let denom = theta * horizon as f64;
    Ok(SimulationEstimate {
        estimate: (top + mean.ln()) / denom,
        std_error: (var / t).sqrt() / mean / denom,
        start,
        horizon,
        trials,
        seed,
    })
}

pub fn simulate_cost(
    model: &GameModel,
    phi: &StationaryPolicy,
    psi: &StationaryPolicy,
    start: usize,
    horizon: u64,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    simulate_cost_detailed(model, phi, psi, start, horizon, trials, seed).map(|e| e.estimate)
}
