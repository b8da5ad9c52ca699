//! Random small game instances.

use rand::Rng;

use crate::model::{GameModel, StateData};

#[derive(Debug, Clone, Copy)]
pub struct RandomGameSpec {
    pub n_states: usize,
    pub max_actions_a: usize,
    pub max_actions_b: usize,
    /// Probability that a transition entry is forced to zero (before the
    /// row is renormalized). Zero gives fully supported rows.
    pub sparsity: f64,
    pub cost_range: (f64, f64),
    pub theta: f64,
}

impl Default for RandomGameSpec {
    fn default() -> Self {
        RandomGameSpec {
            n_states: 3,
            max_actions_a: 2,
            max_actions_b: 2,
            sparsity: 0.0,
            cost_range: (0.0, 1.0),
            theta: 0.5,
        }
    }
}

fn random_row<R: Rng + ?Sized>(rng: &mut R, n: usize, sparsity: f64) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen::<f64>() < sparsity {
                0.0
            } else {
                // exponential weights give a flat Dirichlet
                -(1.0 - rng.gen::<f64>()).ln()
            }
        })
        .collect();
    if row.iter().all(|&x| x == 0.0) {
        row[rng.gen_range(0..n)] = 1.0;
    }
    let s: f64 = row.iter().sum();
    for x in &mut row {
        *x /= s;
    }
    row
}

pub fn random_game<R: Rng + ?Sized>(rng: &mut R, spec: &RandomGameSpec) -> GameModel {
    let n = spec.n_states;
    let (lo, hi) = spec.cost_range;
    let states = (0..n)
        .map(|_| {
            let na = rng.gen_range(1..=spec.max_actions_a.max(1));
            let nb = rng.gen_range(1..=spec.max_actions_b.max(1));
            StateData {
                actions_a: (0..na).map(|a| format!("a{a}")).collect(),
                actions_b: (0..nb).map(|b| format!("b{b}")).collect(),
                cost: (0..na)
                    .map(|_| (0..nb).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect())
                    .collect(),
                transition: (0..na)
                    .map(|_| (0..nb).map(|_| random_row(rng, n, spec.sparsity)).collect())
                    .collect(),
            }
        })
        .collect();
    GameModel {
        theta: spec.theta,
        states,
        metadata: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_games_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for sparsity in [0.0, 0.5, 0.9] {
            let spec = RandomGameSpec {
                n_states: 4,
                max_actions_a: 3,
                max_actions_b: 3,
                sparsity,
                ..Default::default()
            };
            for _ in 0..20 {
                assert!(random_game(&mut rng, &spec).validate().is_valid());
            }
        }
    }
}
