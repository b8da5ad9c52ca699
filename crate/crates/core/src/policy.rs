use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GameModel, Player};

/// Tolerance on a per-state distribution summing to one.
pub const POLICY_TOLERANCE: f64 = 1e-12;

/// Per-state distribution over the admissible actions of one player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StationaryPolicy {
    probs: Vec<Vec<f64>>,
}

impl StationaryPolicy {
    pub fn new(probs: Vec<Vec<f64>>) -> Self {
        StationaryPolicy { probs }
    }

    pub fn uniform(sizes: impl IntoIterator<Item = usize>) -> Self {
        StationaryPolicy {
            probs: sizes.into_iter().map(|n| vec![1.0 / n as f64; n]).collect(),
        }
    }

    /// Pure policy picking `choice[i]` at state `i`.
    pub fn deterministic(sizes: &[usize], choice: &[usize]) -> Self {
        StationaryPolicy {
            probs: sizes
                .iter()
                .zip(choice)
                .map(|(&n, &c)| {
                    let mut p = vec![0.0; n];
                    p[c] = 1.0;
                    p
                })
                .collect(),
        }
    }

    pub fn n_states(&self) -> usize {
        self.probs.len()
    }

    pub fn at(&self, i: usize) -> &[f64] {
        &self.probs[i]
    }

    pub fn at_mut(&mut self, i: usize) -> &mut Vec<f64> {
        &mut self.probs[i]
    }

    pub fn as_slices(&self) -> &[Vec<f64>] {
        &self.probs
    }

    /// Checks the policy is a distribution over `player`'s admissible actions
    /// at every state of `model`.
    pub fn check_admissible(&self, model: &GameModel, player: Player) -> Result<()> {
        if self.probs.len() != model.n_states() {
            return Err(Error::Input(format!(
                "{player} policy covers {} states, model has {}",
                self.probs.len(),
                model.n_states()
            )));
        }
        for (i, p) in self.probs.iter().enumerate() {
            let s = model.state(i);
            let n = match player {
                Player::Minimizer => s.n_a(),
                Player::Maximizer => s.n_b(),
            };
            if p.len() != n {
                return Err(Error::Input(format!(
                    "{player} policy at state {i} has {} entries, expected {n}",
                    p.len()
                )));
            }
            if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::Input(format!(
                    "{player} policy at state {i} has a negative or non-finite entry"
                )));
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Input(format!(
                    "{player} policy at state {i} sums to {sum}"
                )));
            }
        }
        Ok(())
    }

    /// Rescales every state's distribution to sum to exactly one (up to
    /// rounding) after clamping tiny negatives.
    pub fn normalized(mut self) -> Self {
        for p in &mut self.probs {
            for x in p.iter_mut() {
                if *x < 0.0 {
                    *x = 0.0;
                }
            }
            let s: f64 = p.iter().sum();
            if s > 0.0 {
                for x in p.iter_mut() {
                    *x /= s;
                }
            }
        }
        self
    }
}

/// Policy pair in label-keyed form, as read from and written to disk.
///
/// ```json
/// {"phi": [{"0": 0.25, "1": 0.75}, ...], "psi": [{"(0,2)": 1.0}, ...]}
/// ```
/// Labels absent from a state's map carry probability zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub phi: Vec<IndexMap<String, f64>>,
    pub psi: Vec<IndexMap<String, f64>>,
}

fn to_labelled(
    model: &GameModel,
    policy: &StationaryPolicy,
    player: Player,
) -> Vec<IndexMap<String, f64>> {
    model
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let labels = match player {
                Player::Minimizer => &s.actions_a,
                Player::Maximizer => &s.actions_b,
            };
            labels
                .iter()
                .cloned()
                .zip(policy.at(i).iter().copied())
                .collect()
        })
        .collect()
}

fn from_labelled(
    model: &GameModel,
    maps: &[IndexMap<String, f64>],
    player: Player,
) -> Result<StationaryPolicy> {
    if maps.len() != model.n_states() {
        return Err(Error::Schema(format!(
            "{player} policy lists {} states, model has {}",
            maps.len(),
            model.n_states()
        )));
    }
    let mut probs = Vec::with_capacity(maps.len());
    for (i, (map, s)) in maps.iter().zip(&model.states).enumerate() {
        let labels = match player {
            Player::Minimizer => &s.actions_a,
            Player::Maximizer => &s.actions_b,
        };
        for key in map.keys() {
            if !labels.contains(key) {
                return Err(Error::Input(format!(
                    "{player} action {key:?} is not admissible at state {i}"
                )));
            }
        }
        probs.push(
            labels
                .iter()
                .map(|l| map.get(l).copied().unwrap_or(0.0))
                .collect(),
        );
    }
    let policy = StationaryPolicy::new(probs);
    policy.check_admissible(model, player)?;
    Ok(policy)
}

impl PolicyFile {
    pub fn from_policies(
        model: &GameModel,
        phi: &StationaryPolicy,
        psi: &StationaryPolicy,
    ) -> Self {
        PolicyFile {
            phi: to_labelled(model, phi, Player::Minimizer),
            psi: to_labelled(model, psi, Player::Maximizer),
        }
    }

    pub fn to_policies(&self, model: &GameModel) -> Result<(StationaryPolicy, StationaryPolicy)> {
        Ok((
            from_labelled(model, &self.phi, Player::Minimizer)?,
            from_labelled(model, &self.psi, Player::Maximizer)?,
        ))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("policy file: {e}")))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("policy file serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path.display().to_string(), e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::single_state;

    #[test]
    fn labelled_round_trip() {
        let mut m = single_state(1.0, 0.0);
        m.states[0].actions_b = vec!["x".into(), "y".into()];
        m.states[0].cost = vec![vec![0.0, 1.0]];
        m.states[0].transition = vec![vec![vec![1.0], vec![1.0]]];
        let phi = StationaryPolicy::new(vec![vec![1.0]]);
        let psi = StationaryPolicy::new(vec![vec![0.25, 0.75]]);
        let file = PolicyFile::from_policies(&m, &phi, &psi);
        let (p, q) = file.to_policies(&m).unwrap();
        assert_eq!((p, q), (phi, psi));
    }

    #[test]
    fn unknown_label_rejected() {
        let m = single_state(1.0, 0.0);
        let file = PolicyFile {
            phi: vec![[("nope".to_string(), 1.0)].into_iter().collect()],
            psi: vec![[("b0".to_string(), 1.0)].into_iter().collect()],
        };
        assert!(matches!(file.to_policies(&m), Err(Error::Input(_))));
    }

    #[test]
    fn missing_labels_are_zero() {
        let mut m = single_state(1.0, 0.0);
        m.states[0].actions_b = vec!["x".into(), "y".into()];
        m.states[0].cost = vec![vec![0.0, 1.0]];
        m.states[0].transition = vec![vec![vec![1.0], vec![1.0]]];
        let file = PolicyFile {
            phi: vec![[("a0".to_string(), 1.0)].into_iter().collect()],
            psi: vec![[("y".to_string(), 1.0)].into_iter().collect()],
        };
        let (_, psi) = file.to_policies(&m).unwrap();
        assert_eq!(psi.at(0), &[0.0, 1.0]);
    }
}
