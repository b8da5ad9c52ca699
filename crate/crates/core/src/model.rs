//! Finite two-person zero-sum stochastic games with a risk-sensitivity
//! parameter.
//!
//! States are indexed `0..n_states`. At state `i` player 1 (the minimizer)
//! picks an action index from `actions_a`, player 2 (the maximizer) from
//! `actions_b`; the cost `cost[a][b]` is paid by player 1 to player 2 and the
//! next state is drawn from `transition[a][b]`.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `sum_j P(j | i, a, b) = 1`.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    /// Player 1, minimizes the risk-sensitive average cost.
    Minimizer,
    /// Player 2, maximizes it.
    Maximizer,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Player::Minimizer => f.write_str("player 1"),
            Player::Maximizer => f.write_str("player 2"),
        }
    }
}

/// Per-state data: admissible actions, one-step costs and transition rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateData {
    pub actions_a: Vec<String>,
    pub actions_b: Vec<String>,
    /// `cost[a][b]`
    pub cost: Vec<Vec<f64>>,
    /// `transition[a][b][j]`
    pub transition: Vec<Vec<Vec<f64>>>,
}

impl StateData {
    pub fn n_a(&self) -> usize {
        self.actions_a.len()
    }

    pub fn n_b(&self) -> usize {
        self.actions_b.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameModel {
    pub theta: f64,
    pub states: Vec<StateData>,
    pub metadata: Option<serde_json::Value>,
}

/// On-disk layout. `n_states` is redundant with `states.len()` and checked.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    n_states: usize,
    theta: f64,
    states: Vec<StateData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostShift {
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NoStates,
    NonPositiveTheta {
        theta: f64,
    },
    EmptyActions {
        state: usize,
        player: Player,
    },
    DuplicateAction {
        state: usize,
        player: Player,
        label: String,
    },
    Shape {
        state: usize,
        detail: String,
    },
    NonFiniteCost {
        state: usize,
        a: usize,
        b: usize,
    },
    NegativeProbability {
        state: usize,
        a: usize,
        b: usize,
        next: usize,
        value: f64,
    },
    NonFiniteProbability {
        state: usize,
        a: usize,
        b: usize,
        next: usize,
    },
    NotStochastic {
        state: usize,
        a: usize,
        b: usize,
        sum: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoStates => write!(f, "model has no states"),
            Violation::NonPositiveTheta { theta } => write!(f, "theta = {theta} must be > 0"),
            Violation::EmptyActions { state, player } => {
                write!(f, "state {state}: {player} has no admissible action")
            }
            Violation::DuplicateAction {
                state,
                player,
                label,
            } => write!(f, "state {state}: duplicate {player} action {label:?}"),
            Violation::Shape { state, detail } => write!(f, "state {state}: {detail}"),
            Violation::NonFiniteCost { state, a, b } => {
                write!(f, "cost at ({state},{a},{b}) is not finite")
            }
            Violation::NegativeProbability {
                state,
                a,
                b,
                next,
                value,
            } => write!(f, "P({next} | {state},{a},{b}) = {value} is negative"),
            Violation::NonFiniteProbability { state, a, b, next } => {
                write!(f, "P({next} | {state},{a},{b}) is not finite")
            }
            Violation::NotStochastic { state, a, b, sum } => {
                write!(f, "transition row at ({state},{a},{b}) sums to {sum}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

fn check_labels(out: &mut Vec<Violation>, state: usize, player: Player, labels: &[String]) {
    if labels.is_empty() {
        out.push(Violation::EmptyActions { state, player });
    }
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            out.push(Violation::DuplicateAction {
                state,
                player,
                label: l.clone(),
            });
        }
    }
}

impl GameModel {
    pub fn new(theta: f64, states: Vec<StateData>) -> Result<Self> {
        let model = GameModel {
            theta,
            states,
            metadata: None,
        };
        model.ensure_valid()?;
        Ok(model)
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, i: usize) -> &StateData {
        &self.states[i]
    }

    pub fn cost(&self, i: usize, a: usize, b: usize) -> f64 {
        self.states[i].cost[a][b]
    }

    pub fn transition_row(&self, i: usize, a: usize, b: usize) -> &[f64] {
        &self.states[i].transition[a][b]
    }

    pub fn action_counts(&self) -> Vec<(usize, usize)> {
        self.states.iter().map(|s| (s.n_a(), s.n_b())).collect()
    }

    /// Iterates over the admissible index set `(i, a, b)`.
    pub fn admissible(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.states
            .iter()
            .enumerate()
            .flat_map(|(i, s)| (0..s.n_a()).flat_map(move |a| (0..s.n_b()).map(move |b| (i, a, b))))
    }

    /// `(min c, max c)` over all admissible triples.
    pub fn cost_range(&self) -> (f64, f64) {
        self.admissible()
            .map(|(i, a, b)| self.cost(i, a, b))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                (lo.min(c), hi.max(c))
            })
    }

    /// Cost span `max c - min c`.
    pub fn cost_span(&self) -> f64 {
        let (lo, hi) = self.cost_range();
        hi - lo
    }

    /// Checks every structural and stochastic invariant. Never aborts; all
    /// violations are collected with their location.
    pub fn validate(&self) -> ValidationReport {
        let mut out = Vec::new();
        let n = self.n_states();
        if n == 0 {
            out.push(Violation::NoStates);
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            out.push(Violation::NonPositiveTheta { theta: self.theta });
        }
        for (i, s) in self.states.iter().enumerate() {
            check_labels(&mut out, i, Player::Minimizer, &s.actions_a);
            check_labels(&mut out, i, Player::Maximizer, &s.actions_b);
            let (na, nb) = (s.n_a(), s.n_b());
            if s.cost.len() != na || s.cost.iter().any(|r| r.len() != nb) {
                out.push(Violation::Shape {
                    state: i,
                    detail: format!("cost table must be {na}x{nb}"),
                });
                continue;
            }
            if s.transition.len() != na
                || s.transition
                    .iter()
                    .any(|r| r.len() != nb || r.iter().any(|row| row.len() != n))
            {
                out.push(Violation::Shape {
                    state: i,
                    detail: format!("transition table must be {na}x{nb}x{n}"),
                });
                continue;
            }
            for a in 0..na {
                for b in 0..nb {
                    if !s.cost[a][b].is_finite() {
                        out.push(Violation::NonFiniteCost { state: i, a, b });
                    }
                    let row = &s.transition[a][b];
                    let mut finite = true;
                    for (j, &p) in row.iter().enumerate() {
                        if !p.is_finite() {
                            finite = false;
                            out.push(Violation::NonFiniteProbability {
                                state: i,
                                a,
                                b,
                                next: j,
                            });
                        } else if p < 0.0 {
                            out.push(Violation::NegativeProbability {
                                state: i,
                                a,
                                b,
                                next: j,
                                value: p,
                            });
                        }
                    }
                    let sum: f64 = row.iter().sum();
                    if finite && (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
                        out.push(Violation::NotStochastic {
                            state: i,
                            a,
                            b,
                            sum,
                        });
                    }
                }
            }
        }
        ValidationReport { violations: out }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::Invalid(report))
        }
    }

    /// Adds `max(0, -min c)` to every cost so the table is nonnegative.
    pub fn shift_costs(&self) -> (GameModel, CostShift) {
        let (lo, _) = self.cost_range();
        let shift = if lo < 0.0 { -lo } else { 0.0 };
        let mut shifted = self.clone();
        if shift > 0.0 {
            for s in &mut shifted.states {
                for row in &mut s.cost {
                    for c in row.iter_mut() {
                        *c += shift;
                    }
                }
            }
        }
        (shifted, CostShift { shift })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: GameFile = serde_json::from_str(text).map_err(|e| {
            use serde_json::error::Category;
            match e.classify() {
                Category::Data => Error::Schema(e.to_string()),
                Category::Io => Error::Schema(e.to_string()),
                Category::Syntax | Category::Eof => Error::Parse {
                    line: e.line(),
                    column: e.column(),
                    message: e.to_string(),
                },
            }
        })?;
        if file.n_states != file.states.len() {
            return Err(Error::Schema(format!(
                "n_states = {} but {} state entries are present",
                file.n_states,
                file.states.len()
            )));
        }
        let model = GameModel {
            theta: file.theta,
            states: file.states,
            metadata: file.metadata,
        };
        model.ensure_valid()?;
        Ok(model)
    }

    pub fn to_json_string(&self) -> String {
        let file = GameFile {
            n_states: self.n_states(),
            theta: self.theta,
            states: self.states.clone(),
            metadata: self.metadata.clone(),
        };
        serde_json::to_string_pretty(&file).expect("game model serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string() + "\n")
            .map_err(|e| Error::io(path.display().to_string(), e))
    }
}

/// One state, one action per player, self-loop with cost `c`.
pub fn single_state(theta: f64, c: f64) -> GameModel {
    GameModel {
        theta,
        states: vec![StateData {
            actions_a: vec!["a0".into()],
            actions_b: vec!["b0".into()],
            cost: vec![vec![c]],
            transition: vec![vec![vec![1.0]]],
        }],
        metadata: None,
    }
}

/// Builds a model where every action pair at state `i` has the same row,
/// taken from `rows[i]`, with cost `costs[i]`. Useful for chains.
pub fn markov_chain(theta: f64, rows: &[Vec<f64>], costs: &[f64]) -> GameModel {
    let states = rows
        .iter()
        .zip(costs)
        .map(|(row, &c)| StateData {
            actions_a: vec!["a0".into()],
            actions_b: vec!["b0".into()],
            cost: vec![vec![c]],
            transition: vec![vec![row.clone()]],
        })
        .collect();
    GameModel {
        theta,
        states,
        metadata: None,
    }
}
