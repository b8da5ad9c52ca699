//! One-shot zero-sum matrix games.
//!
//! Rows belong to the minimizer, columns to the maximizer. The row player's
//! program `min w s.t. sum_a mu(a) m(a,b) <= w for all b` and the column
//! player's `max v s.t. sum_b m(a,b) nu(b) >= v for all a` are solved as one
//! dense simplex: after an affine map sending every entry into `[1, 3]` the
//! row problem becomes `max 1'x s.t. m'x <= 1, x >= 0`, whose optimal
//! tableau also carries the column player's solution in the slack reduced
//! costs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative feasibility/optimality tolerance.
pub const LP_TOLERANCE: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-12;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl PayoffMatrix {
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::Input("payoff matrix must be nonempty".into()));
        }
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Input("payoff matrix rows differ in length".into()));
        }
        let data: Vec<f64> = entries.into_iter().flatten().collect();
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("payoff matrix has a non-finite entry".into()));
        }
        Ok(PayoffMatrix { rows, cols, data })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for a in 0..rows {
            for b in 0..cols {
                data.push(f(a, b));
            }
        }
        if rows == 0 || cols == 0 {
            return Err(Error::Input("payoff matrix must be nonempty".into()));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("payoff matrix has a non-finite entry".into()));
        }
        Ok(PayoffMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.cols + b]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Tolerance scale `LP_TOLERANCE * (1 + max |entry|)`.
    pub fn tolerance(&self) -> f64 {
        LP_TOLERANCE * (1.0 + self.max_abs())
    }

    /// Expected payoff of column `b` against a row mixture.
    pub fn column_payoff(&self, mu: &[f64], b: usize) -> f64 {
        (0..self.rows).map(|a| mu[a] * self.get(a, b)).sum()
    }

    /// Expected payoff of row `a` against a column mixture.
    pub fn row_payoff(&self, a: usize, nu: &[f64]) -> f64 {
        (0..self.cols).map(|b| self.get(a, b) * nu[b]).sum()
    }

    pub fn mixed_payoff(&self, mu: &[f64], nu: &[f64]) -> f64 {
        (0..self.rows).map(|a| mu[a] * self.row_payoff(a, nu)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixGameSolution {
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    /// `max_b mu'm(., b) - min_a m(a, .)nu`, the certified gap of the pair.
    pub duality_gap: f64,
}

fn pure(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

fn finish(m: &PayoffMatrix, value: f64, row: Vec<f64>, col: Vec<f64>) -> MatrixGameSolution {
    let upper = (0..m.cols)
        .map(|b| m.column_payoff(&row, b))
        .fold(f64::NEG_INFINITY, f64::max);
    let lower = (0..m.rows)
        .map(|a| m.row_payoff(a, &col))
        .fold(f64::INFINITY, f64::min);
    MatrixGameSolution {
        value,
        row_strategy: row,
        col_strategy: col,
        duality_gap: (upper - lower).max(0.0),
    }
}

fn first_argmax(xs: impl Iterator<Item = f64>) -> (usize, f64) {
    xs.enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
}

fn first_argmin(xs: impl Iterator<Item = f64>) -> (usize, f64) {
    xs.enumerate().fold(
        (0, f64::INFINITY),
        |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) },
    )
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    for x in &mut v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let s: f64 = v.iter().sum();
    for x in &mut v {
        *x /= s;
    }
    v
}

struct Tableau {
    /// `n_cons` rows of width `n_vars + n_cons + 1`; the last column is the rhs.
    rows: Vec<Vec<f64>>,
    /// Objective row in the same layout; `z[rhs]` holds the objective value.
    z: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.z.len();
        let p = self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            *x /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for j in 0..width {
                    row[j] -= f * pivot_row[j];
                }
                row[c] = 0.0;
            }
        }
        let f = self.z[c];
        if f != 0.0 {
            for (z, p) in self.z.iter_mut().zip(&pivot_row) {
                *z -= f * p;
            }
            self.z[c] = 0.0;
        }
        self.basis[r] = c;
    }
}

/// Value and optimal mixed strategies of the matrix game.
pub fn solve_matrix_game(m: &PayoffMatrix) -> Result<MatrixGameSolution> {
    let (na, nb) = (m.rows, m.cols);
    if na == 1 {
        let (b, v) = first_argmax((0..nb).map(|b| m.get(0, b)));
        return Ok(finish(m, v, vec![1.0], pure(nb, b)));
    }
    if nb == 1 {
        let (a, v) = first_argmin((0..na).map(|a| m.get(a, 0)));
        return Ok(finish(m, v, pure(na, a), vec![1.0]));
    }

    let scale = m.max_abs();
    if scale == 0.0 {
        return Ok(finish(m, 0.0, pure(na, 0), pure(nb, 0)));
    }
    let min_scaled = m.data.iter().fold(f64::INFINITY, |lo, x| lo.min(x / scale));
    let offset = 1.0 - min_scaled;
    let entry = |a: usize, b: usize| m.get(a, b) / scale + offset;

    // one constraint per column b: sum_a entry(a, b) x_a + s_b = 1
    let width = na + nb + 1;
    let rhs = width - 1;
    let rows: Vec<Vec<f64>> = (0..nb)
        .map(|b| {
            let mut row = vec![0.0; width];
            for (a, x) in row[..na].iter_mut().enumerate() {
                *x = entry(a, b);
            }
            row[na + b] = 1.0;
            row[rhs] = 1.0;
            row
        })
        .collect();
    let mut z = vec![0.0; width];
    for zc in z.iter_mut().take(na) {
        *zc = -1.0;
    }
    let mut t = Tableau {
        rows,
        z,
        basis: (na..na + nb).collect(),
    };

    let max_iter = 50 * (na + nb) + 1000;
    let mut bland = false;
    let mut streak = 0;
    let mut iterations = 0;
    loop {
        let entering = if bland {
            (0..rhs).find(|&j| t.z[j] < -PIVOT_EPS)
        } else {
            let (j, v) = first_argmin(t.z[..rhs].iter().copied());
            (v < -PIVOT_EPS).then_some(j)
        };
        let Some(c) = entering else { break };

        let mut leave: Option<(usize, f64)> = None;
        for (r, row) in t.rows.iter().enumerate() {
            if row[c] > PIVOT_EPS {
                let ratio = row[rhs] / row[c];
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((br, bv)) => {
                        let tie = (ratio - bv).abs() <= 1e-14 * (1.0 + bv.abs());
                        if ratio < bv && !tie || tie && t.basis[r] < t.basis[br] {
                            Some((r, ratio))
                        } else {
                            Some((br, bv))
                        }
                    }
                };
            }
        }
        let Some((r, ratio)) = leave else {
            return Err(Error::SolverFailure {
                state: None,
                reason: "unbounded pivot column".into(),
                matrix: m.to_rows(),
            });
        };
        if ratio.abs() <= PIVOT_EPS {
            streak += 1;
            if streak > DEGENERATE_STREAK {
                bland = true;
            }
        } else {
            streak = 0;
        }
        t.pivot(r, c);
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::SolverFailure {
                state: None,
                reason: format!("simplex exceeded {max_iter} pivots"),
                matrix: m.to_rows(),
            });
        }
    }

    let mut x = vec![0.0; na];
    for (r, &var) in t.basis.iter().enumerate() {
        if var < na {
            x[var] = t.rows[r][rhs];
        }
    }
    let y: Vec<f64> = (0..nb).map(|b| t.z[na + b]).collect();
    let objective = t.z[rhs];
    if !(objective > 0.0) {
        return Err(Error::SolverFailure {
            state: None,
            reason: format!("nonpositive objective {objective}"),
            matrix: m.to_rows(),
        });
    }
    let value = (1.0 / objective - offset) * scale;
    Ok(finish(m, value, normalize(x), normalize(y)))
}

/// `(max_b payoff(mu, b) - value, max_a (value - payoff(a, nu)))`: how much
/// the best pure deviation gains against each strategy of `sol`.
pub fn best_pure_responses(m: &PayoffMatrix, sol: &MatrixGameSolution) -> (f64, f64) {
    let row_regret = (0..m.cols)
        .map(|b| m.column_payoff(&sol.row_strategy, b) - sol.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let col_regret = (0..m.rows)
        .map(|a| sol.value - m.row_payoff(a, &sol.col_strategy))
        .fold(f64::NEG_INFINITY, f64::max);
    (row_regret, col_regret)
}
