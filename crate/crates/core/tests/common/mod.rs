//! Reference computations that share no code with the library's solver path.
#![allow(dead_code)]

use rsgame::model::GameModel;

/// Every assignment `choice[i] < sizes[i]`, in odometer order.
pub fn assignments(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |k| {
                    let mut p = prefix.clone();
                    p.push(k);
                    p
                })
            })
            .collect();
    }
    out
}

pub fn sizes_a(model: &GameModel) -> Vec<usize> {
    model.states.iter().map(|s| s.actions_a.len()).collect()
}

pub fn sizes_b(model: &GameModel) -> Vec<usize> {
    model.states.iter().map(|s| s.actions_b.len()).collect()
}

/// Twisted kernel of mixed stationary strategies given as raw vectors.
pub fn kernel(model: &GameModel, phi: &[Vec<f64>], psi: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = model.states.len();
    let mut q = vec![vec![0.0; n]; n];
    for (i, s) in model.states.iter().enumerate() {
        for (a, pa) in phi[i].iter().enumerate() {
            for (b, pb) in psi[i].iter().enumerate() {
                let w = pa * pb * (model.theta * s.cost[a][b]).exp();
                for (qj, p) in q[i].iter_mut().zip(&s.transition[a][b]) {
                    *qj += w * p;
                }
            }
        }
    }
    q
}

pub fn pure(sizes: &[usize], choice: &[usize]) -> Vec<Vec<f64>> {
    sizes
        .iter()
        .zip(choice)
        .map(|(&n, &c)| (0..n).map(|k| if k == c { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Perron root by iterating `(Q + I)` on the positive cone; the shift makes
/// any irreducible kernel primitive. Stops when the Collatz-Wielandt bounds
/// agree to `1e-13` relative.
pub fn perron_root(q: &[Vec<f64>]) -> f64 {
    let n = q.len();
    let scale: f64 = q.iter().flatten().copied().fold(0.0, f64::max);
    let a: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| q[i][j] / scale + if i == j { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..2_000_000 {
        let y: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a[i][j] * x[j]).sum())
            .collect();
        let ratios: Vec<f64> = (0..n)
            .filter(|&i| x[i] > 0.0)
            .map(|i| y[i] / x[i])
            .collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        if hi - lo <= 1e-13 * hi {
            return (0.5 * (lo + hi) - 1.0) * scale;
        }
        let s: f64 = y.iter().sum();
        x = y.into_iter().map(|v| v / s).collect();
    }
    panic!("reference power iteration did not settle");
}

pub fn pair_cost(model: &GameModel, phi: &[Vec<f64>], psi: &[Vec<f64>]) -> f64 {
    perron_root(&kernel(model, phi, psi)).ln() / model.theta
}

/// `true` when the support graph of the chain is strongly connected.
pub fn strongly_connected(p: &[Vec<f64>]) -> bool {
    let n = p.len();
    (0..n).all(|start| {
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if p[i][j] > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    })
}

/// Checks every deterministic stationary pair for an irreducible chain.
pub fn all_pure_pairs_irreducible(model: &GameModel) -> bool {
    let (sa, sb) = (sizes_a(model), sizes_b(model));
    let n = model.states.len();
    assignments(&sa).iter().all(|f| {
        assignments(&sb).iter().all(|g| {
            let p: Vec<Vec<f64>> = (0..n)
                .map(|i| model.states[i].transition[f[i]][g[i]].clone())
                .collect();
            strongly_connected(&p)
        })
    })
}

/// Independent solution of a matrix game with the row player minimizing:
/// returns `(max_b x'M e_b, min_a e_a' M y)` for given strategies.
pub fn guarantee(m: &[Vec<f64>], x: &[f64], y: &[f64]) -> (f64, f64) {
    let cols = m[0].len();
    let upper = (0..cols)
        .map(|b| m.iter().zip(x).map(|(r, xa)| xa * r[b]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let lower = m
        .iter()
        .map(|r| r.iter().zip(y).map(|(v, yb)| v * yb).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    (upper, lower)
}
