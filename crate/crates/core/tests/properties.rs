mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rsgame::generate::{random_game, RandomGameSpec};
use rsgame::matrix_game::{solve_matrix_game, PayoffMatrix};
use rsgame::model::GameModel;
use rsgame::operator::{apply_operator, ValueFunction};
use rsgame::policy::{PolicyFile, StationaryPolicy};
use rsgame::saddle::u_iteration;
use rsgame::verification::{spectral_radius, TwistedKernel};

fn game(seed: u64, n: usize, sparsity: f64) -> GameModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_game(
        &mut rng,
        &RandomGameSpec {
            n_states: n,
            max_actions_a: 3,
            max_actions_b: 3,
            sparsity,
            cost_range: (-2.0, 2.0),
            theta: 0.7,
        },
    )
}

fn matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=8, 1usize..=8)
        .prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-50.0f64..50.0, c), r))
}

fn positive(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..10.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lp_strategies_certify_the_value(entries in matrix()) {
        let m = PayoffMatrix::new(entries.clone()).unwrap();
        let sol = solve_matrix_game(&m).unwrap();
        let (upper, lower) = common::guarantee(&entries, &sol.row_strategy, &sol.col_strategy);
        let tol = m.tolerance();
        prop_assert!(upper - lower <= tol);
        prop_assert!(lower - tol <= sol.value && sol.value <= upper + tol);
    }

    #[test]
    fn lp_value_moves_with_affine_maps(entries in matrix(), a in 0.1f64..5.0, b in -10.0f64..10.0) {
        let m = PayoffMatrix::new(entries.clone()).unwrap();
        let t = PayoffMatrix::new(entries.iter().map(|r| r.iter().map(|x| a * x + b).collect()).collect()).unwrap();
        let v = solve_matrix_game(&m).unwrap().value;
        let w = solve_matrix_game(&t).unwrap().value;
        prop_assert!((w - (a * v + b)).abs() <= 1e-8 * (1.0 + w.abs()));
    }

    #[test]
    fn operator_is_monotone(seed in any::<u64>(), n in 1usize..=4, base in positive(4), bump in positive(4)) {
        let g = game(seed, n, 0.3);
        let h: Vec<f64> = base[..n].to_vec();
        let k: Vec<f64> = h.iter().zip(&bump).map(|(x, d)| x + d).collect();
        let lh = apply_operator(&g, &ValueFunction::from_values(h).unwrap()).unwrap().0.represented();
        let lk = apply_operator(&g, &ValueFunction::from_values(k).unwrap()).unwrap().0.represented();
        for (x, y) in lh.iter().zip(&lk) {
            prop_assert!(x <= &(y * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn operator_is_positively_homogeneous(seed in any::<u64>(), n in 1usize..=4, base in positive(4), s in 1e-3f64..1e3) {
        let g = game(seed, n, 0.3);
        let h: Vec<f64> = base[..n].to_vec();
        let lh = apply_operator(&g, &ValueFunction::from_values(h.clone()).unwrap()).unwrap().0.represented();
        let scaled: Vec<f64> = h.iter().map(|x| x * s).collect();
        let ls = apply_operator(&g, &ValueFunction::from_values(scaled).unwrap()).unwrap().0.represented();
        for (x, y) in lh.iter().zip(&ls) {
            prop_assert!((s * x - y).abs() <= 1e-12 * y);
        }
    }

    #[test]
    fn operator_is_nonexpansive_in_log_sup(seed in any::<u64>(), n in 1usize..=4, h in positive(4), k in positive(4)) {
        let g = game(seed, n, 0.0);
        let d = h[..n].iter().zip(&k[..n]).map(|(x, y)| (x.ln() - y.ln()).abs()).fold(0.0, f64::max);
        let lh = apply_operator(&g, &ValueFunction::from_values(h[..n].to_vec()).unwrap()).unwrap().0.log_values();
        let lk = apply_operator(&g, &ValueFunction::from_values(k[..n].to_vec()).unwrap()).unwrap().0.log_values();
        let e = lh.iter().zip(&lk).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(e <= d + 1e-12);
    }

    #[test]
    fn shift_makes_costs_nonnegative(seed in any::<u64>(), n in 1usize..=4) {
        let g = game(seed, n, 0.0);
        let (shifted, shift) = g.shift_costs();
        let (lo, _) = g.cost_range();
        prop_assert_eq!(shift.shift, (-lo).max(0.0));
        prop_assert!(shifted.cost_range().0 >= 0.0);
        prop_assert_eq!(shifted.cost_span(), g.cost_span());
    }

    #[test]
    fn model_json_round_trips_exactly(seed in any::<u64>(), n in 1usize..=4) {
        let g = game(seed, n, 0.4);
        let back = GameModel::from_json_str(&g.to_json_string()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn policy_file_round_trips(seed in any::<u64>(), n in 1usize..=4) {
        let g = game(seed, n, 0.0);
        let phi = StationaryPolicy::uniform(common::sizes_a(&g));
        let psi = StationaryPolicy::uniform(common::sizes_b(&g));
        let file = PolicyFile::from_policies(&g, &phi, &psi);
        let text = serde_json::to_string(&file).unwrap();
        let back: PolicyFile = serde_json::from_str(&text).unwrap();
        let (p2, q2) = back.to_policies(&g).unwrap();
        prop_assert_eq!(p2, phi);
        prop_assert_eq!(q2, psi);
    }

    #[test]
    fn spectral_radius_matches_reference(seed in any::<u64>(), n in 1usize..=4) {
        let g = game(seed, n, 0.0);
        let phi = StationaryPolicy::uniform(common::sizes_a(&g));
        let psi = StationaryPolicy::uniform(common::sizes_b(&g));
        let q = TwistedKernel::new(&g, &phi, &psi).unwrap();
        let r = spectral_radius(&q.entries).unwrap();
        let want = common::perron_root(&q.entries);
        prop_assert!((r - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn u_iteration_decreases_in_rho(seed in any::<u64>(), n in 1usize..=4, rho in 0.0f64..3.0, d in 0.0f64..1.0, steps in 0u64..40) {
        let (g, _) = game(seed, n, 0.0).shift_costs();
        let i_star = (seed % n as u64) as usize;
        let hi = u_iteration(&g, rho, i_star, steps).unwrap();
        let lo = u_iteration(&g, rho + d, i_star, steps).unwrap();
        prop_assert_eq!(hi[i_star], 1.0);
        prop_assert_eq!(lo[i_star], 1.0);
        for (x, y) in lo.iter().zip(&hi) {
            prop_assert!(*x <= y * (1.0 + 1e-12));
        }
    }
}
