mod common;

use common::*;
use gsa_core::allocation::{
    pme_from_total_indices, proportional_values, proportional_values_extended, shapley_coalitional,
};
use gsa_core::games::{random_game_with_nulls, random_monotone_game};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn efficiency(seed in any::<u64>(), d in 1usize..=6) {
        let g = random_monotone_game(d, &mut rng(seed));
        prop_assert!(efficiency_gap(&shapley_coalitional(&g), &g) < AXIOM_TOL);
        prop_assert!(efficiency_gap(&proportional_values(&g).unwrap(), &g) < AXIOM_TOL);
        prop_assert!(efficiency_gap(&pv0(&g), &g) < AXIOM_TOL);
    }

    #[test]
    fn efficiency_with_nulls(seed in any::<u64>(), d in 2usize..=6) {
        let g = random_game_with_nulls(d, &mut rng(seed));
        prop_assert!(efficiency_gap(&pv0(&g), &g) < AXIOM_TOL);
        prop_assert!(efficiency_gap(&pme_from_total_indices(&g, 0.0).unwrap(), &g) < AXIOM_TOL);
    }

    #[test]
    fn nonnegativity(seed in any::<u64>(), d in 2usize..=6) {
        let g = random_monotone_game(d, &mut rng(seed));
        let z = random_game_with_nulls(d, &mut rng(seed ^ 1));
        for s in shapley_coalitional(&g).shares.iter()
            .chain(&proportional_values(&g).unwrap().shares)
            .chain(&shapley_coalitional(&z).shares)
            .chain(&pv0(&z).shares)
        {
            prop_assert!(*s >= -AXIOM_TOL, "negative share {}", s);
        }
    }

    #[test]
    fn null_player(seed in any::<u64>(), d in 1usize..=5, at in 0usize..6) {
        let at = at % (d + 1);
        let g = with_null_player(&random_monotone_game(d, &mut rng(seed)), at);
        prop_assert!(shapley_coalitional(&g).shares[at].abs() < AXIOM_TOL);
        prop_assert_eq!(pv0(&g).shares[at], 0.0);
    }

    #[test]
    fn symmetry(seed in any::<u64>(), d in 2usize..=6, i in 0usize..6, j in 0usize..6) {
        let (i, j) = (i % d, j % d);
        prop_assume!(i != j);
        let g = symmetrized(&random_monotone_game(d, &mut rng(seed)), i, j);
        let z = symmetrized(&random_game_with_nulls(d, &mut rng(seed)), i, j);
        for shares in [
            shapley_coalitional(&g).shares,
            proportional_values(&g).unwrap().shares,
            pv0(&z).shares,
        ] {
            prop_assert!((shares[i] - shares[j]).abs() < AXIOM_TOL);
        }
    }

    #[test]
    fn shapley_self_duality(seed in any::<u64>(), d in 1usize..=6) {
        let g = random_monotone_game(d, &mut rng(seed));
        let a = shapley_coalitional(&g).shares;
        let b = shapley_coalitional(&g.dual()).shares;
        prop_assert!(max_abs_diff(&a, &b) < AXIOM_TOL);
    }

    #[test]
    fn balanced_contributions(seed in any::<u64>(), d in 2usize..=6) {
        let g = random_monotone_game(d, &mut rng(seed));
        prop_assert!(balanced_contributions_gap(&g) < AXIOM_TOL);
    }

    #[test]
    fn equal_proportional_gains(seed in any::<u64>(), d in 2usize..=6) {
        let g = random_monotone_game(d, &mut rng(seed));
        prop_assert!(equal_gains_gap(&g) < AXIOM_TOL);
    }

    #[test]
    fn positive_homogeneity(seed in any::<u64>(), d in 1usize..=6, c in 0.01f64..100.0) {
        let g = random_monotone_game(d, &mut rng(seed));
        let z = random_game_with_nulls(d.max(2), &mut rng(seed));
        let gc = g.scaled(c).unwrap();
        let zc = z.scaled(c).unwrap();
        let scale = |v: Vec<f64>| v.into_iter().map(|x| c * x).collect::<Vec<_>>();
        let tol = AXIOM_TOL * c.max(1.0);
        prop_assert!(max_abs_diff(&shapley_coalitional(&gc).shares, &scale(shapley_coalitional(&g).shares)) < tol);
        prop_assert!(max_abs_diff(
            &proportional_values(&gc).unwrap().shares,
            &scale(proportional_values(&g).unwrap().shares),
        ) < tol);
        prop_assert!(max_abs_diff(
            &proportional_values_extended(&zc, 0.0).unwrap().shares,
            &scale(pv0(&z).shares),
        ) < tol);
    }

    #[test]
    fn pv0_equals_pv_on_positive_games(seed in any::<u64>(), d in 1usize..=6) {
        let g = random_monotone_game(d, &mut rng(seed));
        prop_assert_eq!(pv0(&g).shares, proportional_values(&g).unwrap().shares);
    }

    #[test]
    fn largest_nulls_get_zero(seed in any::<u64>(), d in 2usize..=6) {
        let g = random_game_with_nulls(d, &mut rng(seed));
        let zs = gsa_core::allocation::zero_structure(&g, 0.0).unwrap();
        let shares = pv0(&g).shares;
        for i in 0..d {
            if zs.always_null.contains(i) {
                prop_assert_eq!(shares[i], 0.0);
            } else {
                prop_assert!(shares[i] > 0.0);
            }
        }
    }

    #[test]
    fn coalition_labels_round_trip(bits in 0u32..1 << 12) {
        let c = gsa_core::Coalition::new(bits, 12).unwrap();
        let players = gsa_core::Coalition::parse_label(&c.to_label()).unwrap();
        prop_assert_eq!(gsa_core::Coalition::from_players(&players, 12).unwrap(), c);
    }

    #[test]
    fn dual_is_an_involution(seed in any::<u64>(), d in 1usize..=6) {
        let g = random_monotone_game(d, &mut rng(seed));
        prop_assert!(max_abs_diff(g.dual().dual().values(), g.values()) < 1e-15);
    }
}
