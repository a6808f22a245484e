mod common;

use common::{arb_measure, atoms_measure, bl_oracle};
use hs_core::measure::{bl_distance, pushforward};
use hs_core::{MonotoneFn, Side};
use proptest::prelude::*;

proptest! {
    #[test]
    fn cdf_is_monotone_and_reaches_total_mass(mu in arb_measure(), xs in prop::collection::vec(-6.0f64..6.0, 2..20)) {
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        for w in xs.windows(2) {
            prop_assert!(mu.cdf(w[0], Side::Left) <= mu.cdf(w[1], Side::Left));
            prop_assert!(mu.cdf(w[0], Side::Left) <= mu.cdf(w[0], Side::Right));
        }
        prop_assert!((mu.cdf(1e9, Side::Right) - mu.total_mass()).abs() <= 1e-12 * (1.0 + mu.total_mass()));
    }

    #[test]
    fn pseudo_inverse_undoes_a_strictly_increasing_distribution(mu in arb_measure(), x in -6.0f64..6.0) {
        // x + F(x) is strictly increasing, so its pseudo-inverse recovers x.
        let f = mu.distribution();
        let g = MonotoneFn::new(
            f.nodes().iter().map(|n| hs_core::measure::MonotoneNode { x: n.x, left: n.left + n.x, right: n.right + n.x }).collect(),
            1.0,
            1.0,
        ).unwrap();
        let level = g.eval_side(x, Side::Left);
        let back = g.pseudo_inverse(level).unwrap();
        prop_assert!((back - x).abs() < 1e-9, "{back} vs {x}");
    }

    #[test]
    fn pushforward_preserves_mass(
        gaps in prop::collection::vec((0.0f64..1.0, 0.0f64..2.0), 1..8),
    ) {
        let mut xi = vec![0.0];
        let mut y = vec![0.0];
        let mut weights = Vec::new();
        for (dy, w) in &gaps {
            xi.push(xi.last().unwrap() + 1.0);
            // Every other cell a plateau.
            y.push(y.last().unwrap() + if weights.len() % 2 == 0 { *dy } else { 0.0 });
            weights.push(*w);
        }
        let mu = pushforward(&xi, &y, &weights).unwrap();
        let total: f64 = weights.iter().sum();
        prop_assert!((mu.total_mass() - total).abs() <= 1e-12 * (1.0 + total));
    }

    #[test]
    fn bl_distance_is_a_metric(a in arb_measure(), b in arb_measure(), c in arb_measure()) {
        let d = |p, q| bl_distance(p, q, 1e-2);
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-12);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }

    #[test]
    fn bl_distance_of_atoms_matches_linear_program(
        mu in prop::collection::vec((-3.0f64..3.0, 0.0f64..2.0), 1..=3),
        nu in prop::collection::vec((-3.0f64..3.0, 0.0f64..2.0), 1..=3),
    ) {
        let got = bl_distance(&atoms_measure(&dedup(mu.clone())), &atoms_measure(&dedup(nu.clone())), 1e-3);
        let want = bl_oracle(&dedup(mu), &dedup(nu));
        prop_assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn two_diracs_are_min_of_distance_and_two(d in 1e-6f64..10.0) {
        let got = bl_distance(&atoms_measure(&[(0.0, 1.0)]), &atoms_measure(&[(d, 1.0)]), 1e-3);
        prop_assert!((got - d.min(2.0)).abs() < 1e-12);
        prop_assert!((bl_oracle(&[(0.0, 1.0)], &[(d, 1.0)]) - d.min(2.0)).abs() < 1e-9);
    }
}

fn dedup(mut atoms: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    atoms.dedup_by(|a, b| a.0 == b.0);
    atoms
}
