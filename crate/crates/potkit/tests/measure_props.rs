use std::collections::BTreeMap;

use potkit::measure::{DyadicDensity, Measure, RegionSpec};
use proptest::prelude::*;

fn atoms3() -> impl Strategy<Value = Vec<(Vec<f64>, f64)>> {
    prop::collection::vec((prop::collection::vec(-2.0..2.0f64, 3), 0.01..3.0f64), 1..8)
}

fn dyadic2() -> impl Strategy<Value = Measure> {
    prop::collection::btree_map(prop::collection::vec(-3i64..3, 2), 0.05..2.0f64, 1..12).prop_map(|cells| {
        let cells: BTreeMap<Vec<i64>, f64> = cells;
        Measure::Dyadic(DyadicDensity::new(2, -1, cells).unwrap())
    })
}

fn any_measure() -> impl Strategy<Value = Measure> {
    prop_oneof![
        atoms3().prop_map(|a| Measure::atomic(3, a).unwrap()),
        (prop::collection::vec(-1.0..1.0f64, 3), 0.2..2.0f64, 0.1..5.0f64)
            .prop_map(|(c, r, m)| Measure::uniform_ball(c, r, m).unwrap()),
        (-2.5..1.0f64, 0.1..2.0f64, 0.5..3.0f64).prop_map(|(g, k, cut)| Measure::radial(vec![0.0; 3], g, k, Some(cut)).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ball_mass_is_monotone_in_radius(m in any_measure(), c in prop::collection::vec(-3.0..3.0f64, 3),
                                       mut radii in prop::collection::vec(0.0..6.0f64, 2..8)) {
        radii.sort_by(f64::total_cmp);
        let masses: Vec<f64> = radii.iter().map(|r| m.ball_mass(&c, *r).unwrap()).collect();
        for w in masses.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-9) - 1e-12, "{masses:?}");
        }
    }

    #[test]
    fn scaling_multiplies_ball_mass(m in any_measure(), c in prop::collection::vec(-3.0..3.0f64, 3),
                                    r in 0.01..5.0f64, lam in 0.01..50.0f64) {
        let a = m.scale(lam).unwrap().ball_mass(&c, r).unwrap();
        let b = lam * m.ball_mass(&c, r).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn restriction_is_additive_over_disjoint_balls(a in atoms3(), c in prop::collection::vec(-3.0..3.0f64, 3), r in 0.0..5.0f64) {
        let m = Measure::atomic(3, a).unwrap();
        let e1 = RegionSpec::ball(vec![-1.0, 0.0, 0.0], 0.9);
        let e2 = RegionSpec::ball(vec![1.0, 0.0, 0.0], 0.9);
        let both = RegionSpec::Union { members: vec![e1.clone(), e2.clone()], disjoint: true };
        let whole = m.restrict(&both).unwrap().ball_mass(&c, r).unwrap();
        let parts = m.restrict(&e1).unwrap().ball_mass(&c, r).unwrap() + m.restrict(&e2).unwrap().ball_mass(&c, r).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.max(1e-300));
    }

    #[test]
    fn dyadic_restriction_is_additive(m in dyadic2(), c in prop::collection::vec(-2.0..2.0f64, 2), r in 0.0..3.0f64) {
        let e1 = RegionSpec::cube(vec![-1, -1], 0, vec![0.0, 0.0]);
        let e2 = RegionSpec::cube(vec![0, 0], 0, vec![0.0, 0.0]);
        let both = RegionSpec::Union { members: vec![e1.clone(), e2.clone()], disjoint: true };
        let whole = m.restrict(&both).unwrap().ball_mass(&c, r).unwrap();
        let parts = m.restrict(&e1).unwrap().ball_mass(&c, r).unwrap() + m.restrict(&e2).unwrap().ball_mass(&c, r).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-10 * whole.max(1e-12), "{whole} vs {parts}");
    }

    #[test]
    fn atomic_profile_jumps_at_atom_distances(a in atoms3(), x in prop::collection::vec(-3.0..3.0f64, 3)) {
        let m = Measure::atomic(3, a.clone()).unwrap();
        let p = m.profile(&x).unwrap();
        let mut d: Vec<f64> = a.iter().map(|(q, _)| potkit::geometry::dist(q, &x)).filter(|v| *v > 0.0).collect();
        d.sort_by(f64::total_cmp);
        d.dedup();
        prop_assert_eq!(p.breakpoints(), d.clone());
        for w in d.iter() {
            // Open balls: the jump is felt just after the atom distance.
            prop_assert!(p.mass(*w * (1.0 + 1e-12)) > p.mass(*w));
        }
    }
}
