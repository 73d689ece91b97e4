use potkit::measure::{Measure, Resolution};
use potkit::operator::{iterate_n, DiscreteOperator};
use potkit::sampling::{SampleSet, ShellLayout};
use potkit::solver::{sandwich, SandwichOptions, SandwichStatus};
use potkit::Exponents;
use proptest::prelude::*;

fn atoms() -> impl Strategy<Value = Vec<(Vec<f64>, f64)>> {
    prop::collection::vec((prop::collection::vec(-2.0..2.0f64, 3), 0.01..1.0f64), 1..6)
}

// (α, s) admissible in 3D: αs < 3, s > 1.
fn exps() -> impl Strategy<Value = Exponents> {
    (1.2..2.8f64, 0.3..1.0f64).prop_map(|(s, frac)| Exponents::new(3, frac * 2.9 / s, s).unwrap())
}

fn setup(a: Vec<(Vec<f64>, f64)>, e: Exponents) -> DiscreteOperator {
    let m = Measure::atomic(3, a).unwrap();
    DiscreteOperator::new(&m, e, Resolution::for_dim(3)).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

const X: [f64; 3] = [3.1, -0.4, 0.7];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneous_of_degree_one(a in atoms(), e in exps(), lam in 0.01..100.0f64, seed in 0.1..5.0f64) {
        let op = setup(a, e);
        let f: Vec<f64> = (0..op.nodes().len()).map(|i| seed + i as f64).collect();
        let g: Vec<f64> = f.iter().map(|v| lam * v).collect();
        prop_assert!(rel(op.eval(&g, &X), lam * op.eval(&f, &X)) < 1e-10);
    }

    #[test]
    fn monotone_in_f(a in atoms(), e in exps(), bumps in prop::collection::vec(0.0..3.0f64, 6)) {
        let op = setup(a, e);
        let f: Vec<f64> = (0..op.nodes().len()).map(|i| 1.0 + i as f64 * 0.5).collect();
        let g: Vec<f64> = f.iter().zip(&bumps).map(|(v, b)| v + b).collect();
        prop_assert!(op.eval(&f, &X) <= op.eval(&g, &X) * (1.0 + 1e-12));
    }

    #[test]
    fn superadditive_or_transformed(a in atoms(), e in exps(), p in prop::collection::vec(0.0..2.0f64, 6), q in prop::collection::vec(0.0..2.0f64, 6)) {
        let op = setup(a, e);
        let k = op.nodes().len();
        let (f, g) = (&p[..k], &q[..k]);
        if e.s() <= 2.0 {
            let fg: Vec<f64> = f.iter().zip(g).map(|(a, b)| a + b).collect();
            prop_assert!(op.eval(&fg, &X) >= (op.eval(f, &X) + op.eval(g, &X)) * (1.0 - 1e-12));
        } else {
            // T(h) = N(h^{1/(s-1)})^{s-1}
            let s1 = e.s() - 1.0;
            let t = |h: &[f64]| {
                let r: Vec<f64> = h.iter().map(|v| v.powf(1.0 / s1)).collect();
                op.eval(&r, &X).powf(s1)
            };
            let fg: Vec<f64> = f.iter().zip(g).map(|(a, b)| a + b).collect();
            prop_assert!(t(&fg) >= (t(f) + t(g)) * (1.0 - 1e-12));
        }
    }
}

#[test]
fn picard_limit_dominates_weighted_partial_sums() {
    let e = Exponents::new(3, 1.0, 1.5).unwrap();
    let m = Measure::uniform_ball(vec![0.0; 3], 1.0, 0.1).unwrap();
    let samples = SampleSet::around(&m, &[0.0; 3], ShellLayout::default(), 5).unwrap();
    let opts = SandwichOptions::for_dim(3);
    let r = sandwich(&m, &e, &samples, &opts).unwrap();
    assert_eq!(r.status, SandwichStatus::Pass);
    let c = r.constants.picard_constant;
    let its = iterate_n(&m, 4, &e, &samples, opts.resolution).unwrap();
    let mut partial = r.f0.clone();
    let mut prev = partial.clone();
    for (j, nj) in its.values.iter().enumerate() {
        let w = c.powi(j as i32 + 1);
        partial.iter_mut().zip(nj).for_each(|(p, v)| *p += w * v);
        assert!(partial.iter().zip(&prev).all(|(a, b)| a >= b));
        prev.clone_from(&partial);
        for (u, p) in r.picard.iter().zip(&partial) {
            assert!(*u >= p * (1.0 - 1e-9), "J={} u={u} partial={p}", j + 1);
        }
    }
}
