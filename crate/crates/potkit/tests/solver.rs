use potkit::measure::Measure;
use potkit::sampling::{SampleSet, ShellLayout};
use potkit::solver::{equivalence_check, sandwich, Equivalence, SandwichOptions, SandwichStatus};
use potkit::Exponents;

fn e323() -> Exponents {
    Exponents::new(3, 1.0, 2.0).unwrap()
}

#[test]
fn small_ball_sandwich_passes() {
    let m = Measure::uniform_ball(vec![0.0; 3], 1.0, 0.1).unwrap();
    let s = SampleSet::around(&m, &[0.0, 0.0, 0.0], ShellLayout::default(), 7).unwrap();
    let t = std::time::Instant::now();
    let r = sandwich(&m, &e323(), &s, &SandwichOptions::for_dim(3)).unwrap();
    eprintln!("{:?} {:?} it={} res={:e} {:?}", t.elapsed(), r.status, r.iterations, r.residual, r.constants);
    assert_eq!(r.status, SandwichStatus::Pass);
    assert!(r.residual < 1e-8);
}

#[test]
fn hardy_sandwich_passes() {
    let m = Measure::radial(vec![0.0; 3], -2.0, 0.02, Some(1.0)).unwrap();
    let s = SampleSet::around(&m, &[1.0, 0.0, 0.0], ShellLayout::default(), 7).unwrap();
    let t = std::time::Instant::now();
    let r = sandwich(&m, &e323(), &s, &SandwichOptions::for_dim(3)).unwrap();
    eprintln!("{:?} {:?} it={} res={:e} {:?}", t.elapsed(), r.status, r.iterations, r.residual, r.constants);
    assert_eq!(r.status, SandwichStatus::Pass);
}

#[test]
fn bounded_density_is_equivalent() {
    let m = Measure::uniform_ball(vec![0.0; 3], 1.0, 0.1).unwrap();
    let s = SampleSet::around(&m, &[0.0, 0.0, 0.0], ShellLayout::default(), 7).unwrap();
    let r = equivalence_check(&m, &e323(), &s, &SandwichOptions::for_dim(3)).unwrap();
    eprintln!("{:?} {} {}", r.verdict, r.sup, r.ratio);
    assert_eq!(r.verdict, Equivalence::Equivalent);
}

#[test]
fn picard_is_monotone_and_below_supersolution() {
    let m = Measure::uniform_ball(vec![0.0; 3], 1.0, 0.1).unwrap();
    let s = SampleSet::around(&m, &[0.0, 0.0, 0.0], ShellLayout::default(), 5).unwrap();
    let r = sandwich(&m, &e323(), &s, &SandwichOptions::for_dim(3)).unwrap();
    assert!(r.monotone);
    assert!(r.picard.iter().zip(&r.f0).all(|(u, f)| u >= f));
    assert!(r.picard.iter().zip(&r.upper).all(|(u, v)| u <= v));
}

#[test]
fn sandwich_is_translation_invariant() {
    let shift = [2.5, -1.0, 0.25];
    let m = Measure::uniform_ball(vec![0.0; 3], 1.0, 0.1).unwrap();
    let mt = Measure::uniform_ball(shift.to_vec(), 1.0, 0.1).unwrap();
    let s = SampleSet::around(&m, &[0.0, 0.0, 0.0], ShellLayout::default(), 5).unwrap();
    let st = SampleSet::around(&mt, &shift, ShellLayout::default(), 5).unwrap();
    let opts = SandwichOptions::for_dim(3);
    let a = sandwich(&m, &e323(), &s, &opts).unwrap();
    let b = sandwich(&mt, &e323(), &st, &opts).unwrap();
    assert_eq!(a.status, b.status);
    for (x, y) in a.picard.iter().zip(&b.picard) {
        assert!((x - y).abs() <= 1e-6 * x.abs(), "{x} vs {y}");
    }
}
