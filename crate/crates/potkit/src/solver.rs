//! The explicit supersolution, Picard iteration, constant fitting and the
//! sandwich lower ≤ solution ≤ supersolution on a sample set.

use std::collections::BTreeMap;
use std::sync::Mutex;

use crate::dyadic::{energy_moments, moment_constant};
use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::geometry::{dist, Point};
use crate::measure::{Measure, RegionSpec, Resolution};
use crate::operator::{
    combined_bound, kernel_value, local_potentials, DiscreteOperator, IterationLedger, LowerConstants, PointOperator,
};
use crate::potential::{riesz, wolff};
use crate::sampling::{SampleOrigin, SampleSet};

/// v(x) = B·|x−x₀|^{kernelExp}·exp(β·Σ_{ℓ≤j_x} 2^{ℓ(αs−n)}σ(B(x₀,2^{ℓ+1})))
///        ·exp(β·W^{|x−x₀|}σ(x)).
#[derive(Debug)]
pub struct SupersolutionSpec {
    pub beta: f64,
    pub prefactor: f64,
    pub pole: Point,
    pub exponents: Exponents,
    pub measure: Measure,
    /// ∫₀¹ σ(B(x₀, r))/r^{n−αs} dr/r.
    pub b_riesz: f64,
    ball_sums: Mutex<BTreeMap<i32, f64>>,
}

impl Clone for SupersolutionSpec {
    fn clone(&self) -> Self {
        SupersolutionSpec {
            beta: self.beta,
            prefactor: self.prefactor,
            pole: self.pole.clone(),
            exponents: self.exponents,
            measure: self.measure.clone(),
            b_riesz: self.b_riesz,
            ball_sums: Mutex::new(self.ball_sums.lock().expect("cache").clone()),
        }
    }
}

impl SupersolutionSpec {
    pub fn new(measure: Measure, pole: impl Into<Point>, exponents: Exponents, beta: f64, prefactor: f64) -> Result<Self> {
        let pole = pole.into();
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Precondition(format!("beta = {beta} must be positive")));
        }
        if !(prefactor > 0.0) || !prefactor.is_finite() {
            return Err(Error::Precondition(format!("prefactor = {prefactor} must be positive")));
        }
        if pole.dim() != measure.dim() || exponents.n() != measure.dim() {
            return Err(Error::DimensionMismatch { expected: measure.dim(), got: pole.dim() });
        }
        let b_riesz = riesz(&measure, exponents.alpha_s(), &pole, 1.0)?;
        Ok(SupersolutionSpec { beta, prefactor, pole, exponents, measure, b_riesz, ball_sums: Mutex::new(BTreeMap::new()) })
    }

    /// Whether the hypothesis B_riesz < ∞ holds; without it v ≡ ∞.
    pub fn has_finite_riesz(&self) -> bool {
        self.b_riesz.is_finite()
    }

    /// Σ_{ℓ≤j} 2^{ℓ(αs−n)} σ(B(x₀, 2^{ℓ+1})).
    pub fn ball_sum(&self, j: i32) -> Result<f64> {
        if let Some(v) = self.ball_sums.lock().expect("cache").get(&j) {
            return Ok(*v);
        }
        let w = self.exponents.alpha_s() - self.exponents.n() as f64;
        let mut sum = 0.0;
        let mut small = 0;
        for l in (j - 2000..=j).rev() {
            let mass = self.measure.ball_mass(&self.pole, ((l + 1) as f64).exp2())?;
            if mass == 0.0 {
                break;
            }
            let term = (l as f64 * w).exp2() * mass;
            sum += term;
            if term <= 1e-14 * sum {
                small += 1;
                if small >= 8 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        self.ball_sums.lock().expect("cache").insert(j, sum);
        Ok(sum)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let d = dist(x, &self.pole);
        if d == 0.0 {
            return Err(Error::Precondition("supersolution is not evaluated at the pole".into()));
        }
        if !self.has_finite_riesz() {
            return Ok(f64::INFINITY);
        }
        let e = &self.exponents;
        let base = self.prefactor * d.powf(e.kernel_exp());
        if self.measure.is_zero() {
            return Ok(base);
        }
        let jx = d.log2().floor() as i32;
        let s = self.ball_sum(jx)?;
        let w = wolff(&self.measure, e, x, d)?;
        let expo = self.beta * (s + w);
        Ok(if expo.is_infinite() { f64::INFINITY } else { base * expo.exp() })
    }
}

/// Outcome of checking v ≥ C₀·N(v) on a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    /// inf of v/N(v) over the points (∞ when N(v) vanishes everywhere).
    pub c0: f64,
    /// Point index where the infimum is attained.
    pub worst: Option<usize>,
    /// Points where both v and N(v) were infinite and were skipped.
    pub flagged: Vec<usize>,
    /// v decreases across the three outermost sampled shells.
    pub decays: bool,
    /// v on every point of the operator.
    pub values: Vec<f64>,
}

/// inf over the operator's points of v/N(v).
pub fn verify_supersolution(spec: &SupersolutionSpec, op: &PointOperator, samples: &SampleSet) -> Result<Verification> {
    if op.points().is_empty() {
        return Err(Error::Precondition("no points to verify on".into()));
    }
    let v: Vec<f64> = op.points().iter().map(|p| spec.eval(p)).collect::<Result<_>>()?;
    let nv = op.apply(&v);
    let mut c0 = f64::INFINITY;
    let mut worst = None;
    let mut flagged = Vec::new();
    for (i, (a, b)) in v.iter().zip(&nv).enumerate() {
        if a.is_infinite() && b.is_infinite() {
            flagged.push(i);
            continue;
        }
        let ratio = if *b == 0.0 { f64::INFINITY } else { a / b };
        if ratio < c0 {
            c0 = ratio;
            worst = Some(i);
        }
    }
    if flagged.len() == v.len() {
        return Err(Error::Degenerate("v and N(v) are infinite at every point".into()));
    }
    Ok(Verification { c0, worst, flagged, decays: outer_decay(&v, samples), values: v })
}

/// Max of v over each of the three largest shells, strictly decreasing.
fn outer_decay(v: &[f64], samples: &SampleSet) -> bool {
    let mut per_shell: BTreeMap<usize, f64> = BTreeMap::new();
    for (i, o) in samples.origins.iter().enumerate() {
        if let SampleOrigin::Shell { shell, .. } = o {
            let e = per_shell.entry(*shell).or_insert(0.0);
            *e = e.max(v[i]);
        }
    }
    let outer: Vec<f64> = per_shell.values().rev().take(3).copied().collect();
    outer.len() == 3 && outer[0] < outer[1] && outer[1] < outer[2]
}

/// Stopping rules for the Picard scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub max_m: usize,
    pub divergence_cap: f64,
    /// Relative sup-change below which the iteration stops.
    pub tol: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { max_m: 64, divergence_cap: 1e12, tol: 1e-10 }
    }
}

/// Picard iterates and the final values on every operator point.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardRun {
    pub ledger: IterationLedger,
    /// u₀ = f₀ on every operator point.
    pub f0: Vec<f64>,
    /// Last iterate on every operator point.
    pub limit: Vec<f64>,
    pub constant: f64,
}

/// u₀ = f₀, u_{m+1} = c·N(u_m) + f₀ on the operator's points.
pub fn picard_iterate(op: &PointOperator, c: f64, pole: &[f64], opts: PicardOptions) -> Result<PicardRun> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Precondition(format!("Picard constant {c} must be positive and finite")));
    }
    let e = *op.operator().exponents();
    let f0: Vec<f64> = op.points().iter().map(|p| kernel_value(pole, &e, p)).collect();
    if f0.iter().any(|v| v.is_infinite()) {
        return Err(Error::Precondition("a sample or node sits on the pole".into()));
    }
    let k = op.requested();
    let mut cur = f0.clone();
    let mut history = vec![cur[..k].to_vec()];
    let mut converged = false;
    for _ in 0..opts.max_m {
        let nu = op.apply(&cur);
        let next: Vec<f64> = nu.iter().zip(&f0).map(|(a, b)| c * a + b).collect();
        let change = next
            .iter()
            .zip(&cur)
            .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() / a.abs() })
            .fold(0.0, f64::max);
        let blown = next.iter().any(|v| !v.is_finite() || *v > opts.divergence_cap);
        cur = next;
        history.push(cur[..k].to_vec());
        if blown {
            break;
        }
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(PicardRun { ledger: IterationLedger::build(history, converged, opts.divergence_cap), f0, limit: cur, constant: c })
}

/// Constants chosen or fitted during a sandwich run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsLedger {
    /// sup of σ(B(y, r))/r^{n−αs} over the growth probes.
    pub c_sigma: f64,
    /// Fitted moment constant Ĉ with M_m ≤ Ĉ^m m! σ(E), m = 1..6.
    pub c_hat: f64,
    pub c0: f64,
    pub picard_constant: f64,
    pub beta: f64,
    pub prefactor: f64,
    pub b_riesz: f64,
    pub c1: f64,
    pub c2: f64,
    pub halvings: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SandwichStatus {
    Pass,
    Fail,
    /// No β in the halving schedule gave C₀ > 0.
    NotConstructible,
    /// B_riesz = ∞: no finite fundamental solution.
    NoFiniteSolution,
    /// Picard hit the divergence cap or the iteration limit.
    Diverged,
}

impl SandwichStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SandwichStatus::Pass => "pass",
            SandwichStatus::Fail => "fail",
            SandwichStatus::NotConstructible => "not-constructible",
            SandwichStatus::NoFiniteSolution => "no-finite-solution",
            SandwichStatus::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub samples: SampleSet,
    pub radii: Vec<f64>,
    pub f0: Vec<f64>,
    pub lower: Vec<f64>,
    pub picard: Vec<f64>,
    pub upper: Vec<f64>,
    /// Local potentials (W^{|x−x₀|}σ(x), I^{|x−x₀|}_{αs}σ(x₀)) per sample.
    pub local: Vec<(f64, f64)>,
    pub verdicts: Vec<bool>,
    pub constants: ConstantsLedger,
    pub status: SandwichStatus,
    pub iterations: usize,
    pub monotone: bool,
    /// max over all points of |u − (c·N(u) + f₀)|/u.
    pub residual: f64,
    pub decays: bool,
}

/// Knobs of a sandwich run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichOptions {
    pub prefactor: f64,
    /// Fixed β; fitted from the moment constant when `None`.
    pub beta: Option<f64>,
    pub max_halvings: u32,
    pub picard: PicardOptions,
    pub resolution: Resolution,
    pub c2_min: f64,
    pub c2_max: f64,
    pub c2_count: usize,
    /// Relative slack in the ordering checks.
    pub slack: f64,
}

impl SandwichOptions {
    pub fn for_dim(n: usize) -> Self {
        SandwichOptions {
            prefactor: 2.0,
            beta: None,
            max_halvings: 20,
            picard: PicardOptions::default(),
            resolution: Resolution::for_dim(n),
            c2_min: 1e-3,
            c2_max: 10.0,
            c2_count: 16,
            slack: 1e-9,
        }
    }
}

/// sup over probe balls of σ(B(y, r))/r^{n−αs}: centres at the nodes and the
/// pole, radii 2^k·scale for k = −8..=4.
pub fn ball_growth(measure: &Measure, centers: &[Point], scale: f64, e: &Exponents) -> Result<f64> {
    let w = e.n() as f64 - e.alpha_s();
    let mut sup: f64 = 0.0;
    for c in centers {
        for k in -8..=4 {
            let r = scale * (k as f64).exp2();
            sup = sup.max(measure.ball_mass(c, r)? / r.powf(w));
        }
    }
    Ok(sup)
}

/// Ĉ from the first six energy moments of σ on a ball holding its support.
pub fn fitted_moment_constant(measure: &Measure, e: &Exponents, res: Resolution) -> Result<f64> {
    if measure.is_zero() {
        return Ok(0.0);
    }
    let Some((c, r)) = measure.support_ball() else {
        return Ok(f64::INFINITY);
    };
    let region = RegionSpec::ball(c, r * (1.0 + 1e-9) + 1e-300);
    let moments = energy_moments(measure, &region, 6, e, res)?;
    Ok(moment_constant(&moments, measure.total_mass()))
}

/// Runs the whole construction on the samples and reports the ordering.
pub fn sandwich(measure: &Measure, e: &Exponents, samples: &SampleSet, opts: &SandwichOptions) -> Result<SandwichReport> {
    let pole = samples.pole.clone();
    let op = PointOperator::new(DiscreteOperator::new(measure, *e, opts.resolution)?, &samples.points);
    let k = samples.len();
    let mut centers = op.operator().node_points();
    centers.push(pole.clone());
    let c_sigma = ball_growth(measure, &centers, samples.scale, e)?;
    let c_hat = fitted_moment_constant(measure, e, opts.resolution)?;
    let mut beta = opts.beta.unwrap_or(if c_hat > 0.0 && c_hat.is_finite() { 0.5 / c_hat } else { 1.0 });
    let mut halvings = 0;
    let radii = samples.radii();
    let kexp = e.kernel_exp();
    let f0: Vec<f64> = radii.iter().map(|d| d.powf(kexp)).collect();

    let mut constants = ConstantsLedger {
        c_sigma,
        c_hat,
        c0: 0.0,
        picard_constant: 0.0,
        beta,
        prefactor: opts.prefactor,
        b_riesz: 0.0,
        c1: 0.0,
        c2: 0.0,
        halvings: 0,
    };
    let empty = |status, constants, decays| SandwichReport {
        samples: samples.clone(),
        radii: radii.clone(),
        f0: f0.clone(),
        lower: vec![0.0; k],
        picard: vec![f64::NAN; k],
        upper: vec![f64::INFINITY; k],
        local: vec![(f64::NAN, f64::NAN); k],
        verdicts: vec![false; k],
        constants,
        status,
        iterations: 0,
        monotone: false,
        residual: f64::NAN,
        decays,
    };

    let ver = loop {
        let spec = SupersolutionSpec::new(measure.clone(), pole.clone(), *e, beta, opts.prefactor)?;
        constants.b_riesz = spec.b_riesz;
        if !spec.has_finite_riesz() {
            return Ok(empty(SandwichStatus::NoFiniteSolution, constants, false));
        }
        let ver = verify_supersolution(&spec, &op, samples)?;
        let ok = ver.c0 > 0.0 && ver.values.iter().all(|v| v.is_finite());
        if ok {
            break ver;
        }
        if halvings >= opts.max_halvings {
            constants.c0 = ver.c0;
            return Ok(empty(SandwichStatus::NotConstructible, constants, ver.decays));
        }
        halvings += 1;
        beta *= 0.5;
        constants.beta = beta;
    };
    constants.halvings = halvings;
    constants.c0 = ver.c0;
    let c = if ver.c0.is_infinite() { 1.0 } else { ver.c0 * (1.0 - 1.0 / opts.prefactor) };
    constants.picard_constant = c;
    let run = picard_iterate(&op, c, &pole, opts.picard)?;
    let nu = op.apply(&run.limit);
    let residual = run
        .limit
        .iter()
        .zip(nu.iter().zip(&run.f0))
        .map(|(u, (n, f))| ((u - (c * n + f)) / u).abs())
        .fold(0.0, f64::max);
    let picard: Vec<f64> = run.limit[..k].to_vec();
    let upper: Vec<f64> = ver.values[..k].to_vec();

    let local: Vec<(f64, f64)> = samples.points.iter().map(|x| local_potentials(measure, x, &pole, e)).collect::<Result<_>>()?;
    let (c1, c2) = fit_lower_constants(&picard, &f0, &local, opts);
    constants.c1 = c1;
    constants.c2 = c2;
    let lc = LowerConstants { c1, c2 };
    let lower: Vec<f64> = radii.iter().zip(&local).map(|(d, (w, i))| combined_bound(lc, *d, kexp, *w, *i)).collect();
    let slack = 1.0 + opts.slack;
    let verdicts: Vec<bool> = lower
        .iter()
        .zip(&picard)
        .zip(&upper)
        .map(|((l, u), v)| *l <= u * slack && *u <= v * slack)
        .collect();
    let status = if run.ledger.diverged_at.is_some() || !run.ledger.converged {
        SandwichStatus::Diverged
    } else if verdicts.iter().all(|v| *v) {
        SandwichStatus::Pass
    } else {
        SandwichStatus::Fail
    };
    Ok(SandwichReport {
        samples: samples.clone(),
        radii,
        f0,
        lower,
        picard,
        upper,
        local,
        verdicts,
        constants,
        status,
        iterations: run.ledger.m - 1,
        monotone: run.ledger.monotone,
        residual,
        decays: ver.decays,
    })
}

/// Largest c₁ over the c₂ grid with c₁·f₀·exp(c₂(W + I)) ≤ u at every sample;
/// ties go to the larger c₂.
fn fit_lower_constants(u: &[f64], f0: &[f64], local: &[(f64, f64)], opts: &SandwichOptions) -> (f64, f64) {
    let count = opts.c2_count.max(1);
    let mut best = (0.0, opts.c2_min);
    for j in 0..count {
        let t = if count == 1 { 0.0 } else { j as f64 / (count - 1) as f64 };
        let c2 = opts.c2_min * (opts.c2_max / opts.c2_min).powf(t);
        let c1 = u
            .iter()
            .zip(f0)
            .zip(local)
            .map(|((u, f), (w, i))| u / (f * (c2 * (w + i)).exp()))
            .fold(f64::INFINITY, f64::min);
        if c1 >= best.0 {
            best = (c1, c2);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    NotEquivalent,
    Undetermined,
}

impl Equivalence {
    pub fn label(&self) -> &'static str {
        match self {
            Equivalence::Equivalent => "equivalent",
            Equivalence::NotEquivalent => "not-equivalent",
            Equivalence::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub verdict: Equivalence,
    /// Which potential was bounded: I_{αs} for s ≤ 2, W_{α,s} for s > 2.
    pub potential: &'static str,
    /// sup over the probes of the global potential.
    pub sup: f64,
    /// Potential at each sample.
    pub values: Vec<f64>,
    /// sup over samples of upper/lower from the sandwich (NaN if not run).
    pub ratio: f64,
    pub reason: String,
}

/// Decides whether perturbed and unperturbed fundamental solutions are
/// comparable, from the global potential bound and the sandwich ratio.
pub fn equivalence_check(measure: &Measure, e: &Exponents, samples: &SampleSet, opts: &SandwichOptions) -> Result<EquivalenceReport> {
    let use_riesz = e.s() <= 2.0;
    let potential = if use_riesz { "riesz" } else { "wolff" };
    let eval = |x: &[f64]| -> Result<f64> {
        if use_riesz {
            riesz(measure, e.alpha_s(), x, f64::INFINITY)
        } else {
            wolff(measure, e, x, f64::INFINITY)
        }
    };
    let values: Vec<f64> = samples.points.iter().map(|x| eval(x)).collect::<Result<_>>()?;
    let mut report = EquivalenceReport {
        verdict: Equivalence::Undetermined,
        potential,
        sup: values.iter().copied().fold(0.0, f64::max),
        values,
        ratio: f64::NAN,
        reason: String::new(),
    };
    if measure.is_zero() {
        report.verdict = Equivalence::Equivalent;
        report.ratio = opts.prefactor;
        report.reason = "zero measure".into();
        return Ok(report);
    }
    if measure.is_atomic() {
        report.sup = f64::INFINITY;
        report.verdict = Equivalence::NotEquivalent;
        report.reason = "the potential is infinite at every atom".into();
        return Ok(report);
    }
    if measure.support_ball().is_none() {
        report.reason = "unbounded support without a decay certificate".into();
        return Ok(report);
    }
    // Probe the support as well as the samples.
    let op = DiscreteOperator::new(measure, *e, opts.resolution)?;
    for p in op.node_points() {
        report.sup = report.sup.max(eval(&p)?);
    }
    if let Measure::Radial(rd) = measure {
        report.sup = report.sup.max(eval(&rd.center)?);
    }
    if report.sup.is_infinite() {
        report.verdict = Equivalence::NotEquivalent;
        report.reason = format!("the global {potential} potential is unbounded");
        return Ok(report);
    }
    let sw = sandwich(measure, e, samples, opts)?;
    report.ratio = sw.upper.iter().zip(&sw.lower).map(|(u, l)| u / l).fold(0.0, f64::max);
    if sw.status == SandwichStatus::Pass && report.ratio.is_finite() {
        report.verdict = Equivalence::Equivalent;
        report.reason = "bounded potential and a passing sandwich".into();
    } else {
        report.reason = format!("sandwich status {}", sw.status.label());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::ShellLayout;

    fn e323() -> Exponents {
        Exponents::new(3, 1.0, 2.0).unwrap()
    }

    #[test]
    fn zero_measure_supersolution_is_the_kernel() {
        let z = Measure::zero(3);
        for beta in [0.5, 1.0] {
            let v = SupersolutionSpec::new(z.clone(), vec![0.0; 3], e323(), beta, 1.0).unwrap();
            assert_eq!(v.eval(&[2.0, 0.0, 0.0]).unwrap(), 0.5);
        }
    }

    #[test]
    fn zero_measure_sandwich() {
        let z = Measure::zero(3);
        let s = SampleSet::around(&z, &[0.0; 3], ShellLayout::default(), 3).unwrap();
        let r = sandwich(&z, &e323(), &s, &SandwichOptions::for_dim(3)).unwrap();
        assert_eq!(r.status, SandwichStatus::Pass);
        assert_eq!(r.picard, r.f0);
        assert_eq!(r.constants.c0, f64::INFINITY);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn atomic_is_not_equivalent() {
        let m = Measure::delta(vec![1.0, 0.0, 0.0], 0.1).unwrap();
        let s = SampleSet::around(&m, &[0.0; 3], ShellLayout { shells: 2, directions: 2, ..Default::default() }, 3).unwrap();
        let r = equivalence_check(&m, &e323(), &s, &SandwichOptions::for_dim(3)).unwrap();
        assert_eq!(r.verdict, Equivalence::NotEquivalent);
    }
}
