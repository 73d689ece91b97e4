//! The operator N(f) = W_{α,s}(f^{s−1} dσ), its iterates on a sample set,
//! and the explicit lower bounds for N^m(f₀).
//!
//! Densities are replaced by the node layout of [`discretize`]: N acts on
//! the values of f at the nodes, each node carrying its mass smeared over a
//! small ball. For atomic measures this is exact.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::geometry::{dist, lens_volume, unit_ball_volume, Point};
use crate::measure::{discretize, Measure, Node, Resolution};
use crate::potential::{riesz, wolff, Kernel};
use crate::quadrature::{cosine_mapped, gauss_legendre};
use crate::sampling::SampleSet;
use crate::solver::SupersolutionSpec;

/// Values of f tabulated at an exact point set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tabulation {
    values: HashMap<Vec<u64>, f64>,
}

impl Tabulation {
    pub fn new(points: &[Point], values: &[f64]) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::Precondition(format!("{} points but {} values", points.len(), values.len())));
        }
        Ok(Tabulation { values: points.iter().map(|p| p.key()).zip(values.iter().copied()).collect() })
    }

    pub fn get(&self, x: &[f64]) -> Result<f64> {
        self.values.get(&Point::from(x).key()).copied().ok_or_else(|| Error::NotTabulated(x.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A nonnegative function on R^n, possibly +∞ at some points.
#[derive(Debug, Clone)]
pub enum FieldFunction {
    /// f₀(x) = |x − x₀|^{(αs−n)/(s−1)}.
    Kernel { pole: Point, exponents: Exponents },
    Supersolution(Arc<SupersolutionSpec>),
    /// Defined only on the tabulated points.
    Tabulated(Tabulation),
}

impl FieldFunction {
    pub fn kernel(pole: impl Into<Point>, exponents: Exponents) -> Self {
        FieldFunction::Kernel { pole: pole.into(), exponents }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            FieldFunction::Kernel { pole, exponents } => Ok(kernel_value(pole, exponents, x)),
            FieldFunction::Supersolution(spec) => spec.eval(x),
            FieldFunction::Tabulated(t) => t.get(x),
        }
    }
}

/// |x − x₀|^{(αs−n)/(s−1)}, +∞ at the pole.
pub fn kernel_value(pole: &[f64], e: &Exponents, x: &[f64]) -> f64 {
    let d = dist(pole, x);
    if d == 0.0 {
        f64::INFINITY
    } else {
        d.powf(e.kernel_exp())
    }
}

/// N restricted to functions known at the nodes of a discretised measure.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    exponents: Exponents,
    nodes: Vec<Node>,
    atomic: bool,
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

impl DiscreteOperator {
    pub fn new(measure: &Measure, exponents: Exponents, res: Resolution) -> Result<Self> {
        if measure.dim() != exponents.n() {
            return Err(Error::DimensionMismatch { expected: exponents.n(), got: measure.dim() });
        }
        let nodes = discretize(measure, res)?;
        Ok(DiscreteOperator { exponents, atomic: nodes.iter().all(|q| q.radius == 0.0), nodes })
    }

    pub fn exponents(&self) -> &Exponents {
        &self.exponents
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_points(&self) -> Vec<Point> {
        self.nodes.iter().map(|q| q.point.clone()).collect()
    }

    /// Whether f ↦ N(f) is linear (s = 2).
    pub fn is_linear(&self) -> bool {
        self.exponents.s() == 2.0
    }

    /// N(f)(x) for the values `f` of f at the nodes.
    pub fn eval(&self, f: &[f64], x: &[f64]) -> f64 {
        if self.is_linear() {
            return self.row(x).iter().zip(f).map(|(k, v)| times(*k, *v)).sum();
        }
        let s1 = self.exponents.s() - 1.0;
        let w: Vec<f64> = self.nodes.iter().zip(f).map(|(q, v)| times(q.mass, v.powf(s1))).collect();
        self.wolff_of_weights(&w, x)
    }

    /// The kernel row k_i with N(f)(x) = Σ_i k_i f_i when s = 2.
    pub fn row(&self, x: &[f64]) -> Vec<f64> {
        let e = self.exponents.kernel_exp();
        let n = self.exponents.n();
        self.nodes
            .iter()
            .map(|q| q.mass * unit_blob_potential(n, e, dist(&q.point, x), q.radius))
            .collect()
    }

    /// W(Σ w_i U_i)(x) for node weights w_i.
    fn wolff_of_weights(&self, w: &[f64], x: &[f64]) -> f64 {
        let k = Kernel::wolff(&self.exponents);
        let n = self.exponents.n();
        let vn = unit_ball_volume(n);
        let blobs: Vec<Blob> = self
            .nodes
            .iter()
            .zip(w)
            .filter(|(_, w)| **w > 0.0)
            .map(|(q, w)| Blob::new(dist(&q.point, x), q.radius, *w))
            .collect();
        if blobs.is_empty() {
            return 0.0;
        }
        if blobs.iter().any(|b| b.w.is_infinite()) {
            return f64::INFINITY;
        }
        let total: f64 = blobs.iter().map(|b| b.w).sum();
        if self.atomic {
            let mut pairs: Vec<(f64, f64)> = blobs.iter().map(|b| (b.d, b.w)).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pairs[0].0 == 0.0 {
                return f64::INFINITY;
            }
            let mut acc = 0.0;
            let mut sum = 0.0;
            for (i, (d, m)) in pairs.iter().enumerate() {
                acc += m;
                let hi = pairs.get(i + 1).map_or(f64::INFINITY, |p| p.0);
                if hi > *d {
                    sum += piece(k, acc, *d, hi);
                }
            }
            return sum;
        }
        // Below r0 the mass is exactly ρ0·|B(x, r)|.
        let r0 = blobs.iter().map(|b| b.inner_edge()).fold(f64::INFINITY, f64::min);
        let rho0: f64 = blobs.iter().filter(|b| b.d < b.h).map(|b| b.w / (vn * b.h.powi(n as i32))).sum();
        let q = k.a * n as f64 + k.e;
        let mut sum = if rho0 > 0.0 { (rho0 * vn).powf(k.a) * r0.powf(q) / q } else { 0.0 };
        let r_sat = blobs.iter().map(|b| b.d + b.h).fold(0.0, f64::max);
        sum += piece(k, total, r_sat, f64::INFINITY);
        if r_sat > r0 {
            let profile = BlobProfile::new(n, blobs);
            let (lo, hi) = (r0.ln(), r_sat.ln());
            let panels = ((2.0 * (hi - lo) / std::f64::consts::LN_2).ceil() as usize).clamp(8, 96);
            let (xs, ws) = gl8();
            let width = (hi - lo) / panels as f64;
            for p in 0..panels {
                let a = lo + p as f64 * width;
                for (z, wt) in xs.iter().zip(ws) {
                    let u = a + 0.5 * width * (z + 1.0);
                    let r = u.exp();
                    sum += 0.5 * width * wt * k.at(profile.mass(r), r);
                }
            }
        }
        sum
    }
}

/// a·b with 0·∞ = 0.
fn times(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// ∫_lo^hi v^a r^e dr/r for constant v.
fn piece(k: Kernel, v: f64, lo: f64, hi: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let hi_term = if hi.is_infinite() { 0.0 } else { hi.powf(k.e) };
    v.powf(k.a) * (lo.powf(k.e) - hi_term) / (-k.e)
}

/// W_{α,2} at distance d of a unit mass spread over a ball of radius h:
/// ∫ φ(r) r^e dr/r with φ(r) the fraction of the ball inside B(x, r).
fn unit_blob_potential(n: usize, e: f64, d: f64, h: f64) -> f64 {
    if h == 0.0 {
        return if d == 0.0 { f64::INFINITY } else { d.powf(e) / (-e) };
    }
    let vol = unit_ball_volume(n) * h.powi(n as i32);
    let tail = (d + h).powf(e) / (-e);
    let lo = (d - h).abs();
    let inner = if d < h { (h - d).powf(n as f64 + e) / (h.powi(n as i32) * (n as f64 + e)) } else { 0.0 };
    if d == 0.0 {
        return inner + tail;
    }
    let mid = cosine_mapped(|r| lens_volume(n, d, h, r) / vol * r.powf(e - 1.0), lo, d + h);
    inner + mid + tail
}

#[derive(Debug, Clone, Copy)]
struct Blob {
    d: f64,
    h: f64,
    w: f64,
}

impl Blob {
    fn new(d: f64, h: f64, w: f64) -> Self {
        Blob { d, h, w }
    }

    /// Radius below which B(x, r) meets the blob in a known way (inside: a
    /// concentric part; outside: nothing).
    fn inner_edge(&self) -> f64 {
        (self.d - self.h).abs()
    }

    fn lower(&self) -> f64 {
        if self.d < self.h {
            0.0
        } else {
            self.d - self.h
        }
    }
}

/// r ↦ Σ w_i·|B(x, r) ∩ B_i|/|B_i| with prefix sums over fully covered blobs.
struct BlobProfile {
    n: usize,
    by_end: Vec<Blob>,
    prefix: Vec<f64>,
    by_lower: Vec<Blob>,
}

impl BlobProfile {
    fn new(n: usize, blobs: Vec<Blob>) -> Self {
        let mut by_end = blobs.clone();
        by_end.sort_by(|a, b| (a.d + a.h).total_cmp(&(b.d + b.h)));
        let mut prefix = Vec::with_capacity(by_end.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for b in &by_end {
            acc += b.w;
            prefix.push(acc);
        }
        let mut by_lower = blobs;
        by_lower.sort_by(|a, b| a.lower().total_cmp(&b.lower()));
        BlobProfile { n, by_end, prefix, by_lower }
    }

    fn mass(&self, r: f64) -> f64 {
        let full = self.by_end.partition_point(|b| b.d + b.h <= r);
        let mut m = self.prefix[full];
        let started = self.by_lower.partition_point(|b| b.lower() < r);
        let partial = |b: &Blob| {
            let vol = unit_ball_volume(self.n) * b.h.powi(self.n as i32);
            b.w * lens_volume(self.n, b.d, b.h, r) / vol
        };
        if self.by_end.len() - full <= started {
            m += self.by_end[full..].iter().filter(|b| b.lower() < r).map(partial).sum::<f64>();
        } else {
            m += self.by_lower[..started].iter().filter(|b| b.d + b.h > r).map(partial).sum::<f64>();
        }
        m
    }
}

/// A discrete operator together with the points it is evaluated on: the
/// requested points first, then every node.
#[derive(Debug, Clone)]
pub struct PointOperator {
    op: DiscreteOperator,
    points: Vec<Point>,
    requested: usize,
    node_slots: Vec<usize>,
    rows: Option<Vec<Vec<f64>>>,
}

impl PointOperator {
    pub fn new(op: DiscreteOperator, requested: &[Point]) -> Self {
        let mut points: Vec<Point> = requested.to_vec();
        let mut slot_of: HashMap<Vec<u64>, usize> = points.iter().enumerate().map(|(i, p)| (p.key(), i)).collect();
        let mut node_slots = Vec::with_capacity(op.nodes.len());
        for q in &op.nodes {
            let slot = *slot_of.entry(q.point.key()).or_insert_with(|| {
                points.push(q.point.clone());
                points.len() - 1
            });
            node_slots.push(slot);
        }
        let rows = op.is_linear().then(|| points.iter().map(|p| op.row(p)).collect());
        PointOperator { op, points, requested: requested.len(), node_slots, rows }
    }

    pub fn operator(&self) -> &DiscreteOperator {
        &self.op
    }

    /// Requested points followed by any node not among them.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn requested(&self) -> usize {
        self.requested
    }

    /// Values of a function on all points, read off at the nodes.
    pub fn node_values(&self, all: &[f64]) -> Vec<f64> {
        self.node_slots.iter().map(|&i| all[i]).collect()
    }

    /// N(f) on all points, given f on all points.
    pub fn apply(&self, all: &[f64]) -> Vec<f64> {
        let f = self.node_values(all);
        match &self.rows {
            Some(rows) => rows.iter().map(|row| row.iter().zip(&f).map(|(k, v)| times(*k, *v)).sum()).collect(),
            None => self.points.iter().map(|p| self.op.eval(&f, p)).collect(),
        }
    }

    /// A function tabulated on all points.
    pub fn tabulate(&self, all: &[f64]) -> Result<Tabulation> {
        Tabulation::new(&self.points, all)
    }
}

/// Per-iterate values on a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationLedger {
    /// Number of iterates computed.
    pub m: usize,
    /// values[j][i]: iterate j + 1 at sample i.
    pub values: Vec<Vec<f64>>,
    /// Whether every sample value is nondecreasing in the iterate count.
    pub monotone: bool,
    /// First sample at which an iterate became infinite or exceeded a cap.
    pub diverged_at: Option<usize>,
    pub converged: bool,
}

impl IterationLedger {
    fn from_history(history: Vec<Vec<f64>>, converged: bool, cap: f64) -> Self {
        let monotone = history.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| b >= a));
        let diverged_at = history.iter().find_map(|vals| vals.iter().position(|v| !v.is_finite() || *v > cap));
        IterationLedger { m: history.len(), values: history, monotone, diverged_at, converged }
    }

    pub(crate) fn build(history: Vec<Vec<f64>>, converged: bool, cap: f64) -> Self {
        Self::from_history(history, converged, cap)
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.values.last().map(Vec::as_slice)
    }
}

/// N(f)(x) with σ discretised at resolution `res`.
pub fn apply_n(measure: &Measure, f: &FieldFunction, x: &[f64], e: &Exponents, res: Resolution) -> Result<f64> {
    let op = DiscreteOperator::new(measure, *e, res)?;
    let vals: Vec<f64> = op.nodes.iter().map(|q| f.eval(&q.point)).collect::<Result<_>>()?;
    Ok(op.eval(&vals, x))
}

/// N^j(f₀) for j = 1..=m on the samples, f₀ the kernel at the sample pole.
pub fn iterate_n(measure: &Measure, m: usize, e: &Exponents, samples: &SampleSet, res: Resolution) -> Result<IterationLedger> {
    if m == 0 {
        return Err(Error::Precondition("iterate count must be at least 1".into()));
    }
    let op = PointOperator::new(DiscreteOperator::new(measure, *e, res)?, &samples.points);
    Ok(iterate_on(&op, m, &samples.pole))
}

pub(crate) fn iterate_on(op: &PointOperator, m: usize, pole: &[f64]) -> IterationLedger {
    let e = *op.operator().exponents();
    let mut cur: Vec<f64> = op.points().iter().map(|p| kernel_value(pole, &e, p)).collect();
    let mut history = Vec::with_capacity(m);
    for _ in 0..m {
        cur = op.apply(&cur);
        history.push(cur[..op.requested()].to_vec());
    }
    IterationLedger::from_history(history, true, f64::INFINITY)
}

fn require_off_pole(x: &[f64], x0: &[f64]) -> Result<f64> {
    if x.len() != x0.len() {
        return Err(Error::DimensionMismatch { expected: x0.len(), got: x.len() });
    }
    let d = dist(x, x0);
    if d == 0.0 {
        return Err(Error::Precondition("x must differ from the pole".into()));
    }
    Ok(d)
}

fn factorial(m: u32) -> f64 {
    (1..=m).map(f64::from).product()
}

/// Σ_{k ≤ j_x} 2^{k(αs−n)} σ(B_{k+1} ∖ B_k), B_k = B(x₀, 2^k), where
/// 2^{j_x} ≤ d < 2^{j_x+1}.
pub fn shell_sum(measure: &Measure, x0: &[f64], d: f64, e: &Exponents) -> Result<f64> {
    let jx = d.log2().floor() as i32;
    let w = e.alpha_s() - e.n() as f64;
    let mut sum = 0.0;
    let mut outer = measure.ball_mass(x0, ((jx + 1) as f64).exp2())?;
    let mut small = 0;
    for k in (jx - 2000..=jx).rev() {
        if outer == 0.0 {
            break;
        }
        let inner = measure.ball_mass(x0, (k as f64).exp2())?;
        let term = (k as f64 * w).exp2() * (outer - inner).max(0.0);
        sum += term;
        if term <= 1e-17 * sum {
            small += 1;
            if small >= 8 {
                break;
            }
        } else {
            small = 0;
        }
        outer = inner;
    }
    Ok(sum)
}

/// The shell lower bound for N^m(f₀)(x).
pub fn lower_bound_shell(measure: &Measure, m: u32, x: &[f64], x0: &[f64], e: &Exponents) -> Result<f64> {
    if m == 0 {
        return Err(Error::Precondition("m must be at least 1".into()));
    }
    let d = require_off_pole(x, x0)?;
    let kexp = e.kernel_exp();
    let base = e.delta_coefficient() * 8f64.powf(kexp);
    let s = shell_sum(measure, x0, d, e)?;
    Ok(base.powi(m as i32) * d.powf(kexp) * (s.powi(m as i32) / factorial(m)).powf(e.inv_s1()))
}

/// ∫₀^{|x−x₀|} (σ(B(x, r/2))/r^{n−αs})^{1/(s−1)} dr/r = 2^{kernelExp}·W^{|x−x₀|/2}σ(x).
pub fn half_radius_wolff(measure: &Measure, x: &[f64], d: f64, e: &Exponents) -> Result<f64> {
    Ok(e.kernel_exp().exp2() * wolff(measure, e, x, 0.5 * d)?)
}

/// The local-Wolff lower bound for N^m(f₀)(x).
pub fn lower_bound_radial(measure: &Measure, m: u32, x: &[f64], x0: &[f64], e: &Exponents) -> Result<f64> {
    if m == 0 {
        return Err(Error::Precondition("m must be at least 1".into()));
    }
    let d = require_off_pole(x, x0)?;
    let kexp = e.kernel_exp();
    let w = half_radius_wolff(measure, x, d, e)?;
    Ok(1.5f64.powf(kexp) / factorial(m) * d.powf(kexp) * w.powi(m as i32))
}

/// The pair (c₁, c₂) of the combined lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerConstants {
    pub c1: f64,
    pub c2: f64,
}

/// Local potentials entering the combined lower bound at x:
/// W^{|x−x₀|}σ(x) and I^{|x−x₀|}_{αs}σ(x₀).
pub fn local_potentials(measure: &Measure, x: &[f64], x0: &[f64], e: &Exponents) -> Result<(f64, f64)> {
    let d = require_off_pole(x, x0)?;
    Ok((wolff(measure, e, x, d)?, riesz(measure, e.alpha_s(), x0, d)?))
}

/// c₁|x−x₀|^{kernelExp}·exp(c₂W^{|x−x₀|}σ(x))·exp(c₂I^{|x−x₀|}_{αs}σ(x₀)).
pub fn theorem_lower_bound(measure: &Measure, x: &[f64], x0: &[f64], e: &Exponents, c: LowerConstants) -> Result<f64> {
    let d = require_off_pole(x, x0)?;
    let (w, i) = local_potentials(measure, x, x0, e)?;
    Ok(combined_bound(c, d, e.kernel_exp(), w, i))
}

pub(crate) fn combined_bound(c: LowerConstants, d: f64, kexp: f64, w: f64, i: f64) -> f64 {
    let expo = c.c2 * (w + i);
    if expo.is_infinite() {
        return f64::INFINITY;
    }
    c.c1 * d.powf(kexp) * expo.exp()
}
