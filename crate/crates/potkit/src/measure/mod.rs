//! Measures on R^n and their ball masses σ(B(x, r)) over open balls.

mod cubature;
mod discretize;
mod profile;
mod region;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use cubature::{ball_integral, box_integral};
pub use discretize::{discretize, Node, Resolution};
pub use profile::{BallMassProfile, Origin};
pub use region::RegionSpec;

use crate::error::{Error, Result};
use crate::geometry::{ball_box_volume, dist, lens_volume, sphere_cap_fraction, unit_ball_volume, unit_sphere_area, BoxRegion, Point};
use crate::quadrature::Tolerance;

/// A nonnegative function on R^n.
pub type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A named multiplicative weight carried by a reweighted density.
#[derive(Clone)]
pub struct Weight {
    pub label: String,
    pub f: PointFn,
}

impl Weight {
    pub fn new(label: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Weight { label: label.into(), f: Arc::new(f) }
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        (self.f)(p)
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({})", self.label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub point: Point,
    pub mass: f64,
}

/// Finite sum of point masses with positive masses at distinct points.
#[derive(Debug, Clone, PartialEq)]
pub struct Atomic {
    dim: usize,
    atoms: Vec<Atom>,
}

impl Atomic {
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            if a.point.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: a.point.dim() });
            }
            if !a.point.is_finite() || !a.mass.is_finite() {
                return Err(Error::NonFinite("atom"));
            }
            if a.mass <= 0.0 {
                return Err(Error::InvalidMeasure(format!("atom {i} has nonpositive mass {}", a.mass)));
            }
        }
        let mut keys: Vec<Vec<u64>> = atoms.iter().map(|a| a.point.key()).collect();
        keys.sort();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMeasure("atoms must sit at distinct points".into()));
        }
        Ok(Atomic { dim, atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Density c·|y − center|^γ on B(center, cutoff) (all of R^n when the
/// cutoff is `None`).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDensity {
    pub center: Point,
    pub exponent: f64,
    pub coefficient: f64,
    pub cutoff: Option<f64>,
}

impl RadialDensity {
    pub fn new(center: Point, exponent: f64, coefficient: f64, cutoff: Option<f64>) -> Result<Self> {
        let n = center.dim() as f64;
        if !center.is_finite() || !exponent.is_finite() || !coefficient.is_finite() {
            return Err(Error::NonFinite("radial density"));
        }
        if exponent <= -n {
            return Err(Error::InvalidMeasure(format!(
                "density exponent {exponent} must exceed -n = {}",
                -n
            )));
        }
        if coefficient <= 0.0 {
            return Err(Error::InvalidMeasure("density coefficient must be positive".into()));
        }
        if let Some(r) = cutoff {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::InvalidMeasure(format!("cutoff radius {r} must be positive; use None for infinity")));
            }
        }
        Ok(RadialDensity { center, exponent, coefficient, cutoff })
    }

    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn cutoff_or_inf(&self) -> f64 {
        self.cutoff.unwrap_or(f64::INFINITY)
    }

    /// σ(B(center, t)).
    pub fn centered_mass(&self, t: f64) -> f64 {
        let n = self.dim() as f64;
        let t = t.min(self.cutoff_or_inf());
        if t <= 0.0 {
            return 0.0;
        }
        self.coefficient * unit_sphere_area(self.dim()) * t.powf(n + self.exponent) / (n + self.exponent)
    }

    pub fn density(&self, y: &[f64]) -> f64 {
        let t = dist(&self.center, y);
        if t >= self.cutoff_or_inf() {
            return 0.0;
        }
        if t == 0.0 {
            return match self.exponent {
                e if e < 0.0 => f64::INFINITY,
                e if e == 0.0 => self.coefficient,
                _ => 0.0,
            };
        }
        self.coefficient * t.powf(self.exponent)
    }

    fn ball_mass(&self, x: &[f64], r: f64) -> f64 {
        let n = self.dim();
        let d = dist(&self.center, x);
        let big_r = self.cutoff_or_inf();
        if d == 0.0 {
            return self.centered_mass(r);
        }
        if self.exponent == 0.0 && big_r.is_finite() {
            return self.coefficient * lens_volume(n, d, big_r, r);
        }
        let inner = if r > d { self.centered_mass(r - d) } else { 0.0 };
        let a = (d - r).abs();
        let b = (d + r).min(big_r);
        if b <= a {
            return inner;
        }
        let c = self.coefficient * unit_sphere_area(n);
        let e = n as f64 + self.exponent - 1.0;
        let integrand = |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let cosb = (t * t + d * d - r * r) / (2.0 * t * d);
            c * t.powf(e) * sphere_cap_fraction(n, cosb)
        };
        let mut pts = vec![a];
        if d > a && d < b {
            pts.push(d);
        }
        pts.push(b);
        let est = crate::quadrature::adaptive_pieces(integrand, &pts, Tolerance::BALL_MASS, 200);
        inner + est.value
    }
}

/// Piecewise-constant density on a grid of cubes of side 2^level:
/// cell `index` is `[0,2^level)^n + 2^level·index + offset` and carries
/// total mass `weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicDensity {
    dim: usize,
    level: i32,
    offset: Point,
    cells: BTreeMap<Vec<i64>, f64>,
}

impl DyadicDensity {
    pub fn new(dim: usize, level: i32, cells: BTreeMap<Vec<i64>, f64>) -> Result<Self> {
        Self::with_offset(level, Point::origin(dim), cells)
    }

    pub fn with_offset(level: i32, offset: Point, cells: BTreeMap<Vec<i64>, f64>) -> Result<Self> {
        let dim = offset.dim();
        for (k, w) in &cells {
            if k.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: k.len() });
            }
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidMeasure(format!("cell {k:?} has invalid weight {w}")));
            }
        }
        let cells = cells.into_iter().filter(|(_, w)| *w > 0.0).collect();
        Ok(DyadicDensity { dim, level, offset, cells })
    }

    /// Lebesgue measure on `[0,1)^n`, split into cells of side 2^level.
    pub fn unit_cube_lebesgue(dim: usize, level: i32) -> Result<Self> {
        if level > 0 {
            return Err(Error::InvalidMeasure("unit cube needs level <= 0".into()));
        }
        let per_axis = 1i64 << (-level);
        let vol = ((level * dim as i32) as f64).exp2();
        let mut cells = BTreeMap::new();
        let total = per_axis.pow(dim as u32);
        for flat in 0..total {
            let mut idx = vec![0i64; dim];
            let mut rem = flat;
            for slot in idx.iter_mut() {
                *slot = rem % per_axis;
                rem /= per_axis;
            }
            cells.insert(idx, vol);
        }
        Self::new(dim, level, cells)
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn offset(&self) -> &Point {
        &self.offset
    }

    pub fn cells(&self) -> &BTreeMap<Vec<i64>, f64> {
        &self.cells
    }

    pub fn side(&self) -> f64 {
        (self.level as f64).exp2()
    }

    pub fn cell_box(&self, index: &[i64]) -> BoxRegion {
        let side = self.side();
        let lo: Vec<f64> = index.iter().zip(self.offset.iter()).map(|(&i, t)| i as f64 * side + t).collect();
        let hi = lo.iter().map(|a| a + side).collect();
        BoxRegion::new(lo, hi)
    }

    fn cell_volume(&self) -> f64 {
        ((self.level as f64) * self.dim as f64).exp2()
    }

    pub fn cell_of(&self, p: &[f64]) -> Vec<i64> {
        let side = self.side();
        p.iter().zip(self.offset.iter()).map(|(x, t)| ((x - t) / side).floor() as i64).collect()
    }

    pub fn density(&self, p: &[f64]) -> f64 {
        self.cells.get(&self.cell_of(p)).map(|w| w / self.cell_volume()).unwrap_or(0.0)
    }

    // TODO: Wolff potentials of 3D densities with hundreds of cells spend most
    // of their time here; a per-centre table of cell distance ranges would
    // let whole blocks of cells be skipped.
    fn ball_mass(&self, x: &[f64], r: f64) -> f64 {
        let vol = self.cell_volume();
        self.cells
            .iter()
            .map(|(k, w)| {
                let b = self.cell_box(k);
                w * ball_box_volume(x, r, &b) / vol
            })
            .sum()
    }

    /// σ(box) for an axis-aligned box.
    pub fn box_mass(&self, bx: &BoxRegion) -> f64 {
        let vol = self.cell_volume();
        self.cells.iter().map(|(k, w)| w * self.cell_box(k).overlap_volume(bx) / vol).sum()
    }

    fn bounding_box(&self) -> Option<BoxRegion> {
        let mut it = self.cells.keys();
        let first = it.next()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for k in it {
            for i in 0..self.dim {
                lo[i] = lo[i].min(k[i]);
                hi[i] = hi[i].max(k[i]);
            }
        }
        let lo_box = self.cell_box(&lo);
        let hi_box = self.cell_box(&hi);
        Some(BoxRegion::new(lo_box.lo, hi_box.hi))
    }
}

/// A nonnegative Borel measure on R^n.
#[derive(Debug, Clone)]
pub enum Measure {
    Atomic(Atomic),
    Radial(RadialDensity),
    Dyadic(DyadicDensity),
    /// χ_E dσ for a density σ without an exact restricted representation.
    Restricted { base: Box<Measure>, region: RegionSpec },
    /// f^power dσ for a density σ.
    Weighted { base: Box<Measure>, weight: Weight, power: f64 },
}

impl Measure {
    pub fn zero(dim: usize) -> Self {
        Measure::Atomic(Atomic { dim, atoms: Vec::new() })
    }

    pub fn atomic(dim: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let atoms = atoms.into_iter().map(|(p, m)| Atom { point: Point::new(p), mass: m }).collect();
        Ok(Measure::Atomic(Atomic::new(dim, atoms)?))
    }

    pub fn delta(point: Vec<f64>, mass: f64) -> Result<Self> {
        let n = point.len();
        Self::atomic(n, vec![(point, mass)])
    }

    pub fn radial(center: Vec<f64>, exponent: f64, coefficient: f64, cutoff: Option<f64>) -> Result<Self> {
        Ok(Measure::Radial(RadialDensity::new(Point::new(center), exponent, coefficient, cutoff)?))
    }

    /// Lebesgue measure on the ball B(center, radius), scaled to total `mass`.
    pub fn uniform_ball(center: Vec<f64>, radius: f64, mass: f64) -> Result<Self> {
        let n = center.len();
        let c = mass / (unit_ball_volume(n) * radius.powi(n as i32));
        Self::radial(center, 0.0, c, Some(radius))
    }

    pub fn dim(&self) -> usize {
        match self {
            Measure::Atomic(a) => a.dim,
            Measure::Radial(r) => r.dim(),
            Measure::Dyadic(d) => d.dim,
            Measure::Restricted { base, .. } | Measure::Weighted { base, .. } => base.dim(),
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Measure::Atomic(_))
    }

    pub fn as_atomic(&self) -> Option<&Atomic> {
        match self {
            Measure::Atomic(a) => Some(a),
            _ => None,
        }
    }

    /// True when the measure is identically zero.
    pub fn is_zero(&self) -> bool {
        match self {
            Measure::Atomic(a) => a.atoms.is_empty(),
            Measure::Dyadic(d) => d.cells.is_empty(),
            Measure::Radial(_) => false,
            Measure::Restricted { .. } | Measure::Weighted { .. } => self.total_mass() == 0.0,
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        Ok(())
    }

    /// σ(B(center, radius)) for the open ball.
    pub fn ball_mass(&self, center: &[f64], radius: f64) -> Result<f64> {
        self.check_point(center)?;
        if radius.is_nan() {
            return Err(Error::NonFinite("radius"));
        }
        if radius <= 0.0 {
            return Err(Error::Precondition(format!("radius {radius} must be positive")));
        }
        Ok(self.ball_mass_unchecked(center, radius))
    }

    pub(crate) fn ball_mass_unchecked(&self, x: &[f64], r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match self {
            Measure::Atomic(a) => a.atoms.iter().filter(|at| dist(&at.point, x) < r).map(|at| at.mass).sum(),
            Measure::Radial(rd) => {
                if r.is_infinite() {
                    return rd.centered_mass(f64::INFINITY);
                }
                rd.ball_mass(x, r)
            }
            Measure::Dyadic(d) => {
                if r.is_infinite() {
                    return d.cells.values().sum();
                }
                d.ball_mass(x, r)
            }
            Measure::Restricted { base, region } => restricted_ball_mass(base, region, x, r),
            Measure::Weighted { base, weight, power } => {
                let Some((c, rad)) = self.support_ball() else {
                    return f64::INFINITY;
                };
                let r_eff = if r.is_infinite() { rad * 2.0 + 1.0 } else { r };
                let center: Vec<f64> = if r.is_infinite() { c.into_inner() } else { x.to_vec() };
                let g = |y: &[f64]| {
                    let rho = base.density(y);
                    if rho == 0.0 {
                        return 0.0;
                    }
                    rho * weight.eval(y).powf(*power)
                };
                ball_integral(&g, &center, r_eff)
            }
        }
    }

    /// Pointwise density with respect to Lebesgue measure (zero for atoms).
    pub fn density(&self, y: &[f64]) -> f64 {
        match self {
            Measure::Atomic(_) => 0.0,
            Measure::Radial(r) => r.density(y),
            Measure::Dyadic(d) => d.density(y),
            Measure::Restricted { base, region } => {
                if region.contains(y) {
                    base.density(y)
                } else {
                    0.0
                }
            }
            Measure::Weighted { base, weight, power } => {
                let rho = base.density(y);
                if rho == 0.0 {
                    0.0
                } else {
                    rho * weight.eval(y).powf(*power)
                }
            }
        }
    }

    /// σ(R^n); +∞ for unbounded radial densities.
    pub fn total_mass(&self) -> f64 {
        match self {
            Measure::Atomic(a) => a.atoms.iter().map(|a| a.mass).sum(),
            Measure::Radial(r) => r.centered_mass(f64::INFINITY),
            Measure::Dyadic(d) => d.cells.values().sum(),
            _ => match self.support_ball() {
                Some((c, r)) => self.ball_mass_unchecked(&c, r * 1.000_001 + 1e-12),
                None => f64::INFINITY,
            },
        }
    }

    /// A closed ball containing the support; `None` when unbounded.
    pub fn support_ball(&self) -> Option<(Point, f64)> {
        match self {
            Measure::Atomic(a) => {
                if a.atoms.is_empty() {
                    return Some((Point::origin(a.dim), 0.0));
                }
                let balls: Vec<(Point, f64)> = a.atoms.iter().map(|at| (at.point.clone(), 0.0)).collect();
                Some(region::enclose(&balls))
            }
            Measure::Radial(r) => r.cutoff.map(|c| (r.center.clone(), c)),
            Measure::Dyadic(d) => match d.bounding_box() {
                Some(b) => {
                    let c = b.center();
                    let r = dist(&c, &b.hi);
                    Some((Point::new(c), r))
                }
                None => Some((Point::origin(d.dim), 0.0)),
            },
            Measure::Restricted { base, region } => {
                let reg = region.enclosing_ball();
                match base.support_ball() {
                    Some(b) if b.1 < reg.1 => Some(b),
                    _ => Some(reg),
                }
            }
            Measure::Weighted { base, .. } => base.support_ball(),
        }
    }

    /// Farthest distance from `x` to a point of the support (∞ if unbounded).
    pub fn farthest_distance(&self, x: &[f64]) -> f64 {
        match self {
            Measure::Atomic(a) => a.atoms.iter().map(|at| dist(&at.point, x)).fold(0.0, f64::max),
            Measure::Dyadic(d) => match d.bounding_box() {
                Some(b) => b.distance_range(x).1,
                None => 0.0,
            },
            _ => match self.support_ball() {
                Some((c, r)) => dist(&c, x) + r,
                None => f64::INFINITY,
            },
        }
    }

    /// λ·σ.
    pub fn scale(&self, lambda: f64) -> Result<Measure> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Precondition(format!("scale factor {lambda} must be positive and finite")));
        }
        Ok(match self {
            Measure::Atomic(a) => Measure::Atomic(Atomic {
                dim: a.dim,
                atoms: a.atoms.iter().map(|at| Atom { point: at.point.clone(), mass: at.mass * lambda }).collect(),
            }),
            Measure::Radial(r) => Measure::Radial(RadialDensity { coefficient: r.coefficient * lambda, ..r.clone() }),
            Measure::Dyadic(d) => Measure::Dyadic(DyadicDensity {
                cells: d.cells.iter().map(|(k, w)| (k.clone(), w * lambda)).collect(),
                ..d.clone()
            }),
            Measure::Restricted { base, region } => Measure::Restricted {
                base: Box::new(base.scale(lambda)?),
                region: region.clone(),
            },
            Measure::Weighted { base, weight, power } => Measure::Weighted {
                base: Box::new(base.scale(lambda)?),
                weight: weight.clone(),
                power: *power,
            },
        })
    }

    /// The push-forward under y ↦ y + v.
    pub fn translate(&self, v: &[f64]) -> Result<Measure> {
        self.check_point(v)?;
        Ok(match self {
            Measure::Atomic(a) => Measure::Atomic(Atomic {
                dim: a.dim,
                atoms: a.atoms.iter().map(|at| Atom { point: at.point.add(v), mass: at.mass }).collect(),
            }),
            Measure::Radial(r) => Measure::Radial(RadialDensity { center: r.center.add(v), ..r.clone() }),
            Measure::Dyadic(d) => Measure::Dyadic(DyadicDensity { offset: d.offset.add(v), ..d.clone() }),
            Measure::Restricted { base, region } => Measure::Restricted {
                base: Box::new(base.translate(v)?),
                region: translate_region(region, v),
            },
            Measure::Weighted { base, weight, power } => {
                let f = weight.f.clone();
                let shift: Vec<f64> = v.to_vec();
                Measure::Weighted {
                    base: Box::new(base.translate(v)?),
                    weight: Weight {
                        label: format!("{} shifted", weight.label),
                        f: Arc::new(move |y: &[f64]| {
                            let z: Vec<f64> = y.iter().zip(&shift).map(|(a, b)| a - b).collect();
                            f(&z)
                        }),
                    },
                    power: *power,
                }
            }
        })
    }

    /// χ_E dσ.
    pub fn restrict(&self, region: &RegionSpec) -> Result<Measure> {
        region.validate(self.dim())?;
        match (self, region) {
            (Measure::Atomic(a), _) => Ok(Measure::Atomic(Atomic {
                dim: a.dim,
                atoms: a.atoms.iter().filter(|at| region.contains(&at.point)).cloned().collect(),
            })),
            (Measure::Radial(r), RegionSpec::Ball { center, radius }) if center.key() == r.center.key() => {
                let cut = r.cutoff.map_or(*radius, |c| c.min(*radius));
                Ok(Measure::Radial(RadialDensity { cutoff: Some(cut), ..r.clone() }))
            }
            (Measure::Dyadic(d), _) => {
                // Exact when every cell lies entirely inside or outside E.
                let mut kept = BTreeMap::new();
                for (k, w) in &d.cells {
                    match cell_relation(&d.cell_box(k), region) {
                        Relation::Inside => {
                            kept.insert(k.clone(), *w);
                        }
                        Relation::Outside => {}
                        Relation::Partial => {
                            return Ok(Measure::Restricted { base: Box::new(self.clone()), region: region.clone() });
                        }
                    }
                }
                Ok(Measure::Dyadic(DyadicDensity { cells: kept, ..d.clone() }))
            }
            (Measure::Restricted { base, region: inner }, _) => {
                // Nested restriction: intersecting regions is only exact for
                // atoms; keep the outer restriction lazily.
                let once = base.restrict(region)?;
                Ok(Measure::Restricted { base: Box::new(once), region: inner.clone() })
            }
            _ => Ok(Measure::Restricted { base: Box::new(self.clone()), region: region.clone() }),
        }
    }

    /// f^power dσ. Atom masses become m·f(x)^power; densities carry f.
    pub fn reweight(&self, weight: Weight, power: f64) -> Result<Measure> {
        if !power.is_finite() {
            return Err(Error::NonFinite("reweight power"));
        }
        match self {
            Measure::Atomic(a) => {
                let mut atoms = Vec::with_capacity(a.atoms.len());
                for (i, at) in a.atoms.iter().enumerate() {
                    let v = weight.eval(&at.point);
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::BadWeight { index: i, point: at.point.coords().to_vec(), value: v });
                    }
                    let m = if v == 0.0 && power > 0.0 { 0.0 } else { at.mass * v.powf(power) };
                    if m > 0.0 {
                        atoms.push(Atom { point: at.point.clone(), mass: m });
                    }
                }
                Ok(Measure::Atomic(Atomic { dim: a.dim, atoms }))
            }
            _ if self.support_ball().is_none() => Err(Error::InvalidMeasure(
                "reweighting a density needs a bounded support; restrict it first".into(),
            )),
            _ => Ok(Measure::Weighted { base: Box::new(self.clone()), weight, power }),
        }
    }

    /// The ball-mass profile r ↦ σ(B(x, r)).
    pub fn profile(&self, x: &[f64]) -> Result<BallMassProfile<'_>> {
        self.check_point(x)?;
        Ok(BallMassProfile::new(self, Point::from(x)))
    }

    /// σ(box) for a half-open axis-aligned box. Exact for atoms, dyadic
    /// densities and their cube restrictions; tensor cubature otherwise.
    pub fn box_mass(&self, bx: &BoxRegion) -> f64 {
        match self {
            Measure::Atomic(a) => a.atoms.iter().filter(|at| bx.contains(&at.point)).map(|at| at.mass).sum(),
            Measure::Dyadic(d) => d.box_mass(bx),
            Measure::Restricted { base, region: region @ RegionSpec::Cube { .. } } if matches!(**base, Measure::Dyadic(_)) => {
                let rb = region.as_box().expect("cube");
                match clip(bx, &rb) {
                    Some(c) => base.box_mass(&c),
                    None => 0.0,
                }
            }
            _ => {
                let Some((c, r)) = self.support_ball() else {
                    return f64::INFINITY;
                };
                let hull = BoxRegion::new(c.iter().map(|v| v - r).collect(), c.iter().map(|v| v + r).collect());
                match clip(bx, &hull) {
                    Some(b) => ball_free_box_integral(self, &b),
                    None => 0.0,
                }
            }
        }
    }
}

fn clip(a: &BoxRegion, b: &BoxRegion) -> Option<BoxRegion> {
    let lo: Vec<f64> = a.lo.iter().zip(&b.lo).map(|(x, y)| x.max(*y)).collect();
    let hi: Vec<f64> = a.hi.iter().zip(&b.hi).map(|(x, y)| x.min(*y)).collect();
    if lo.iter().zip(&hi).any(|(x, y)| x >= y) {
        None
    } else {
        Some(BoxRegion::new(lo, hi))
    }
}

fn ball_free_box_integral(m: &Measure, bx: &BoxRegion) -> f64 {
    let depth = match bx.lo.len() {
        1 => 6,
        2 => 4,
        3 => 3,
        _ => 1,
    };
    box_integral(&|y: &[f64]| m.density(y), bx, depth)
}

fn translate_region(region: &RegionSpec, v: &[f64]) -> RegionSpec {
    match region {
        RegionSpec::Ball { center, radius } => RegionSpec::Ball { center: center.add(v), radius: *radius },
        RegionSpec::Cube { index, level, shift } => RegionSpec::Cube {
            index: index.clone(),
            level: *level,
            shift: shift.add(v),
        },
        RegionSpec::Union { members, disjoint } => RegionSpec::Union {
            members: members.iter().map(|m| translate_region(m, v)).collect(),
            disjoint: *disjoint,
        },
    }
}

enum Relation {
    Inside,
    Outside,
    Partial,
}

fn cell_relation(cell: &BoxRegion, region: &RegionSpec) -> Relation {
    match region {
        RegionSpec::Ball { center, radius } => {
            let (near, far) = cell.distance_range(center);
            if far <= *radius {
                Relation::Inside
            } else if near >= *radius {
                Relation::Outside
            } else {
                Relation::Partial
            }
        }
        RegionSpec::Cube { .. } => {
            let b = region.as_box().expect("cube");
            let ov = cell.overlap_volume(&b);
            if ov <= 0.0 {
                Relation::Outside
            } else if (ov - cell.volume()).abs() <= 1e-12 * cell.volume() {
                Relation::Inside
            } else {
                Relation::Partial
            }
        }
        RegionSpec::Union { members, .. } => {
            let rels: Vec<Relation> = members.iter().map(|m| cell_relation(cell, m)).collect();
            if rels.iter().any(|r| matches!(r, Relation::Inside)) {
                Relation::Inside
            } else if rels.iter().all(|r| matches!(r, Relation::Outside)) {
                Relation::Outside
            } else {
                Relation::Partial
            }
        }
    }
}

fn restricted_ball_mass(base: &Measure, region: &RegionSpec, x: &[f64], r: f64) -> f64 {
    if let RegionSpec::Union { members, .. } = region {
        return members.iter().map(|m| restricted_ball_mass(base, m, x, r)).sum();
    }
    if let (Measure::Dyadic(d), Some(rb)) = (base, region.as_box()) {
        let vol = d.cell_volume();
        return d
            .cells
            .iter()
            .map(|(k, w)| {
                let cb = d.cell_box(k);
                let lo: Vec<f64> = cb.lo.iter().zip(&rb.lo).map(|(a, b)| a.max(*b)).collect();
                let hi: Vec<f64> = cb.hi.iter().zip(&rb.hi).map(|(a, b)| a.min(*b)).collect();
                if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
                    return 0.0;
                }
                let clipped = BoxRegion::new(lo, hi);
                let vol_ball = if r.is_infinite() { clipped.volume() } else { ball_box_volume(x, r, &clipped) };
                w * vol_ball / vol
            })
            .sum();
    }
    let (rc, rr) = region.enclosing_ball();
    let (center, r_eff) = if r.is_infinite() || dist(x, &rc) + rr <= r {
        (rc.coords().to_vec(), rr * 1.000_001)
    } else {
        (x.to_vec(), r)
    };
    let g = |y: &[f64]| {
        if region.contains(y) && (r.is_infinite() || dist(y, x) < r) {
            base.density(y)
        } else {
            0.0
        }
    };
    ball_integral(&g, &center, r_eff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn atom_always_inside() {
        let m = Measure::delta(vec![0.0; 3], 1.0).unwrap();
        for r in [1e-9, 0.5, 10.0] {
            assert_eq!(m.ball_mass(&[0.0; 3], r).unwrap(), 1.0);
        }
    }

    #[test]
    fn hardy_centered_ball_mass() {
        let m = Measure::radial(vec![0.0; 3], -2.0, 1.0, None).unwrap();
        let v = m.ball_mass(&[0.0; 3], 2.0).unwrap();
        assert!((v - 8.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn off_center_radial_matches_lens_for_flat_density() {
        // γ = 0 goes through the lens formula; a tiny γ goes through the
        // one-dimensional cap integral. They must agree to O(γ).
        let flat = RadialDensity::new(Point::origin(3), 0.0, 1.0, Some(1.0)).unwrap();
        let bent = RadialDensity::new(Point::origin(3), 1e-9, 1.0, Some(1.0)).unwrap();
        for (x, r) in [([0.3, 0.1, 0.0], 0.5), ([1.2, 0.0, 0.0], 0.6), ([0.0, 0.0, 0.5], 2.0)] {
            let a = flat.ball_mass(&x, r);
            let b = bent.ball_mass(&x, r);
            assert!((a - b).abs() < 1e-7 * a.max(1e-12), "{a} vs {b}");
        }
    }

    #[test]
    fn restrict_atomic_by_membership() {
        let m = Measure::atomic(1, vec![(vec![0.0], 1.0), (vec![3.0], 1.0)]).unwrap();
        let r = m.restrict(&RegionSpec::ball(vec![0.0], 1.0)).unwrap();
        assert_eq!(r.as_atomic().unwrap().atoms().len(), 1);
        let bad = RegionSpec::Union { members: vec![], disjoint: false };
        assert!(m.restrict(&bad).is_err());
    }

    #[test]
    fn reweight_atomic() {
        let m = Measure::delta(vec![0.0], 2.0).unwrap();
        let w = m.reweight(Weight::new("three", |_| 3.0), 2.0).unwrap();
        assert_eq!(w.total_mass(), 18.0);
        let id = m.reweight(Weight::new("one", |_| 1.0), 7.5).unwrap();
        assert_eq!(id.total_mass(), 2.0);
        let err = m.reweight(Weight::new("inf", |_| f64::INFINITY), 1.0).unwrap_err();
        assert!(matches!(err, Error::BadWeight { index: 0, .. }));
    }

    #[test]
    fn dyadic_unit_cube_ball_mass() {
        let m = Measure::Dyadic(DyadicDensity::unit_cube_lebesgue(2, -1).unwrap());
        let v = m.ball_mass(&[0.5, 0.5], 0.25).unwrap();
        assert!((v - PI / 16.0).abs() < 1e-13);
        assert_eq!(m.total_mass(), 1.0);
    }
}
