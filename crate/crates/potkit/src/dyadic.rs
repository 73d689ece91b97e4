//! Shifted dyadic cubes, discrete Wolff potentials, the discrete Carleson
//! audit, shift averaging and the energy-moment checks.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::geometry::{BoxRegion, Point};
use crate::measure::{discretize, Measure, RegionSpec, Resolution, Weight};
use crate::potential::wolff;
use crate::sampling::ball_points;

/// The cube `[0,2^level)^n + 2^level·index + shift`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicCube {
    pub level: i32,
    pub index: Vec<i64>,
    pub shift: Point,
}

impl DyadicCube {
    pub fn side(&self) -> f64 {
        (self.level as f64).exp2()
    }

    /// The cube of the given level and shift that contains `x`.
    pub fn containing(x: &[f64], level: i32, shift: &[f64]) -> Self {
        let side = (level as f64).exp2();
        let index = x.iter().zip(shift).map(|(p, t)| ((p - t) / side).floor() as i64).collect();
        DyadicCube { level, index, shift: Point::from(shift) }
    }

    pub fn as_box(&self) -> BoxRegion {
        cube_box(self.level, &self.index, &self.shift)
    }

    pub fn parent(&self) -> Self {
        DyadicCube {
            level: self.level + 1,
            index: self.index.iter().map(|i| i.div_euclid(2)).collect(),
            shift: self.shift.clone(),
        }
    }

    /// The 2^n children, which partition the cube.
    pub fn children(&self) -> Vec<Self> {
        let n = self.index.len();
        (0..1usize << n)
            .map(|bits| DyadicCube {
                level: self.level - 1,
                index: self.index.iter().enumerate().map(|(i, k)| 2 * k + ((bits >> i) & 1) as i64).collect(),
                shift: self.shift.clone(),
            })
            .collect()
    }

    pub fn region(&self) -> RegionSpec {
        RegionSpec::Cube { index: self.index.clone(), level: self.level, shift: self.shift.clone() }
    }
}

fn cube_box(level: i32, index: &[i64], shift: &[f64]) -> BoxRegion {
    let side = (level as f64).exp2();
    let lo: Vec<f64> = index.iter().zip(shift).map(|(&i, t)| i as f64 * side + t).collect();
    let hi = lo.iter().map(|a| a + side).collect();
    BoxRegion::new(lo, hi)
}

/// ∫_box f dσ, with f ≡ 1 when `f` is `None`.
fn weighted_box_mass(measure: &Measure, f: Option<&Weight>, bx: &BoxRegion) -> f64 {
    let Some(f) = f else {
        return measure.box_mass(bx);
    };
    match measure {
        Measure::Atomic(a) => a
            .atoms()
            .iter()
            .filter(|at| bx.contains(&at.point))
            .map(|at| at.mass * f.eval(&at.point))
            .sum(),
        _ => match measure.reweight(f.clone(), 1.0) {
            Ok(w) => w.box_mass(bx),
            Err(_) => f64::INFINITY,
        },
    }
}

fn total_weighted_mass(measure: &Measure, f: Option<&Weight>) -> f64 {
    match (measure, f) {
        (_, None) => measure.total_mass(),
        (Measure::Atomic(a), Some(f)) => a.atoms().iter().map(|at| at.mass * f.eval(&at.point)).sum(),
        (_, Some(f)) => measure.reweight(f.clone(), 1.0).map(|w| w.total_mass()).unwrap_or(f64::INFINITY),
    }
}

/// Coarsest level scanned by default: ⌈log₂(diam + |t| + |x|)⌉ + 2.
pub fn top_level(measure: &Measure, extent: f64) -> i32 {
    let diam = measure.support_ball().map(|(c, r)| 2.0 * r + c.norm()).unwrap_or(1.0);
    let span = (diam + extent).max(1e-300);
    span.log2().ceil() as i32 + 2
}

/// Ratio 2^{−αs/(s−1)} by which per-level sums of c_Q·|Q|^{s'} contract below
/// the scale where σ is uniform.
fn fine_ratio(e: &Exponents) -> f64 {
    (-e.alpha_s() * e.inv_s1()).exp2()
}

/// Σ over cubes Q+t ∋ x of ℓ(Q)^{(αs−n)/(s−1)}·(∫_{Q+t} f dσ)^{1/(s−1)}, over
/// all levels, with geometric tails at both ends.
pub fn discrete_wolff(measure: &Measure, f: Option<&Weight>, x: &[f64], shift: &[f64], e: &Exponents) -> Result<f64> {
    let n = measure.dim();
    for v in [x, shift] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("discrete Wolff point or shift"));
        }
    }
    if measure.is_zero() {
        return Ok(0.0);
    }
    let a = e.inv_s1();
    let kexp = e.kernel_exp();
    let term = |k: i32, m: f64| if m > 0.0 { (k as f64 * kexp).exp2() * m.powf(a) } else { 0.0 };
    if let Measure::Atomic(at) = measure {
        let xk = Point::from(x).key();
        if let Some(hit) = at.atoms().iter().find(|q| q.point.key() == xk) {
            let w = f.map_or(1.0, |f| f.eval(&hit.point));
            if w > 0.0 {
                return Ok(f64::INFINITY);
            }
        }
    }
    let k_top = top_level(measure, crate::geometry::norm(shift) + crate::geometry::norm(x));
    let total = total_weighted_mass(measure, f);
    if total == 0.0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    // Coarse side: climb until the cube holds all of the mass.
    let mut k = k_top;
    let mut m_top = 0.0;
    for _ in 0..64 {
        m_top = weighted_box_mass(measure, f, &DyadicCube::containing(x, k, shift).as_box());
        sum += term(k, m_top);
        if m_top >= total * (1.0 - 1e-14) {
            break;
        }
        k += 1;
    }
    let q = kexp.exp2();
    sum += m_top.powf(a) * ((k + 1) as f64 * kexp).exp2() / (1.0 - q);
    // Fine side.
    let r = fine_ratio(e);
    let mut k = k_top - 1;
    let floor = k_top - 1100;
    let mut steps_without_cell = 0;
    while k > floor {
        let cube = DyadicCube::containing(x, k, shift);
        let bx = cube.as_box();
        let m = weighted_box_mass(measure, f, &bx);
        if m == 0.0 {
            break;
        }
        let t = term(k, m);
        sum += t;
        let settled = match measure {
            Measure::Atomic(_) => false,
            Measure::Dyadic(d) => inside_one_cell(d, &bx) || {
                steps_without_cell += 1;
                steps_without_cell > 60
            },
            _ => k <= k_top - 40,
        };
        if settled {
            sum += t * r / (1.0 - r);
            break;
        }
        k -= 1;
    }
    Ok(sum)
}

fn inside_one_cell(d: &crate::measure::DyadicDensity, bx: &BoxRegion) -> bool {
    let side = d.side();
    bx.lo.iter().zip(&bx.hi).zip(d.offset().iter()).all(|((lo, hi), o)| {
        let a = ((lo - o) / side).floor();
        let b = ((hi - o) / side).ceil() - 1.0;
        a == b
    })
}

/// Inclusive range of dyadic levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelRange {
    pub min: i32,
    pub max: i32,
}

/// How the contribution of levels finer than the scanned range was summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailKind {
    /// Every finest scanned cube lies in a region of constant density.
    Exact,
    /// Bounded above using the largest density met in each finest cube.
    UpperBound,
    /// Uniform-density extrapolation of each finest cube.
    Estimate,
}

/// One scanned cube of a Carleson audit.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlesonRow {
    pub level: i32,
    pub index: Vec<i64>,
    pub shift_id: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarlesonReport {
    /// sup over scanned P of Σ_{Q⊆P} c_Q|Q+t|_σ^{s'} / |P+t|_σ.
    pub sup_ratio: f64,
    pub witness: Option<DyadicCube>,
    pub witness_shift: Option<usize>,
    pub levels: LevelRange,
    /// Largest share of a scanned ratio that comes from unscanned fine levels.
    pub tail_bound: f64,
    pub tail_kind: TailKind,
    pub rows: Vec<CarlesonRow>,
}

/// Levels scanned by default for a set of shifts.
pub fn default_levels(measure: &Measure, shifts: &[Point]) -> LevelRange {
    let extent = shifts.iter().map(|t| t.norm()).fold(0.0, f64::max);
    let max = top_level(measure, extent);
    let min = match measure {
        Measure::Dyadic(d) => d.level() - 1,
        Measure::Atomic(a) => {
            let mut sep = f64::INFINITY;
            for (i, p) in a.atoms().iter().enumerate() {
                for q in &a.atoms()[i + 1..] {
                    sep = sep.min(p.point.dist(&q.point));
                }
            }
            if sep.is_finite() {
                (sep / (a.dim() as f64).sqrt()).log2().floor() as i32 - 1
            } else {
                max - 8
            }
        }
        _ => max - 6,
    };
    LevelRange { min: min.min(max), max }
}

/// Largest number of finest-level cubes an audit will enumerate per shift.
const MAX_CUBES: usize = 4_000_000;

/// Scans shifted dyadic cubes P in the level range and reports the largest
/// ratio Σ_{Q⊆P} c_Q|Q+t|_σ^{s'} / |P+t|_σ, where Q runs over all finer
/// levels (those below the range summed in closed form).
pub fn carleson_audit(measure: &Measure, e: &Exponents, shifts: &[Point], levels: LevelRange) -> Result<CarlesonReport> {
    let n = measure.dim();
    if e.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: e.n() });
    }
    if shifts.is_empty() {
        return Err(Error::Precondition("audit needs at least one shift".into()));
    }
    if let Some(t) = shifts.iter().find(|t| t.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: t.dim() });
    }
    if levels.min > levels.max {
        return Err(Error::Precondition(format!("empty level range {}..={}", levels.min, levels.max)));
    }
    let mut report = CarlesonReport {
        sup_ratio: 0.0,
        witness: None,
        witness_shift: None,
        levels,
        tail_bound: 0.0,
        tail_kind: TailKind::Exact,
        rows: Vec::new(),
    };
    if measure.is_zero() {
        return Ok(report);
    }
    if let Measure::Atomic(a) = measure {
        let witness = a
            .atoms()
            .iter()
            .map(|at| DyadicCube::containing(&at.point, levels.min, &shifts[0]))
            .min_by(|p, q| p.index.cmp(&q.index))
            .expect("nonempty");
        report.sup_ratio = f64::INFINITY;
        report.witness = Some(witness);
        report.witness_shift = Some(0);
        report.tail_bound = f64::INFINITY;
        return Ok(report);
    }
    let sp = e.s_prime();
    let kexp = e.kernel_exp();
    let g = e.alpha_s() * e.inv_s1();
    for (shift_id, t) in shifts.iter().enumerate() {
        let finest = finest_cubes(measure, t, levels.min)?;
        // Per cube: (mass, accumulated Σ c_Q m^{s'}, tail part).
        let mut layer: BTreeMap<Vec<i64>, (f64, f64, f64)> = BTreeMap::new();
        let k = levels.min;
        let c = (k as f64 * kexp).exp2();
        for (idx, cell) in finest {
            if cell.mass <= 0.0 {
                continue;
            }
            let own = c * cell.mass.powf(sp);
            let tail = match cell.density {
                Some(rho) => cell.mass * rho.powf(e.inv_s1()) * ((k - 1) as f64 * g).exp2() / (1.0 - (-g).exp2()),
                None => own * fine_ratio(e) / (1.0 - fine_ratio(e)),
            };
            if cell.density.is_none() {
                report.tail_kind = TailKind::Estimate;
            } else if !cell.uniform && report.tail_kind == TailKind::Exact {
                report.tail_kind = TailKind::UpperBound;
            }
            layer.insert(idx, (cell.mass, own + tail, tail));
        }
        for k in levels.min..=levels.max {
            if k > levels.min {
                let c = (k as f64 * kexp).exp2();
                let mut up: BTreeMap<Vec<i64>, (f64, f64, f64)> = BTreeMap::new();
                for (idx, (m, acc, tail)) in &layer {
                    let p: Vec<i64> = idx.iter().map(|i| i.div_euclid(2)).collect();
                    let slot = up.entry(p).or_insert((0.0, 0.0, 0.0));
                    slot.0 += m;
                    slot.1 += acc;
                    slot.2 += tail;
                }
                for v in up.values_mut() {
                    v.1 += c * v.0.powf(sp);
                }
                layer = up;
            }
            for (idx, (m, acc, tail)) in &layer {
                let ratio = acc / m;
                report.rows.push(CarlesonRow { level: k, index: idx.clone(), shift_id, ratio });
                report.tail_bound = report.tail_bound.max(tail / m);
                if ratio > report.sup_ratio {
                    report.sup_ratio = ratio;
                    report.witness = Some(DyadicCube { level: k, index: idx.clone(), shift: t.clone() });
                    report.witness_shift = Some(shift_id);
                }
            }
        }
    }
    Ok(report)
}

struct FineCube {
    mass: f64,
    /// Largest density met in the cube, when the measure is piecewise constant.
    density: Option<f64>,
    uniform: bool,
}

fn finest_cubes(measure: &Measure, t: &[f64], level: i32) -> Result<BTreeMap<Vec<i64>, FineCube>> {
    let side = (level as f64).exp2();
    let n = measure.dim();
    let mut out: BTreeMap<Vec<i64>, FineCube> = BTreeMap::new();
    if let Measure::Dyadic(d) = measure {
        let vol = d.side().powi(n as i32);
        let mut count = 0usize;
        for (key, w) in d.cells() {
            let cb = d.cell_box(key);
            let lo: Vec<i64> = cb.lo.iter().zip(t).map(|(a, s)| ((a - s) / side).floor() as i64).collect();
            let hi: Vec<i64> = cb.hi.iter().zip(t).map(|(b, s)| ((b - s) / side).ceil() as i64 - 1).collect();
            let per_cell: usize = lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as usize).product();
            count += per_cell;
            if count > MAX_CUBES {
                return Err(Error::Precondition(format!("level {level} needs more than {MAX_CUBES} cubes")));
            }
            for idx in box_indices(&lo, &hi) {
                let q = cube_box(level, &idx, t);
                let ov = q.overlap_volume(&cb);
                if ov <= 0.0 {
                    continue;
                }
                let full = (ov - q.volume()).abs() <= 1e-12 * q.volume();
                let entry = out.entry(idx).or_insert(FineCube { mass: 0.0, density: Some(0.0), uniform: true });
                if entry.mass > 0.0 || !full {
                    entry.uniform = false;
                }
                entry.mass += w * ov / vol;
                entry.density = entry.density.map(|r| r.max(w / vol));
            }
        }
        // A cube only partly covered by cells also sees zero density.
        for (idx, fc) in out.iter_mut() {
            if fc.uniform {
                continue;
            }
            let q = cube_box(level, idx, t);
            if (fc.mass - fc.density.unwrap_or(0.0) * q.volume()).abs() <= 1e-12 * fc.mass {
                fc.uniform = true;
            }
        }
        return Ok(out);
    }
    let Some((c, r)) = measure.support_ball() else {
        return Err(Error::Precondition("audit needs a measure with bounded support".into()));
    };
    let lo: Vec<i64> = c.iter().zip(t).map(|(a, s)| ((a - r - s) / side).floor() as i64).collect();
    let hi: Vec<i64> = c.iter().zip(t).map(|(a, s)| ((a + r - s) / side).floor() as i64).collect();
    let count: usize = lo.iter().zip(&hi).map(|(a, b)| (b - a + 1) as usize).product();
    if count > MAX_CUBES / 64 {
        return Err(Error::Precondition(format!("level {level} needs {count} cubes")));
    }
    for idx in box_indices(&lo, &hi) {
        let m = measure.box_mass(&cube_box(level, &idx, t));
        if m > 0.0 {
            out.insert(idx, FineCube { mass: m, density: None, uniform: false });
        }
    }
    Ok(out)
}

fn box_indices(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(lo.len())];
    for (a, b) in lo.iter().zip(hi) {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (*a..=*b).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out
}

/// W^{2^j}(f dσ)(x) next to the average of the discrete Wolff potential
/// over shifts spread through B(0, 2^{j+j₀}).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftAverage {
    pub lhs: f64,
    pub avg: f64,
    pub shifts: usize,
    pub seed: u64,
}

impl ShiftAverage {
    /// lhs/avg, with 0/0 read as 0.
    pub fn ratio(&self) -> f64 {
        if self.lhs == 0.0 {
            0.0
        } else {
            self.lhs / self.avg
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn shift_average_check(
    measure: &Measure,
    f: Option<&Weight>,
    x: &[f64],
    j: i32,
    count: usize,
    seed: u64,
    j0: i32,
    e: &Exponents,
) -> Result<ShiftAverage> {
    if count == 0 {
        return Err(Error::Precondition("shift count must be positive".into()));
    }
    let weighted = match f {
        Some(f) => measure.reweight(f.clone(), 1.0)?,
        None => measure.clone(),
    };
    let lhs = wolff(&weighted, e, x, (j as f64).exp2())?;
    let radius = ((j + j0) as f64).exp2();
    let mut sum = 0.0;
    for t in ball_points(&vec![0.0; measure.dim()], radius, count, seed)? {
        sum += discrete_wolff(measure, f, x, &t, e)?;
    }
    Ok(ShiftAverage { lhs, avg: sum / count as f64, shifts: count, seed })
}

/// M_m = ∫_E (W(χ_E dσ))^m dσ for m = 1..=m_max. Densities use the node
/// layout of [`discretize`] as the outer quadrature.
pub fn energy_moments(measure: &Measure, region: &RegionSpec, m_max: u32, e: &Exponents, res: Resolution) -> Result<Vec<f64>> {
    if m_max == 0 {
        return Err(Error::Precondition("moment order must be at least 1".into()));
    }
    let (masses, potentials) = energy_nodes(measure, region, e, res)?;
    Ok((1..=m_max as i32)
        .map(|m| {
            masses
                .iter()
                .zip(&potentials)
                .map(|(w, p)| if *w == 0.0 { 0.0 } else { w * p.powi(m) })
                .sum()
        })
        .collect())
}

pub fn energy_moment(measure: &Measure, region: &RegionSpec, m: u32, e: &Exponents) -> Result<f64> {
    Ok(*energy_moments(measure, region, m, e, Resolution::default())?.last().expect("m >= 1"))
}

/// Node masses of χ_E dσ and the exact potential W(χ_E dσ) at each node.
fn energy_nodes(measure: &Measure, region: &RegionSpec, e: &Exponents, res: Resolution) -> Result<(Vec<f64>, Vec<f64>)> {
    let restricted = measure.restrict(region)?;
    if restricted.is_zero() {
        return Ok((vec![], vec![]));
    }
    let nodes = discretize(&restricted, res)?;
    let mut potentials = Vec::with_capacity(nodes.len());
    for node in &nodes {
        potentials.push(wolff(&restricted, e, &node.point, f64::INFINITY)?);
    }
    Ok((nodes.iter().map(|q| q.mass).collect(), potentials))
}

/// Smallest Ĉ with M_m ≤ Ĉ^m·m!·σ(E) for every listed moment (m = 1, 2, …).
pub fn moment_constant(moments: &[f64], mass: f64) -> f64 {
    if mass == 0.0 {
        return 0.0;
    }
    let mut fact = 1.0;
    let mut best: f64 = 0.0;
    for (i, m) in moments.iter().enumerate() {
        fact *= (i + 1) as f64;
        best = best.max((m / (fact * mass)).powf(1.0 / (i + 1) as f64));
    }
    best
}

/// ∫_E exp(β·W(χ_E dσ)) dσ summed as the moment series Σ β^m M_m/m!.
pub fn exp_integrability(measure: &Measure, region: &RegionSpec, beta: f64, e: &Exponents, res: Resolution) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Precondition(format!("beta = {beta} must be positive")));
    }
    let (masses, potentials) = energy_nodes(measure, region, e, res)?;
    if masses.is_empty() {
        return Ok(0.0);
    }
    if masses.iter().zip(&potentials).any(|(w, p)| *w > 0.0 && p.is_infinite()) {
        return Ok(f64::INFINITY);
    }
    let mut total: f64 = masses.iter().sum();
    let mut terms: Vec<f64> = masses.clone();
    for m in 1..10_000 {
        let mut step = 0.0;
        for (t, p) in terms.iter_mut().zip(&potentials) {
            *t *= beta * p / m as f64;
            step += *t;
        }
        total += step;
        if step <= 1e-12 * total {
            return Ok(total);
        }
    }
    Ok(f64::INFINITY)
}

/// Both sides of (Σλ)^m ≤ m·Σ_j λ_j (Σ_{k≤j} λ_k)^{m−1}.
pub fn summation_by_parts_power(lambda: &[f64], m: u32) -> (f64, f64) {
    let total: f64 = lambda.iter().sum();
    let mut partial = 0.0;
    let mut rhs = 0.0;
    for l in lambda {
        partial += l;
        rhs += l * partial.powi(m as i32 - 1);
    }
    (total.powi(m as i32), m as f64 * rhs)
}

/// Both sides of Σ_j λ_j e^{Σ_{k≥j} λ_k} ≤ 2e^{Σλ} for 0 ≤ λ_j ≤ 1.
pub fn summation_by_parts_exp(lambda: &[f64]) -> (f64, f64) {
    let total: f64 = lambda.iter().sum();
    let mut suffix = total;
    let mut lhs = 0.0;
    for l in lambda {
        lhs += l * suffix.exp();
        suffix -= l;
    }
    (lhs, 2.0 * total.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::DyadicDensity;

    fn e323() -> Exponents {
        Exponents::new(3, 1.0, 2.0).unwrap()
    }

    #[test]
    fn cube_family() {
        let q = DyadicCube::containing(&[0.3, -0.2], -1, &[0.0, 0.0]);
        assert_eq!(q.index, vec![0, -1]);
        assert_eq!(q.parent().index, vec![0, -1]);
        let kids = q.children();
        assert_eq!(kids.len(), 4);
        let vol: f64 = kids.iter().map(|k| k.as_box().volume()).sum();
        assert!((vol - q.as_box().volume()).abs() < 1e-15);
        assert!(kids.iter().all(|k| k.parent() == q));
    }

    #[test]
    fn discrete_wolff_of_atom_at_x_diverges() {
        let m = Measure::delta(vec![0.0; 3], 1.0).unwrap();
        assert_eq!(discrete_wolff(&m, None, &[0.0; 3], &[0.0; 3], &e323()).unwrap(), f64::INFINITY);
        let zero = Weight::new("zero", |_| 0.0);
        assert_eq!(discrete_wolff(&m, Some(&zero), &[0.0; 3], &[0.0; 3], &e323()).unwrap(), 0.0);
    }

    #[test]
    fn audit_dichotomy() {
        let m = Measure::delta(vec![0.25; 3], 1.0).unwrap();
        let shifts = [Point::origin(3)];
        let r = carleson_audit(&m, &e323(), &shifts, default_levels(&m, &shifts)).unwrap();
        assert_eq!(r.sup_ratio, f64::INFINITY);
        assert!(r.witness.is_some());
        let leb = Measure::Dyadic(DyadicDensity::unit_cube_lebesgue(3, 0).unwrap());
        let r = carleson_audit(&leb, &e323(), &shifts, default_levels(&leb, &shifts)).unwrap();
        assert!(r.sup_ratio.is_finite() && r.sup_ratio > 0.0);
        assert_eq!(r.tail_kind, TailKind::Exact);
    }

    #[test]
    fn summation_by_parts_examples() {
        let (l, r) = summation_by_parts_exp(&[1.0, 0.0, 0.0]);
        assert!((l - std::f64::consts::E).abs() < 1e-15 && (r - 2.0 * std::f64::consts::E).abs() < 1e-15);
        let (l, r) = summation_by_parts_power(&[1.0, 2.0], 2);
        assert_eq!((l, r), (9.0, 2.0 * (1.0 + 2.0 * 3.0)));
    }

    #[test]
    fn moment_constant_fits_every_order() {
        let ms = [2.0, 9.0, 40.0];
        let c = moment_constant(&ms, 1.0);
        let mut fact = 1.0;
        for (i, m) in ms.iter().enumerate() {
            fact *= (i + 1) as f64;
            assert!(*m <= c.powi(i as i32 + 1) * fact * (1.0 + 1e-12));
        }
    }
}
