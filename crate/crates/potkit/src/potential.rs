//! Truncated and global Wolff and Riesz potentials.
//!
//! Both are integrals of the form ∫ σ(B(x,r))^a · r^e dr/r over (lo, hi):
//! Wolff has a = 1/(s−1), e = (αs−n)/(s−1); Riesz of order β has a = 1,
//! e = β − n.

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::geometry::Point;
use crate::measure::{BallMassProfile, Measure, Origin};
use crate::quadrature::{adaptive_pieces, Tolerance};

/// Which potential a query asks for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    Wolff(Exponents),
    /// Riesz potential of the given order β, 0 < β < n.
    Riesz { order: f64 },
}

/// A single potential evaluation: kind, point and truncation ρ (∞ allowed).
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialQuery {
    pub kind: PotentialKind,
    pub point: Point,
    pub rho: f64,
}

impl PotentialQuery {
    pub fn wolff(exponents: Exponents, point: impl Into<Point>, rho: f64) -> Self {
        PotentialQuery { kind: PotentialKind::Wolff(exponents), point: point.into(), rho }
    }

    pub fn riesz(order: f64, point: impl Into<Point>, rho: f64) -> Self {
        PotentialQuery { kind: PotentialKind::Riesz { order }, point: point.into(), rho }
    }

    fn kernel(&self) -> Result<Kernel> {
        let n = self.point.dim();
        match self.kind {
            PotentialKind::Wolff(e) => {
                if e.n() != n {
                    return Err(Error::DimensionMismatch { expected: e.n(), got: n });
                }
                Ok(Kernel::wolff(&e))
            }
            PotentialKind::Riesz { order } => Kernel::riesz(order, n),
        }
    }

    fn validate(&self, measure: &Measure) -> Result<()> {
        if self.point.dim() != measure.dim() {
            return Err(Error::DimensionMismatch { expected: measure.dim(), got: self.point.dim() });
        }
        if !self.point.is_finite() {
            return Err(Error::NonFinite("query point"));
        }
        if self.rho.is_nan() || self.rho <= 0.0 {
            return Err(Error::Precondition(format!("truncation rho = {} must be positive", self.rho)));
        }
        Ok(())
    }
}

/// The radial integrand σ(B(x,r))^a · r^e against dr/r.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub a: f64,
    pub e: f64,
}

impl Kernel {
    pub fn wolff(e: &Exponents) -> Self {
        Kernel { a: e.inv_s1(), e: e.kernel_exp() }
    }

    pub fn riesz(order: f64, n: usize) -> Result<Self> {
        if !order.is_finite() || order <= 0.0 || order >= n as f64 {
            return Err(Error::InvalidExponents(format!("Riesz order {order} must lie in (0, {n})")));
        }
        Ok(Kernel { a: 1.0, e: order - n as f64 })
    }

    /// Integrand value at radius r for ball mass v.
    pub fn at(&self, v: f64, r: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        v.powf(self.a) * r.powf(self.e)
    }

    /// ∫_lo^hi v^a r^e dr/r for constant v, with hi possibly ∞.
    fn constant_piece(&self, v: f64, lo: f64, hi: f64) -> f64 {
        if v <= 0.0 || hi <= lo {
            return 0.0;
        }
        if lo <= 0.0 {
            return f64::INFINITY;
        }
        let hi_term = if hi.is_infinite() { 0.0 } else { hi.powf(self.e) };
        v.powf(self.a) * (lo.powf(self.e) - hi_term) / (-self.e)
    }
}

/// Evaluates a potential query.
pub fn evaluate(measure: &Measure, q: &PotentialQuery) -> Result<f64> {
    q.validate(measure)?;
    let kernel = q.kernel()?;
    let profile = measure.profile(&q.point)?;
    Ok(radial_integral(&profile, kernel, 0.0, q.rho))
}

/// W^ρ_{α,s}σ(x) = ∫₀^ρ (σ(B(x,r))/r^{n−αs})^{1/(s−1)} dr/r.
pub fn wolff(measure: &Measure, exponents: &Exponents, x: &[f64], rho: f64) -> Result<f64> {
    evaluate(measure, &PotentialQuery::wolff(*exponents, x, rho))
}

/// I^ρ_βσ(x) = ∫₀^ρ σ(B(x,r))/r^{n−β} dr/r.
pub fn riesz(measure: &Measure, order: f64, x: &[f64], rho: f64) -> Result<f64> {
    evaluate(measure, &PotentialQuery::riesz(order, x, rho))
}

/// ∫_t^∞ of the difference of the Wolff integrands centred at x and y.
pub fn wolff_tail_gap(measure: &Measure, x: &[f64], y: &[f64], t: f64, exponents: &Exponents) -> Result<f64> {
    let px = measure.profile(x)?;
    let py = measure.profile(y)?;
    let d = crate::geometry::dist(x, y);
    if !(t > d) {
        return Err(Error::Precondition(format!("tail gap needs |x − y| = {d} < t = {t}")));
    }
    let sx = px.saturation();
    let sy = py.saturation();
    let upper = sx.max(sy);
    if upper.is_infinite() {
        return Err(Error::Precondition("tail gap needs a compactly supported measure".into()));
    }
    if t >= upper {
        // Both profiles equal σ(R^n) on (t, ∞).
        return Ok(0.0);
    }
    let k = Kernel::wolff(exponents);
    Ok(radial_integral(&px, k, t, upper) - radial_integral(&py, k, t, upper))
}

/// Relative position below which a density profile is replaced by its
/// leading power law when no exact small-radius form is known.
const ORIGIN_CUT: f64 = 1e-7;

/// ∫_lo^hi kernel(σ(B(x,r)), r) dr/r for 0 ≤ lo < hi ≤ ∞.
pub fn radial_integral(profile: &BallMassProfile<'_>, k: Kernel, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if let Some(steps) = profile.steps() {
        return steps
            .iter()
            .map(|&(a, b, v)| k.constant_piece(v, a.max(lo), b.min(hi)))
            .sum();
    }
    let sat = profile.saturation();
    let mut total = 0.0;
    let mut start = lo;
    if lo == 0.0 {
        match profile.origin() {
            Origin::Atom { .. } => return f64::INFINITY,
            Origin::Zero { below } => start = below.min(hi),
            Origin::Power { coef, exp, below } => {
                let q = k.a * exp + k.e;
                if coef > 0.0 && q <= 0.0 {
                    return f64::INFINITY;
                }
                let r0 = if below > 0.0 {
                    below
                } else {
                    let scale = if sat.is_finite() && sat > 0.0 { sat } else { profile.center().norm().max(1.0) };
                    ORIGIN_CUT * scale
                };
                let r0 = r0.min(hi);
                if coef > 0.0 {
                    total += coef.powf(k.a) * r0.powf(q) / q;
                }
                start = r0;
            }
        }
    }
    let mid_end = hi.min(sat);
    if mid_end > start {
        total += log_quadrature(profile, k, start, mid_end);
    }
    if hi > sat {
        if sat.is_finite() {
            total += k.constant_piece(profile.total(), sat.max(start), hi);
        } else {
            total += unbounded_tail(profile, k, start, hi);
        }
    }
    total
}

/// Adaptive quadrature of the integrand in u = ln r over (lo, hi), split at
/// the profile's breakpoints.
fn log_quadrature(profile: &BallMassProfile<'_>, k: Kernel, lo: f64, hi: f64) -> f64 {
    debug_assert!(lo > 0.0 && hi.is_finite(), "log quadrature over ({lo}, {hi})");
    let mut pts = vec![lo.ln()];
    pts.extend(profile.breakpoints().into_iter().filter(|b| *b > lo && *b < hi).map(f64::ln));
    pts.push(hi.ln());
    // Keep each piece within a few decades so the integrator sees the
    // power-law shape at every scale.
    let mut refined = vec![pts[0]];
    for w in pts.windows(2) {
        let pieces = ((w[1] - w[0]) / 2.0).ceil().max(1.0) as usize;
        for j in 1..=pieces {
            refined.push(w[0] + (w[1] - w[0]) * j as f64 / pieces as f64);
        }
    }
    let f = |u: f64| {
        let r = u.exp();
        k.at(profile.mass(r), r)
    };
    adaptive_pieces(f, &refined, Tolerance::POTENTIAL, 400).value
}

/// Tail over (lo, hi) for unbounded radial densities, where the ball mass
/// approaches the centred mass σ(B(c, r)).
fn unbounded_tail(profile: &BallMassProfile<'_>, k: Kernel, lo: f64, hi: f64) -> f64 {
    let Measure::Radial(rd) = profile.measure() else {
        return f64::INFINITY;
    };
    let n = profile.center().dim() as f64;
    let q = k.a * (n + rd.exponent) + k.e;
    if q >= 0.0 && hi.is_infinite() {
        return f64::INFINITY;
    }
    let d = crate::geometry::dist(&rd.center, profile.center());
    let big = (1e6 * d.max(lo)).max(1.0);
    let mid_end = hi.min(big);
    let mut total = if mid_end > lo { log_quadrature(profile, k, lo, mid_end) } else { 0.0 };
    if hi > big {
        let coef = rd.centered_mass(1.0);
        let hi_term = if hi.is_infinite() { 0.0 } else { hi.powf(q) };
        total += coef.powf(k.a) * (hi_term - big.powf(q)) / q;
    }
    total
}
