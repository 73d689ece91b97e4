use crate::geometry::{dist, unit_ball_volume, unit_sphere_area, Point};

use super::Measure;

/// Behaviour of r ↦ σ(B(x, r)) as r → 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Origin {
    /// σ(B(x, r)) = 0 for r ≤ `below`.
    Zero { below: f64 },
    /// x carries an atom of this mass.
    Atom { mass: f64 },
    /// σ(B(x, r)) = coef·r^exp, exactly for r ≤ `below`, and asymptotically
    /// when `below` is zero.
    Power { coef: f64, exp: f64, below: f64 },
}

#[derive(Debug, Clone)]
enum Kind {
    /// Jumps at `breaks`; `values[k]` holds on (breaks[k−1], breaks[k]],
    /// with `values[0]` on (0, breaks[0]] and the last value beyond.
    Step { breaks: Vec<f64>, values: Vec<f64> },
    Smooth,
}

/// The ball-mass profile r ↦ σ(B(x, r)) at a fixed centre x.
#[derive(Debug, Clone)]
pub struct BallMassProfile<'a> {
    measure: &'a Measure,
    x: Point,
    kind: Kind,
}

impl<'a> BallMassProfile<'a> {
    pub(super) fn new(measure: &'a Measure, x: Point) -> Self {
        let kind = match measure {
            Measure::Atomic(a) => {
                let mut pairs: Vec<(f64, f64)> = a.atoms().iter().map(|at| (dist(&at.point, &x), at.mass)).collect();
                pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
                let mut breaks = Vec::new();
                let mut values = vec![0.0];
                let mut acc = 0.0;
                for (d, m) in pairs {
                    acc += m;
                    if d == 0.0 {
                        values[0] = acc;
                        continue;
                    }
                    if breaks.last() == Some(&d) {
                        *values.last_mut().expect("nonempty") = acc;
                    } else {
                        breaks.push(d);
                        values.push(acc);
                    }
                }
                Kind::Step { breaks, values }
            }
            _ => Kind::Smooth,
        };
        BallMassProfile { measure, x, kind }
    }

    pub fn center(&self) -> &Point {
        &self.x
    }

    pub fn measure(&self) -> &Measure {
        self.measure
    }

    pub fn is_step(&self) -> bool {
        matches!(self.kind, Kind::Step { .. })
    }

    /// σ(B(x, r)).
    pub fn mass(&self, r: f64) -> f64 {
        match &self.kind {
            Kind::Step { breaks, values } => {
                if r <= 0.0 {
                    return 0.0;
                }
                // Open ball: atoms at distance exactly r are excluded.
                let k = breaks.partition_point(|&b| b < r);
                values[k]
            }
            Kind::Smooth => self.measure.ball_mass_unchecked(&self.x, r),
        }
    }

    /// Constant pieces (lo, hi, value) of a step profile, ending with an
    /// unbounded piece; `None` for densities.
    pub fn steps(&self) -> Option<Vec<(f64, f64, f64)>> {
        let Kind::Step { breaks, values } = &self.kind else {
            return None;
        };
        let mut out = Vec::with_capacity(values.len());
        let mut lo = 0.0;
        for (k, v) in values.iter().enumerate() {
            let hi = breaks.get(k).copied().unwrap_or(f64::INFINITY);
            out.push((lo, hi, *v));
            lo = hi;
        }
        Some(out)
    }

    /// Radii where the profile is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = match (&self.kind, self.measure) {
            (Kind::Step { breaks, .. }, _) => breaks.clone(),
            (Kind::Smooth, Measure::Radial(rd)) => {
                let d = dist(&rd.center, &self.x);
                let mut v = vec![d];
                if let Some(c) = rd.cutoff {
                    v.push((d - c).abs());
                    v.push(d + c);
                }
                v
            }
            (Kind::Smooth, Measure::Dyadic(dd)) => match dd.bounding_box() {
                Some(b) => {
                    let (near, far) = b.distance_range(&self.x);
                    vec![near, far]
                }
                None => vec![],
            },
            (Kind::Smooth, m) => match m.support_ball() {
                Some((c, r)) => {
                    let d = dist(&c, &self.x);
                    vec![(d - r).max(0.0), d + r]
                }
                None => vec![],
            },
        };
        pts.retain(|r| *r > 0.0 && r.is_finite());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// A radius beyond which σ(B(x, r)) = σ(R^n) (∞ if there is none).
    pub fn saturation(&self) -> f64 {
        match &self.kind {
            Kind::Step { breaks, .. } => breaks.last().copied().unwrap_or(0.0),
            Kind::Smooth => self.measure.farthest_distance(&self.x),
        }
    }

    pub fn total(&self) -> f64 {
        self.measure.total_mass()
    }

    pub fn origin(&self) -> Origin {
        let n = self.x.dim();
        let vn = unit_ball_volume(n);
        match (&self.kind, self.measure) {
            (Kind::Step { breaks, values }, _) => {
                if values[0] > 0.0 {
                    Origin::Atom { mass: values[0] }
                } else {
                    Origin::Zero { below: breaks.first().copied().unwrap_or(f64::INFINITY) }
                }
            }
            (Kind::Smooth, Measure::Radial(rd)) => {
                let d = dist(&rd.center, &self.x);
                let cut = rd.cutoff.unwrap_or(f64::INFINITY);
                if d == 0.0 {
                    let e = n as f64 + rd.exponent;
                    Origin::Power { coef: rd.coefficient * unit_sphere_area(n) / e, exp: e, below: cut }
                } else if d > cut {
                    Origin::Zero { below: d - cut }
                } else if d == cut {
                    // Half of a small ball lies inside the support.
                    let inner = rd.coefficient * d.powf(rd.exponent);
                    Origin::Power { coef: 0.5 * inner * vn, exp: n as f64, below: 0.0 }
                } else {
                    Origin::Power { coef: rd.density(&self.x) * vn, exp: n as f64, below: 0.0 }
                }
            }
            (Kind::Smooth, Measure::Dyadic(dd)) => {
                let idx = dd.cell_of(&self.x);
                match dd.cells().get(&idx) {
                    Some(_) => {
                        let b = dd.cell_box(&idx);
                        let below = self
                            .x
                            .iter()
                            .zip(b.lo.iter().zip(&b.hi))
                            .map(|(p, (l, h))| (p - l).min(h - p))
                            .fold(f64::INFINITY, f64::min);
                        Origin::Power { coef: dd.density(&self.x) * vn, exp: n as f64, below }
                    }
                    None => {
                        let below = dd
                            .cells()
                            .keys()
                            .map(|k| dd.cell_box(k).distance_range(&self.x).0)
                            .fold(f64::INFINITY, f64::min);
                        if below > 0.0 {
                            Origin::Zero { below }
                        } else {
                            // On the boundary of an occupied cell.
                            Origin::Power { coef: 0.0, exp: n as f64, below: 0.0 }
                        }
                    }
                }
            }
            (Kind::Smooth, m) => {
                if let Some((c, r)) = m.support_ball() {
                    let d = dist(&c, &self.x);
                    if d > r {
                        return Origin::Zero { below: d - r };
                    }
                }
                Origin::Power { coef: m.density(&self.x) * vn, exp: n as f64, below: 0.0 }
            }
        }
    }
}
