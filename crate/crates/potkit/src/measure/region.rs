use crate::error::{Error, Result};
use crate::geometry::{dist, BoxRegion, Point};

/// A set E used to restrict a measure to χ_E dσ.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    /// Open ball.
    Ball { center: Point, radius: f64 },
    /// Half-open shifted dyadic cube `[0,2^level)^n + 2^level·index + shift`.
    Cube { index: Vec<i64>, level: i32, shift: Point },
    /// Union of members; accepted only when the caller asserts they are
    /// pairwise disjoint.
    Union { members: Vec<RegionSpec>, disjoint: bool },
}

impl RegionSpec {
    pub fn ball(center: impl Into<Point>, radius: f64) -> Self {
        RegionSpec::Ball { center: center.into(), radius }
    }

    pub fn cube(index: Vec<i64>, level: i32, shift: impl Into<Point>) -> Self {
        RegionSpec::Cube { index, level, shift: shift.into() }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            RegionSpec::Ball { center, radius } => {
                if center.dim() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: center.dim() });
                }
                if !center.is_finite() || !radius.is_finite() {
                    return Err(Error::NonFinite("region ball"));
                }
                if *radius <= 0.0 {
                    return Err(Error::InvalidRegion(format!("ball radius {radius} must be positive")));
                }
                Ok(())
            }
            RegionSpec::Cube { index, shift, level } => {
                if index.len() != n || shift.dim() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: index.len() });
                }
                if !shift.is_finite() || level.abs() > 1000 {
                    return Err(Error::InvalidRegion("cube shift or level out of range".into()));
                }
                Ok(())
            }
            RegionSpec::Union { members, disjoint } => {
                if !disjoint {
                    return Err(Error::InvalidRegion(
                        "union must be flagged disjoint; overlapping unions are not supported".into(),
                    ));
                }
                members.iter().try_for_each(|m| m.validate(n))
            }
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            RegionSpec::Ball { center, radius } => dist(center, p) < *radius,
            RegionSpec::Cube { .. } => self.as_box().map(|b| b.contains(p)).unwrap_or(false),
            RegionSpec::Union { members, .. } => members.iter().any(|m| m.contains(p)),
        }
    }

    /// The cube as an axis-aligned box; `None` for other variants.
    pub fn as_box(&self) -> Option<BoxRegion> {
        match self {
            RegionSpec::Cube { index, level, shift } => {
                let side = (*level as f64).exp2();
                let lo: Vec<f64> = index.iter().zip(shift.iter()).map(|(&i, t)| i as f64 * side + t).collect();
                let hi = lo.iter().map(|a| a + side).collect();
                Some(BoxRegion::new(lo, hi))
            }
            _ => None,
        }
    }

    /// A ball containing the region.
    pub fn enclosing_ball(&self) -> (Point, f64) {
        match self {
            RegionSpec::Ball { center, radius } => (center.clone(), *radius),
            RegionSpec::Cube { .. } => {
                let b = self.as_box().expect("cube");
                let c = b.center();
                let r = dist(&c, &b.hi);
                (Point::new(c), r)
            }
            RegionSpec::Union { members, .. } => {
                let balls: Vec<(Point, f64)> = members.iter().map(|m| m.enclosing_ball()).collect();
                enclose(&balls)
            }
        }
    }

    /// Lebesgue volume of the region.
    pub fn volume(&self, n: usize) -> f64 {
        match self {
            RegionSpec::Ball { radius, .. } => crate::geometry::unit_ball_volume(n) * radius.powi(n as i32),
            RegionSpec::Cube { level, .. } => ((*level as f64) * n as f64).exp2(),
            RegionSpec::Union { members, .. } => members.iter().map(|m| m.volume(n)).sum(),
        }
    }
}

/// A ball containing all given balls (centred at the mean of their centres).
pub(crate) fn enclose(balls: &[(Point, f64)]) -> (Point, f64) {
    let Some(first) = balls.first() else {
        return (Point::default(), 0.0);
    };
    let n = first.0.dim();
    let mut c = vec![0.0; n];
    for (p, _) in balls {
        for (ci, pi) in c.iter_mut().zip(p.iter()) {
            *ci += pi / balls.len() as f64;
        }
    }
    let r = balls.iter().map(|(p, r)| dist(&c, p) + r).fold(0.0, f64::max);
    (Point::new(c), r)
}
