//! Seeded low-discrepancy point sets and the evaluation sample layout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::measure::Measure;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Halton sequence with a seeded Cranley–Patterson rotation.
#[derive(Debug, Clone)]
pub struct Halton {
    dim: usize,
    shift: Vec<f64>,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 || dim > PRIMES.len() {
            return Err(Error::Precondition(format!("Halton dimension {dim} outside 1..={}", PRIMES.len())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.random::<f64>()).collect();
        Ok(Halton { dim, shift, index: 1 })
    }

    /// The next point of [0,1)^dim.
    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.index;
        self.index += 1;
        (0..self.dim)
            .map(|k| {
                let u = radical_inverse(i, PRIMES[k]) + self.shift[k];
                u - u.floor()
            })
            .collect()
    }
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

fn clamp_open(u: f64) -> f64 {
    u.clamp(1e-12, 1.0 - 1e-12)
}

/// Deterministic unit vectors in R^n spread over the sphere.
pub fn sphere_directions(n: usize, count: usize, seed: u64) -> Result<Vec<Point>> {
    if n == 1 {
        return Ok((0..count).map(|i| Point::new(vec![if i % 2 == 0 { 1.0 } else { -1.0 }])).collect());
    }
    let mut h = Halton::new(if n <= 3 { n - 1 } else { n }, seed)?;
    let normal = standard_normal();
    let dirs = (0..count)
        .map(|_| {
            let u = h.next_point();
            match n {
                2 => {
                    let t = 2.0 * std::f64::consts::PI * u[0];
                    Point::new(vec![t.cos(), t.sin()])
                }
                3 => {
                    let z = 2.0 * u[0] - 1.0;
                    let t = 2.0 * std::f64::consts::PI * u[1];
                    let w = (1.0 - z * z).max(0.0).sqrt();
                    Point::new(vec![w * t.cos(), w * t.sin(), z])
                }
                _ => {
                    let g: Vec<f64> = u.iter().map(|&v| normal.inverse_cdf(clamp_open(v))).collect();
                    let norm = crate::geometry::norm(&g).max(1e-300);
                    Point::new(g.into_iter().map(|c| c / norm).collect())
                }
            }
        })
        .collect();
    Ok(dirs)
}

/// Deterministic points spread over the ball B(center, radius).
pub fn ball_points(center: &[f64], radius: f64, count: usize, seed: u64) -> Result<Vec<Point>> {
    let n = center.len();
    let mut h = Halton::new(n + 1, seed)?;
    let normal = standard_normal();
    Ok((0..count)
        .map(|_| {
            let u = h.next_point();
            let g: Vec<f64> = u[..n].iter().map(|&v| normal.inverse_cdf(clamp_open(v))).collect();
            let norm = crate::geometry::norm(&g).max(1e-300);
            let r = radius * u[n].powf(1.0 / n as f64);
            Point::new(center.iter().zip(&g).map(|(c, gi)| c + r * gi / norm).collect())
        })
        .collect())
}

/// Where a sample point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleOrigin {
    Shell { shell: usize, direction: usize },
    Atom { index: usize },
}

/// Evaluation points around a pole: log-spaced shells times directions,
/// plus every atom of an atomic measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub pole: Point,
    pub seed: u64,
    pub scale: f64,
    pub points: Vec<Point>,
    pub origins: Vec<SampleOrigin>,
}

/// Layout knobs for [`SampleSet::around`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellLayout {
    pub shells: usize,
    pub directions: usize,
    /// Shell radii span [inner, outer]·scale.
    pub inner: f64,
    pub outer: f64,
}

impl Default for ShellLayout {
    fn default() -> Self {
        ShellLayout { shells: 8, directions: 16, inner: 1e-3, outer: 1e3 }
    }
}

impl SampleSet {
    /// Shell points around `pole` scaled by the radius of the smallest
    /// pole-centred ball holding the support (1 when σ = 0).
    pub fn around(measure: &Measure, pole: &[f64], layout: ShellLayout, seed: u64) -> Result<Self> {
        if pole.len() != measure.dim() {
            return Err(Error::DimensionMismatch { expected: measure.dim(), got: pole.len() });
        }
        let far = measure.farthest_distance(pole);
        let scale = if measure.is_zero() || far == 0.0 {
            1.0
        } else if far.is_finite() {
            far
        } else {
            // Unbounded support: use the distance to the density centre.
            match measure {
                Measure::Radial(r) => crate::geometry::dist(&r.center, pole).max(1.0),
                _ => 1.0,
            }
        };
        Self::with_scale(measure, pole, scale, layout, seed)
    }

    pub fn with_scale(measure: &Measure, pole: &[f64], scale: f64, layout: ShellLayout, seed: u64) -> Result<Self> {
        if layout.shells == 0 || layout.directions == 0 || !(layout.inner > 0.0) || layout.outer < layout.inner {
            return Err(Error::Precondition("sample layout needs shells, directions and 0 < inner <= outer".into()));
        }
        let n = pole.len();
        let dirs = sphere_directions(n, layout.shells * layout.directions, seed)?;
        let mut points = Vec::new();
        let mut origins = Vec::new();
        let span = (layout.outer / layout.inner).ln();
        for shell in 0..layout.shells {
            let frac = if layout.shells == 1 { 0.0 } else { shell as f64 / (layout.shells - 1) as f64 };
            let r = scale * layout.inner * (span * frac).exp();
            for direction in 0..layout.directions {
                let d = &dirs[shell * layout.directions + direction];
                points.push(Point::new(pole.iter().zip(d.iter()).map(|(p, u)| p + r * u).collect()));
                origins.push(SampleOrigin::Shell { shell, direction });
            }
        }
        if let Some(a) = measure.as_atomic() {
            let pk = Point::from(pole).key();
            for (index, atom) in a.atoms().iter().enumerate() {
                if atom.point.key() != pk {
                    points.push(atom.point.clone());
                    origins.push(SampleOrigin::Atom { index });
                }
            }
        }
        Ok(SampleSet { pole: Point::from(pole), seed, scale, points, origins })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance of each sample from the pole.
    pub fn radii(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.dist(&self.pole)).collect()
    }

    pub fn translate(&self, v: &[f64]) -> SampleSet {
        SampleSet {
            pole: self.pole.add(v),
            points: self.points.iter().map(|p| p.add(v)).collect(),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_is_seeded_and_in_unit_cube() {
        let a: Vec<_> = {
            let mut h = Halton::new(3, 7).unwrap();
            (0..50).map(|_| h.next_point()).collect()
        };
        let mut h = Halton::new(3, 7).unwrap();
        let b: Vec<_> = (0..50).map(|_| h.next_point()).collect();
        assert_eq!(a, b);
        assert!(a.iter().flatten().all(|u| (0.0..1.0).contains(u)));
    }

    #[test]
    fn directions_are_unit() {
        for n in 1..=5 {
            for d in sphere_directions(n, 20, 3).unwrap() {
                assert!((d.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ball_points_inside() {
        for p in ball_points(&[1.0, 2.0], 0.5, 100, 1).unwrap() {
            assert!(p.dist(&[1.0, 2.0]) <= 0.5);
        }
    }

    #[test]
    fn default_sample_count() {
        let m = Measure::uniform_ball(vec![0.0; 3], 1.0, 1.0).unwrap();
        let s = SampleSet::around(&m, &[0.0; 3], ShellLayout::default(), 1).unwrap();
        assert_eq!(s.len(), 128);
        let r = s.radii();
        assert!((r[0] - 1e-3).abs() < 1e-15 && (r[127] - 1e3).abs() < 1e-9);
    }
}
