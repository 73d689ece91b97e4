//! Points, ball volumes, spherical caps and ball/box intersections in R^n.

use std::f64::consts::PI;
use std::ops::Deref;

use statrs::function::beta::beta_reg;

use crate::quadrature::cosine_mapped;

/// A point of R^n.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn origin(n: usize) -> Self {
        Point(vec![0.0; n])
    }

    /// The point `t·e_axis`.
    pub fn on_axis(n: usize, axis: usize, t: f64) -> Self {
        let mut v = vec![0.0; n];
        v[axis] = t;
        Point(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dist(&self, other: &[f64]) -> f64 {
        dist(&self.0, other)
    }

    pub fn add(&self, other: &[f64]) -> Point {
        Point(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &[f64]) -> Point {
        Point(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: f64) -> Point {
        Point(self.0.iter().map(|a| a * k).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Exact bit pattern, used as a lookup key for tabulated functions.
    pub fn key(&self) -> Vec<u64> {
        self.0.iter().map(|c| c.to_bits()).collect()
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl From<&[f64]> for Point {
    fn from(v: &[f64]) -> Self {
        Point(v.to_vec())
    }
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Surface area of the unit sphere S^{n-1} (written ω_{n-1}).
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Volume of `{z in B(0,R) : z_1 > a}`.
pub fn cap_volume(n: usize, radius: f64, a: f64) -> f64 {
    let full = unit_ball_volume(n) * radius.powi(n as i32);
    if a >= radius {
        return 0.0;
    }
    if a <= -radius {
        return full;
    }
    if a < 0.0 {
        return full - cap_volume(n, radius, -a);
    }
    let h = radius - a;
    match n {
        1 => h,
        2 => radius * radius * (a / radius).acos() - a * (radius * radius - a * a).sqrt(),
        3 => PI * h * h * (3.0 * radius - h) / 3.0,
        _ => {
            let x = 1.0 - (a / radius).powi(2);
            0.5 * full * beta_reg((n as f64 + 1.0) / 2.0, 0.5, x)
        }
    }
}

/// Fraction of the unit sphere S^{n-1} on which `u_1 > c`.
pub fn sphere_cap_fraction(n: usize, c: f64) -> f64 {
    if c >= 1.0 {
        return 0.0;
    }
    if c < -1.0 {
        return 1.0;
    }
    match n {
        1 => {
            // S^0 = {-1, +1}
            let mut k = 0.0;
            if 1.0 > c {
                k += 0.5;
            }
            if -1.0 > c {
                k += 0.5;
            }
            k
        }
        2 => c.acos() / PI,
        3 => 0.5 * (1.0 - c),
        _ => {
            if c < 0.0 {
                1.0 - sphere_cap_fraction(n, -c)
            } else {
                0.5 * beta_reg((n as f64 - 1.0) / 2.0, 0.5, 1.0 - c * c)
            }
        }
    }
}

/// Volume of `B(0, r1) ∩ B(p, r2)` with `|p| = d`.
pub fn lens_volume(n: usize, d: f64, r1: f64, r2: f64) -> f64 {
    if r1 <= 0.0 || r2 <= 0.0 || d >= r1 + r2 {
        return 0.0;
    }
    let vn = unit_ball_volume(n);
    if d + r2 <= r1 {
        return vn * r2.powi(n as i32);
    }
    if d + r1 <= r2 {
        return vn * r1.powi(n as i32);
    }
    // Radical plane at signed distance a1 from the first centre.
    let a1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let a2 = d - a1;
    (cap_volume(n, r1, a1) + cap_volume(n, r2, a2)).max(0.0)
}

/// Axis-aligned box `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        BoxRegion { lo, hi }
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a).max(0.0)).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (a, b))| *x >= *a && *x < *b)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn overlap_volume(&self, other: &BoxRegion) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .map(|((a0, a1), (b0, b1))| (a1.min(*b1) - a0.max(*b0)).max(0.0))
            .product()
    }

    /// Smallest and largest distance from `p` to the closed box.
    pub fn distance_range(&self, p: &[f64]) -> (f64, f64) {
        let mut near = 0.0;
        let mut far = 0.0;
        for ((x, a), b) in p.iter().zip(&self.lo).zip(&self.hi) {
            let dn = if x < a {
                a - x
            } else if x > b {
                x - b
            } else {
                0.0
            };
            let df = (x - a).abs().max((x - b).abs());
            near += dn * dn;
            far += df * df;
        }
        (near.sqrt(), far.sqrt())
    }
}

/// Volume of `B(center, r) ∩ box`.
///
/// Exact in one and two dimensions, a cosine-mapped Gauss–Legendre slice
/// integral of the exact planar formula in three dimensions, and recursive
/// subdivision (depth ≤ 12) with a linear-ramp leaf estimate above that.
pub fn ball_box_volume(center: &[f64], r: f64, bx: &BoxRegion) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let (near, far) = bx.distance_range(center);
    if near >= r {
        return 0.0;
    }
    if far <= r {
        return bx.volume();
    }
    let lo: Vec<f64> = bx.lo.iter().zip(center).map(|(a, c)| a - c).collect();
    let hi: Vec<f64> = bx.hi.iter().zip(center).map(|(a, c)| a - c).collect();
    match center.len() {
        1 => (hi[0].min(r) - lo[0].max(-r)).max(0.0),
        2 => disc_rect_area(r, lo[0], hi[0], lo[1], hi[1]),
        3 => ball_box_3d(r, &lo, &hi),
        _ => subdivide(center, r, bx, 0, LEAF_BUDGET),
    }
}

/// Area of the disc of radius `r` at the origin intersected with
/// `[x0,x1] × [y0,y1]`, in closed form.
pub fn disc_rect_area(r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let a = x0.max(-r);
    let b = x1.min(r);
    if !(b > a) || !(y1 > y0) {
        return 0.0;
    }
    let g = |x: f64| {
        let x = x.clamp(-r, r);
        0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).asin())
    };
    let mut cuts = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < r {
            let xb = (r * r - y * y).sqrt();
            for c in [-xb, xb] {
                if c > a && c < b {
                    cuts.push(c);
                }
            }
        }
    }
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let m = 0.5 * (u + v);
        let h = (r * r - m * m).max(0.0).sqrt();
        let top_is_arc = h < y1;
        let bottom_is_arc = -h > y0;
        let top = if top_is_arc { h } else { y1 };
        let bottom = if bottom_is_arc { -h } else { y0 };
        if top <= bottom {
            continue;
        }
        let arc = g(v) - g(u);
        let dx = v - u;
        let t = if top_is_arc { arc } else { y1 * dx };
        let s = if bottom_is_arc { -arc } else { y0 * dx };
        area += t - s;
    }
    area.max(0.0)
}

fn ball_box_3d(r: f64, lo: &[f64], hi: &[f64]) -> f64 {
    let za = lo[2].max(-r);
    let zb = hi[2].min(r);
    if !(zb > za) {
        return 0.0;
    }
    // Slice radius crosses a critical in-plane distance at these heights.
    let mut crit = vec![0.0];
    for &x in &[lo[0], hi[0]] {
        crit.push(x.abs());
        for &y in &[lo[1], hi[1]] {
            crit.push((x * x + y * y).sqrt());
        }
    }
    for &y in &[lo[1], hi[1]] {
        crit.push(y.abs());
    }
    let mut cuts = vec![za, zb];
    for dcrit in crit {
        if dcrit < r {
            let z = (r * r - dcrit * dcrit).sqrt();
            for c in [-z, z] {
                if c > za && c < zb {
                    cuts.push(c);
                }
            }
        }
    }
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();
    let slice = |z: f64| {
        let rho = (r * r - z * z).max(0.0).sqrt();
        disc_rect_area(rho, lo[0], hi[0], lo[1], hi[1])
    };
    cuts.windows(2).map(|w| cosine_mapped(slice, w[0], w[1])).sum::<f64>().max(0.0)
}

const LEAF_BUDGET: f64 = 2e5;

fn subdivide(center: &[f64], r: f64, bx: &BoxRegion, depth: usize, budget: f64) -> f64 {
    let (near, far) = bx.distance_range(center);
    if near >= r {
        return 0.0;
    }
    if far <= r {
        return bx.volume();
    }
    let n = center.len();
    let side = bx.hi[0] - bx.lo[0];
    // Cap the leaf count near (r/side)^(n-1) ≈ budget.
    let rel_limit = budget.powf(1.0 / (n as f64 - 1.0));
    if depth >= 12 || r / side > rel_limit {
        let c = bx.center();
        let d = dist(&c, center);
        let width: f64 = if d > 0.0 {
            c.iter()
                .zip(center)
                .zip(bx.lo.iter().zip(&bx.hi))
                .map(|((ci, xi), (a, b))| (b - a) * ((ci - xi) / d).abs())
                .sum()
        } else {
            side
        };
        let frac = (0.5 - (d - r) / width).clamp(0.0, 1.0);
        return frac * bx.volume();
    }
    let mid = bx.center();
    let mut total = 0.0;
    for mask in 0..(1usize << n) {
        let mut lo = bx.lo.clone();
        let mut hi = bx.hi.clone();
        for i in 0..n {
            if mask >> i & 1 == 1 {
                lo[i] = mid[i];
            } else {
                hi[i] = mid[i];
            }
        }
        total += subdivide(center, r, &BoxRegion::new(lo, hi), depth + 1, budget);
    }
    total
}
