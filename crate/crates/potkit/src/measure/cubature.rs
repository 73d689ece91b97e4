//! Nested adaptive cubature over balls in polar coordinates, used for
//! densities without a closed-form or one-dimensional ball-mass path.

use std::f64::consts::PI;

use crate::geometry::BoxRegion;
use crate::quadrature::{adaptive, gauss_legendre, Tolerance};

const TOL: Tolerance = Tolerance { abs: 1e-13, rel: 1e-6 };
const PIECES: usize = 48;

/// ∫_{B(x, r)} g(y) dy.
pub fn ball_integral(g: &dyn Fn(&[f64]) -> f64, x: &[f64], r: f64) -> f64 {
    let n = x.len();
    if n == 1 {
        return adaptive(|u| g(&[x[0] + u]), -r, r, TOL, PIECES * 4).value;
    }
    let mut y = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let radial = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let s = sphere_integral(n, &mut |theta: &[f64]| {
            for i in 0..n {
                y[i] = x[i] + t * theta[i];
            }
            g(&y)
        }, &mut dir, 0);
        s * t.powi(n as i32 - 1)
    };
    integrate_mut(radial, 0.0, r)
}

fn integrate_mut<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    adaptive(f, a, b, TOL, PIECES).value
}

/// ∫_{S^{n−1}} h(θ) dθ, filling `dir[depth..]` recursively.
fn sphere_integral(n: usize, h: &mut dyn FnMut(&[f64]) -> f64, dir: &mut Vec<f64>, depth: usize) -> f64 {
    let m = n - depth;
    if m == 2 {
        let scale = if depth == 0 { 1.0 } else { remaining_scale(dir, depth) };
        return integrate_mut(
            |phi: f64| {
                let mut d = dir.clone();
                d[depth] = scale * phi.cos();
                d[depth + 1] = scale * phi.sin();
                h(&d)
            },
            0.0,
            2.0 * PI,
        );
    }
    let scale = if depth == 0 { 1.0 } else { remaining_scale(dir, depth) };
    let weight_exp = (m as f64 - 3.0) / 2.0;
    let mut d = dir.clone();
    integrate_mut(
        |u: f64| {
            d[depth] = scale * u;
            // Record the remaining radius in the next slot for the recursion.
            let rest = scale * (1.0 - u * u).max(0.0).sqrt();
            for v in d.iter_mut().skip(depth + 1) {
                *v = 0.0;
            }
            d[depth + 1] = rest;
            let w = (1.0 - u * u).max(0.0).powf(weight_exp);
            if w == 0.0 {
                return 0.0;
            }
            w * sphere_integral(n, h, &mut d.clone(), depth + 1)
        },
        -1.0,
        1.0,
    )
}

fn remaining_scale(dir: &[f64], depth: usize) -> f64 {
    dir[depth]
}

/// ∫_box g by a 3-point tensor Gauss–Legendre rule on each of the 2^{depth·n}
/// equal sub-boxes.
pub fn box_integral(g: &dyn Fn(&[f64]) -> f64, bx: &BoxRegion, depth: u32) -> f64 {
    let n = bx.lo.len();
    let (xs, ws) = gauss_legendre(3);
    let splits = 1usize << depth;
    let widths: Vec<f64> = bx.lo.iter().zip(&bx.hi).map(|(a, b)| (b - a) / splits as f64).collect();
    if widths.iter().any(|w| *w <= 0.0) {
        return 0.0;
    }
    let jac: f64 = widths.iter().map(|w| 0.5 * w).product();
    let cells = splits.pow(n as u32);
    let nodes = 3usize.pow(n as u32);
    let mut y = vec![0.0; n];
    let mut total = 0.0;
    for cell in 0..cells {
        let mut c = cell;
        let lo: Vec<f64> = (0..n)
            .map(|i| {
                let k = c % splits;
                c /= splits;
                bx.lo[i] + k as f64 * widths[i]
            })
            .collect();
        for node in 0..nodes {
            let mut q = node;
            let mut w = jac;
            for i in 0..n {
                let k = q % 3;
                q /= 3;
                y[i] = lo[i] + 0.5 * widths[i] * (xs[k] + 1.0);
                w *= ws[k];
            }
            total += w * g(&y);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::unit_ball_volume;

    #[test]
    fn constant_over_ball() {
        for n in 1..=3 {
            let v = ball_integral(&|_| 1.0, &vec![0.3; n], 0.7);
            let e = unit_ball_volume(n) * 0.7f64.powi(n as i32);
            assert!((v - e).abs() < 1e-8 * e, "n={n}: {v} vs {e}");
        }
    }

    #[test]
    fn quadratic_over_ball_4d() {
        // ∫_{B_1} |y|^2 dy = ω_3/(n+2) in R^4 = 2π²/6.
        let v = ball_integral(&|y| y.iter().map(|a| a * a).sum(), &[0.0; 4], 1.0);
        let e = 2.0 * PI * PI / 6.0;
        assert!((v - e).abs() < 1e-6 * e, "{v} vs {e}");
    }

    #[test]
    fn box_rule_is_exact_for_quintics() {
        let bx = BoxRegion::new(vec![0.0, -1.0], vec![2.0, 1.0]);
        let v = box_integral(&|y| y[0].powi(5) * y[1] * y[1], &bx, 0);
        assert!((v - 64.0 / 6.0 * 2.0 / 3.0).abs() < 1e-12);
    }
}
