//! One-dimensional quadrature: globally adaptive Gauss–Kronrod (7,15)
//! bisection and fixed Gauss–Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Absolute floor and relative target for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const POTENTIAL: Tolerance = Tolerance { abs: 1e-14, rel: 1e-8 };
    pub const BALL_MASS: Tolerance = Tolerance { abs: 1e-15, rel: 1e-8 };

    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

/// Integrates `f` over `[a, b]` by bisecting the interval with the largest
/// error estimate until the total error meets `tol` or `max_pieces` is hit.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance, max_pieces: usize) -> Estimate {
    if !(b > a) {
        return Estimate { value: 0.0, error: 0.0, converged: true };
    }
    let (v, e) = gk15(&mut f, a, b);
    if !v.is_finite() {
        return Estimate { value: v, error: f64::INFINITY, converged: false };
    }
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut pieces = 1;
    while err > tol.abs.max(tol.rel * total.abs()) && pieces < max_pieces {
        let Some(worst) = heap.pop() else { break };
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, m);
        let (v2, e2) = gk15(&mut f, m, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Piece { a: m, b: worst.b, value: v2, error: e2 });
        pieces += 1;
        if !total.is_finite() {
            return Estimate { value: total, error: f64::INFINITY, converged: false };
        }
    }
    // Re-sum to shed drift from the running updates.
    let value: f64 = {
        let mut parts: Vec<Piece> = heap.into_vec();
        parts.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(Ordering::Equal));
        err = parts.iter().map(|p| p.error).sum();
        parts.iter().map(|p| p.value).sum()
    };
    Estimate {
        value,
        error: err,
        converged: err <= tol.abs.max(tol.rel * value.abs()),
    }
}

/// Adaptive integration over consecutive sub-intervals `[pts[i], pts[i+1]]`.
pub fn adaptive_pieces<F: FnMut(f64) -> f64>(mut f: F, pts: &[f64], tol: Tolerance, max_pieces: usize) -> Estimate {
    let mut value = 0.0;
    let mut error = 0.0;
    let mut converged = true;
    for w in pts.windows(2) {
        let est = adaptive(&mut f, w[0], w[1], tol, max_pieces);
        value += est.value;
        error += est.error;
        converged &= est.converged;
    }
    Estimate { value, error, converged }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn gl24() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(24))
}

/// Fixed 24-point Gauss–Legendre rule on `[a, b]` after the cosine map
/// `x = a + (b-a)(1-cos(pi t))/2`, which smooths square-root endpoint
/// behaviour at both ends.
pub fn cosine_mapped<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let (xs, ws) = gl24();
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in xs.iter().zip(ws) {
        let t = 0.5 * (x + 1.0);
        let arg = std::f64::consts::PI * t;
        let z = a + half * (1.0 - arg.cos());
        let jac = half * std::f64::consts::PI * arg.sin() * 0.5;
        acc += w * f(z) * jac;
    }
    acc
}
