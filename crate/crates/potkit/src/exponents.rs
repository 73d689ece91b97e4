//! The exponent triple (n, α, s) and its parameter maps.

use crate::error::{Error, Result};
use crate::geometry::unit_sphere_area;

/// Validated exponents with `s > 1`, `α > 0` and `0 < α·s < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    n: usize,
    alpha: f64,
    s: f64,
}

impl Exponents {
    pub fn new(n: usize, alpha: f64, s: f64) -> Result<Self> {
        if !alpha.is_finite() || !s.is_finite() {
            return Err(Error::NonFinite("exponents"));
        }
        if n == 0 {
            return Err(Error::InvalidExponents("dimension must be positive".into()));
        }
        if s <= 1.0 {
            return Err(Error::InvalidExponents(format!("s = {s} must exceed 1")));
        }
        if alpha <= 0.0 {
            return Err(Error::InvalidExponents(format!("alpha = {alpha} must be positive")));
        }
        if alpha * s >= n as f64 {
            return Err(Error::InvalidExponents(format!(
                "alpha*s = {} must be below n = {n}",
                alpha * s
            )));
        }
        Ok(Exponents { n, alpha, s })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Conjugate exponent s' = s/(s-1).
    pub fn s_prime(&self) -> f64 {
        self.s / (self.s - 1.0)
    }

    /// α·s, the order of the Riesz potential paired with this Wolff potential.
    pub fn alpha_s(&self) -> f64 {
        self.alpha * self.s
    }

    /// (α·s − n)/(s − 1), the decay exponent of the kernel |x − x₀|^kernelExp.
    pub fn kernel_exp(&self) -> f64 {
        (self.alpha * self.s - self.n as f64) / (self.s - 1.0)
    }

    /// 1/(s − 1).
    pub fn inv_s1(&self) -> f64 {
        1.0 / (self.s - 1.0)
    }

    /// (s − 1)/(n − α·s): the Wolff potential of a unit point mass at
    /// distance d equals this times d^kernelExp.
    pub fn delta_coefficient(&self) -> f64 {
        (self.s - 1.0) / (self.n as f64 - self.alpha * self.s)
    }
}

/// Exponents of the p-Laplacian: α = 1, s = p, with 1 < p < n.
pub fn plaplace_params(p: f64, n: usize) -> Result<Exponents> {
    if !(p > 1.0) || p >= n as f64 {
        return Err(Error::InvalidExponents(format!("p-Laplace needs 1 < p < n, got p = {p}, n = {n}")));
    }
    Exponents::new(n, 1.0, p)
}

/// Normalising constant γ_{p,n} = ((p−1)/(n−p))·(n·ω_{n−1})^{−1/(p−1)} of
/// the p-Laplace fundamental solution, with ω_{n−1} the area of S^{n−1}.
pub fn plaplace_gamma(p: f64, n: usize) -> Result<f64> {
    let e = plaplace_params(p, n)?;
    Ok(e.delta_coefficient() * (n as f64 * unit_sphere_area(n)).powf(-1.0 / (p - 1.0)))
}

/// Exponents of the k-Hessian operator: α = 2k/(k+1), s = k+1, 1 ≤ k < n/2.
pub fn hessian_params(k: u32, n: usize) -> Result<Exponents> {
    if k == 0 || 2 * k as usize >= n {
        return Err(Error::InvalidExponents(format!("k-Hessian needs 1 <= k < n/2, got k = {k}, n = {n}")));
    }
    let k = k as f64;
    Exponents::new(n, 2.0 * k / (k + 1.0), k + 1.0)
}
