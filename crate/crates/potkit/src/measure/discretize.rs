//! Replacement of a measure by finitely many weighted nodes. Each node is a
//! point mass smeared uniformly over a small ball (radius zero for atoms).

use crate::error::{Error, Result};
use crate::geometry::{unit_ball_volume, unit_sphere_area, BoxRegion, Point};
use crate::sampling::sphere_directions;

use super::cubature::box_integral;
use super::Measure;

/// A node of a discretised measure: `mass` spread uniformly over
/// B(point, radius).
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub point: Point,
    pub mass: f64,
    pub radius: f64,
}

/// Resolution of the node layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    /// Radial layers for radial densities.
    pub radial_layers: usize,
    /// Grid cells per axis for densities without a native layout.
    pub grid_cells: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution { radial_layers: 5, grid_cells: 8 }
    }
}

impl Resolution {
    /// A layout of a few hundred nodes in dimension n.
    pub fn for_dim(n: usize) -> Self {
        match n {
            1 => Resolution { radial_layers: 128, grid_cells: 256 },
            2 => Resolution { radial_layers: 12, grid_cells: 20 },
            3 => Resolution { radial_layers: 5, grid_cells: 8 },
            4 => Resolution { radial_layers: 3, grid_cells: 4 },
            _ => Resolution { radial_layers: 2, grid_cells: 3 },
        }
    }
}

const DIRECTION_SEED: u64 = 0x5eed;

/// Nodes whose smeared masses sum to σ. Densities must have bounded support.
pub fn discretize(measure: &Measure, res: Resolution) -> Result<Vec<Node>> {
    if res.radial_layers == 0 || res.grid_cells == 0 {
        return Err(Error::Precondition("resolution must be positive".into()));
    }
    let n = measure.dim();
    match measure {
        Measure::Atomic(a) => Ok(a
            .atoms()
            .iter()
            .map(|at| Node { point: at.point.clone(), mass: at.mass, radius: 0.0 })
            .collect()),
        Measure::Radial(rd) => {
            let Some(big_r) = rd.cutoff else {
                return Err(Error::InvalidMeasure("cannot discretise a density with unbounded support".into()));
            };
            let layers = res.radial_layers;
            let h0 = big_r / layers as f64;
            let e = n as f64 + rd.exponent;
            let vn = unit_ball_volume(n);
            let mut nodes = Vec::new();
            for i in 0..layers {
                let a = i as f64 * h0;
                let b = a + h0;
                let mass = rd.centered_mass(b) - rd.centered_mass(a);
                let mid = a + 0.5 * h0;
                let count = if n == 1 {
                    2
                } else {
                    ((unit_sphere_area(n) * (mid / h0).powi(n as i32 - 1)).round() as usize).max(2)
                };
                let t = e / (e + 1.0) * (b.powf(e + 1.0) - a.powf(e + 1.0)) / (b.powf(e) - a.powf(e));
                let shell_volume = vn * (b.powi(n as i32) - a.powi(n as i32));
                let radius = (shell_volume / count as f64 / vn).powf(1.0 / n as f64);
                for d in sphere_directions(n, count, DIRECTION_SEED + i as u64)? {
                    nodes.push(Node { point: rd.center.add(&d.scale(t)), mass: mass / count as f64, radius });
                }
            }
            Ok(nodes)
        }
        Measure::Dyadic(dd) => {
            let side = dd.side();
            let radius = (side.powi(n as i32) / unit_ball_volume(n)).powf(1.0 / n as f64);
            Ok(dd
                .cells()
                .iter()
                .map(|(k, w)| Node { point: Point::new(dd.cell_box(k).center()), mass: *w, radius })
                .collect())
        }
        _ => {
            let Some((c, r)) = measure.support_ball() else {
                return Err(Error::InvalidMeasure("cannot discretise a density with unbounded support".into()));
            };
            let k = res.grid_cells;
            let side = 2.0 * r / k as f64;
            let radius = (side.powi(n as i32) / unit_ball_volume(n)).powf(1.0 / n as f64);
            let mut nodes = Vec::new();
            for flat in 0..k.pow(n as u32) {
                let mut q = flat;
                let lo: Vec<f64> = (0..n)
                    .map(|i| {
                        let j = q % k;
                        q /= k;
                        c[i] - r + j as f64 * side
                    })
                    .collect();
                let hi = lo.iter().map(|v| v + side).collect();
                let bx = BoxRegion::new(lo, hi);
                let mass = box_integral(&|y: &[f64]| measure.density(y), &bx, 1);
                if mass <= 0.0 {
                    continue;
                }
                let centroid: Vec<f64> = (0..n)
                    .map(|i| box_integral(&|y: &[f64]| measure.density(y) * y[i], &bx, 1) / mass)
                    .collect();
                nodes.push(Node { point: Point::new(centroid), mass, radius });
            }
            Ok(nodes)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_nodes_keep_mass_and_avoid_center() {
        let m = Measure::uniform_ball(vec![0.0; 3], 1.0, 2.0).unwrap();
        let nodes = discretize(&m, Resolution::default()).unwrap();
        let total: f64 = nodes.iter().map(|q| q.mass).sum();
        assert!((total - 2.0).abs() < 1e-12);
        assert!(nodes.iter().all(|q| q.point.norm() > 0.0));
        assert!(nodes.len() > 400 && nodes.len() < 700, "{}", nodes.len());
    }

    #[test]
    fn unbounded_density_rejected() {
        let m = Measure::radial(vec![0.0; 3], -2.0, 1.0, None).unwrap();
        assert!(discretize(&m, Resolution::default()).is_err());
    }
}
