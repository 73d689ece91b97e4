//! Experiment configuration, read from TOML.

use serde::{Deserialize, Serialize};

use potkit::measure::{Measure, Resolution};
use potkit::sampling::ShellLayout;
use potkit::solver::{PicardOptions, SandwichOptions};
use potkit::{hessian_params, plaplace_params, Exponents};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Potential,
    Audit,
    Sandwich,
    Equivalence,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Potential => "potential",
            Command::Audit => "audit",
            Command::Sandwich => "sandwich",
            Command::Equivalence => "equivalence",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExponentSpec {
    Direct { n: usize, alpha: f64, s: f64 },
    Plaplace { p: f64, n: usize },
    Hessian { k: u32, n: usize },
}

impl ExponentSpec {
    pub fn build(&self) -> Result<Exponents, CliError> {
        let e = match *self {
            ExponentSpec::Direct { n, alpha, s } => Exponents::new(n, alpha, s),
            ExponentSpec::Plaplace { p, n } => plaplace_params(p, n),
            ExponentSpec::Hessian { k, n } => hessian_params(k, n),
        };
        e.map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub point: Vec<f64>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub index: Vec<i64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    Zero {
        dim: usize,
    },
    Atomic {
        dim: usize,
        atoms: Vec<AtomSpec>,
    },
    UniformBall {
        center: Vec<f64>,
        radius: f64,
        mass: f64,
    },
    /// coefficient·|x − center|^exponent, optionally cut off outside a ball.
    Radial {
        center: Vec<f64>,
        exponent: f64,
        coefficient: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<f64>,
    },
    /// Lebesgue measure on [0,1)^dim laid out on cells of side 2^level.
    DyadicLebesgue {
        dim: usize,
        level: i32,
    },
    Dyadic {
        dim: usize,
        level: i32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<Vec<f64>>,
        cells: Vec<CellSpec>,
    },
}

impl MeasureSpec {
    pub fn build(&self) -> Result<Measure, CliError> {
        use potkit::measure::DyadicDensity;
        let m = match self {
            MeasureSpec::Zero { dim } => Ok(Measure::zero(*dim)),
            MeasureSpec::Atomic { dim, atoms } => {
                Measure::atomic(*dim, atoms.iter().map(|a| (a.point.clone(), a.mass)).collect())
            }
            MeasureSpec::UniformBall { center, radius, mass } => Measure::uniform_ball(center.clone(), *radius, *mass),
            MeasureSpec::Radial { center, exponent, coefficient, cutoff } => {
                Measure::radial(center.clone(), *exponent, *coefficient, *cutoff)
            }
            MeasureSpec::DyadicLebesgue { dim, level } => DyadicDensity::unit_cube_lebesgue(*dim, *level).map(Measure::Dyadic),
            MeasureSpec::Dyadic { dim, level, offset, cells } => {
                let cells = cells.iter().map(|c| (c.index.clone(), c.weight)).collect();
                let offset = offset.clone().unwrap_or_else(|| vec![0.0; *dim]);
                if offset.len() != *dim {
                    return Err(CliError::Config(format!("offset has {} coordinates, expected {dim}", offset.len())));
                }
                DyadicDensity::with_offset(*level, offset.into(), cells).map(Measure::Dyadic)
            }
        };
        m.map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKindSpec {
    Wolff,
    Riesz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialKnobs {
    #[serde(default = "default_kind")]
    pub kind: PotentialKindSpec,
    /// Riesz order; αs when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
    #[serde(default)]
    pub probes: Vec<Vec<f64>>,
    #[serde(default = "default_rho")]
    pub rho: Vec<f64>,
}

fn default_kind() -> PotentialKindSpec {
    PotentialKindSpec::Wolff
}

fn default_rho() -> Vec<f64> {
    vec![f64::INFINITY]
}

impl Default for PotentialKnobs {
    fn default() -> Self {
        PotentialKnobs { kind: default_kind(), order: None, probes: Vec::new(), rho: default_rho() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditKnobs {
    /// Number of shifts: the unshifted lattice plus low-discrepancy shifts.
    #[serde(default = "one")]
    pub shifts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_level: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_level: Option<i32>,
}

fn one() -> usize {
    1
}

impl Default for AuditKnobs {
    fn default() -> Self {
        AuditKnobs { shifts: 1, min_level: None, max_level: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SandwichKnobs {
    pub shells: usize,
    pub directions: usize,
    pub inner: f64,
    pub outer: f64,
    pub prefactor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub max_halvings: u32,
    pub max_m: usize,
    pub divergence_cap: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radial_layers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_cells: Option<usize>,
    pub c2_min: f64,
    pub c2_max: f64,
    pub c2_count: usize,
    pub slack: f64,
}

impl Default for SandwichKnobs {
    fn default() -> Self {
        let layout = ShellLayout::default();
        let o = SandwichOptions::for_dim(3);
        SandwichKnobs {
            shells: layout.shells,
            directions: layout.directions,
            inner: layout.inner,
            outer: layout.outer,
            prefactor: o.prefactor,
            beta: None,
            max_halvings: o.max_halvings,
            max_m: o.picard.max_m,
            divergence_cap: o.picard.divergence_cap,
            tol: o.picard.tol,
            radial_layers: None,
            grid_cells: None,
            c2_min: o.c2_min,
            c2_max: o.c2_max,
            c2_count: o.c2_count,
            slack: o.slack,
        }
    }
}

impl SandwichKnobs {
    pub fn layout(&self) -> ShellLayout {
        ShellLayout { shells: self.shells, directions: self.directions, inner: self.inner, outer: self.outer }
    }

    pub fn options(&self, n: usize) -> SandwichOptions {
        let base = Resolution::for_dim(n);
        SandwichOptions {
            prefactor: self.prefactor,
            beta: self.beta,
            max_halvings: self.max_halvings,
            picard: PicardOptions { max_m: self.max_m, divergence_cap: self.divergence_cap, tol: self.tol },
            resolution: Resolution {
                radial_layers: self.radial_layers.unwrap_or(base.radial_layers),
                grid_cells: self.grid_cells.unwrap_or(base.grid_cells),
            },
            c2_min: self.c2_min,
            c2_max: self.c2_max,
            c2_count: self.c2_count,
            slack: self.slack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub seed: u64,
    /// The pole x₀; the origin when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pole: Option<Vec<f64>>,
    pub exponents: ExponentSpec,
    pub measure: MeasureSpec,
    #[serde(default)]
    pub potential: PotentialKnobs,
    #[serde(default)]
    pub audit: AuditKnobs,
    #[serde(default)]
    pub sandwich: SandwichKnobs,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn pole(&self, n: usize) -> Result<Vec<f64>, CliError> {
        let p = self.pole.clone().unwrap_or_else(|| vec![0.0; n]);
        if p.len() != n {
            return Err(CliError::Config(format!("pole has {} coordinates, expected {n}", p.len())));
        }
        Ok(p)
    }
}
