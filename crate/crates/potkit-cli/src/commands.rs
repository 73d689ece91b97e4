//! The four commands. Each builds its tables in memory; writing happens once
//! in the caller.

use potkit::dyadic::{carleson_audit, default_levels, top_level, LevelRange, TailKind};
use potkit::potential::{riesz, wolff};
use potkit::sampling::{Halton, SampleSet};
use potkit::solver::{equivalence_check, sandwich, SandwichStatus};
use potkit::{Exponents, Point};

use crate::config::{Command, ExperimentConfig, PotentialKindSpec};
use crate::table::{coord_names, coords, fmt_f64, Summary, Table};
use crate::CliError;

/// Files produced by a command, its summary and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub files: Vec<(String, String)>,
    pub summary: Summary,
    pub exit_code: i32,
}

impl RunOutput {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_str())
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let e = cfg.exponents.build()?;
    let measure = cfg.measure.build()?;
    if measure.dim() != e.n() {
        return Err(CliError::Config(format!("measure lives in R^{} but exponents use n = {}", measure.dim(), e.n())));
    }
    let ctx = Ctx { cfg, e, measure };
    let (table, summary, exit_code) = match cfg.command {
        Command::Potential => ctx.potential()?,
        Command::Audit => ctx.audit()?,
        Command::Sandwich => ctx.sandwich()?,
        Command::Equivalence => ctx.equivalence()?,
    };
    let name = cfg.command.name();
    Ok(RunOutput {
        files: vec![(format!("{name}.csv"), table.render()), (format!("{name}_summary.txt"), summary.render())],
        summary,
        exit_code,
    })
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    e: Exponents,
    measure: potkit::measure::Measure,
}

type Produced = (Table, Summary, i32);

impl Ctx<'_> {
    fn n(&self) -> usize {
        self.e.n()
    }

    fn potential(&self) -> Result<Produced, CliError> {
        let k = &self.cfg.potential;
        let n = self.n();
        let mut header = coord_names(n);
        header.extend(["rho", "kind", "value"].map(String::from));
        let mut t = Table::new(header);
        let kind = match k.kind {
            PotentialKindSpec::Wolff => "wolff",
            PotentialKindSpec::Riesz => "riesz",
        };
        let order = k.order.unwrap_or(self.e.alpha_s());
        for p in &k.probes {
            if p.len() != n {
                return Err(CliError::Config(format!("probe {p:?} has {} coordinates, expected {n}", p.len())));
            }
            for &rho in &k.rho {
                let v = match k.kind {
                    PotentialKindSpec::Wolff => wolff(&self.measure, &self.e, p, rho)?,
                    PotentialKindSpec::Riesz => riesz(&self.measure, order, p, rho)?,
                };
                let mut row = coords(p);
                row.extend([fmt_f64(rho), kind.to_string(), fmt_f64(v)]);
                t.push(row);
            }
        }
        let mut s = Summary::default();
        s.add("kind", kind).add("rows", t.len());
        if k.kind == PotentialKindSpec::Riesz {
            s.num("order", order);
        }
        Ok((t, s, 0))
    }

    fn shifts(&self) -> Result<Vec<Point>, CliError> {
        let k = &self.cfg.audit;
        if k.shifts == 0 {
            return Err(CliError::Config("audit.shifts must be at least 1".into()));
        }
        let n = self.n();
        let side = (top_level(&self.measure, 0.0) as f64).exp2();
        let mut out = vec![Point::origin(n)];
        let mut h = Halton::new(n, self.cfg.seed)?;
        for _ in 1..k.shifts {
            out.push(Point::new(h.next_point().into_iter().map(|u| u * side).collect()));
        }
        Ok(out)
    }

    fn audit(&self) -> Result<Produced, CliError> {
        let k = &self.cfg.audit;
        let shifts = self.shifts()?;
        let d = default_levels(&self.measure, &shifts);
        let levels = LevelRange { min: k.min_level.unwrap_or(d.min), max: k.max_level.unwrap_or(d.max) };
        let rep = carleson_audit(&self.measure, &self.e, &shifts, levels)?;
        let mut t = Table::new(["level", "index", "shift_id", "ratio"]);
        for r in &rep.rows {
            let idx: Vec<String> = r.index.iter().map(i64::to_string).collect();
            t.push(vec![r.level.to_string(), idx.join(" "), r.shift_id.to_string(), fmt_f64(r.ratio)]);
        }
        let mut s = Summary::default();
        s.num("supRatio", rep.sup_ratio);
        match &rep.witness {
            Some(w) => {
                let idx: Vec<String> = w.index.iter().map(i64::to_string).collect();
                s.add("witness_level", w.level).add("witness_index", idx.join(" "));
            }
            None => {
                s.add("witness_level", "none").add("witness_index", "none");
            }
        }
        let tail = match rep.tail_kind {
            TailKind::Exact => "exact",
            TailKind::UpperBound => "upper-bound",
            TailKind::Estimate => "estimate",
        };
        s.add("witness_shift", rep.witness_shift.map_or("none".to_string(), |v| v.to_string()))
            .add("min_level", levels.min)
            .add("max_level", levels.max)
            .add("shifts", shifts.len())
            .add("seed", self.cfg.seed)
            .num("tail_bound", rep.tail_bound)
            .add("tail_kind", tail);
        Ok((t, s, 0))
    }

    fn samples(&self) -> Result<SampleSet, CliError> {
        let pole = self.cfg.pole(self.n())?;
        Ok(SampleSet::around(&self.measure, &pole, self.cfg.sandwich.layout(), self.cfg.seed)?)
    }

    fn sandwich(&self) -> Result<Produced, CliError> {
        let samples = self.samples()?;
        let opts = self.cfg.sandwich.options(self.n());
        let r = sandwich(&self.measure, &self.e, &samples, &opts)?;
        let mut header = coord_names(self.n());
        header.extend(["radius", "lower", "picard", "upper", "ratio", "verdict"].map(String::from));
        let mut t = Table::new(header);
        for i in 0..samples.len() {
            let mut row = coords(&samples.points[i]);
            row.extend([
                fmt_f64(r.radii[i]),
                fmt_f64(r.lower[i]),
                fmt_f64(r.picard[i]),
                fmt_f64(r.upper[i]),
                fmt_f64(r.upper[i] / r.lower[i]),
                if r.verdicts[i] { "pass" } else { "fail" }.to_string(),
            ]);
            t.push(row);
        }
        let c = &r.constants;
        let mut s = Summary::default();
        s.add("status", r.status.label())
            .add("samples", samples.len())
            .add("failures", r.verdicts.iter().filter(|v| !**v).count())
            .num("c_sigma", c.c_sigma)
            .num("c_hat", c.c_hat)
            .num("beta", c.beta)
            .add("beta_halvings", c.halvings)
            .num("prefactor", c.prefactor)
            .num("b_riesz", c.b_riesz)
            .num("c0", c.c0)
            .num("picard_constant", c.picard_constant)
            .num("c1", c.c1)
            .num("c2", c.c2)
            .add("iterations", r.iterations)
            .add("monotone", r.monotone)
            .num("residual", r.residual)
            .add("decay_sampled", r.decays)
            .add("seed", samples.seed)
            .num("tol", opts.picard.tol)
            .add("max_m", opts.picard.max_m)
            .num("divergence_cap", opts.picard.divergence_cap)
            .num("slack", opts.slack);
        let code = if r.status == SandwichStatus::Pass { 0 } else { 1 };
        Ok((t, s, code))
    }

    fn equivalence(&self) -> Result<Produced, CliError> {
        let samples = self.samples()?;
        let opts = self.cfg.sandwich.options(self.n());
        let r = equivalence_check(&self.measure, &self.e, &samples, &opts)?;
        let mut header = coord_names(self.n());
        header.extend(["radius", "potential", "value"].map(String::from));
        let mut t = Table::new(header);
        for (p, v) in samples.points.iter().zip(&r.values) {
            let mut row = coords(p);
            row.extend([fmt_f64(p.dist(&samples.pole)), r.potential.to_string(), fmt_f64(*v)]);
            t.push(row);
        }
        let mut s = Summary::default();
        s.add("verdict", r.verdict.label())
            .add("potential", r.potential)
            .num("sup", r.sup)
            .num("ratio", r.ratio)
            .add("reason", &r.reason)
            .add("seed", samples.seed);
        Ok((t, s, 0))
    }
}
