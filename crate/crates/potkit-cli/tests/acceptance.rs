//! Acceptance suite: each criterion prints one PASS/FAIL line, and the
//! process fails if any criterion fails.

use std::error::Error;
use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use potkit::dyadic::{
    carleson_audit, default_levels, energy_moments, exp_integrability, moment_constant, summation_by_parts_exp,
    summation_by_parts_power,
};
use potkit::geometry::dist;
use potkit::measure::{DyadicDensity, Measure, RegionSpec, Resolution};
use potkit::operator::{iterate_n, lower_bound_radial, lower_bound_shell};
use potkit::potential::{riesz, wolff};
use potkit::sampling::{SampleSet, ShellLayout};
use potkit::solver::{sandwich, SandwichOptions, SandwichReport, SandwichStatus};
use potkit::{Exponents, Point};

type Outcome = Result<(bool, String), Box<dyn Error>>;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}

fn rand_point(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-half..half)).collect()
}

/// Delta kernels in closed form.
fn delta_kernels() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut ww, mut wi) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let n = rng.random_range(2..=6usize);
        let p = rng.random_range(1.05..n as f64 - 0.05);
        let x0 = rand_point(&mut rng, n, 2.0);
        let x = rand_point(&mut rng, n, 2.0);
        let d = dist(&x, &x0);
        let delta = Measure::delta(x0, 1.0)?;
        let e = Exponents::new(n, 1.0, p)?;
        let exact = (p - 1.0) / (n as f64 - p) * d.powf((p - n as f64) / (p - 1.0));
        ww = ww.max(rel(wolff(&delta, &e, &x, f64::INFINITY)?, exact));
        let a = rng.random_range(0.1..n as f64 - 0.1);
        let exact = d.powf(a - n as f64) / (n as f64 - a);
        wi = wi.max(rel(riesz(&delta, a, &x, f64::INFINITY)?, exact));
    }
    Ok((ww <= 1e-12 && wi <= 1e-12, format!("max rel err wolff {ww:.2e}, riesz {wi:.2e} over 50 configs")))
}

/// ∫_0^ρ φ(r)^a r^e dr/r for the step profile of atoms at distances `d`,
/// by composite Simpson on a log grid with nodes at every jump.
fn log_grid_oracle(mut atoms: Vec<(f64, f64)>, a: f64, e: f64, rho: f64, nodes: usize) -> f64 {
    atoms.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut pieces = Vec::new();
    let mut mass = 0.0;
    for (i, (d, m)) in atoms.iter().enumerate() {
        mass += m;
        let next = atoms.get(i + 1).map_or(f64::INFINITY, |q| q.0);
        let hi = next.min(rho);
        if hi > *d {
            pieces.push((*d, hi, mass));
        }
    }
    let span: f64 = pieces.iter().filter(|p| p.1.is_finite()).map(|p| (p.1 / p.0).ln()).sum();
    let mut total = 0.0;
    for (lo, hi, m) in pieces {
        let c = m.powf(a);
        if hi.is_infinite() {
            total += c * lo.powf(e) / -e;
            continue;
        }
        let (u0, u1) = (lo.ln(), hi.ln());
        let k = ((((u1 - u0) / span) * nodes as f64) as usize / 2 * 2).max(2);
        let h = (u1 - u0) / k as f64;
        let g = |u: f64| c * (e * u).exp();
        let mut s = g(u0) + g(u1);
        for j in 1..k {
            s += g(u0 + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        total += s * h / 3.0;
    }
    total
}

fn mc_ball_mass(m: &Measure, c: &[f64], r: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = c.len();
    let mut acc = 0.0;
    let mut y = vec![0.0; n];
    let mut got = 0;
    while got < samples {
        let mut q = 0.0;
        for (yi, ci) in y.iter_mut().zip(c) {
            let u: f64 = rng.random_range(-1.0..1.0);
            q += u * u;
            *yi = ci + r * u;
        }
        if q >= 1.0 {
            continue;
        }
        got += 1;
        acc += m.density(&y);
    }
    let vol = PI.powf(n as f64 / 2.0) / libm_gamma(n as f64 / 2.0 + 1.0) * r.powi(n as i32);
    acc / samples as f64 * vol
}

fn libm_gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Atomic potentials against quadrature; density ball masses against
/// Monte-Carlo.
fn oracle_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for cfg in 0..100 {
        let n = rng.random_range(2..=5usize);
        let s = rng.random_range(1.1..3.0);
        let alpha = rng.random_range(0.05..0.95 * n as f64 / s);
        let e = Exponents::new(n, alpha, s)?;
        let atoms: Vec<(Vec<f64>, f64)> =
            (0..rng.random_range(1..=6)).map(|_| (rand_point(&mut rng, n, 1.0), rng.random_range(0.1..2.0))).collect();
        let x = rand_point(&mut rng, n, 2.0);
        let rho = if cfg % 2 == 0 { f64::INFINITY } else { rng.random_range(0.1..5.0) };
        let by_dist: Vec<(f64, f64)> = atoms.iter().map(|(p, m)| (dist(p, &x), *m)).collect();
        let m = Measure::atomic(n, atoms)?;
        let (lib, oracle) = if cfg % 4 < 2 {
            (wolff(&m, &e, &x, rho)?, log_grid_oracle(by_dist, 1.0 / (s - 1.0), e.kernel_exp(), rho, 10_000))
        } else {
            let beta = rng.random_range(0.1..n as f64 - 0.1);
            (riesz(&m, beta, &x, rho)?, log_grid_oracle(by_dist, 1.0, beta - n as f64, rho, 10_000))
        };
        worst = worst.max(rel(lib, oracle));
    }
    let mut cells = std::collections::BTreeMap::new();
    for i in 0..4 {
        for j in 0..4 {
            if (i + 2 * j) % 3 != 0 {
                cells.insert(vec![i, j], 0.1 + 0.05 * (i * 4 + j) as f64);
            }
        }
    }
    let cases: Vec<(Measure, Vec<f64>, f64)> = vec![
        (Measure::uniform_ball(vec![0.0; 3], 1.0, 2.0)?, vec![0.5, 0.2, 0.0], 0.7),
        (Measure::radial(vec![0.0; 3], -1.0, 1.0, Some(1.5))?, vec![0.8, 0.0, 0.0], 0.5),
        (Measure::radial(vec![0.1, 0.0, 0.0], 0.5, 2.0, None)?, vec![0.3, 0.4, 0.0], 1.0),
        (Measure::Dyadic(DyadicDensity::new(2, -2, cells)?), vec![0.4, 0.6], 0.45),
    ];
    let mut mc = 0.0f64;
    for (i, (m, c, r)) in cases.iter().enumerate() {
        let exact = m.ball_mass(c, *r)?;
        mc = mc.max(rel(exact, mc_ball_mass(m, c, *r, 10_000_000, 20 + i as u64)));
    }
    Ok((
        worst <= 1e-6 && mc <= 1e-3,
        format!("atomic vs log-grid max rel {worst:.2e} (100 configs); ball mass vs Monte-Carlo max rel {mc:.2e}"),
    ))
}

fn summation_by_parts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = (0, 0);
    let mut tight = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let len = rng.random_range(1..=40);
        let lam: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..3.0)).collect();
        let m = rng.random_range(1..=6);
        let (l, r) = summation_by_parts_power(&lam, m);
        if l > r * (1.0 + 1e-12) {
            bad.0 += 1;
        }
        tight.0 = tight.0.max(l / r);
        let lam: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..=1.0)).collect();
        let (l, r) = summation_by_parts_exp(&lam);
        if l > r * (1.0 + 1e-12) {
            bad.1 += 1;
        }
        tight.1 = tight.1.max(l / r);
    }
    Ok((
        bad == (0, 0),
        format!("violations power {} exp {}; max lhs/rhs {:.4} and {:.4}", bad.0, bad.1, tight.0, tight.1),
    ))
}

fn iterate_lower_bounds() -> Outcome {
    let mut violations = 0;
    let mut slack = (f64::INFINITY, f64::INFINITY);
    for (n, s) in [(3usize, 2.0), (4, 3.0)] {
        let e = Exponents::new(n, 1.0, s)?;
        let pole = vec![0.0; n];
        for mass in [1e-2, 1e-1, 1.0] {
            let m = Measure::uniform_ball(pole.clone(), 1.0, mass)?;
            let samples = SampleSet::around(&m, &pole, ShellLayout::default(), 4)?;
            let ledger = iterate_n(&m, 4, &e, &samples, Resolution::for_dim(n))?;
            for k in 1..=4u32 {
                let vals = &ledger.values[k as usize - 1];
                for (x, u) in samples.points.iter().zip(vals) {
                    for (j, b) in [lower_bound_shell(&m, k, x, &pole, &e)?, lower_bound_radial(&m, k, x, &pole, &e)?]
                        .into_iter()
                        .enumerate()
                    {
                        if *u < b {
                            violations += 1;
                        }
                        if b > 0.0 {
                            let r = u / b;
                            if j == 0 {
                                slack.0 = slack.0.min(r);
                            } else {
                                slack.1 = slack.1.min(r);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violations; min iterate/bound shell {:.3e}, radial {:.3e}", slack.0, slack.1),
    ))
}

fn moments_and_integrability() -> Outcome {
    let e = Exponents::new(3, 1.0, 2.0)?;
    let m = Measure::uniform_ball(vec![0.0; 3], 1.0, 4.0 * PI / 3.0)?;
    let region = RegionSpec::ball(vec![0.0; 3], 1.0 + 1e-9);
    let res = Resolution::default();
    let moments = energy_moments(&m, &region, 6, &e, res)?;
    let mass = m.total_mass();
    let c = moment_constant(&moments, mass);
    let mut fact = 1.0;
    let mut ok = true;
    for (i, mm) in moments.iter().enumerate() {
        fact *= (i + 1) as f64;
        ok &= *mm <= c.powi(i as i32 + 1) * fact * mass * (1.0 + 1e-12);
    }
    let beta = 0.5 / c;
    let lhs = exp_integrability(&m, &region, beta, &e, res)?;
    let rhs = mass / (1.0 - c * beta);
    Ok((ok && lhs <= rhs * (1.0 + 1e-6), format!("C = {c:.6}; exp integral {lhs:.6} <= {rhs:.6}")))
}

/// Carleson ratio of the cube (k, idx) for Lebesgue on [0,1)^n, unshifted,
/// by enumerating sub-cubes down to `fine` and summing the rest in closed form.
fn carleson_oracle(n: usize, k: i32, idx: &[i64], e: &Exponents, fine: i32) -> f64 {
    let sp = e.s_prime();
    let overlap = |j: i32, q: &[i64]| -> f64 {
        let l = (j as f64).exp2();
        q.iter().map(|&i| ((i as f64 + 1.0) * l).min(1.0) - (i as f64 * l).max(0.0)).map(|v| v.max(0.0)).product()
    };
    let mp = overlap(k, idx);
    let mut sum = 0.0;
    let mut full = 0.0;
    for j in (fine..=k).rev() {
        let f = 1i64 << (k - j);
        let cells = if j <= 0 { 1i64 << -j } else { 1 };
        let ranges: Vec<(i64, i64)> = idx.iter().map(|&i| ((i * f).max(0), ((i + 1) * f).min(cells))).collect();
        if ranges.iter().any(|(a, b)| a >= b) {
            break;
        }
        let mut q: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        let c = (j as f64 * e.kernel_exp()).exp2();
        'enumerate: loop {
            let m = overlap(j, &q);
            if m > 0.0 {
                sum += c * m.powf(sp);
                if j == fine {
                    full += 1.0;
                }
            }
            for a in 0..n {
                q[a] += 1;
                if q[a] < ranges[a].1 {
                    continue 'enumerate;
                }
                q[a] = ranges[a].0;
            }
            break;
        }
    }
    let g = e.alpha_s() / (e.s() - 1.0);
    let tail = full * (fine as f64 * n as f64).exp2() * ((fine - 1) as f64 * g).exp2() / (1.0 - (-g).exp2());
    (sum + tail) / mp
}

fn carleson_dichotomy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut atomic_ok = true;
    for i in 0..5 {
        let n = 2 + i % 2;
        let e = Exponents::new(n, 1.0, 1.5)?;
        let atoms: Vec<(Vec<f64>, f64)> =
            (0..rng.random_range(1..=5)).map(|_| (rand_point(&mut rng, n, 1.0), rng.random_range(0.1..1.0))).collect();
        let m = Measure::atomic(n, atoms)?;
        let shifts = [Point::origin(n)];
        let rep = carleson_audit(&m, &e, &shifts, default_levels(&m, &shifts))?;
        let hit = rep.witness.as_ref().is_some_and(|w| {
            let bx = w.as_box();
            m.as_atomic().unwrap().atoms().iter().any(|a| bx.contains(&a.point))
        });
        atomic_ok &= rep.sup_ratio == f64::INFINITY && hit;
    }
    let mut worst = 0.0f64;
    let mut sups = Vec::new();
    // αs must stay below n, so the plane uses s = 3/2.
    for (n, s, fine) in [(2usize, 1.5, -10), (3, 2.0, -6)] {
        let e = Exponents::new(n, 1.0, s)?;
        let m = Measure::Dyadic(DyadicDensity::unit_cube_lebesgue(n, -3)?);
        let shifts = [Point::origin(n)];
        let rep = carleson_audit(&m, &e, &shifts, default_levels(&m, &shifts))?;
        for row in &rep.rows {
            worst = worst.max(rel(row.ratio, carleson_oracle(n, row.level, &row.index, &e, fine)));
        }
        sups.push(rep.sup_ratio);
    }
    let finite = sups.iter().all(|s| s.is_finite());
    Ok((
        atomic_ok && finite && worst <= 1e-8,
        format!(
            "atomic: inf with witness {}; Lebesgue sup n=2 {:.6}, n=3 {:.6}; max rel vs enumeration {worst:.2e}",
            if atomic_ok { "5/5" } else { "missing" },
            sups[0],
            sups[1]
        ),
    ))
}

struct SandwichRuns {
    ball: SandwichReport,
    ball_mass: f64,
    zero: SandwichReport,
    hardy: SandwichReport,
}

fn sandwich_runs() -> Result<SandwichRuns, Box<dyn Error>> {
    let e = Exponents::new(3, 1.0, 2.0)?;
    let opts = SandwichOptions::for_dim(3);
    let pole = vec![0.0; 3];
    let mut mass = 4.0 * PI / 3.0;
    let ball = loop {
        let m = Measure::uniform_ball(pole.clone(), 1.0, mass)?;
        let s = SampleSet::around(&m, &pole, ShellLayout::default(), 11)?;
        let r = sandwich(&m, &e, &s, &opts)?;
        if r.constants.c0 > 0.0 && r.status != SandwichStatus::NotConstructible || mass < 1e-6 {
            break r;
        }
        mass *= 0.5;
    };
    let z = Measure::zero(3);
    let zero = sandwich(&z, &e, &SampleSet::around(&z, &pole, ShellLayout::default(), 11)?, &opts)?;
    let h = Measure::radial(pole.clone(), -2.0, 0.02, Some(1.0))?;
    let hs = SampleSet::around(&h, &[1.0, 0.0, 0.0], ShellLayout::default(), 11)?;
    let hardy = sandwich(&h, &e, &hs, &opts)?;
    Ok(SandwichRuns { ball, ball_mass: mass, zero, hardy })
}

fn ordered(r: &SandwichReport) -> bool {
    r.status == SandwichStatus::Pass && r.iterations <= 64 && r.verdicts.len() == 128 && r.verdicts.iter().all(|v| *v)
}

fn end_to_end(runs: &SandwichRuns) -> Outcome {
    let ball = ordered(&runs.ball);
    let z = &runs.zero;
    let ratio0 = z.upper[0] / z.lower[0];
    let zero = ordered(z) && z.picard == z.f0 && z.upper.iter().zip(&z.lower).all(|(u, l)| u / l == ratio0);
    let h = &runs.hardy;
    let c2 = h.constants.c2;
    let positive: Vec<f64> = h.local.iter().map(|p| p.0).filter(|w| *w > 0.0).collect();
    let growth = !positive.is_empty() && positive.iter().all(|w| (c2 * w).exp_m1() > 0.0);
    Ok((
        ball && zero && ordered(h) && growth,
        format!(
            "ball mass {:.4}: {} in {} steps (C0 {:.4}); zero: {}; hardy: {} in {} steps, factor > 1 at {} points",
            runs.ball_mass,
            runs.ball.status.label(),
            runs.ball.iterations,
            runs.ball.constants.c0,
            if zero { "limit = f0, ratio constant" } else { "mismatch" },
            h.status.label(),
            h.iterations,
            positive.len()
        ),
    ))
}

fn fixed_point_residual(runs: &SandwichRuns) -> Outcome {
    let r = [runs.ball.residual, runs.zero.residual, runs.hardy.residual];
    let ok = r.iter().all(|v| *v <= 1e-8);
    Ok((ok, format!("max |u - (C N(u) + f0)|/u: ball {:.2e}, zero {:.2e}, hardy {:.2e}", r[0], r[1], r[2])))
}

/// For 1 < s < 2, (W^ρ)^{s−1} ≤ C·I^{2ρ}; for s > 2, I^ρ ≤ C·(W^{2ρ})^{s−1}.
/// With the same truncation on both sides the ratio is unbounded at points
/// whose truncation radius barely reaches the support.
fn wolff_riesz_comparison() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let probes: Vec<Vec<f64>> = (0..64)
        .map(|_| {
            let r = rng.random_range(-6.0..6.0f64).exp2();
            let d: Vec<f64> = rand_point(&mut rng, 3, 1.0);
            let nd = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            d.iter().map(|v| v * r / nd).collect()
        })
        .collect();
    let measures = [
        Measure::atomic(3, vec![(vec![0.0; 3], 1.0), (vec![0.5, 0.0, 0.0], 0.3), (vec![0.0, -2.0, 1.0], 2.0)])?,
        Measure::uniform_ball(vec![0.0; 3], 1.0, 1.0)?,
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for s in [1.5, 2.5] {
        let e = Exponents::new(3, 1.0, s)?;
        let mut sups = Vec::new();
        for k in -3..=3 {
            let rho = (k as f64).exp2();
            let mut sup = 0.0f64;
            for m in &measures {
                for x in &probes {
                    let (rw, ri) = if s < 2.0 { (rho, 2.0 * rho) } else { (2.0 * rho, rho) };
                    let w = wolff(m, &e, x, rw)?.powf(s - 1.0);
                    let i = riesz(m, e.alpha_s(), x, ri)?;
                    if i > 0.0 && w > 0.0 {
                        sup = sup.max(if s < 2.0 { w / i } else { i / w });
                    }
                }
            }
            sups.push(sup);
        }
        let lo = sups.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = sups.iter().copied().fold(0.0, f64::max);
        ok &= hi.is_finite() && lo > 0.0 && hi <= 2.0 * lo;
        let what = if s < 2.0 { "(W^r)^(s-1)/I^2r" } else { "I^r/(W^2r)^(s-1)" };
        lines.push(format!("s={s}: sup {what} in [{lo:.4}, {hi:.4}]"));
    }
    Ok((ok, lines.join("; ")))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir()?;
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/sandwich_ball.toml");
    let mut bodies = Vec::new();
    for (name, stamp) in [("a", false), ("b", false), ("c", true)] {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_potkit"));
        cmd.args(["--config", cfg, "--seed", "13", "--out"]).arg(&out);
        if stamp {
            cmd.arg("--stamp");
        }
        let status = cmd.stdout(std::process::Stdio::null()).status()?;
        if !status.success() {
            return Ok((false, format!("run {name} exited with {status}")));
        }
        let text = std::fs::read_to_string(out.join("sandwich.csv"))?;
        let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
        bodies.push(body);
    }
    let same = bodies[0] == bodies[1] && bodies[1] == bodies[2];
    Ok((same, format!("3 runs, seed 13, {} CSV bytes each, identical bodies: {same}", bodies[0].len())))
}

fn main() {
    let mut out = std::io::stdout().lock();
    let mut failed = 0;
    let mut clock = std::time::Instant::now();
    let mut report = |id: u32, name: &str, outcome: Outcome| {
        let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        let secs = clock.elapsed().as_secs_f64();
        clock = std::time::Instant::now();
        if !ok {
            failed += 1;
        }
        let verdict = if ok { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "criterion {id:>2} {name:<26} {verdict}  [{secs:.1}s] {detail}");
        let _ = out.flush();
    };
    report(1, "delta-kernel exactness", delta_kernels());
    report(2, "oracle agreement", oracle_agreement());
    report(3, "summation by parts", summation_by_parts());
    report(4, "iterate lower bounds", iterate_lower_bounds());
    report(5, "moments and integrability", moments_and_integrability());
    report(6, "carleson dichotomy", carleson_dichotomy());
    match sandwich_runs() {
        Ok(runs) => {
            report(7, "end-to-end sandwich", end_to_end(&runs));
            report(8, "fixed-point residual", fixed_point_residual(&runs));
        }
        Err(e) => {
            let msg = e.to_string();
            report(7, "end-to-end sandwich", Err(msg.clone().into()));
            report(8, "fixed-point residual", Err(msg.into()));
        }
    }
    report(9, "wolff-riesz comparison", wolff_riesz_comparison());
    report(10, "determinism", determinism());
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
