//! `validate`: closed forms against the tail representations, the reduction
//! recursion against quadrature, Legendre involution, and sampler checks.

use std::collections::BTreeMap;

use rand::Rng;
use serde_json::{json, Value};

use super::output::write_json;
use super::{CliError, Run};
use crate::bodies::{coordinate_cdf, coordinate_marginal, isotropy_report, ks_statistic, project_samples, BodySpec, Direction};
use crate::io::{float17, json_float};
use crate::mathkit::{neumaier_sum, quad_adaptive, sincos_recursion, Interval, QuadratureSpec, SinCosParams};
use crate::orlicz::{legendre_dual, m_from_tail, m_from_tail_alt, MTailSpec, OrliczFunction, PBallSpec};
use crate::rng::{self, tag};
use crate::Result;

const FORMS_TOL: f64 = 1e-6;
const S_VALUES: usize = 10;
const RECURSION_DRAWS: usize = 100;
const RECURSION_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-6;
const KS_SAMPLES: usize = 20_000;
const KS_LEVEL: f64 = 0.05;
const ISOTROPY_SAMPLES: usize = 100_000;
const ISOTROPY_TOL: f64 = 0.01;

/// One check: an observed error against its tolerance.
struct Check {
    suite: &'static str,
    name: String,
    tolerance: f64,
    observed: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.observed <= self.tolerance
    }

    fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "name": self.name,
            "tolerance": json_float(self.tolerance),
            "observed": json_float(self.observed),
            "passed": self.passed(),
        })
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// The four forms of `M(1/s)` at `S_VALUES` points of `(0, R)`; with
/// `perturb`, `T1` of the second closed form is scaled by 1.01.
fn closed_forms(p: f64, n: usize, quad: QuadratureSpec, perturb: bool) -> Result<Vec<Check>> {
    let spec = PBallSpec::with_quad(p, n, quad)?;
    let tail = MTailSpec::new(coordinate_marginal(&BodySpec::normalized(p, n)?), quad);
    let mut out = Vec::new();
    for j in 1..=S_VALUES {
        let s = j as f64 / (S_VALUES + 1) as f64 * spec.support_radius();
        let mut terms = spec.second_terms(s)?;
        if perturb {
            terms[0] *= 1.01;
        }
        let forms = [spec.first(s)?, neumaier_sum(terms), m_from_tail(&tail, 1.0 / s)?, m_from_tail_alt(&tail, 1.0 / s)?];
        let mut worst: f64 = 0.0;
        for i in 0..forms.len() {
            for k in i + 1..forms.len() {
                worst = worst.max(rel(forms[i], forms[k]));
            }
        }
        out.push(Check {
            suite: "closed_forms",
            name: format!("p={p} n={n} s={j}/{}R", S_VALUES + 1),
            tolerance: FORMS_TOL,
            observed: worst,
        });
    }
    Ok(out)
}

fn sincos_integral(alpha: f64, beta: f64, upper: f64) -> Result<f64> {
    let spec = QuadratureSpec::new(1e-13, 1e-300, 60)?;
    quad_adaptive(|x: f64| x.sin().powf(alpha) * x.cos().powf(beta), Interval::new(0.0, upper)?, &spec)
}

fn recursion(seed: u64) -> Result<Vec<Check>> {
    let mut rng = rng::stream(rng::derive(seed, tag::VALIDATE), 0);
    let mut out = Vec::with_capacity(RECURSION_DRAWS);
    for i in 0..RECURSION_DRAWS {
        let params = SinCosParams {
            alpha: rng.random_range(0.01..6.0),
            beta: rng.random_range(-0.95..6.0),
            upper: rng.random_range(0.0..1.5),
            k: rng.random_range(0..=20),
        };
        let e = sincos_recursion(params)?;
        let lhs = sincos_integral(params.alpha, params.beta, params.upper)?;
        let tail = sincos_integral(params.alpha + 2.0 * params.k as f64 + 2.0, params.beta, params.upper)?;
        let rhs = e.boundary_sum() + e.remainder_coefficient * tail;
        out.push(Check {
            suite: "recursion",
            name: format!(
                "draw {i}: alpha={} beta={} u={} k={}",
                float17(params.alpha),
                float17(params.beta),
                float17(params.upper),
                params.k
            ),
            tolerance: RECURSION_TOL,
            observed: (lhs - rhs).abs() / lhs.abs().max(1e-3),
        });
    }
    Ok(out)
}

fn involution_gap(m: &OrliczFunction, t_max: f64, slope_max: f64, points: usize) -> Result<f64> {
    let back = legendre_dual(&legendre_dual(m, t_max)?, slope_max)?;
    let mut worst: f64 = 0.0;
    for i in 0..=points {
        let t = t_max * i as f64 / points as f64;
        worst = worst.max((back.eval(t)? - m.eval(t)?).abs());
    }
    Ok(worst)
}

fn duality() -> Result<Vec<Check>> {
    let power = OrliczFunction::scaled_power(2.5, 0.4)?;
    let ball = OrliczFunction::pball_first(PBallSpec::new(2.0, 5)?)?;
    let t_max = 3.0 / ball.zero_threshold();
    let slope_max = 2.0 * (ball.eval(t_max)? - ball.eval(0.999 * t_max)?) / (0.001 * t_max);
    Ok(vec![
        Check { suite: "duality", name: "0.4 t^2.5".into(), tolerance: DUAL_TOL, observed: involution_gap(&power, 4.0, 20.0, 20)? },
        Check { suite: "duality", name: "D_2^5 coordinate".into(), tolerance: DUAL_TOL, observed: involution_gap(&ball, t_max, slope_max, 8)? },
    ])
}

/// Kolmogorov–Smirnov distance of `|X_1|` from its exact law, against the
/// asymptotic critical value at level `KS_LEVEL / bodies` (Bonferroni).
fn sampler(bodies: &[BodySpec], seed: u64) -> Result<Vec<Check>> {
    let level = KS_LEVEL / bodies.len() as f64;
    let critical = ((2.0 / level).ln() / 2.0).sqrt() / (KS_SAMPLES as f64).sqrt();
    let base = rng::derive(seed, tag::VALIDATE);
    let mut out = Vec::new();
    for (i, body) in bodies.iter().enumerate() {
        let e1 = Direction::canonical(body.n(), 0)?;
        let mut x = project_samples(body, &e1, KS_SAMPLES, rng::derive(base, 2 * i as u64 + 1))?;
        x.sort_by(f64::total_cmp);
        let d = ks_statistic(&x, |t| 2.0 * coordinate_cdf(body, t) - 1.0);
        out.push(Check { suite: "sampler_ks", name: body_name(body), tolerance: critical, observed: d });
    }
    Ok(out)
}

fn isotropy(bodies: &[BodySpec], seed: u64) -> Result<Vec<Check>> {
    let base = rng::derive(seed, tag::VALIDATE);
    let mut out = Vec::new();
    for (i, body) in bodies.iter().enumerate() {
        let exact = if body.is_cube() { 1.0 / 12f64.sqrt() } else { body.isotropic_constant()? };
        let report = isotropy_report(body, ISOTROPY_SAMPLES, rng::derive(base, 2 * i as u64 + 2))?;
        out.push(Check { suite: "isotropy", name: body_name(body), tolerance: ISOTROPY_TOL, observed: (report.l_k / exact - 1.0).abs() });
    }
    Ok(out)
}

fn body_name(body: &BodySpec) -> String {
    format!("D_{}^{}", super::config::format_p(body.p()), body.n())
}

pub(crate) fn validate(run: &mut Run) -> std::result::Result<(), CliError> {
    let cfg = run.cfg.clone();
    if cfg.grid_p.is_empty() {
        return Err(CliError::Config("grid_p: the grid is empty".into()));
    }
    if cfg.grid_n.is_empty() {
        return Err(CliError::Config("grid_n: the grid is empty".into()));
    }
    if let Some(&n) = cfg.grid_n.iter().find(|&&n| n < 2) {
        return Err(CliError::Config(format!("grid_n: closed forms need n >= 2, got {n}")));
    }
    let quad = QuadratureSpec::relative(cfg.rel_tol);
    let seed = cfg.seed;
    let vseed = rng::derive(seed, tag::VALIDATE);

    let mut checks = Vec::new();
    for &p in cfg.grid_p.iter().filter(|p| p.is_finite()) {
        for &n in &cfg.grid_n {
            checks.extend(run.step(&format!("closed_forms p={p} n={n}"), 0, || closed_forms(p, n, quad, cfg.perturb))?);
        }
    }
    checks.extend(run.step("recursion", vseed, || recursion(seed))?);
    checks.extend(run.step("duality", 0, duality)?);
    let mut bodies = Vec::new();
    for &p in &cfg.grid_p {
        for &n in &cfg.grid_n {
            bodies.push(BodySpec::normalized(p, n).map_err(|e| CliError::Config(format!("grid: {e}")))?);
        }
    }
    checks.extend(run.step("sampler_ks", vseed, || sampler(&bodies, seed))?);
    let mut iso_bodies = bodies.clone();
    for &n in &cfg.grid_n {
        let cube = BodySpec::normalized(f64::INFINITY, n).map_err(|e| CliError::Config(format!("grid: {e}")))?;
        if !iso_bodies.contains(&cube) {
            iso_bodies.push(cube);
        }
    }
    checks.extend(run.step("isotropy", vseed, || isotropy(&iso_bodies, seed))?);

    let mut suites: BTreeMap<&str, (usize, usize, f64)> = BTreeMap::new();
    for c in &checks {
        let e = suites.entry(c.suite).or_insert((0, 0, 0.0));
        e.0 += 1;
        e.1 += usize::from(!c.passed());
        e.2 = e.2.max(c.observed / c.tolerance);
    }
    let failures: usize = suites.values().map(|v| v.1).sum();
    for (name, (count, failed, worst)) in &suites {
        println!("{name}: {count} checks, {failed} failed, worst observed/tolerance {}", float17(*worst));
    }
    let summary: BTreeMap<&str, Value> = suites
        .iter()
        .map(|(k, v)| (*k, json!({ "checks": v.0, "failures": v.1, "worst_ratio": json_float(v.2) })))
        .collect();
    let report = json!({
        "experiment": cfg.numeric_echo(),
        "passed": failures == 0,
        "suites": summary,
        "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
    });
    write_json(&cfg.out, "validate.json", &report)?;
    if failures > 0 {
        return Err(CliError::Validation(format!("{failures} of {} checks failed", checks.len())));
    }
    Ok(())
}
