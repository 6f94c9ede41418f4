use serde_json::{json, Map, Value};

use super::config::{format_p, RunConfig};
use super::output::{cell, line_chart, write_json, write_text, Csv, Series};
use super::{CliError, Run};
use crate::bodies::{coordinate_marginal, BodySpec, Direction};
use crate::estimators::{
    direction_measure_scan_with, general_upper_bound, mean_width_mc_scan, mean_width_orlicz_scan, orlicz_for_direction,
    scaling_fit, support_scan, FitTransform, McSummary, OrliczOptions, PolytopeExperiment, ScalingFit,
};
use crate::io::{float17, json_float, json_opt_float};
use crate::mathkit::QuadratureSpec;
use crate::orlicz::write_tabulation_csv;
use crate::rng::{self, tag};

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn opt_str(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), float17)
}

fn echo(cfg: &RunConfig) -> Value {
    json!(cfg.numeric_echo())
}

fn orlicz_options(cfg: &RunConfig) -> OrliczOptions {
    OrliczOptions { marginal_samples: cfg.samples, seed: cfg.seed, quad: QuadratureSpec::relative(cfg.rel_tol) }
}

fn single_direction(cfg: &RunConfig, n: usize) -> Result<(String, Direction), CliError> {
    let mut dirs = cfg.dir.resolve(n, cfg.seed)?;
    if dirs.len() != 1 {
        return Err(config_err(format!("dir: {} takes a single direction", cfg.command.name())));
    }
    Ok(dirs.remove(0))
}

/// `general_upper_bound` for directions whose marginal has a closed form.
fn upper_bound(body: &BodySpec, theta: &Direction, n_points: u64, alpha: f64) -> (Option<f64>, Option<String>) {
    if theta.canonical_index().is_none() && body.p() != 2.0 {
        return (None, Some("needs a coordinate direction or a Euclidean ball".into()));
    }
    match general_upper_bound(&coordinate_marginal(body), n_points, alpha) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

pub(crate) fn estimate(run: &mut Run) -> Result<(), CliError> {
    let cfg = run.cfg.clone();
    let body = cfg.body()?;
    let grid = cfg.grid()?.to_vec();
    let dirs = cfg.dir.resolve(body.n(), cfg.seed)?;
    let opts = orlicz_options(&cfg);

    let mut warnings: Vec<String> = Vec::new();
    for &n_points in &grid {
        let exp = PolytopeExperiment::new(body, n_points, dirs[0].1.clone(), cfg.trials, cfg.seed).map_err(CliError::numeric)?;
        for w in exp.warnings() {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }

    let mut csv = Csv::new(&["direction", "N", "orlicz_value", "mc_mean", "ci_low", "ci_high", "ratio", "upper_bound"]);
    let mut results = Vec::new();
    for (label, theta) in &dirs {
        let rows = run.step(&format!("support_scan {label}"), rng::derive(cfg.seed, tag::TRIALS), || {
            support_scan(&body, theta, &grid, cfg.trials, cfg.seed, &opts)
        })?;
        for r in rows {
            let (bound, why) = upper_bound(&body, theta, r.n_points, cfg.alpha);
            let ci = r.mc_ci95();
            csv.row(&[
                label.clone(),
                r.n_points.to_string(),
                float17(r.orlicz_value),
                cell(r.mc_mean()),
                cell(ci.map(|c| c.0)),
                cell(ci.map(|c| c.1)),
                cell(r.ratio()),
                cell(bound),
            ]);
            println!(
                "{label} N={}: orlicz_value={} mc_mean={} ratio={}",
                r.n_points,
                float17(r.orlicz_value),
                opt_str(r.mc_mean()),
                opt_str(r.ratio())
            );
            results.push(json!({
                "direction": label,
                "direction_vector": theta.coords().iter().map(|&x| json_float(x)).collect::<Vec<_>>(),
                "N": r.n_points,
                "orlicz_value": json_float(r.orlicz_value),
                "mc_mean": json_opt_float(r.mc_mean()),
                "mc_sd": json_opt_float(r.mc.map(|m| m.sd)),
                "ci": ci.map_or(Value::Null, |(lo, hi)| json!([json_float(lo), json_float(hi)])),
                "ratio": json_opt_float(r.ratio()),
                "trials": cfg.trials,
                "upper_bound": json_opt_float(bound),
                "upper_bound_diagnostic": why,
            }));
        }
    }
    let report = json!({ "experiment": echo(&cfg), "seed": cfg.seed, "results": results, "warnings": warnings });
    write_json(&cfg.out, "report.json", &report)?;
    write_text(&cfg.out, "report.csv", &csv.finish())
}

/// One row of a scan: the Orlicz curve and the Monte Carlo oracle at `N`.
struct ScanRow {
    n_points: u64,
    orlicz: f64,
    mc: Option<McSummary>,
}

fn fit_json(fit: Option<ScalingFit>) -> Value {
    match fit {
        Some(f) => json!({
            "exponent": json_float(f.exponent),
            "intercept_fitted": json_float(f.intercept),
            "r2": json_float(f.r2),
        }),
        None => Value::Null,
    }
}

fn try_fit(rows: &[(u64, f64)], transform: FitTransform) -> Result<Option<ScalingFit>, CliError> {
    if rows.len() < 4 {
        return Ok(None);
    }
    scaling_fit(rows, transform).map(Some).map_err(CliError::numeric)
}

fn write_scan(cfg: &RunConfig, rows: &[ScanRow], transform: FitTransform, reference: Value) -> Result<(), CliError> {
    let mut scan = Csv::new(&["N", "orlicz", "mc", "ratio"]);
    for r in rows {
        let mc = r.mc.map(|m| m.mean);
        scan.row(&[r.n_points.to_string(), float17(r.orlicz), cell(mc), cell(mc.map(|m| m / r.orlicz))]);
    }
    let orlicz_rows: Vec<(u64, f64)> = rows.iter().map(|r| (r.n_points, r.orlicz)).collect();
    let mc_rows: Vec<(u64, f64)> =
        rows.iter().filter_map(|r| r.mc.map(|m| (r.n_points, m.mean))).filter(|&(_, v)| v > 0.0).collect();
    let orlicz_fit = try_fit(&orlicz_rows, transform)?;
    let mc_fit = try_fit(&mc_rows, transform)?;
    let mut fit = Map::new();
    fit.insert("transform".into(), json!(transform.as_str()));
    fit.insert("orlicz".into(), fit_json(orlicz_fit));
    fit.insert("mc".into(), fit_json(mc_fit));
    fit.insert("reference".into(), reference);

    let (header, x_label, y_label): ([&str; 4], &str, &str) = match transform {
        FitTransform::LogLogN => (["N", "log_log_N", "log_orlicz", "log_mc"], "log log N", "log estimate"),
        FitTransform::LogN => (["N", "log_N", "orlicz_squared", "mc_squared"], "log N", "estimate squared"),
    };
    let mut plot = Csv::new(&header);
    let mut orlicz_pts = Vec::new();
    let mut mc_pts = Vec::new();
    for r in rows {
        let (x, y) = transform.apply(r.n_points, r.orlicz);
        let ymc = r.mc.map(|m| transform.apply(r.n_points, m.mean).1);
        plot.row(&[r.n_points.to_string(), float17(x), cell(Some(y)), cell(ymc)]);
        orlicz_pts.push((x, y));
        if let Some(v) = ymc {
            mc_pts.push((x, v));
        }
    }
    write_text(&cfg.out, "scan.csv", &scan.finish())?;
    write_json(&cfg.out, "fit.json", &Value::Object(fit))?;
    write_text(&cfg.out, "plotdata.csv", &plot.finish())?;
    if cfg.plot {
        let series = [Series { name: "orlicz", points: orlicz_pts }, Series { name: "mc", points: mc_pts }];
        let title = format!("{} p={} n={}", cfg.command.name(), format_p(cfg.p.unwrap_or(f64::NAN)), cfg.n.unwrap_or(0));
        write_text(&cfg.out, "plot.svg", &line_chart(&title, x_label, y_label, &series))?;
    }
    match orlicz_fit {
        Some(f) => println!("{} fit: exponent={} r2={}", transform.as_str(), float17(f.exponent), float17(f.r2)),
        None => println!("{} fit: not enough rows", transform.as_str()),
    }
    Ok(())
}

fn scan_grid(cfg: &RunConfig) -> Result<Vec<u64>, CliError> {
    let grid = cfg.grid()?.to_vec();
    if grid.len() < 4 {
        return Err(config_err(format!("N: a scan needs at least 4 grid points, got {}", grid.len())));
    }
    if grid[0] < 2 {
        return Err(config_err("N: scan grids start at N >= 2"));
    }
    Ok(grid)
}

pub(crate) fn scan(run: &mut Run) -> Result<(), CliError> {
    let cfg = run.cfg.clone();
    let body = cfg.body()?;
    let grid = scan_grid(&cfg)?;
    let (label, theta) = single_direction(&cfg, body.n())?;
    let opts = orlicz_options(&cfg);
    let reports = run.step(&format!("support_scan {label}"), rng::derive(cfg.seed, tag::TRIALS), || {
        support_scan(&body, &theta, &grid, cfg.trials, cfg.seed, &opts)
    })?;
    let rows: Vec<ScanRow> =
        reports.iter().map(|r| ScanRow { n_points: r.n_points, orlicz: r.orlicz_value, mc: r.mc }).collect();
    let reference = json!({ "exponent": json_float(1.0 / body.p()) });
    write_scan(&cfg, &rows, FitTransform::LogLogN, reference)
}

pub(crate) fn mean_width(run: &mut Run) -> Result<(), CliError> {
    let cfg = run.cfg.clone();
    let body = cfg.body()?;
    let grid = scan_grid(&cfg)?;
    let exact = body.p() == 2.0 || body.n() == 1;
    if !exact {
        if cfg.dirs < 100 {
            return Err(config_err(format!("dirs: mean widths need at least 100 directions, got {}", cfg.dirs)));
        }
        let need = 10 * grid[grid.len() - 1];
        if (cfg.samples as u64) < need {
            return Err(config_err(format!("samples: {} cannot resolve N = {}; use at least {need}", cfg.samples, grid[grid.len() - 1])));
        }
    }
    if cfg.trials > 0 && cfg.mc_dirs == 0 {
        return Err(config_err("mc_dirs: must be at least 1"));
    }
    let orlicz = run.step("mean_width_orlicz", rng::derive(cfg.seed, tag::MARGINAL), || {
        mean_width_orlicz_scan(&body, &grid, cfg.dirs, cfg.samples, cfg.seed)
    })?;
    let mc = if cfg.trials > 0 {
        run.step("mean_width_mc", rng::derive(cfg.seed, tag::TRIALS), || {
            mean_width_mc_scan(&body, &grid, cfg.trials, cfg.mc_dirs, cfg.seed)
        })?
    } else {
        vec![None; grid.len()]
    };
    let rows: Vec<ScanRow> =
        orlicz.iter().zip(mc).map(|(o, m)| ScanRow { n_points: o.n_points, orlicz: o.value, mc: m }).collect();
    let reference = json!({ "relation": "width^2 linear in log N", "std_errors": orlicz.iter().map(|o| json_float(o.std_error)).collect::<Vec<_>>() });
    write_scan(&cfg, &rows, FitTransform::LogN, reference)
}

pub(crate) fn directions(run: &mut Run) -> Result<(), CliError> {
    let cfg = run.cfg.clone();
    let body = cfg.body()?;
    let grid = cfg.grid()?;
    let [n_points] = grid else {
        return Err(config_err(format!("N: a direction scan takes exactly one N, got {}", grid.len())));
    };
    let n_points = *n_points;
    if n_points < 2 {
        return Err(config_err("N: a direction scan needs N >= 2"));
    }
    if cfg.dirs < 1000 {
        return Err(config_err(format!("dirs: a direction scan needs at least 1000 directions, got {}", cfg.dirs)));
    }
    if body.p() != 2.0 && (cfg.samples as u64) < 10 * n_points {
        return Err(config_err(format!("samples: {} cannot resolve N = {n_points}; use at least {}", cfg.samples, 10 * n_points)));
    }
    let s = run.step("direction_measure_scan", rng::derive(cfg.seed, tag::SCAN), || {
        direction_measure_scan_with(&body, n_points, cfg.r, cfg.dirs, cfg.samples, cfg.seed)
    })?;
    let mut csv = Csv::new(&["index", "estimate"]);
    for (i, v) in s.estimates.iter().enumerate() {
        csv.row(&[i.to_string(), float17(*v)]);
    }
    let summary = json!({
        "experiment": echo(&cfg),
        "N": n_points,
        "r": json_float(s.r),
        "n_dirs": s.estimates.len(),
        "median": json_float(s.median),
        "constants_fitted": { "C1": json_float(s.c1), "C2": json_float(s.c2) },
        "thresholds": { "upper": json_float(s.upper_threshold), "lower": json_float(s.lower_threshold) },
        "fractions": {
            "upper": json_float(s.fraction_upper),
            "lower": json_float(s.fraction_lower),
            "below": json_float(s.fraction_below),
            "between": json_float(s.fraction_between),
            "above": json_float(s.fraction_above),
        },
        "predicted": {
            "upper_measure": json_float(s.predicted_upper_measure),
            "lower_order": json_float(s.predicted_lower_order),
        },
        "distinct_estimates": s.distinct_estimates,
    });
    write_text(&cfg.out, "directions.csv", &csv.finish())?;
    write_json(&cfg.out, "summary.json", &summary)?;
    println!(
        "N={n_points}: median={} fraction_upper={} fraction_lower={} distinct={}",
        float17(s.median),
        float17(s.fraction_upper),
        float17(s.fraction_lower),
        s.distinct_estimates
    );
    Ok(())
}

pub(crate) fn tabulate_m(run: &mut Run) -> Result<(), CliError> {
    let cfg = run.cfg.clone();
    let body = cfg.body()?;
    let (label, theta) = single_direction(&cfg, body.n())?;
    let opts = orlicz_options(&cfg);
    let m = run.step(&format!("orlicz_for_direction {label}"), rng::derive(cfg.seed, tag::MARGINAL), || {
        orlicz_for_direction(&body, &theta, &opts)
    })?;
    let zero = m.zero_threshold();
    let t_min = cfg.t_min.unwrap_or(if zero > 0.0 { zero } else { 1e-3 });
    let t_max = cfg.t_max.unwrap_or(1e3 * t_min);
    if t_max <= t_min {
        return Err(config_err(format!("t_max: must exceed t_min = {t_min}")));
    }
    if cfg.points < 2 {
        return Err(config_err("points: at least 2 are needed"));
    }
    let rows = run.step("tabulate", 0, || m.tabulate(t_min, t_max, cfg.points))?;
    let mut buf = Vec::new();
    write_tabulation_csv(&rows, &mut buf).expect("writing to memory");
    write_text(&cfg.out, "m.csv", &String::from_utf8(buf).expect("ASCII output"))?;
    println!("{} ({}): {} points on [{}, {}]", m.kind().as_str(), label, rows.len(), float17(t_min), float17(t_max));
    Ok(())
}
