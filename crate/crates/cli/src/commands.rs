use std::path::Path;

use nodoid_core::barrier::{profile_csv, satisfies_smallness, smallness_bound, NodoidProfile};
use nodoid_core::conditions::{assess, domain_sample_points, AssessOptions};
use nodoid_core::geometry::AnnulusFit;
use nodoid_core::solver::{
    continuation_solve, log_sweep, nonexistence_sweep, verify_gradient_bound_inputs, ContinuationFailure,
    ContinuationTrace, Grid, GridSolution, NewtonFailureKind,
};
use nodoid_core::verify::{blowup_csv, blowup_curvature, estimate_report, gradient_blowup_example, richardson_estimate};
use nodoid_core::{json_float, EstimateReport, Verdict};
use serde::Serialize;

use crate::config::{BarrierArgs, BlowupArgs, NonexistArgs, Problem};
use crate::svg::{Plot, Series};
use crate::CliError;

const EXIT_OK: u8 = 0;
const EXIT_CONDITION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn write(out: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
    let path = out.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn usage(msg: impl ToString) -> CliError {
    CliError::Usage(msg.to_string())
}

#[derive(Serialize)]
struct BarrierOutput {
    mode: &'static str,
    #[serde(rename = "R")]
    outer: Option<f64>,
    #[serde(serialize_with = "json_float::serialize_opt")]
    smallness_bound: Option<f64>,
    profile: nodoid_core::barrier::ProfileParams,
}

pub fn barrier(args: &BarrierArgs, out: &Path) -> Result<u8, CliError> {
    let h = args.h.ok_or_else(|| usage("--h is required"))?;
    let r = args.r.ok_or_else(|| usage("--r is required"))?;
    if args.dim < 2 || !(h >= 0.0) || !(r > 0.0) {
        return Err(usage("need dim >= 2, h >= 0 and r > 0"));
    }
    let (profile, upto, mode, bound) = match args.c {
        Some(c) => {
            let profile = match NodoidProfile::new(args.dim, h, r, c) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(EXIT_CONDITION);
                }
            };
            // by default up to the radius where the profile returns to zero
            let upto = args.outer.unwrap_or_else(|| profile.r_usable());
            if !upto.is_finite() {
                return Err(usage("--R is required when the profile does not return to zero"));
            }
            (profile, upto, "given_c", args.outer.map(|o| smallness_bound(args.dim, r, o)))
        }
        None => {
            let outer = args.outer.ok_or_else(|| usage("--R is required unless --c is given"))?;
            if !(outer > r) {
                return Err(usage(format!("need R > r, got R = {outer}, r = {r}")));
            }
            let bound = smallness_bound(args.dim, r, outer);
            if !satisfies_smallness(args.dim, h, r, outer) {
                eprintln!("h = {h} violates the smallness condition for the annulus ({r}, {outer}): bound {bound}");
                return Ok(EXIT_CONDITION);
            }
            let profile = NodoidProfile::for_annulus(args.dim, h, r, outer).map_err(|e| CliError::Run(e.to_string()))?;
            (profile, outer, "selected_c", Some(bound))
        }
    };
    let rows = match profile.sample(upto, args.points) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("{e}");
            return Ok(EXIT_CONDITION);
        }
    };
    let params = profile.params();
    write(out, "profile.csv", &profile_csv(&rows))?;
    write(out, "params.json", &json(&BarrierOutput { mode, outer: args.outer, smallness_bound: bound, profile: params.clone() }))?;
    if !args.no_svg {
        let plot = Plot {
            title: format!("nodoid profile, n = {}, h = {}, c = {}", args.dim, h, params.c),
            xlabel: "t".into(),
            ylabel: "p(t)".into(),
            log_x: false,
            series: vec![Series { label: "p".into(), points: rows.iter().map(|&(t, p, _)| (t, p)).collect() }],
        };
        write(out, "profile.svg", &plot.render())?;
    }
    println!(
        "a = {}, b = {}, t0 = {}, C1 = {}, C2 = {}",
        params.a,
        json_float::fmt(params.b),
        json_float::fmt(params.t0),
        json_float::fmt(params.c1),
        json_float::fmt(params.c2)
    );
    Ok(EXIT_OK)
}

pub fn check(p: &Problem, out: &Path) -> Result<u8, CliError> {
    let opts = AssessOptions { dim: p.args.dim, boundary: p.boundary_mode(), ..AssessOptions::default() };
    let report = assess(&p.domain, &p.field, &opts).map_err(usage)?;
    let mut text = report.to_json();
    text.push('\n');
    write(out, "conditions.json", &text)?;
    for c in &report.checks {
        println!("{:<20} {:<15} actual {} bound {}", c.name, c.verdict.as_str(), json_float::fmt(c.actual), json_float::fmt(c.bound));
    }
    println!("overall: {}", report.overall.as_str());
    Ok(report.overall.exit_code() as u8)
}

/// Barrier profile and annulus fit for a z-independent curvature on `p`.
fn barrier_for(p: &Problem) -> Result<(NodoidProfile<f64>, AnnulusFit, f64), String> {
    let points = domain_sample_points(&p.domain, 32, 64);
    let h = p.field.summarize(&points, 0.0, 1).h_sup0;
    let ext = p.domain.exterior_sphere_radius().map_err(|e| e.to_string())?;
    let r = match p.args.barrier_r {
        Some(r) => r,
        None if ext.value.is_finite() => ext.value,
        None => p.domain.diameter(),
    };
    let fit = p.domain.annulus_fit(r).map_err(|e| e.to_string())?;
    let profile = NodoidProfile::for_annulus(2, h, fit.r, fit.r + fit.d).map_err(|e| e.to_string())?;
    Ok((profile, fit, h))
}

#[derive(Serialize)]
struct FailureInfo {
    #[serde(serialize_with = "json_float::serialize_opt")]
    t_star: Option<f64>,
    attempted_t: f64,
    #[serde(serialize_with = "json_float::serialize")]
    max_gradient: f64,
    reason: NewtonFailureKind,
    label: &'static str,
    detail: String,
}

impl From<&ContinuationFailure> for FailureInfo {
    fn from(f: &ContinuationFailure) -> Self {
        Self {
            t_star: f.t_star,
            attempted_t: f.attempted_t,
            max_gradient: f.max_gradient,
            reason: f.reason,
            label: f.label,
            detail: f.detail.clone(),
        }
    }
}

#[derive(Serialize)]
struct Hypotheses {
    /// Height range the curvature was sampled over.
    m: f64,
    h0: f64,
    min_hz: f64,
    monotone: Verdict,
}

#[derive(Serialize)]
struct BoundaryInfo {
    zero: bool,
    lipschitz: f64,
    lipschitz_threshold: f64,
    note: Option<String>,
}

#[derive(Serialize)]
struct SolveReport {
    status: &'static str,
    domain: &'static str,
    nodes: usize,
    unknowns: usize,
    #[serde(flatten)]
    solution: Option<GridSolution>,
    failure: Option<FailureInfo>,
    trace: ContinuationTrace,
    hypotheses: Hypotheses,
    boundary: BoundaryInfo,
}

fn build_grid(p: &Problem, nodes: usize) -> Result<Grid, CliError> {
    Grid::new(&p.domain, p.boundary.to_data(), nodes).map_err(usage)
}

/// Solution values along the grid row closest to the middle of the box.
fn section(grid: &Grid, values: &[f64]) -> Vec<(f64, f64)> {
    let mid = grid.ny / 2;
    let mut pts: Vec<(f64, f64)> =
        grid.nodes.iter().zip(values).filter(|(n, _)| n.j == mid).map(|(n, v)| (n.x[0], *v)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

pub fn solve(p: &Problem, out: &Path) -> Result<u8, CliError> {
    let grid = build_grid(p, p.nodes)?;
    let result = continuation_solve(&grid, &p.field, &p.continuation());
    let barrier_height = barrier_for(p).ok().and_then(|(prof, _, _)| prof.barrier_constants().ok()).map(|c| c.0);
    let m = match (&result, barrier_height) {
        (_, Some(c1)) => c1,
        (Ok((sol, _)), None) => sol.sup_norm.max(1.0),
        (Err(_), None) => 1.0,
    };
    let points = domain_sample_points(&p.domain, 32, 64);
    let (h0, monotone, summary) = verify_gradient_bound_inputs(&p.field, &points, m);
    let lipschitz = grid.boundary_lipschitz();
    let threshold = 1.0 / ((p.args.dim.max(2) - 1) as f64).sqrt();
    let zero = grid.boundary.is_zero();
    let note = (!zero).then(|| {
        let mut n = String::from("nonzero boundary data: no existence guarantee");
        if lipschitz >= threshold {
            n.push_str(&format!("; Lipschitz constant {lipschitz} is not below {threshold}"));
        }
        n
    });
    let boundary = BoundaryInfo { zero, lipschitz, lipschitz_threshold: threshold, note };
    let hypotheses = Hypotheses { m, h0, min_hz: summary.min_hz, monotone };
    let (report, code) = match result {
        Ok((sol, trace)) => {
            write(out, "solution.csv", &sol.csv(&grid))?;
            let plot = Plot {
                title: format!("solution section y = {}", grid.origin[1] + (grid.ny / 2) as f64 * grid.spacing),
                xlabel: "x".into(),
                ylabel: "f".into(),
                log_x: false,
                series: vec![Series { label: "f".into(), points: section(&grid, &sol.values) }],
            };
            write(out, "solution.svg", &plot.render())?;
            println!(
                "converged: residual {:e}, sup |f| = {}, sup |grad f| = {}",
                sol.residual_inf,
                sol.sup_norm,
                sol.sup_gradient_interior.max(sol.sup_gradient_boundary)
            );
            let report = SolveReport {
                status: "converged",
                domain: p.domain.kind_name(),
                nodes: p.nodes,
                unknowns: grid.len(),
                solution: Some(sol),
                failure: None,
                trace,
                hypotheses,
                boundary,
            };
            (report, EXIT_OK)
        }
        Err(f) => {
            eprintln!("{f}");
            let report = SolveReport {
                status: "stalled",
                domain: p.domain.kind_name(),
                nodes: p.nodes,
                unknowns: grid.len(),
                solution: None,
                failure: Some(FailureInfo::from(&f)),
                trace: f.trace.clone(),
                hypotheses,
                boundary,
            };
            let code = if f.reason == NewtonFailureKind::Config { crate::EXIT_USAGE } else { EXIT_NUMERICAL };
            (report, code)
        }
    };
    write(out, "report.json", &json(&report))?;
    Ok(code)
}

#[derive(Serialize)]
struct VerifyOutput {
    #[serde(flatten)]
    report: EstimateReport,
    richardson: f64,
    nodes: usize,
    coarse_nodes: usize,
    h: f64,
    fit: AnnulusFit,
    residual_inf: f64,
}

pub fn verify(p: &Problem, out: &Path) -> Result<u8, CliError> {
    if !p.boundary.to_data().is_zero() {
        return Err(usage("verify needs zero boundary values"));
    }
    if !p.field.is_z_independent() {
        return Err(usage("verify needs a curvature that does not depend on the height"));
    }
    // nested grids need an even number of intervals
    let nodes = if p.nodes % 2 == 0 { p.nodes + 1 } else { p.nodes }.max(5);
    let coarse_nodes = (nodes - 1) / 2 + 1;
    let (profile, fit, h) = match barrier_for(p) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("no barrier for this domain and curvature: {e}");
            return Ok(EXIT_CONDITION);
        }
    };
    let cfg = p.continuation();
    let fine = build_grid(p, nodes)?;
    let coarse = build_grid(p, coarse_nodes)?;
    let (fine_sol, coarse_sol) = match (continuation_solve(&fine, &p.field, &cfg), continuation_solve(&coarse, &p.field, &cfg)) {
        (Ok((f, _)), Ok((c, _))) => (f, c),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("{e}");
            return Ok(EXIT_NUMERICAL);
        }
    };
    let richardson = richardson_estimate(&fine, &fine_sol.values, &coarse, &coarse_sol.values).map_err(|e| CliError::Run(e.to_string()))?;
    let slack = p.args.slack.unwrap_or(10.0 * richardson);
    let report = estimate_report(&fine, &fine_sol, &profile, &fit, slack).map_err(|e| CliError::Run(e.to_string()))?;
    let failed = report.height_verdict == Verdict::Fail || report.boundary_gradient_verdict == Verdict::Fail;
    println!(
        "sup |f| = {} (C1 = {}), boundary quotient = {} (C2 = {}), slack = {:e}",
        report.c0_actual,
        json_float::fmt(report.c0_bound),
        report.bgrad_actual,
        json_float::fmt(report.bgrad_bound),
        slack
    );
    let output = VerifyOutput { report, richardson, nodes, coarse_nodes, h, fit, residual_inf: fine_sol.residual_inf };
    write(out, "estimates.json", &json(&output))?;
    Ok(if failed { EXIT_CONDITION } else { EXIT_OK })
}

pub fn nonexist(args: &NonexistArgs, out: &Path) -> Result<u8, CliError> {
    let eps = match &args.eps {
        Some(list) => list.clone(),
        None => {
            if !(args.eps_max > args.eps_min && args.eps_min > 0.0) || args.count == 0 {
                return Err(usage("need 0 < eps_min < eps_max and count >= 1"));
            }
            log_sweep(args.eps_max, args.eps_min, args.count)
        }
    };
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0 && e < args.outer)) {
        return Err(usage(format!("every epsilon must lie in (0, {})", args.outer)));
    }
    let summary = nonexistence_sweep(args.dim, args.h, args.outer, &eps, args.tol).map_err(usage)?;
    write(out, "sweep.csv", &summary.csv())?;
    write(out, "sweep.json", &json(&summary))?;
    let plot = Plot {
        title: format!("radial solutions on thin annuli, n = {}, h = {}", args.dim, args.h),
        xlabel: "epsilon".into(),
        ylabel: "height".into(),
        log_x: true,
        series: vec![
            Series { label: "sup p".into(), points: summary.rows.iter().filter(|r| r.exists).map(|r| (r.epsilon, r.sup_p)).collect() },
            Series { label: "bound".into(), points: summary.rows.iter().map(|r| (r.epsilon, r.bound)).collect() },
        ],
    };
    write(out, "sweep.svg", &plot.render())?;
    print!("{}", summary.csv());
    match summary.epsilon_star {
        Some((lo, hi)) => println!("epsilon* in ({lo}, {hi}]; {} flip(s)", summary.flips),
        None => println!("no clean threshold; {} flip(s)", summary.flips),
    }
    Ok(EXIT_OK)
}

pub fn blowup(args: &BlowupArgs, out: &Path) -> Result<u8, CliError> {
    let rows = gradient_blowup_example(&args.eps, args.samples).map_err(usage)?;
    let csv = blowup_csv(&rows);
    write(out, "blowup.csv", &csv)?;
    let plot = Plot {
        title: "H_eps(z)".into(),
        xlabel: "z".into(),
        ylabel: "H".into(),
        log_x: false,
        series: rows
            .iter()
            .map(|r| Series {
                label: format!("eps = {}", r.epsilon),
                points: (0..=400).map(|k| -1.0 + k as f64 / 200.0).map(|z| (z, blowup_curvature(r.epsilon, z))).collect(),
            })
            .collect(),
    };
    write(out, "blowup.svg", &plot.render())?;
    print!("{csv}");
    Ok(EXIT_OK)
}
