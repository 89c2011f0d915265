//! Command-line arguments and their JSON overrides.
//!
//! Every argument struct round-trips through JSON: the parsed flags are
//! serialized, the keys of the `--config` object replace theirs, and the
//! result is deserialized again. Unknown keys are usage errors.

use std::path::{Path, PathBuf};

use clap::Args;
use nodoid_core::conditions::{BoundaryMode, CurvatureField, CurvatureSpec};
use nodoid_core::geometry::{DomainConfig, DomainSpec};
use nodoid_core::solver::{BoundarySpec, ContinuationConfig, LinearSolver, NewtonConfig};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Curvature magnitude h >= 0.
    #[arg(long)]
    pub h: Option<f64>,
    /// Inner radius.
    #[arg(long)]
    pub r: Option<f64>,
    /// Outer radius of the annulus.
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub outer: Option<f64>,
    /// Integration constant; skips the smallness test and the automatic choice.
    #[arg(long)]
    pub c: Option<f64>,
    /// Sample points in the profile CSV.
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    /// Skip the SVG plot.
    #[arg(long)]
    pub no_svg: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonexistArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub h: f64,
    #[arg(long, default_value_t = 1.0)]
    pub outer: f64,
    /// Explicit inner radii; otherwise a logarithmic sweep.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.5)]
    pub eps_max: f64,
    #[arg(long, default_value_t = 0.001)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,0.1,0.01")]
    pub eps: Vec<f64>,
    /// Sample points on z in [-1, 1].
    #[arg(long, default_value_t = 20001)]
    pub samples: usize,
}

/// Domain, curvature and solver settings shared by `check`, `solve` and
/// `verify`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemArgs {
    #[arg(skip)]
    pub domain: Option<DomainConfig>,
    /// Disc of the given radius about the origin.
    #[arg(long)]
    pub disc: Option<f64>,
    /// Annulus `r_in,r_out` about the origin.
    #[arg(long, value_delimiter = ',')]
    pub annulus: Option<Vec<f64>>,
    /// Rectangle `width,height` with a corner at the origin.
    #[arg(long, value_delimiter = ',')]
    pub rect: Option<Vec<f64>>,
    #[arg(skip)]
    pub curvature: Option<CurvatureSpec>,
    /// Constant curvature H.
    #[arg(long, allow_negative_numbers = true)]
    pub h: Option<f64>,
    /// Height dependence: H = h + hz * z.
    #[arg(long, allow_negative_numbers = true)]
    pub hz: Option<f64>,
    #[arg(skip)]
    pub boundary: Option<BoundarySpec>,
    /// Constant boundary value.
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    /// Treat boundary values as arbitrary in `check`.
    #[arg(long)]
    pub general_boundary: bool,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Grid nodes along the longer side of the bounding box.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Grid spacing; converted to a node count.
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 40)]
    pub max_iters: usize,
    /// Uniform continuation steps including t = 0.
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub min_step: f64,
    /// Use BiCGSTAB instead of the sparse LU.
    #[arg(long)]
    pub iterative: bool,
    /// Estimate slack for `verify`; default 10 times the Richardson estimate.
    #[arg(long)]
    pub slack: Option<f64>,
    /// Inner radius of the barrier annulus for `verify` on convex domains.
    #[arg(long)]
    pub barrier_r: Option<f64>,
}

pub const DEFAULT_NODES: usize = 65;

/// A fully resolved problem.
pub struct Problem {
    pub args: ProblemArgs,
    pub domain: DomainSpec,
    pub field: CurvatureField,
    pub boundary: BoundarySpec,
    pub nodes: usize,
}

impl Problem {
    pub fn boundary_mode(&self) -> BoundaryMode {
        if self.args.general_boundary {
            BoundaryMode::General
        } else {
            BoundaryMode::Zero
        }
    }

    pub fn continuation(&self) -> ContinuationConfig {
        let linear = if self.args.iterative {
            LinearSolver::Iterative { rel_tol: 1e-12, max_iters: 20_000 }
        } else {
            LinearSolver::Direct
        };
        ContinuationConfig {
            schedule: nodoid_core::solver::uniform_schedule(self.args.steps),
            min_step: self.args.min_step,
            newton: NewtonConfig { tol: self.args.tol, max_iters: self.args.max_iters, linear, ..NewtonConfig::default() },
        }
    }
}

fn read_config(path: &Path) -> Result<serde_json::Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Usage(format!("{}: expected a JSON object", path.display()))),
        Err(e) => Err(CliError::Usage(format!("{}: {e}", path.display()))),
    }
}

/// Overlays the `--config` object on the parsed flags.
pub fn apply<T: Serialize + DeserializeOwned>(args: T, config: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = config else {
        return Ok(args);
    };
    let overrides = read_config(path)?;
    let Value::Object(mut base) = serde_json::to_value(&args).expect("arguments serialize") else {
        unreachable!("argument structs serialize to objects");
    };
    for (k, v) in overrides {
        if !base.contains_key(&k) {
            return Err(CliError::Usage(format!("{}: unknown key {k:?}", path.display())));
        }
        base.insert(k, v);
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn problem(args: ProblemArgs, config: Option<&Path>) -> Result<Problem, CliError> {
    let args = apply(args, config)?;
    let base: PathBuf = config.and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default();
    let usage = |m: String| CliError::Usage(m);

    for (name, v) in [("annulus", &args.annulus), ("rect", &args.rect)] {
        if v.as_ref().is_some_and(|v| v.len() != 2) {
            return Err(usage(format!("--{name} takes two comma-separated numbers")));
        }
    }
    let mut sources = Vec::new();
    if let Some(d) = &args.domain {
        sources.push(d.clone());
    }
    if let Some(r) = args.disc {
        sources.push(DomainConfig::Disc { radius: r, center: [0.0, 0.0] });
    }
    if let Some(v) = &args.annulus {
        sources.push(DomainConfig::Annulus { r_in: v[0], r_out: v[1] });
    }
    if let Some(v) = &args.rect {
        let (w, h) = (v[0], v[1]);
        sources.push(DomainConfig::ConvexPolygon { vertices: vec![[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]] });
    }
    let domain = match sources.len() {
        0 => return Err(usage("no domain given: use --disc, --annulus, --rect or a config \"domain\"".into())),
        1 => sources.remove(0).load(&base).map_err(|e| usage(e.to_string()))?,
        _ => return Err(usage("more than one domain given".into())),
    };

    let curvature = match (&args.curvature, args.h) {
        (Some(_), Some(_)) => return Err(usage("give either --h/--hz or a config \"curvature\", not both".into())),
        (Some(c), None) => c.clone(),
        (None, Some(h)) => match args.hz {
            Some(hz) => CurvatureSpec::Affine { h, hz },
            None => CurvatureSpec::Constant { h },
        },
        (None, None) => return Err(usage("no curvature given: use --h or a config \"curvature\"".into())),
    };
    let field = curvature.to_field().map_err(|e| usage(e.to_string()))?;

    let boundary = match (&args.boundary, args.g) {
        (Some(_), Some(_)) => return Err(usage("give either --g or a config \"boundary\", not both".into())),
        (Some(b), None) => b.clone(),
        (None, Some(value)) => BoundarySpec::Constant { value },
        (None, None) => BoundarySpec::Zero,
    };

    let (lo, hi) = domain.bounding_box();
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let nodes = match (args.nodes, args.spacing) {
        (Some(_), Some(_)) => return Err(usage("give either nodes or spacing, not both".into())),
        (Some(n), None) => n,
        (None, Some(s)) if s > 0.0 && s.is_finite() => (extent / s).round() as usize + 1,
        (None, Some(s)) => return Err(usage(format!("spacing must be positive, got {s}"))),
        (None, None) => DEFAULT_NODES,
    };
    if nodes < 3 {
        return Err(usage(format!("need at least 3 grid nodes per axis, got {nodes}")));
    }
    if !(args.tol > 0.0) || !(args.min_step > 0.0) || args.steps < 2 || args.max_iters == 0 {
        return Err(usage("tolerances, step counts and iteration limits must be positive".into()));
    }
    Ok(Problem { args, domain, field, boundary, nodes })
}
