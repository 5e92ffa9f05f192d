//! Command-line front end: bound curves and simulations written as CSV,
//! with a JSON run manifest next to every output file.
//!
//! Exit codes: 0 success, 2 input/model error, 3 numerical failure.

use crate::bounds::{
    asymptotic_density, crossing_density_bounds, density_bounds, distribution_bounds,
    estimate_lm, optimize_d, BoundResult, BoundsError, DOptimizeObjective, LMEstimate, LmSearch,
};
use crate::builtin::{self, Builtin, ExactDensity};
use crate::mc::{kde_density, simulate_paths, McError, SimConfig};
use crate::model::{DiffusionSpec, IntervalCase, ModelError, TransformedDiffusion};
use crate::reference::{RefError, ReferenceKernel};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<RefError> for CliError {
    fn from(e: RefError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::InvalidConfig(m) => CliError::Input(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "diffbound",
    version,
    about = "Two-sided bounds for diffusion transition densities, distributions, and crossing densities"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// JSON model file (drift, diffusion, params, interval, optional x0)
    #[arg(long, conflicts_with = "example")]
    model: Option<PathBuf>,
    /// Built-in model, e.g. `ou`, `trunc-ou:c=2`, `feller:p=1,q=2.5,r=1`
    #[arg(long)]
    example: Option<String>,
    /// Bessel reference dimension for models on (0, inf); must be >= 3
    #[arg(long, default_value_t = 3.0)]
    d: f64,
    /// Choose the Bessel reference dimension minimizing the upper bound
    #[arg(long)]
    optimize_d: bool,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, allow_negative_numbers = true)]
    w_from: f64,
    #[arg(long, allow_negative_numbers = true)]
    w_to: f64,
    #[arg(long)]
    w_step: f64,
}

impl GridArgs {
    fn build(&self) -> Result<Vec<f64>, CliError> {
        grid(self.w_from, self.w_to, self.w_step)
    }
}

#[derive(Args)]
struct LmArgs {
    /// Restrict the extrema search to [LO, HI] (localized bounds)
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    lm_range: Option<Vec<f64>>,
    /// Override the computed L (ess sup)
    #[arg(long = "L", allow_negative_numbers = true)]
    l_override: Option<f64>,
    /// Override the computed M (ess inf)
    #[arg(long = "M", allow_negative_numbers = true)]
    m_override: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Transition-density bound curve over a w grid
    BoundDensity {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        lm: LmArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Transition-distribution bound curve over a w grid
    BoundCdf {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        lm: LmArgs,
        /// Bound the tail probability P(X_t > w) instead of the CDF
        #[arg(long)]
        tail: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Boundary-crossing density bound curve (whole-line models only)
    BoundCrossing {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        /// Crossing level
        #[arg(long, allow_negative_numbers = true)]
        level: f64,
        /// Observation point z of the crossing density
        #[arg(long, allow_negative_numbers = true)]
        w: f64,
        /// Single time (w is then varied only if a w grid is given elsewhere)
        #[arg(long, conflicts_with_all = ["t_from", "t_to", "t_step"])]
        t: Option<f64>,
        #[arg(long, requires_all = ["t_to", "t_step"])]
        t_from: Option<f64>,
        #[arg(long)]
        t_to: Option<f64>,
        #[arg(long)]
        t_step: Option<f64>,
        #[command(flatten)]
        lm: LmArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Small-time equivalent e^{dG} p_ref over a w grid
    Asymptotic {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate endpoint samples and emit a kernel density estimate
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        /// Number of paths
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        /// Time steps per path
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Barrier level; adds a crossing-frequency row
        #[arg(long, allow_negative_numbers = true)]
        barrier: Option<f64>,
        /// KDE evaluation grid (defaults to the sample range)
        #[arg(long, allow_negative_numbers = true)]
        w_from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        w_to: Option<f64>,
        #[arg(long)]
        w_step: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the built-in example models
    Examples,
}

/// Parse argv, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let command_line = argv
        .iter()
        .map(|s| s.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit code 0
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match dispatch(cli.command, &command_line) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("DIFFBOUND_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !from.is_finite() || !to.is_finite() || to < from {
        return Err(CliError::Input(format!(
            "bad grid: from={from} to={to} step={step}"
        )));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| from + step * i as f64).collect())
}

// ---------------------------------------------------------------------------
// Model resolution
// ---------------------------------------------------------------------------

struct ResolvedModel {
    td: TransformedDiffusion,
    builtin: Option<Builtin>,
    model_file: Option<PathBuf>,
    exact_density: Option<ExactDensity>,
    params: BTreeMap<String, f64>,
}

fn resolve_model(args: &ModelArgs) -> Result<ResolvedModel, CliError> {
    match (&args.model, &args.example) {
        (Some(path), None) => {
            let spec = DiffusionSpec::from_file(path)?;
            let td = TransformedDiffusion::from_spec(&spec)?;
            let params = spec
                .params()
                .iter()
                .map(|(k, v)| (k.clone(), *v))
                .collect();
            Ok(ResolvedModel {
                td,
                builtin: None,
                model_file: Some(path.clone()),
                exact_density: None,
                params,
            })
        }
        (None, Some(name)) => {
            let b = Builtin::parse(name).map_err(CliError::Input)?;
            let td = b.transformed()?;
            let params = b
                .params()
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect();
            Ok(ResolvedModel {
                td,
                exact_density: b.exact_density(),
                builtin: Some(b),
                model_file: None,
                params,
            })
        }
        _ => Err(CliError::Input(
            "exactly one of --model or --example is required".into(),
        )),
    }
}

/// Pick the reference kernel; for models on (0, inf) this is a Bessel
/// process whose dimension comes from `--d` or the optimizer.
fn resolve_kernel(
    model: &ResolvedModel,
    args: &ModelArgs,
    t: f64,
    x: f64,
    w_grid: &[f64],
) -> Result<ReferenceKernel, CliError> {
    match model.td.case() {
        IntervalCase::A => Ok(ReferenceKernel::Brownian),
        IntervalCase::B => {
            if args.optimize_d {
                let objective = if w_grid.len() > 1 {
                    DOptimizeObjective::Integrated {
                        w_grid: w_grid.to_vec(),
                    }
                } else {
                    DOptimizeObjective::Point {
                        w: w_grid.first().copied().unwrap_or(x),
                    }
                };
                let d = optimize_d(&model.td, t, x, &objective, (3.0, 12.0))?;
                Ok(ReferenceKernel::bessel(d)?)
            } else {
                Ok(ReferenceKernel::bessel(args.d)?)
            }
        }
    }
}

fn resolve_lm(
    td: &TransformedDiffusion,
    kernel: ReferenceKernel,
    lm_args: &LmArgs,
    t: f64,
    x: f64,
) -> Result<LMEstimate, CliError> {
    let search = match &lm_args.lm_range {
        Some(range) => LmSearch::restricted(range[0], range[1]),
        None => LmSearch::default_for(td.case(), x, t),
    };
    let mut lm = estimate_lm(td, kernel, &search)?;
    if let Some(l) = lm_args.l_override {
        lm.l = l;
        lm.arg_l = None;
    }
    if let Some(m) = lm_args.m_override {
        lm.m = m;
        lm.arg_m = None;
    }
    Ok(lm)
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

/// 17 significant digits, round-trippable through f64 parsing.
fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn flags(b: &BoundResult) -> String {
    let mut f = Vec::new();
    if b.degenerate_lower {
        f.push("degenerate_lower");
    }
    if b.degenerate_upper {
        f.push("degenerate_upper");
    }
    f.join(";")
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut out = String::with_capacity(rows.len() * 80 + header.len() + 2);
    out.push_str(header);
    out.push_str("\r\n");
    for row in rows {
        out.push_str(row);
        out.push_str("\r\n");
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    subcommand: String,
    version: String,
    model_file: Option<String>,
    example: Option<String>,
    model_params: BTreeMap<String, f64>,
    resolved: BTreeMap<String, serde_json::Value>,
    seed: Option<u64>,
    output: String,
}

fn write_manifest(
    out: &Path,
    command_line: &str,
    subcommand: &str,
    model: &ResolvedModel,
    resolved: BTreeMap<String, serde_json::Value>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let manifest = RunManifest {
        command: command_line.to_string(),
        subcommand: subcommand.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        model_file: model
            .model_file
            .as_ref()
            .map(|p| p.to_string_lossy().into_owned()),
        example: model.builtin.as_ref().map(|b| b.name().to_string()),
        model_params: model.params.clone(),
        resolved,
        seed,
        output: out.to_string_lossy().into_owned(),
    };
    let path = manifest_path(out);
    let mut file = std::fs::File::create(path)?;
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Input(e.to_string()))?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

/// `<output>.manifest.json` next to the output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn json_f64(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v)
        .map(serde_json::Value::Number)
        .unwrap_or_else(|| serde_json::Value::String(num(v)))
}

fn lm_manifest(resolved: &mut BTreeMap<String, serde_json::Value>, lm: &LMEstimate) {
    resolved.insert("L".into(), json_f64(lm.l));
    resolved.insert("M".into(), json_f64(lm.m));
    resolved.insert(
        "lm_domain".into(),
        serde_json::json!([lm.domain.0, lm.domain.1]),
    );
}

fn kernel_manifest(resolved: &mut BTreeMap<String, serde_json::Value>, kernel: ReferenceKernel) {
    match kernel {
        ReferenceKernel::Brownian => {
            resolved.insert("reference".into(), "brownian".into());
        }
        ReferenceKernel::Bessel { d } => {
            resolved.insert("reference".into(), "bessel".into());
            resolved.insert("d".into(), json_f64(d));
        }
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn dispatch(cmd: Command, command_line: &str) -> Result<(), CliError> {
    match cmd {
        Command::BoundDensity {
            model,
            t,
            x,
            grid,
            lm,
            out,
        } => cmd_bound_density(command_line, &model, t, x, &grid, &lm, &out),
        Command::BoundCdf {
            model,
            t,
            x,
            grid,
            lm,
            tail,
            out,
        } => cmd_bound_cdf(command_line, &model, t, x, &grid, &lm, tail, &out),
        Command::BoundCrossing {
            model,
            x,
            level,
            w,
            t,
            t_from,
            t_to,
            t_step,
            lm,
            out,
        } => cmd_bound_crossing(
            command_line,
            &model,
            x,
            level,
            w,
            t,
            (t_from, t_to, t_step),
            &lm,
            &out,
        ),
        Command::Asymptotic {
            model,
            t,
            x,
            grid,
            out,
        } => cmd_asymptotic(command_line, &model, t, x, &grid, &out),
        Command::Simulate {
            model,
            t,
            x,
            n,
            steps,
            seed,
            barrier,
            w_from,
            w_to,
            w_step,
            out,
        } => cmd_simulate(
            command_line,
            &model,
            t,
            x,
            n,
            steps,
            seed,
            barrier,
            (w_from, w_to, w_step),
            &out,
        ),
        Command::Examples => {
            cmd_examples();
            Ok(())
        }
    }
}

fn cmd_bound_density(
    command_line: &str,
    model_args: &ModelArgs,
    t: f64,
    x: f64,
    grid_args: &GridArgs,
    lm_args: &LmArgs,
    out: &Path,
) -> Result<(), CliError> {
    let model = resolve_model(model_args)?;
    let ws = grid_args.build()?;
    let kernel = resolve_kernel(&model, model_args, t, x, &ws)?;
    let lm = resolve_lm(&model.td, kernel, lm_args, t, x)?;
    let mut rows = Vec::with_capacity(ws.len());
    for &w in &ws {
        let b = density_bounds(&model.td, kernel, t, x, w, &lm)?;
        let exact = model.exact_density.as_ref().map(|f| f(t, x, w));
        rows.push(format!(
            "{},{},{},{},{},{},{}",
            num(w),
            num(b.lower),
            num(b.upper),
            num(b.ref_value),
            num(b.g_delta),
            opt_num(exact),
            flags(&b)
        ));
    }
    write_csv(out, "w,lower,upper,reference,g_delta,exact,flags", &rows)?;
    let mut resolved = BTreeMap::new();
    resolved.insert("t".into(), json_f64(t));
    resolved.insert("x".into(), json_f64(x));
    resolved.insert(
        "w_grid".into(),
        serde_json::json!([grid_args.w_from, grid_args.w_to, grid_args.w_step]),
    );
    lm_manifest(&mut resolved, &lm);
    kernel_manifest(&mut resolved, kernel);
    write_manifest(out, command_line, "bound-density", &model, resolved, None)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bound_cdf(
    command_line: &str,
    model_args: &ModelArgs,
    t: f64,
    x: f64,
    grid_args: &GridArgs,
    lm_args: &LmArgs,
    tail: bool,
    out: &Path,
) -> Result<(), CliError> {
    let model = resolve_model(model_args)?;
    let ws = grid_args.build()?;
    let kernel = resolve_kernel(&model, model_args, t, x, &ws)?;
    let lm = resolve_lm(&model.td, kernel, lm_args, t, x)?;
    let exact_cdf = match model.builtin {
        Some(Builtin::Ou) => Some(builtin::ou_exact_cdf as fn(f64, f64, f64) -> f64),
        _ => None,
    };
    let mut rows = Vec::with_capacity(ws.len());
    for &w in &ws {
        let b = distribution_bounds(&model.td, kernel, t, x, w, &lm, tail)?;
        let exact = exact_cdf.map(|f| {
            let p = f(t, x, w);
            if tail {
                1.0 - p
            } else {
                p
            }
        });
        rows.push(format!(
            "{},{},{},{},{},{},{},{}",
            num(w),
            num(b.lower),
            num(b.upper),
            opt_num(b.raw_upper),
            num(b.ref_value),
            num(b.g_delta),
            opt_num(exact),
            flags(&b)
        ));
    }
    write_csv(
        out,
        "w,lower,upper,raw_upper,reference,g_delta,exact,flags",
        &rows,
    )?;
    let mut resolved = BTreeMap::new();
    resolved.insert("t".into(), json_f64(t));
    resolved.insert("x".into(), json_f64(x));
    resolved.insert("tail".into(), serde_json::Value::Bool(tail));
    resolved.insert(
        "w_grid".into(),
        serde_json::json!([grid_args.w_from, grid_args.w_to, grid_args.w_step]),
    );
    lm_manifest(&mut resolved, &lm);
    kernel_manifest(&mut resolved, kernel);
    write_manifest(out, command_line, "bound-cdf", &model, resolved, None)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bound_crossing(
    command_line: &str,
    model_args: &ModelArgs,
    x: f64,
    level: f64,
    w: f64,
    t_single: Option<f64>,
    t_grid: (Option<f64>, Option<f64>, Option<f64>),
    lm_args: &LmArgs,
    out: &Path,
) -> Result<(), CliError> {
    let model = resolve_model(model_args)?;
    let ts = match (t_single, t_grid) {
        (Some(t), _) => vec![t],
        (None, (Some(from), Some(to), Some(step))) => grid(from, to, step)?,
        _ => {
            return Err(CliError::Input(
                "provide --t or the triple --t-from --t-to --t-step".into(),
            ))
        }
    };
    let t_max = ts.iter().cloned().fold(f64::NAN, f64::max);
    let kernel = resolve_kernel(&model, model_args, t_max, x, &[w])?;
    let lm = resolve_lm(&model.td, kernel, lm_args, t_max, x)?;
    // exact crossing density is registered for the OU model at level 0
    let exact_crossing = matches!(model.builtin, Some(Builtin::Ou)) && level == 0.0;
    let mut rows = Vec::with_capacity(ts.len());
    for &t in &ts {
        let b = crossing_density_bounds(&model.td, kernel, t, x, level, w, &lm)?;
        let exact = exact_crossing.then(|| builtin::ou_exact_crossing_density(t, x, w));
        rows.push(format!(
            "{},{},{},{},{},{},{}",
            num(t),
            num(b.lower),
            num(b.upper),
            num(b.ref_value),
            num(b.g_delta),
            opt_num(exact),
            flags(&b)
        ));
    }
    write_csv(out, "t,lower,upper,reference,g_delta,exact,flags", &rows)?;
    let mut resolved = BTreeMap::new();
    resolved.insert("x".into(), json_f64(x));
    resolved.insert("level".into(), json_f64(level));
    resolved.insert("w".into(), json_f64(w));
    resolved.insert("t_grid".into(), serde_json::json!(ts));
    lm_manifest(&mut resolved, &lm);
    kernel_manifest(&mut resolved, kernel);
    write_manifest(out, command_line, "bound-crossing", &model, resolved, None)
}

fn cmd_asymptotic(
    command_line: &str,
    model_args: &ModelArgs,
    t: f64,
    x: f64,
    grid_args: &GridArgs,
    out: &Path,
) -> Result<(), CliError> {
    let model = resolve_model(model_args)?;
    let ws = grid_args.build()?;
    let kernel = resolve_kernel(&model, model_args, t, x, &ws)?;
    let mut rows = Vec::with_capacity(ws.len());
    for &w in &ws {
        let v = asymptotic_density(&model.td, kernel, t, x, w)?;
        let exact = model.exact_density.as_ref().map(|f| f(t, x, w));
        rows.push(format!("{},{},{}", num(w), num(v), opt_num(exact)));
    }
    write_csv(out, "w,asymptotic,exact", &rows)?;
    let mut resolved = BTreeMap::new();
    resolved.insert("t".into(), json_f64(t));
    resolved.insert("x".into(), json_f64(x));
    resolved.insert(
        "w_grid".into(),
        serde_json::json!([grid_args.w_from, grid_args.w_to, grid_args.w_step]),
    );
    kernel_manifest(&mut resolved, kernel);
    write_manifest(out, command_line, "asymptotic", &model, resolved, None)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    command_line: &str,
    model_args: &ModelArgs,
    t: f64,
    x: f64,
    n: usize,
    steps: usize,
    seed: u64,
    barrier: Option<f64>,
    w_grid: (Option<f64>, Option<f64>, Option<f64>),
    out: &Path,
) -> Result<(), CliError> {
    let model = resolve_model(model_args)?;
    let cfg = SimConfig {
        n_paths: n,
        n_steps: steps,
        t,
        x,
        seed,
        barrier,
    };
    let sim = simulate_paths(&model.td, &cfg)?;
    let valid: Vec<f64> = sim
        .endpoints
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    let ws = match w_grid {
        (Some(from), Some(to), Some(step)) => grid(from, to, step)?,
        (None, None, None) => {
            if valid.is_empty() {
                return Err(CliError::Numerical("no valid sample paths".into()));
            }
            let lo = valid.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = valid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let step = (hi - lo) / 100.0;
            if step > 0.0 {
                grid(lo, hi, step)?
            } else {
                vec![lo]
            }
        }
        _ => {
            return Err(CliError::Input(
                "provide all of --w-from --w-to --w-step or none".into(),
            ))
        }
    };
    let mut rows = Vec::with_capacity(ws.len() + 1);
    for &w in &ws {
        let (kde, se) = kde_density(&valid, w)?;
        rows.push(format!("{},{},{}", num(w), num(kde), num(se)));
    }
    let mut crossing_freq = None;
    if let Some(flags) = &sim.crossings {
        let n_valid = valid.len();
        let crossed = sim
            .endpoints
            .iter()
            .zip(flags)
            .filter(|(e, c)| e.is_finite() && **c)
            .count();
        let f = crossed as f64 / n_valid as f64;
        let se = (f * (1.0 - f) / n_valid as f64).sqrt();
        rows.push(format!("crossing_frequency,{},{}", num(f), num(se)));
        crossing_freq = Some(f);
    }
    write_csv(out, "w,kde,stderr", &rows)?;
    let mut resolved = BTreeMap::new();
    resolved.insert("t".into(), json_f64(t));
    resolved.insert("x".into(), json_f64(x));
    resolved.insert("n_paths".into(), serde_json::json!(n));
    resolved.insert("n_steps".into(), serde_json::json!(steps));
    resolved.insert("excluded".into(), serde_json::json!(sim.excluded));
    if let Some(b) = barrier {
        resolved.insert("barrier".into(), json_f64(b));
    }
    if let Some(f) = crossing_freq {
        resolved.insert("crossing_frequency".into(), json_f64(f));
    }
    write_manifest(out, command_line, "simulate", &model, resolved, Some(seed))
}

fn cmd_examples() {
    println!("built-in models (use with --example NAME[:param=value,...]):");
    for b in Builtin::all() {
        let params = b
            .params()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(", ");
        let params = if params.is_empty() {
            String::new()
        } else {
            format!(" [defaults: {params}]")
        };
        let exact = if b.exact_density().is_some() {
            "exact density available"
        } else {
            "no closed-form density"
        };
        println!("  {:<9} drift {}{params}; {exact}", b.name(), b.drift_text());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts_are_inclusive() {
        let g = grid(-3.0, 3.0, 0.05).unwrap();
        assert_eq!(g.len(), 121);
        assert_eq!(g[0], -3.0);
        assert!((g[120] - 3.0).abs() < 1e-12);
        assert!(grid(0.0, 1.0, -0.1).is_err());
        assert!(grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn numbers_round_trip_through_csv_format() {
        for &v in &[0.1, -3.5e-7, 123456.789, 1e300, f64::MIN_POSITIVE] {
            let s = num(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, v, "{s}");
        }
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(
            manifest_path(Path::new("/tmp/run/out.csv")),
            PathBuf::from("/tmp/run/out.csv.manifest.json")
        );
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(CliError::Input("x".into()).exit_code(), EXIT_INPUT);
        assert_eq!(CliError::Numerical("x".into()).exit_code(), EXIT_NUMERICAL);
        let mc: CliError = McError::InvalidConfig("n".into()).into();
        assert_eq!(mc.exit_code(), EXIT_INPUT);
        let mc: CliError = McError::DegenerateSample.into();
        assert_eq!(mc.exit_code(), EXIT_NUMERICAL);
    }
}
