//! The `ckn` command-line driver.
//!
//! Every subcommand's resolved arguments serialize to a config object that is
//! embedded in its output: under `"config"` in JSON, and as a `# config:`
//! line in CSV. `ckn replay --from FILE` re-runs that config and reproduces
//! the file byte for byte.
//!
//! Exit status: 0 success, 1 I/O or malformed data, 2 usage, 3 parameter
//! domain, 4 non-convergence or numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::boundary::{self, ProbeConfig, Resolution};
use crate::error::Error;
use crate::grid::{Field, Grid, DECAY_MARGIN, REFERENCE_NPHI, REFERENCE_NT};
use crate::io::{self, fmt_f64, Table};
use crate::params::{self, CknParams, CylParams, Region};
use crate::radial::{self, RadialProfile, CP_QUADRATURE_MIN_GAP};
use crate::solver::{self, GaussianDipole, MinimizeOptions};
use crate::spectral::{self, LineGrid, ModeProblem};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CKN_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ckn", version, about = "Symmetry breaking of Caffarelli-Kohn-Nirenberg extremals")]
struct Cli {
    /// Output file; defaults to $CKN_OUT_DIR/<command>.<ext> when that is set, else stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Convert between (N, a, b) and (N, Λ, p).
    Convert(ConvertArgs),
    /// Kelvin dual of (a, b).
    Dual(DualArgs),
    /// Tabulate the Felli–Schneider curve b^FS(a).
    FsCurve(FsCurveArgs),
    /// Sample the radial extremal w* and its pullback u*.
    Radial(RadialArgs),
    /// Optimal radial constants and c_p.
    Constants(ChartArgs),
    /// Bottom of the linearized spectrum in the k-th harmonic sector.
    Spectrum(SpectrumArgs),
    /// Minimize the quotient on the truncated cylinder.
    Minimize(MinimizeArgs),
    /// Bisect for Λ*(p) on a grid of exponents.
    Scan(ScanArgs),
    /// Check the Λ-scaling identity on a closed-form field.
    ScalingCheck(ScalingArgs),
    /// Re-run the config embedded in an output file.
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Convert(_) => "convert",
            Command::Dual(_) => "dual",
            Command::FsCurve(_) => "fs-curve",
            Command::Radial(_) => "radial",
            Command::Constants(_) => "constants",
            Command::Spectrum(_) => "spectrum",
            Command::Minimize(_) => "minimize",
            Command::Scan(_) => "scan",
            Command::ScalingCheck(_) => "scaling-check",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Exactly one chart: `--a --b` or `--lambda --p`.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ChartArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ConvertArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chart: ChartArgs,
    /// Map a > a_c through the Kelvin dual before converting.
    #[arg(long)]
    #[serde(default)]
    pub dualize: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DualArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FsCurveArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub a_min: f64,
    #[arg(long, default_value_t = -0.01, allow_negative_numbers = true)]
    pub a_max: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RadialArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chart: ChartArgs,
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub t_min: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub t_max: f64,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chart: ChartArgs,
    /// Harmonic index.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Half-width T of the line grid; default max(20, 50/(p√Λ)).
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Spacing h; capped at 0.01/α.
    #[arg(long, default_value_t = 0.01)]
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GridArgs {
    /// Half-length T; default 25/√Λ.
    #[arg(long)]
    pub half_length: Option<f64>,
    #[arg(long, default_value_t = REFERENCE_NT)]
    pub nt: usize,
    #[arg(long, default_value_t = REFERENCE_NPHI)]
    pub nphi: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    /// w* plus the ψ₁-mode.
    Perturbed,
    /// w* sampled on the grid.
    Radial,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MinimizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chart: ChartArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = InitKind::Perturbed)]
    pub init: InitKind,
    /// ‖ψ₁-mode‖/‖w*‖ of the initial perturbation.
    #[arg(long, default_value_t = 0.1)]
    pub perturbation: f64,
    /// Start from a saved field instead (CSV with JSON sidecar).
    #[arg(long)]
    pub init_field: Option<PathBuf>,
    #[arg(long, default_value_t = 20_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub breaking_margin: f64,
    #[arg(long)]
    #[serde(default)]
    pub symmetrize_even: bool,
    /// Write the final field here (CSV plus .json sidecar).
    #[arg(long)]
    #[serde(skip)]
    pub save_field: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ScanArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    /// Comma-separated, strictly increasing exponents in (2, 2*).
    #[arg(long, value_delimiter = ',', required = true)]
    pub p_grid: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    #[arg(long, default_value_t = DECAY_MARGIN)]
    pub decay_margin: f64,
    #[arg(long, default_value_t = REFERENCE_NT)]
    pub nt: usize,
    #[arg(long, default_value_t = REFERENCE_NPHI)]
    pub nphi: usize,
    /// Relative drop below the discrete radial minimum that counts as breaking.
    #[arg(long, default_value_t = 1e-7)]
    pub margin: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestField {
    /// The radial extremal w*.
    WStar,
    /// e^{-t²}(1 + c cos φ).
    Dipole,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ScalingArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub chart: ChartArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.5,2")]
    pub sigma: Vec<f64>,
    #[arg(long, value_enum, default_value_t = TestField::Dipole)]
    pub field: TestField,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub dipole: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A JSON or CSV file written by this tool.
    #[arg(long)]
    pub from: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Produced text plus the exit status it should carry.
struct Output {
    text: String,
    format: Format,
    status: i32,
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let name = cli.command.name();
    match execute(&cli.command).and_then(|out| emit(&out, cli.out.as_deref(), name).map(|_| out.status)) {
        Ok(status) => status,
        Err(Failure::Usage(msg)) => {
            eprintln!("ckn {name}: usage: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            eprintln!("ckn {name}: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) => EXIT_DOMAIN,
        Error::NonConvergence(_) | Error::Numerical(_) => EXIT_NUMERICAL,
        Error::Format(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_IO,
    }
}

fn emit(out: &Output, path: Option<&Path>, name: &str) -> CliResult<()> {
    let target = match path {
        Some(p) => Some(p.to_path_buf()),
        None => std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(format!("{name}.{}", out.format.ext()))),
    };
    match target {
        Some(p) if p.as_os_str() != "-" => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&p, &out.text)?;
        }
        _ => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(out.text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn execute(cmd: &Command) -> CliResult<Output> {
    if let Command::Replay(r) = cmd {
        let inner = load_config(&r.from)?;
        if matches!(inner, Command::Replay(_)) {
            return Err(Failure::Usage("nested replay".into()));
        }
        return execute(&inner);
    }
    let config = serde_json::to_value(cmd).map_err(Error::from)?;
    match cmd {
        Command::Convert(a) => json_out(config, convert(a)?),
        Command::Dual(a) => json_out(config, dual(a)?),
        Command::FsCurve(a) => table_out(config, fs_curve(a)?, a.format),
        Command::Radial(a) => table_out(config, radial_table(a)?, a.format),
        Command::Constants(a) => json_out(config, constants(a)?),
        Command::Spectrum(a) => json_out(config, spectrum(a)?),
        Command::Minimize(a) => minimize(config, a),
        Command::Scan(a) => scan(config, a),
        Command::ScalingCheck(a) => json_out(config, scaling(a)?),
        Command::Replay(_) => unreachable!(),
    }
}

fn json_out(config: Value, result: Value) -> CliResult<Output> {
    let text = io::to_json_pretty(&json!({ "config": config, "result": result }))? + "\n";
    Ok(Output { text, format: Format::Json, status: EXIT_OK })
}

fn table_out(config: Value, mut table: Table, format: Format) -> CliResult<Output> {
    match format {
        Format::Csv => {
            table.comments.insert(0, format!("config: {}", io::to_json_compact(&config)?));
            Ok(Output { text: table.to_string()?, format, status: EXIT_OK })
        }
        Format::Json => {
            let columns: serde_json::Map<String, Value> = table
                .header
                .iter()
                .enumerate()
                .map(|(k, h)| {
                    let col = table.rows.iter().map(|r| cell_value(&r[k])).collect();
                    (h.clone(), Value::Array(col))
                })
                .collect();
            json_out(config, Value::Object(columns))
        }
    }
}

fn cell_value(s: &str) -> Value {
    match s {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => s.parse::<f64>().ok().and_then(serde_json::Number::from_f64).map(Value::Number).unwrap_or_else(|| {
            if s == "NaN" {
                Value::Null
            } else {
                Value::String(s.to_string())
            }
        }),
    }
}

fn load_config(path: &Path) -> CliResult<Command> {
    let text = std::fs::read_to_string(path)?;
    let config = if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text).map_err(Error::from)?;
        v.get("config").cloned().ok_or_else(|| Error::Format(format!("{} has no config object", path.display())))?
    } else {
        let line = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .find_map(|l| l.strip_prefix("# config: "))
            .ok_or_else(|| Error::Format(format!("{} has no '# config:' line", path.display())))?;
        serde_json::from_str(line).map_err(Error::from)?
    };
    Ok(serde_json::from_value(config).map_err(Error::from)?)
}

/// Both charts of a parameter point.
#[derive(Debug, Clone, Copy, Serialize)]
struct Point {
    #[serde(rename = "N")]
    n: u32,
    a: f64,
    b: f64,
    lambda: f64,
    p: f64,
    region: Region,
}

fn resolve(chart: &ChartArgs) -> CliResult<(CknParams, CylParams)> {
    match (chart.a, chart.b, chart.lambda, chart.p) {
        (Some(a), Some(b), None, None) => {
            let q = CknParams::new(chart.n, a, b)?;
            Ok((q, params::cyl_from_ckn(&q)?))
        }
        (None, None, Some(l), Some(p)) => {
            let c = CylParams::new(chart.n, l, p)?;
            Ok((params::ckn_from_cyl(&c)?, c))
        }
        _ => Err(Failure::Usage("give exactly one chart: --a and --b, or --lambda and --p".into())),
    }
}

fn point(q: &CknParams, c: &CylParams) -> Point {
    Point { n: c.n, a: q.a, b: q.b, lambda: c.lambda, p: c.p, region: c.region() }
}

fn open_params(chart: &ChartArgs) -> CliResult<(CknParams, CylParams)> {
    let (q, c) = resolve(chart)?;
    c.require_open()?;
    Ok((q, c))
}

fn convert(args: &ConvertArgs) -> CliResult<Value> {
    let ch = &args.chart;
    let (q, c, dualized) = match (ch.a, ch.b, ch.lambda, ch.p) {
        (Some(a), Some(b), None, None) if args.dualize && a > params::critical_a(ch.n) => {
            let q = CknParams::new(ch.n, a, b)?;
            (q, params::cyl_from_ckn_dualizing(&q)?, true)
        }
        _ => {
            let (q, c) = resolve(ch)?;
            (q, c, false)
        }
    };
    Ok(json!({
        "N": c.n,
        "a": q.a,
        "b": q.b,
        "lambda": c.lambda,
        "p": c.p,
        "region": c.region(),
        "a_c": params::critical_a(c.n),
        "critical_exponent": finite_or_null(params::critical_exponent(c.n)),
        "dualized": dualized,
    }))
}

fn finite_or_null(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn dual(args: &DualArgs) -> CliResult<Value> {
    let q = CknParams::new(args.n, args.a, args.b)?;
    let d = params::kelvin_dual(&q);
    let cq = params::cyl_from_ckn_dualizing(&q)?;
    let cd = params::cyl_from_ckn_dualizing(&d)?;
    Ok(json!({ "input": point(&q, &cq), "dual": point(&d, &cd) }))
}

fn fs_curve(args: &FsCurveArgs) -> CliResult<Table> {
    if args.points < 2 || !(args.a_min < args.a_max) {
        return Err(Failure::Usage("need at least 2 points and a_min < a_max".into()));
    }
    let mut t = Table::new(&["a", "b_fs", "lambda", "p", "lambda_fs", "in_stated_domain"]);
    for k in 0..args.points {
        let a = args.a_min + (args.a_max - args.a_min) * k as f64 / (args.points - 1) as f64;
        let fs = params::fs_b(args.n, a)?;
        let c = params::cyl_from_ckn(&CknParams::new(args.n, a, fs.b)?)?;
        let lfs = params::fs_lambda(args.n, c.p)?;
        let mut row: Vec<String> = [a, fs.b, c.lambda, c.p, lfs].iter().map(|&x| fmt_f64(x)).collect();
        row.push(fs.in_stated_domain.to_string());
        t.rows.push(row);
    }
    Ok(t)
}

fn radial_table(args: &RadialArgs) -> CliResult<Table> {
    let (q, c) = open_params(&args.chart)?;
    if args.points < 2 || !(args.t_min < args.t_max) {
        return Err(Failure::Usage("need at least 2 points and t_min < t_max".into()));
    }
    let prof = RadialProfile::new(c)?;
    let mut t = Table::new(&["t", "w_star", "w_star_dt", "r", "u_star", "pullback"]);
    for k in 0..args.points {
        let s = args.t_min + (args.t_max - args.t_min) * k as f64 / (args.points - 1) as f64;
        let r = s.exp();
        t.push_floats(&[s, prof.value(s), prof.derivative(s), r, radial::u_star(&q, r)?, radial::emden_fowler_pullback(&q, s)?]);
    }
    Ok(t)
}

fn constants(chart: &ChartArgs) -> CliResult<Value> {
    let (q, c) = open_params(chart)?;
    let rc = radial::radial_constants(&c)?;
    let quadrature = if c.p - 2.0 >= CP_QUADRATURE_MIN_GAP { finite_or_null(radial::c_p_quadrature(c.p)?) } else { Value::Null };
    Ok(json!({
        "params": point(&q, &c),
        "inv_c_star": rc.inv_c_star,
        "inv_c_star_closed": radial::inv_c_star_closed(&c)?,
        "c_star": 1.0 / rc.inv_c_star,
        "lp_norm_1d": rc.lp_norm_1d,
        "lp_mass_cyl": rc.lp_mass_cyl,
        "lp_mass_cyl_closed": rc.lp_mass_cyl_closed,
        "c_p_quadrature": quadrature,
        "c_p_gamma": radial::c_p_gamma(c.p)?,
        "c_p_normalized": radial::c_p_normalized(c.p)?,
        "kappa_star": rc.kappa_star,
    }))
}

fn spectrum(args: &SpectrumArgs) -> CliResult<Value> {
    let (q, c) = open_params(&args.chart)?;
    let mp = ModeProblem::new(c, args.k)?;
    let half_width = args.half_width.unwrap_or_else(|| (2.0 * spectral::PT_DECAY_MARGIN / (c.p * c.lambda.sqrt())).max(20.0));
    let spacing = args.spacing.min(spectral::PT_MAX_ALPHA_H / mp.alpha);
    let res = spectral::poschl_teller_ground(&mp, &LineGrid { half_width, spacing })?;
    let exact = mp.ground_exact();
    Ok(json!({
        "params": point(&q, &c),
        "k": mp.k,
        "gamma_k": mp.gamma_k,
        "beta": mp.beta,
        "alpha": mp.alpha,
        "mu1_closed_form": spectral::mu1_closed_form(&c),
        "mu1_in_stated_regime": spectral::mu1_in_stated_regime(&c),
        "lambda0_numeric": res.lambda0,
        "lambda0_exact": exact,
        "mu_numeric": res.mu1,
        "mu_exact": mp.gamma_k + exact,
        "grid": res.grid,
    }))
}

fn minimize(config: Value, args: &MinimizeArgs) -> CliResult<Output> {
    let (q, c) = open_params(&args.chart)?;
    let init = match &args.init_field {
        Some(path) => {
            let f = io::read_field(path)?;
            if f.grid.n_dim() != c.n {
                return Err(Error::domain("saved field has a different N").into());
            }
            f.with_params(c)?
        }
        None => {
            let half = args.grid.half_length.unwrap_or(DECAY_MARGIN / c.lambda.sqrt());
            let grid = Arc::new(Grid::new(c.n, half, args.grid.nt, args.grid.nphi)?);
            grid.check_decay_margin(&c)?;
            match args.init {
                InitKind::Perturbed => boundary::probe_field(&c, grid, args.perturbation)?,
                InitKind::Radial => Field::radial_extremal(grid, c)?,
            }
        }
    };
    let opts = MinimizeOptions {
        max_iter: args.max_iter,
        breaking_margin: args.breaking_margin,
        symmetrize_even: args.symmetrize_even,
        ..MinimizeOptions::default()
    };
    let out = solver::minimize(&c, &init, &opts)?;
    if let Some(path) = &args.save_field {
        io::write_field(path, &out.field)?;
    }
    let status = if out.report.converged { EXIT_OK } else { EXIT_NUMERICAL };
    if !out.report.converged {
        eprintln!("ckn minimize: no convergence after {} iterations", out.report.iterations);
    }
    let result = json!({ "params": point(&q, &c), "grid": out.field.grid.spec(), "report": out.report });
    let mut o = json_out(config, result)?;
    o.status = status;
    Ok(o)
}

fn scan(config: Value, args: &ScanArgs) -> CliResult<Output> {
    let cfg = ProbeConfig {
        resolution: Resolution { decay_margin: args.decay_margin, nt: args.nt, nphi: args.nphi },
        minimize: MinimizeOptions { max_iter: args.max_iter, ..MinimizeOptions::default() },
        margin: args.margin,
        ..ProbeConfig::default()
    };
    let curve = boundary::scan(args.n, &args.p_grid, args.tol, &cfg)?;
    let failed = curve.points.iter().filter(|p| p.status == boundary::PointStatus::Failed).count();
    let status = if failed > 0 {
        eprintln!("ckn scan: {failed} point(s) failed; see the status column");
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    };
    let mut o = match args.format {
        Format::Csv => {
            let mut t = io::curve_table(&curve);
            t.comments.insert(0, format!("config: {}", io::to_json_compact(&config)?));
            Output { text: t.to_string()?, format: Format::Csv, status }
        }
        Format::Json => json_out(config, serde_json::to_value(&curve).map_err(Error::from)?)?,
    };
    o.status = status;
    Ok(o)
}

fn scaling(args: &ScalingArgs) -> CliResult<Value> {
    let (q, c) = open_params(&args.chart)?;
    let checks = args
        .sigma
        .iter()
        .map(|&s| match args.field {
            TestField::WStar => solver::scaling_check(&RadialProfile::new(c)?, s, &c),
            TestField::Dipole => solver::scaling_check(&GaussianDipole { dipole: args.dipole }, s, &c),
        })
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(json!({ "params": point(&q, &c), "checks": checks }))
}
