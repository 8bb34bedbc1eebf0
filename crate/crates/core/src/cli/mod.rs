//! Command-line front end.
//!
//! ```text
//! sdcrk order-table --nodes radau --s 1..8 --k 1..15 --schedule zero,jumper --check golden.csv
//! sdcrk convergence --problem dahlquist --nodes radau --s 6 --schedule zero,jumper --k 1..4
//! sdcrk stability --nodes radau --s 3 --schedule zero,jumper --k 10 --rho --contour level.csv
//! sdcrk relaxation --nodes gauss --s 3 --schedule zero,ee --k 2 --dt 0.1 --t-end 1000
//! sdcrk certify --nodes radau --s 5 --schedule flex --k 5
//! sdcrk tableau --nodes gauss --s 2 --schedule zero,ie --k 2
//! ```
//!
//! Schedules use the grammar of [`crate::tableau::parse_schedule`]. Ranges
//! are `a..b` (inclusive) or a single number. The default precision for the
//! exact-arithmetic commands is read from `SDCRK_PRECISION_BITS`.
//!
//! Exit codes: `0` success, `1` usage error, `2` golden mismatch or failed
//! expectation, `3` numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::integrate::{
    convergence_study, dahlquist_problem, long_time_error_growth, rigid_body_problem, LongTimeOptions,
    RelaxationConfig, RelaxedTime, Scheme, StudyOptions,
};
use crate::order::{jump_condition_at, order_table, read_table_csv};
use crate::scalar::{Precision, Real};
use crate::stability::{
    certify_stiff_nilpotency, contour_segments, growth_rate_grid, stability_region, ComplexGrid, GridSpec, C64,
};
use crate::tableau::{check_simplifying, parse_schedule, ButcherTableau, FinalUpdate, NodeFamily, NodeKind, SdcMethod};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "sdcrk", version, about = "Order, stability and conservation analysis of SDC methods")]
pub struct RunConfig {
    /// Working precision in bits for the exact-arithmetic analyses.
    #[arg(long, global = true, env = "SDCRK_PRECISION_BITS")]
    pub precision: Option<u32>,
    /// What goes to stdout when no output file is given.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the CSV output here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the JSON output here.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Orders of accuracy over ranges of stage counts and sweeps.
    OrderTable(OrderTableArgs),
    /// Error against step size, one study per sweep count.
    Convergence(ConvergenceArgs),
    /// |R(z)| or the growth rate of the sweep error on a grid.
    Stability(StabilityArgs),
    /// Invariant drift with and without relaxation.
    Relaxation(RelaxationArgs),
    /// Nilpotency, jump conditions and simplifying assumptions of a schedule.
    Certify(CertifyArgs),
    /// The assembled Runge-Kutta tableau as JSON.
    Tableau(MethodArgs),
}

#[derive(Debug, Args, Clone)]
pub struct MethodArgs {
    #[arg(long, default_value = "radau")]
    pub nodes: String,
    #[arg(long, default_value_t = 3)]
    pub s: usize,
    #[arg(long, default_value = "zero,jumper")]
    pub schedule: String,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// quadrature, last-stage or extrapolation; defaults to last-stage when
    /// the nodes end at 1.
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Debug, Args)]
pub struct OrderTableArgs {
    #[arg(long, default_value = "radau")]
    pub nodes: String,
    #[arg(long, default_value = "1..4")]
    pub s: String,
    #[arg(long, default_value = "1..6")]
    pub k: String,
    #[arg(long, default_value = "zero,jumper")]
    pub schedule: String,
    #[arg(long)]
    pub mode: Option<String>,
    /// Golden CSV to compare against; exit 2 on any difference.
    #[arg(long)]
    pub check: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    Dahlquist,
    RigidBody,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[arg(long, value_enum, default_value_t = ProblemKind::Dahlquist)]
    pub problem: ProblemKind,
    #[arg(long, default_value = "radau")]
    pub nodes: String,
    #[arg(long, default_value_t = 3)]
    pub s: usize,
    #[arg(long, default_value = "zero,jumper")]
    pub schedule: String,
    /// Sweep counts, one study each.
    #[arg(long, default_value = "1..4")]
    pub k: String,
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub lambda_re: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub lambda_im: f64,
    /// Step sizes are `2^-l` for `l` in this range.
    #[arg(long, default_value = "2..8")]
    pub levels: String,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Errors at or below this are left out of the slope fit.
    #[arg(long)]
    pub floor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub method: MethodArgs,
    /// Runge-Kutta tableau JSON to use instead of the assembled SDC method.
    #[arg(long)]
    pub tableau: Option<PathBuf>,
    /// Sample the growth rate over `k` sweeps instead of |R(z)|.
    #[arg(long)]
    pub rho: bool,
    #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
    pub re_min: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub re_max: f64,
    #[arg(long, default_value_t = -15.0, allow_hyphen_values = true)]
    pub im_min: f64,
    #[arg(long, default_value_t = 15.0, allow_hyphen_values = true)]
    pub im_max: f64,
    #[arg(long, default_value_t = 401)]
    pub n_re: usize,
    #[arg(long, default_value_t = 401)]
    pub n_im: usize,
    /// Write the level-1 polyline segments as `x0,y0,x1,y1` CSV here.
    #[arg(long)]
    pub contour: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TimeArg {
    Shifted,
    Nominal,
}

#[derive(Debug, Args)]
pub struct RelaxationArgs {
    #[arg(long, default_value = "gauss")]
    pub nodes: String,
    #[arg(long, default_value_t = 3)]
    pub s: usize,
    #[arg(long, default_value = "zero,ee")]
    pub schedule: String,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 10)]
    pub sample_every: usize,
    #[arg(long, value_enum, default_value_t = TimeArg::Shifted)]
    pub time: TimeArg,
    /// Skip the Gauss reference solution and its error column.
    #[arg(long)]
    pub no_reference: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub method: MethodArgs,
    /// Threshold on the stiff-limit propagator norm.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Largest order probed for the simplifying assumptions; defaults to 2s.
    #[arg(long)]
    pub qmax: Option<usize>,
    /// Exit 2 unless the stiff limit is nilpotent.
    #[arg(long)]
    pub expect_nilpotent: bool,
    /// Exit 2 unless the jump condition holds at every sweep.
    #[arg(long)]
    pub expect_jumps: bool,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Mismatch(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Usage(_) => EXIT_USAGE,
        CliError::Mismatch(_) => EXIT_MISMATCH,
        CliError::Lib(e) => match e {
            Error::InvalidArgument(_)
            | Error::Parse(_)
            | Error::Dimension(_)
            | Error::Io(_)
            | Error::UnsupportedSchedule { .. }
            | Error::FinalUpdate { .. }
            | Error::ResourceLimit { .. }
            | Error::Precision(_) => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        },
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cfg) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            match &e {
                CliError::Usage(m) | CliError::Mismatch(m) => eprintln!("sdcrk: {m}"),
                CliError::Lib(err) => eprintln!("sdcrk: {err}"),
            }
            exit_code(&e)
        }
    }
}

/// Parses `a..b` or `a` into an inclusive range.
pub fn parse_range(s: &str) -> Option<(usize, usize)> {
    let s = s.trim();
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().ok()?, b.trim_start_matches('=').trim().parse().ok()?),
        None => {
            let v = s.parse().ok()?;
            (v, v)
        }
    };
    (a <= b).then_some((a, b))
}

fn range_arg(name: &str, s: &str) -> CliResult<(usize, usize)> {
    parse_range(s).ok_or_else(|| CliError::Usage(format!("--{name}: expected a..b, got {s:?}")))
}

fn precision(cfg: &RunConfig) -> CliResult<Precision> {
    match cfg.precision {
        None => Ok(Precision::DEFAULT),
        Some(b) if b >= 64 => Ok(Precision(b)),
        Some(b) => Err(CliError::Usage(format!("precision must be at least 64 bits, got {b}"))),
    }
}

fn mode_for(kind: NodeKind, mode: &Option<String>) -> CliResult<FinalUpdate> {
    match mode {
        Some(m) => Ok(m.parse()?),
        None if kind.ends_at_one() => Ok(FinalUpdate::LastStage),
        None => Ok(FinalUpdate::Quadrature),
    }
}

fn build_method(
    nodes: &str,
    s: usize,
    schedule: &str,
    k: usize,
    mode: &Option<String>,
    prec: Precision,
) -> CliResult<SdcMethod<Real>> {
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let kind = NodeKind::parse(nodes)?;
    let tab = NodeFamily::new(kind, s).tableau::<Real>(prec)?;
    let sched = parse_schedule(schedule)?.build(&tab, k)?;
    Ok(SdcMethod::new(tab, sched, mode_for(kind, mode)?)?)
}

fn to_f64(m: &SdcMethod<Real>) -> CliResult<SdcMethod<f64>> {
    Ok(SdcMethod::new(
        m.underlying.to_f64(),
        m.schedule.convert::<f64>(Precision::F64),
        m.final_update,
    )?)
}

fn method_from(args: &MethodArgs, prec: Precision) -> CliResult<SdcMethod<Real>> {
    build_method(&args.nodes, args.s, &args.schedule, args.k, &args.mode, prec)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Writes the outputs to the requested files and the selected format to
/// stdout when no file takes it.
fn emit(cfg: &RunConfig, csv: &str, json: &str, text: Option<&str>) -> CliResult<()> {
    if let Some(p) = &cfg.out {
        write_file(p, csv)?;
    }
    if let Some(p) = &cfg.json {
        write_file(p, json)?;
    }
    let stdout = match cfg.format {
        Format::Csv if cfg.out.is_none() => Some(csv),
        Format::Json if cfg.json.is_none() => Some(json),
        Format::Text => Some(text.unwrap_or(csv)),
        _ => None,
    };
    if let Some(s) = stdout {
        let mut lock = std::io::stdout().lock();
        let nl: &[u8] = if s.ends_with('\n') { b"" } else { b"\n" };
        quiet_pipe(lock.write_all(s.as_bytes()).and_then(|_| lock.write_all(nl)))?;
    }
    Ok(())
}

/// A closed downstream pipe (`| head`) is not an error.
fn quiet_pipe(r: std::io::Result<()>) -> CliResult<()> {
    match r {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn execute(cfg: &RunConfig) -> CliResult<()> {
    let prec = precision(cfg)?;
    match &cfg.command {
        Command::OrderTable(a) => cmd_order_table(cfg, a, prec),
        Command::Convergence(a) => cmd_convergence(cfg, a),
        Command::Stability(a) => cmd_stability(cfg, a, prec),
        Command::Relaxation(a) => cmd_relaxation(cfg, a),
        Command::Certify(a) => cmd_certify(cfg, a, prec),
        Command::Tableau(a) => {
            let t = method_from(a, prec)?.assemble()?;
            let j = t.to_json();
            emit(cfg, &j, &j, None)
        }
    }
}

fn cmd_order_table(cfg: &RunConfig, a: &OrderTableArgs, prec: Precision) -> CliResult<()> {
    let kind = NodeKind::parse(&a.nodes)?;
    let (s0, s1) = range_arg("s", &a.s)?;
    let (k0, k1) = range_arg("k", &a.k)?;
    let mode = a.mode.as_deref().map(str::parse::<FinalUpdate>).transpose()?;
    let template = parse_schedule(&a.schedule)?;
    let s_values: Vec<usize> = (s0..=s1).collect();
    let table = order_table(kind, &s_values, k0..=k1, &template, mode, prec)?;
    for w in &table.warnings {
        eprintln!("sdcrk: warning: {w}");
    }
    emit(cfg, &table.to_csv(), &table.to_json(), Some(&table.render()))?;
    if let Some(path) = &a.check {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let golden = read_table_csv(&text)?;
        let bad = table.compare(&golden);
        if !bad.is_empty() {
            let mut msg = format!("{} cells differ from {}", bad.len(), path.display());
            for m in bad.iter().take(20) {
                write!(msg, "\n  s={} k={}: expected {:?}, got {}", m.s, m.k, m.expected, m.got).unwrap();
            }
            return Err(CliError::Mismatch(msg));
        }
        eprintln!("sdcrk: table matches {}", path.display());
    }
    Ok(())
}

fn cmd_convergence(cfg: &RunConfig, a: &ConvergenceArgs) -> CliResult<()> {
    let (k0, k1) = range_arg("k", &a.k)?;
    let (l0, l1) = range_arg("levels", &a.levels)?;
    if k0 == 0 {
        return Err(CliError::Usage("--k must start at 1".into()));
    }
    let dts: Vec<f64> = (l0..=l1).map(|l| 0.5f64.powi(l as i32)).collect();
    // the f64 study does not need more than double-double nodes
    let full = to_f64(&build_method(&a.nodes, a.s, &a.schedule, k1, &a.mode, Precision(128))?)?;
    let mut opts = StudyOptions::default();
    if let Some(f) = a.floor {
        opts.floor = f;
    }
    let mut csv = String::from("k,dt,error\n");
    let mut reports = Vec::new();
    for k in k0..=k1 {
        let scheme = Scheme::Sdc(full.truncated(k)?);
        let study = match a.problem {
            ProblemKind::Dahlquist => {
                let mut p = dahlquist_problem(C64::new(a.lambda_re, a.lambda_im));
                if let Some(t) = a.t_end {
                    p = p.with_span(0.0, t);
                }
                convergence_study(&p, &scheme, &dts, &opts)?
            }
            ProblemKind::RigidBody => {
                let mut p = rigid_body_problem();
                if let Some(t) = a.t_end {
                    p = p.with_span(0.0, t);
                }
                convergence_study(&p, &scheme, &dts, &opts)?
            }
        };
        for (dt, e) in &study.points {
            writeln!(csv, "{k},{dt},{e}").unwrap();
        }
        reports.push(json!({ "k": k, "study": study }));
    }
    let json = serde_json::to_string_pretty(&reports).expect("report serializes");
    emit(cfg, &csv, &json, None)
}

fn segments_csv(grid: &ComplexGrid) -> String {
    let mut out = String::from("x0,y0,x1,y1\n");
    for s in contour_segments(grid, 1.0) {
        writeln!(out, "{},{},{},{}", s.from.0, s.from.1, s.to.0, s.to.1).unwrap();
    }
    out
}

fn cmd_stability(cfg: &RunConfig, a: &StabilityArgs, prec: Precision) -> CliResult<()> {
    let spec = GridSpec {
        re_min: a.re_min,
        re_max: a.re_max,
        im_min: a.im_min,
        im_max: a.im_max,
        n_re: a.n_re,
        n_im: a.n_im,
    };
    let grid = match (&a.tableau, a.rho) {
        (Some(_), true) => return Err(CliError::Usage("--rho needs an SDC schedule, not --tableau".into())),
        (Some(path), false) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let t = ButcherTableau::<f64>::from_json(&text, Precision::F64)?;
            stability_region(&t, &spec)?
        }
        (None, rho) => {
            let m = method_from(&a.method, prec)?;
            if rho {
                growth_rate_grid(&to_f64(&m)?, &spec, a.method.k)?
            } else {
                stability_region(&m.assemble()?.to_f64(), &spec)?
            }
        }
    };
    let poles = grid.poles.iter().filter(|&&p| p).count();
    if poles > 0 {
        eprintln!("sdcrk: {poles} grid points flagged as poles");
    }
    if let Some(p) = &a.contour {
        write_file(p, &segments_csv(&grid))?;
    }
    emit(cfg, &grid.to_csv(), &grid.to_json(), None)
}

#[derive(Serialize)]
struct VariantSummary {
    variant: &'static str,
    max_drift: f64,
    final_error: Option<f64>,
    gamma_range: Option<(f64, f64)>,
    fallbacks: usize,
}

fn cmd_relaxation(cfg: &RunConfig, a: &RelaxationArgs) -> CliResult<()> {
    let m = to_f64(&build_method(&a.nodes, a.s, &a.schedule, a.k, &a.mode, Precision(128))?)?;
    let p = rigid_body_problem();
    let opts = LongTimeOptions {
        sample_every: a.sample_every,
        reference_substeps: (!a.no_reference).then_some(4),
        ..LongTimeOptions::default()
    };
    let mut rc = RelaxationConfig::new(p.invariant.clone().expect("rigid body has an invariant"));
    rc.time = match a.time {
        TimeArg::Shifted => RelaxedTime::AtShiftedTime,
        TimeArg::Nominal => RelaxedTime::AtNominalTime,
    };
    let plain = long_time_error_growth(&p, &m, None, a.t_end, a.dt, &opts)?;
    let relaxed = long_time_error_growth(&p, &m, Some(&rc), a.t_end, a.dt, &opts)?;
    let mut csv = String::from("variant,");
    let mut summaries = Vec::new();
    for (i, (name, tr)) in [("plain", &plain), ("relaxed", &relaxed)].into_iter().enumerate() {
        let body = tr.to_csv();
        let mut lines = body.lines();
        let header = lines.next().unwrap_or_default();
        if i == 0 {
            csv.push_str(header);
            csv.push('\n');
        }
        for l in lines {
            writeln!(csv, "{name},{l}").unwrap();
        }
        summaries.push(VariantSummary {
            variant: name,
            max_drift: tr.max_drift,
            final_error: tr.samples.last().and_then(|s| s.error),
            gamma_range: tr.gamma_range,
            fallbacks: tr.fallbacks,
        });
    }
    let json = serde_json::to_string_pretty(&summaries).expect("summary serializes");
    emit(cfg, &csv, &json, None)
}

fn cmd_certify(cfg: &RunConfig, a: &CertifyArgs, prec: Precision) -> CliResult<()> {
    let m = method_from(&a.method, prec)?;
    let mf = to_f64(&m)?;
    let qmax = a.qmax.unwrap_or(2 * m.stages());
    let (nilpotency, nil_error) = match certify_stiff_nilpotency(&mf, a.tol) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e)),
    };
    let mut jumps = Vec::new();
    let mut all_jump = true;
    for k in 1..=m.sweeps() {
        match jump_condition_at(&m, k, None, None) {
            Ok(c) => {
                all_jump &= c.holds;
                jumps.push(json!({ "k": k, "holds": c.holds, "stage_order": c.stage_order, "residual": c.residual }));
            }
            Err(e) => {
                all_jump = false;
                jumps.push(json!({ "k": k, "holds": null, "error": e.to_string() }));
            }
        }
    }
    let underlying = check_simplifying(&m.underlying, None, qmax, None);
    let sweeps: Vec<_> = (0..=m.sweeps())
        .map(|k| {
            let eed = m.schedule.get(k);
            let r = check_simplifying(&m.underlying, Some(eed), qmax, None);
            json!({ "k": k, "kind": eed.kind.to_string(), "eta_w": r.eta_w, "zeta_y": r.zeta_y })
        })
        .collect();
    let report = json!({
        "nodes": m.underlying.c.len(),
        "schedule": a.method.schedule,
        "sweeps": m.sweeps(),
        "precision_bits": prec.bits(),
        "nilpotency": nilpotency,
        "nilpotency_error": nil_error.as_ref().map(|e| e.to_string()),
        "jump_condition": jumps,
        "assumptions": { "underlying": underlying, "sweeps": sweeps },
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    let mut lock = std::io::stdout().lock();
    if let Some(p) = &cfg.json {
        write_file(p, &text)?;
    } else {
        quiet_pipe(writeln!(lock, "{text}"))?;
    }
    if let Some(e) = nil_error {
        if a.expect_nilpotent || matches!(e, Error::Singular(_)) {
            return Err(CliError::Lib(e));
        }
    }
    if a.expect_nilpotent && !nilpotency.is_some_and(|c| c.pass) {
        return Err(CliError::Mismatch("stiff limit is not nilpotent".into()));
    }
    if a.expect_jumps && !all_jump {
        return Err(CliError::Mismatch("jump condition fails at some sweep".into()));
    }
    Ok(())
}
