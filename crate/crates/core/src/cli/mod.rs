//! Command-line driver.
//!
//! Every subcommand reads an [`AnalysisConfig`], runs one analysis and
//! produces a [`Report`] (or CSV for `scan`). Exit codes: 0 success,
//! 2 usage or config error, 3 inadmissible parameters, 4 numerical check
//! failure.

pub mod config;
pub mod report;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

pub use config::{AnalysisConfig, ConfigError, OutputFormat, ScanKind, Tolerances, TOL_ENV};
pub use report::{Report, Value};

use crate::constitutive::MaterialParams;
use crate::error::Error;
use crate::mesh::{self, export, DetScope};
use crate::phase::{self, PhaseParams, TwoPhaseState, UniformGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Usage = 2,
    Inadmissible = 3,
    CheckFailed = 4,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// Failure that aborts a command before a report exists.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError { status: Status::Usage, message: e.to_string() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Inadmissible(_) => Status::Inadmissible,
            Error::Argument(_) => Status::Usage,
            _ => Status::CheckFailed,
        };
        CliError { status, message: e.to_string() }
    }
}

/// Body of a command's primary output.
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Report(Report),
    Csv(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub body: Body,
    pub status: Status,
    /// Extra files `(name, contents)` written next to the report.
    pub files: Vec<(String, String)>,
}

impl CommandOutput {
    fn report(report: Report, status: Status) -> Self {
        CommandOutput { body: Body::Report(report), status, files: Vec::new() }
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match (&self.body, format) {
            (Body::Report(r), OutputFormat::Json) => r.to_json(),
            (Body::Report(r), OutputFormat::Csv) => r.to_csv(),
            (Body::Csv(text), _) => text.clone(),
        }
    }

    pub fn as_report(&self) -> Option<&Report> {
        match &self.body {
            Body::Report(r) => Some(r),
            Body::Csv(_) => None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "homstress", version, about = "Homogeneous Cauchy stress from rank-one connected phases")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Key-value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Directory for the report and any mesh files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    pub format: Option<String>,

    /// Add wall-clock timings to the report (makes the output run-dependent).
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Clone, Copy, Subcommand, PartialEq, Eq)]
pub enum Command {
    /// Admissible range of s for the configured a and material.
    Admissible,
    /// Roots of β₁, the phase pair at each root and the stress-equality residuals.
    TwoPhase,
    /// Two-phase laminate on the tetrahedral cuboid, with continuity and traction checks.
    Mesh,
    /// CSV scans: β₁(k), the admissibility boundary, or the energy along the laminate segment.
    Scan,
    /// Search for a non-convexity witness along the laminate direction.
    ProbeConvexity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Admissible => "admissible",
            Command::TwoPhase => "two-phase",
            Command::Mesh => "mesh",
            Command::Scan => "scan",
            Command::ProbeConvexity => "probe-convexity",
        }
    }
}

pub fn run_command(cmd: Command, cfg: &AnalysisConfig) -> Result<CommandOutput, CliError> {
    match cmd {
        Command::Admissible => cmd_admissible(cfg),
        Command::TwoPhase => cmd_two_phase(cfg),
        Command::Mesh => cmd_mesh(cfg),
        Command::Scan => cmd_scan(cfg),
        Command::ProbeConvexity => cmd_probe_convexity(cfg),
    }
}

fn material_report(p: &MaterialParams) -> Report {
    Report::new().with("kappa", p.kappa).with("mu", p.mu).with("mu_tilde", p.mu_tilde)
}

pub fn cmd_admissible(cfg: &AnalysisConfig) -> Result<CommandOutput, CliError> {
    let a = cfg.require_a()?;
    let p = &cfg.material;
    let mut report = Report::new()
        .with("command", "admissible")
        .with("material", material_report(p))
        .with("a", a)
        .with("mu_ratio", p.mu / (3.0 * p.mu_tilde));
    let status = match phase::admissible_smax(a, p) {
        Some(region) => {
            report.set("verdict", "admissible").set("mu_ratio_bound", region.mu_ratio_bound).set("s_max", region.s_max);
            Status::Ok
        }
        None => {
            report.set("verdict", "inadmissible");
            Status::Inadmissible
        }
    };
    Ok(CommandOutput::report(report, status))
}

fn state_report(state: &TwoPhaseState, p: &MaterialParams) -> Result<(Report, f64), CliError> {
    let residuals = phase::stress_equality_residuals(&state.b, &state.b_hat, p)?;
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    let check = phase::rank_one_condition(&state.f, &state.f_hat);
    let mut rank_one = Report::new().with("holds", check.holds).with("minor_residual", check.residual);
    if let Some(r) = check.decomposition {
        rank_one.set("a", &r.a).set("n", &r.n);
    }
    let report = Report::new()
        .with("k", state.params.k)
        .with("beta0", state.beta0)
        .with("beta1", state.beta1)
        .with("F", &state.f)
        .with("F_hat", &state.f_hat)
        .with("sigma", &state.sigma)
        .with("stress_residuals", residuals.to_vec())
        .with("max_stress_residual", max_residual)
        .with("rank_one", rank_one);
    Ok((report, max_residual))
}

fn phase_inputs(cfg: &AnalysisConfig) -> Result<(f64, f64), CliError> {
    let (a, s) = (cfg.require_a()?, cfg.require_s()?);
    if !(s > 0.0) {
        return Err(CliError {
            status: Status::Inadmissible,
            message: format!("s must be strictly positive, got {s}"),
        });
    }
    Ok((a, s))
}

pub fn cmd_two_phase(cfg: &AnalysisConfig) -> Result<CommandOutput, CliError> {
    let (a, s) = phase_inputs(cfg)?;
    let p = &cfg.material;
    let region = phase::admissible_smax(a, p);
    let mut report =
        Report::new().with("command", "two-phase").with("material", material_report(p)).with("a", a).with("s", s);
    if let Some(r) = region {
        report.set("s_max", r.s_max);
    }

    if let Some(k) = cfg.k {
        // explicit k: report the pair as is, root or not
        let state = TwoPhaseState::at(PhaseParams::new(k, s, a)?, p)?;
        let (state_rep, _) = state_report(&state, p)?;
        report.set("verdict", "explicit-k").set("state", state_rep);
        return Ok(CommandOutput::report(report, Status::Ok));
    }

    let scan = match phase::find_k_roots(s, a, p) {
        Ok(scan) => scan,
        Err(Error::Inadmissible(msg)) => {
            report.set("verdict", "inadmissible").set("reason", msg);
            return Ok(CommandOutput::report(report, Status::Inadmissible));
        }
        Err(e) => return Err(e.into()),
    };

    let mut status = Status::Ok;
    let mut roots = Vec::new();
    for root in &scan.roots {
        let state = TwoPhaseState::at(PhaseParams::new(root.k, s, a)?, p)?;
        let (mut rep, max_residual) = state_report(&state, p)?;
        let ok = max_residual <= cfg.tolerances.stress * state.beta0.abs().max(1.0) && state.beta0 < 0.0;
        if !ok {
            status = Status::CheckFailed;
        }
        rep.set("stress_check_ok", ok);
        roots.push(Value::Map(rep));
    }
    if let Some(d) = &scan.diagnostic {
        report.set("diagnostic", d.as_str());
        status = Status::CheckFailed;
    }
    report.set("verdict", "admissible").set("root_count", scan.roots.len()).set("roots", Value::List(roots));
    Ok(CommandOutput::report(report, status))
}

/// State selected by the config: explicit `k`, or root `root_index` of β₁.
fn configured_state(cfg: &AnalysisConfig) -> Result<(TwoPhaseState, bool), CliError> {
    let (a, s) = phase_inputs(cfg)?;
    match cfg.k {
        Some(k) => Ok((TwoPhaseState::at(PhaseParams::new(k, s, a)?, &cfg.material)?, false)),
        None => Ok((phase::build_two_phase_state(s, a, cfg.root_index, &cfg.material)?, true)),
    }
}

pub fn cmd_mesh(cfg: &AnalysisConfig) -> Result<CommandOutput, CliError> {
    let (state, at_root) = configured_state(cfg)?;
    let p = &cfg.material;
    let part = mesh::kuhn_partition(cfg.m, cfg.dims)?;
    let volume_sum: f64 = (0..part.tets.len()).map(|t| part.tet_volume(t)).sum();
    let c = cfg.plane_offset();
    let field = mesh::build_two_phase_field(part, &state.f, &state.f_hat, c)?;

    let continuity = mesh::check_continuity(&field);
    let trace = mesh::face_trace_mismatch(&field);
    let traction = mesh::traction_and_equilibrium_check(&field, p)?;
    let dof = mesh::dof_accounting(cfg.m as u64)?;
    let d = cfg.det_target.unwrap_or(state.params.k);
    let closure = mesh::det_constraint_residuals(&field, d, DetScope::Closure)?;
    let all = mesh::det_constraint_residuals(&field, d, DetScope::All)?;
    let max_abs = |r: &[(usize, f64)]| r.iter().map(|(_, x)| x.abs()).fold(0.0, f64::max);
    let hat_tets = field.maps.iter().filter(|m| (m.gradient() - state.f_hat).amax() == 0.0).count();

    let traction_tol = cfg.tolerances.traction * (1.0 + traction.max_stress);
    let continuity_ok = continuity <= cfg.tolerances.continuity;
    let traction_ok = traction.max_traction_jump <= traction_tol;
    let expected_jump = 2.0 * state.beta1.abs() * state.params.s * state.params.a.powi(2);

    let report = Report::new()
        .with("command", "mesh")
        .with("material", material_report(p))
        .with("k", state.params.k)
        .with("s", state.params.s)
        .with("a", state.params.a)
        .with("at_root", at_root)
        .with("beta0", state.beta0)
        .with("beta1", state.beta1)
        .with("m", cfg.m)
        .with("dims", cfg.dims.to_vec())
        .with("plane_offset", c)
        .with("tets", field.partition.tets.len())
        .with("tets_f_hat", hat_tets)
        .with("volume_sum", volume_sum)
        .with("volume", field.partition.volume())
        .with("continuity_max_jump", continuity)
        .with("continuity_ok", continuity_ok)
        .with("face_trace_max_jump", trace)
        .with("traction_max_jump", traction.max_traction_jump)
        .with("traction_expected_interface_jump", expected_jump)
        .with("traction_ok", traction_ok)
        .with(
            "dof",
            Report::new()
                .with("total", dof.total)
                .with("boundary_eqs", dof.boundary_eqs)
                .with("interior", dof.interior)
                .with("det_constraints_needed", dof.det_constraints_needed)
                .with("closure_tets", dof.closure_tets)
                .with("affine_coefficients", dof.affine_coefficients)
                .with("identity_holds", dof.identity_holds()),
        )
        .with(
            "det_residuals",
            Report::new()
                .with("target", d)
                .with("closure_count", closure.len())
                .with("closure_max_abs", max_abs(&closure))
                .with("all_max_abs", max_abs(&all)),
        );

    // traction continuity is only expected at a root of β₁
    let failed = !continuity_ok || !dof.identity_holds() || (at_root && !traction_ok);
    let status = if failed { Status::CheckFailed } else { Status::Ok };
    let files = vec![
        ("mesh.tetmesh".to_string(), export::write_mesh(&field.partition, Some(&field.gradients()))),
        ("field.tetmesh".to_string(), export::write_field(&field)),
    ];
    Ok(CommandOutput { body: Body::Report(report), status, files })
}

fn csv_real(x: f64) -> String {
    if x.is_finite() {
        export::fmt_real(x)
    } else {
        String::new()
    }
}

pub fn cmd_scan(cfg: &AnalysisConfig) -> Result<CommandOutput, CliError> {
    let p = &cfg.material;
    let n = cfg.scan_points;
    let mut out = String::new();
    match cfg.scan {
        ScanKind::Beta1 => {
            let (a, s) = (cfg.require_a()?, cfg.require_s()?);
            out.push_str("# columns: k, beta1 (coefficient of B), beta0 (coefficient of I)\nk,beta1,beta0\n");
            let grid = UniformGrid::new(phase::K_SCAN.lo, phase::K_SCAN.hi, n);
            for k in grid.iter() {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    csv_real(k),
                    csv_real(phase::beta1_phase(k, s, a, p)),
                    csv_real(phase::beta0_phase(k, s, a, p))
                );
            }
        }
        ScanKind::Admissibility => {
            out.push_str("# columns: a, admissible (1/0), mu_ratio_bound, s_max (empty when inadmissible)\na,admissible,mu_ratio_bound,s_max\n");
            let (lo, hi) = cfg.scan_a_range;
            for a in UniformGrid::new(lo, hi, n).iter() {
                match phase::admissible_smax(a, p) {
                    Some(r) => {
                        let _ = writeln!(out, "{},1,{},{}", csv_real(a), csv_real(r.mu_ratio_bound), csv_real(r.s_max));
                    }
                    None => {
                        let _ = writeln!(out, "{},0,,", csv_real(a));
                    }
                }
            }
        }
        ScanKind::Segment => {
            out.push_str("# columns: t (F at 0, F_hat at 1), energy W(F + t a⊗n), second_difference (empty at ends)\nt,energy,second_difference\n");
            if n > 0 {
                let (state, _) = configured_state(cfg)?;
                let (a, normal) = phase::laminate_direction(&state);
                let samples = phase::energy_along_line(
                    |f| crate::constitutive::energy(f, p),
                    &state.f,
                    &a,
                    &normal,
                    &UniformGrid::new(0.0, 1.0, n),
                )?;
                for s in samples {
                    let d2 = s.second_difference.map(csv_real).unwrap_or_default();
                    let _ = writeln!(out, "{},{},{}", csv_real(s.t), csv_real(s.energy), d2);
                }
            }
        }
    }
    Ok(CommandOutput { body: Body::Csv(out), status: Status::Ok, files: Vec::new() })
}

pub fn cmd_probe_convexity(cfg: &AnalysisConfig) -> Result<CommandOutput, CliError> {
    let (state, at_root) = configured_state(cfg)?;
    let p = &cfg.material;
    let witness = phase::probe_laminate(&state, p, cfg.probe_points)?;
    let (a, n) = phase::laminate_direction(&state);
    let mut report = Report::new()
        .with("command", "probe-convexity")
        .with("material", material_report(p))
        .with("k", state.params.k)
        .with("s", state.params.s)
        .with("a", state.params.a)
        .with("at_root", at_root)
        .with("direction_a", &a)
        .with("direction_n", &n)
        .with("points", cfg.probe_points);
    let status = match witness {
        Some(w) => {
            report
                .set("witness_found", true)
                .set("witness_t", w.t)
                .set("witness_second_difference", w.second_derivative);
            Status::Ok
        }
        None => {
            report.set("witness_found", false).set("flag", "no non-convexity witness on the laminate segment; review");
            Status::CheckFailed
        }
    };
    Ok(CommandOutput::report(report, status))
}

fn write_outputs(
    dir: &Path,
    cmd: Command,
    output: &CommandOutput,
    rendered: &str,
    format: OutputFormat,
) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let ext = match (&output.body, format) {
        (Body::Csv(_), _) | (_, OutputFormat::Csv) => "csv",
        _ => "json",
    };
    std::fs::write(dir.join(format!("{}.{ext}", cmd.name())), rendered)?;
    for (name, contents) in &output.files {
        std::fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

/// Entry point used by the binary.
pub fn main_with(cli: Cli, env_tol: Option<String>) -> ExitCode {
    let started = Instant::now();
    let Some(path) = cli.config.as_deref() else {
        eprintln!("error: --config <path> is required");
        return ExitCode::from(Status::Usage.code());
    };
    let cfg = match AnalysisConfig::load(path, env_tol.as_deref()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Status::Usage.code());
        }
    };
    let format = match cli.format.as_deref() {
        Some(f) => f.parse().unwrap_or(cfg.format),
        None => cfg.format,
    };
    let mut output = match run_command(cli.command, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.status.code());
        }
    };
    if cli.timings {
        if let Body::Report(r) = &mut output.body {
            r.set("wall_clock_seconds", started.elapsed().as_secs_f64());
        }
    }
    let rendered = output.render(format);
    // A closed pipe (e.g. `| head`) is not an error.
    let mut stdout = std::io::stdout().lock();
    if let Err(e) =
        std::io::Write::write_all(&mut stdout, rendered.as_bytes()).and_then(|_| std::io::Write::flush(&mut stdout))
    {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: cannot write report: {e}");
            return ExitCode::from(Status::Usage.code());
        }
    }
    drop(stdout);
    if let Some(dir) = cli.out.as_deref().or(cfg.output_dir.as_deref()) {
        if let Err(e) = write_outputs(dir, cli.command, &output, &rendered, format) {
            eprintln!("error: cannot write to {}: {e}", dir.display());
            return ExitCode::from(Status::Usage.code());
        }
    }
    if output.status != Status::Ok {
        eprintln!("{}: exit status {}", cli.command.name(), output.status.code());
    }
    ExitCode::from(output.status.code())
}
