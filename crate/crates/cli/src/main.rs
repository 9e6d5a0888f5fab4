//! `chen-verify`: build and verify Lagrangian submanifolds of CP³(4)
//! attaining equality in the improved Chen inequality.
//!
//! Subcommands mirror the pipeline stages: `ode` integrates the profile
//! system, `build` exports the sampled immersion, `verify` runs a full
//! verification case and writes a JSON report, `report` tabulates a set
//! of such reports.
//!
//! Exit codes: 0 all checks green, 1 at least one verification check red,
//! 2 unusable configuration or unparseable input, 3 the pipeline itself
//! failed (see the report's failure block).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chen_core::verify::{
    report_exit_code, run_build, run_ode, run_report, run_verify, to_json, RunConfig, SurfaceKind,
    Tolerances, VerifyCase,
};
use chen_core::{Error, Result};

#[derive(Parser)]
#[command(name = "chen-verify", version, about, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the profile system (b1, lam2) and write the nodes as CSV.
    ///
    /// Exit 0 when the run finished (or stopped cleanly at the singular
    /// locus lam2 = 0) and the first integral lam2(1 + lam2^2 + b1^2)
    /// drifted no more than the ode_drift tolerance, relative to its
    /// initial value.
    Ode(RunArgs),
    /// Build the immersion for the construction case and export sampled
    /// values of the horizontal lift as JSON.
    Build(RunArgs),
    /// Run a verification case and write the JSON report.
    ///
    /// The exit status is a pure function of the report: 0 when every
    /// check passes, 1 when any fails, 3 when the pipeline broke.
    Verify(RunArgs),
    /// Summarize verification reports into a table.
    ///
    /// Prints a text table to stdout (CSV with --out) sorted by file
    /// name. Exit 0 when every summarized report passed.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    /// Profile trajectory glued to a minimal horizontal seed surface.
    Construction,
    /// Totally geodesic real form: C = 0, tau = 3, inf K = 1, delta = 2.
    RealForm,
    /// Construction with a t-dependent phase twist; must fail
    /// horizontality.
    PerturbedControl,
    /// Anisotropic torus seed; must fail the surface minimality
    /// pre-check.
    NonminimalSurface,
}

impl From<CaseArg> for VerifyCase {
    fn from(value: CaseArg) -> Self {
        match value {
            CaseArg::Construction => VerifyCase::Construction,
            CaseArg::RealForm => VerifyCase::RealForm,
            CaseArg::PerturbedControl => VerifyCase::PerturbedControl,
            CaseArg::NonminimalSurface => VerifyCase::NonminimalSurface,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SurfaceArg {
    /// Clifford torus (e^{iu}, e^{iv}, e^{-i(u+v)})/sqrt(3).
    Clifford,
    /// Totally geodesic real 2-sphere.
    GeodesicSphere,
}

impl From<SurfaceArg> for SurfaceKind {
    fn from(value: SurfaceArg) -> Self {
        match value {
            SurfaceArg::Clifford => SurfaceKind::Clifford,
            SurfaceArg::GeodesicSphere => SurfaceKind::GeodesicSphere,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Grid([usize; 3]);

fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 3 {
        return Err(format!("grid must look like TxUxV (e.g. 3x3x3), got '{s}'"));
    }
    let mut out = [0usize; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| format!("grid count '{part}' is not a positive integer"))?;
    }
    Ok(Grid(out))
}

#[derive(Args)]
struct RunArgs {
    /// Verification case to run.
    #[arg(long, value_enum, default_value_t = CaseArg::Construction)]
    case: CaseArg,
    /// Seed surface for the construction case.
    #[arg(long, value_enum, default_value_t = SurfaceArg::Clifford)]
    surface: SurfaceArg,
    /// Initial b1 at t0.
    #[arg(long, default_value_t = 0.0)]
    b1: f64,
    /// Initial lam2 at t0; must be positive (the canonical sign).
    #[arg(long, default_value_t = 0.5)]
    lam2: f64,
    /// Start of the integration window.
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    /// End of the integration window.
    #[arg(long, default_value_t = 0.5)]
    t1: f64,
    /// Fixed RK4 step size.
    #[arg(long, default_value_t = 1e-3)]
    ode_step: f64,
    /// Sample grid counts as TxUxV, at least 2 per axis.
    #[arg(long, default_value = "3x3x3", value_parser = parse_grid)]
    grid: Grid,
    /// Base step for finite-difference jets.
    #[arg(long, default_value_t = 1e-3)]
    fd_step: f64,
    /// Tolerance override as KEY=VALUE; repeatable. Unknown keys are
    /// rejected.
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    tol: Vec<String>,
    /// Output path (CSV for ode, JSON for build/verify); stdout when
    /// omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn to_config(&self) -> Result<RunConfig> {
        let mut tolerances = Tolerances::default();
        for pair in &self.tol {
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "tolerance override '{pair}' must look like KEY=VALUE"
                ))
            })?;
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::Config(format!("tolerance value in '{pair}' is not a number"))
            })?;
            tolerances.set(key.trim(), value)?;
        }
        let config = RunConfig {
            case: self.case.into(),
            surface: self.surface.into(),
            b1_0: self.b1,
            lam2_0: self.lam2,
            t0: self.t0,
            t1: self.t1,
            ode_step: self.ode_step,
            grid: self.grid.0,
            fd_step: self.fd_step,
            tolerances,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct ReportArgs {
    /// Verification report JSON files to summarize.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Write the summary as CSV here, in addition to the stdout table.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_output(out: &Option<PathBuf>, contents: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, contents)?,
        None => print!("{contents}"),
    }
    Ok(())
}

fn cmd_ode(args: &RunArgs) -> Result<i32> {
    let config = args.to_config()?;
    let run = run_ode(&config)?;
    write_output(&args.out, &run.csv)?;
    let traj = &run.trajectory;
    eprintln!(
        "profile ode: status {:?}, t {} -> {} ({} nodes)",
        traj.status,
        traj.t0,
        traj.t_reached,
        traj.samples.len()
    );
    eprintln!(
        "first integral drift (relative): {:.3e} (tolerance {:.1e})",
        run.drift,
        config.tolerances.get("ode_drift")
    );
    match run.reversal {
        Some(r) => eprintln!("forward/backward reversal: {r:.3e}"),
        None => eprintln!(
            "forward/backward reversal: unavailable (return leg ended with {:?})",
            traj.status
        ),
    }
    Ok(if run.pass { 0 } else { 1 })
}

fn cmd_build(args: &RunArgs) -> Result<i32> {
    let config = args.to_config()?;
    let doc = run_build(&config)?;
    eprintln!(
        "build: {} samples, max | |E0|^2 - 1 | = {:.3e}, max horizontality = {:.3e}",
        doc.samples.len(),
        doc.max_unit_norm_dev,
        doc.max_horizontality
    );
    write_output(&args.out, &to_json(&doc)?)?;
    Ok(0)
}

fn cmd_verify(args: &RunArgs) -> Result<i32> {
    let config = args.to_config()?;
    let report = run_verify(&config);
    for (key, value) in &report.maxima {
        let tol = config.tolerances.get(key);
        let verdict = if *value <= tol { "ok  " } else { "FAIL" };
        eprintln!("{verdict} {key:<24} {value:>12.3e} (tolerance {tol:.1e})");
    }
    if let Some(failure) = &report.failure {
        eprintln!("FAIL {}: {}", failure.stage, failure.message);
    }
    let code = report_exit_code(&report);
    eprintln!(
        "verdict: {} ({} samples)",
        if code == 0 { "pass" } else { "fail" },
        report.samples.len()
    );
    write_output(&args.out, &to_json(&report)?)?;
    Ok(code)
}

fn cmd_report(args: &ReportArgs) -> Result<i32> {
    let mut inputs = Vec::with_capacity(args.reports.len());
    for path in &args.reports {
        let contents = fs::read_to_string(path).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            what: e.to_string(),
        })?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        inputs.push((name, contents));
    }
    let table = run_report(&inputs)?;
    print!("{}", table.text);
    if let Some(out) = &args.out {
        fs::write(out, &table.csv)?;
    }
    Ok(if table.rows.iter().all(|r| r.passed) {
        0
    } else {
        1
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ode(args) => cmd_ode(args),
        Command::Build(args) => cmd_build(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
