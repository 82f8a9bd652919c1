//! Command-line front end for `stcontrol`: meshing, single solves,
//! refinement studies and a quick invariant self-test.

pub mod commands;
pub mod config;
pub mod svg;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use stcontrol::{Error, ErrorKind, Result};

use crate::config::{ConfigFile, ModeName, Overrides, RunConfig};

const AFTER_HELP: &str = "\
Exit codes: 0 ok, 1 usage, 2 geometry or mesh, 3 solver, 4 I/O.

Config file (--config): `key = value` lines under [section] headers, `#` comments.
Command-line flags override file values.

[problem]
  preset         example1-static | example1-moving. Default: example1-static
                 when no [problem] section is given, otherwise a custom problem.
  name           label used in outputs (default: preset name or `custom`)
  x_min, x_max   spatial interval (custom default 0, 1)
  final_time     T (default 1)
  kappa1, kappa2 diffusion inside / outside the band (default 0.5, 1)
  eta            regularization weight (default 1e-6)
  offsets        `a b`: interface curves x = a + s(t), x = b + s(t) (default 0.4 0.6)
  velocity       zero | sine <amplitude> <angular_frequency> | table t:v t:v ...
                 (custom default zero)
  desired_state  derived | zero | expquad | constant <c> | bump <value> <x0> <t0> <radius>
                 (custom default zero). Changing geometry or coefficients of a
                 preset requires an explicit desired_state.

[discretization]
  layers         comma-separated time layer counts
                 (default 30 for mesh/solve, 15,30,60,120 for convergence)
  adjoint_space  U_h | W_h (default U_h)
  quad_subdiv    4^k sub-triangles for loads and error integrals (default 1)
  rho_max        quasi-uniformity bound for mesh validation (default 8)
  gradient       spatial | space-time, gradient in the error functional (default spatial)

[run]
  out               output directory (default out)
  serial            true | false (default false)
  mode              exact | reference, convergence error mode (default exact)
  reference_layers  reference mesh for mode = reference (default 240)
  seed              random seed for selftest (default 0)
  plot              true | false, write convergence.svg (default false)
";

#[derive(Debug, Parser)]
#[command(name = "stcontrol", version, about = "Space-time interface-fitted FEM for parabolic optimal control", after_long_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build, validate and write meshes (`mesh_<n>.stmesh`, `mesh_<n>_report.json`).
    #[command(after_long_help = AFTER_HELP)]
    Mesh(CommonArgs),
    /// Solve once; write solution.csv, u.svg, p.svg, z_f.svg and summary.jsonl.
    #[command(after_long_help = AFTER_HELP)]
    Solve(CommonArgs),
    /// Refinement study; write convergence.csv, levels.jsonl and optionally convergence.svg.
    #[command(after_long_help = AFTER_HELP)]
    Convergence(ConvergenceArgs),
    /// Run the invariant checks on the configured problem.
    #[command(after_long_help = AFTER_HELP)]
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Problem preset: example1-static or example1-moving.
    #[arg(long)]
    pub preset: Option<String>,
    /// Config file (see --help for the format).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Time layer counts, comma-separated.
    #[arg(long)]
    pub layers: Option<String>,
    /// Adjoint trial/test space: U_h or W_h.
    #[arg(long = "adjoint-space")]
    pub adjoint_space: Option<String>,
    /// Quadrature subdivision level k (4^k sub-triangles).
    #[arg(long = "quad-subdiv")]
    pub quad_subdiv: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Disable threading (bitwise-reproducible outputs).
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Error mode: exact or reference.
    #[arg(long)]
    pub mode: Option<String>,
    /// Layers of the reference solution in reference mode.
    #[arg(long = "reference-layers")]
    pub reference_layers: Option<usize>,
    /// Also write a log-log plot.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Geometry => 2,
        ErrorKind::Solver => 3,
        ErrorKind::Io => 4,
    }
}


fn resolve(common: &CommonArgs, extra: Overrides) -> Result<RunConfig> {
    let file = match &common.config {
        Some(path) => ConfigFile::read(path).map_err(|e| match e {
            Error::Io(io) => Error::Io(std::io::Error::new(
                io.kind(),
                format!("cannot read config {}: {io}", path.display()),
            )),
            other => other,
        })?,
        None => ConfigFile::default(),
    };
    let has_problem = file.entries.iter().any(|e| e.section == "problem");
    let preset = common
        .preset
        .clone()
        .or_else(|| (!has_problem).then(|| "example1-static".to_string()));
    let overrides = Overrides {
        preset,
        layers: common.layers.as_deref().map(config::parse_layers).transpose()?,
        adjoint_space: common
            .adjoint_space
            .as_deref()
            .map(config::parse_adjoint_space)
            .transpose()?,
        quad_subdiv: common.quad_subdiv,
        out: common.out.clone(),
        serial: common.serial,
        ..extra
    };
    RunConfig::resolve(&file, &overrides)
}

/// Execute a parsed command line, printing results to stdout.
pub fn run(cli: Cli) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Mesh(args) => {
            let cfg = resolve(&args, Overrides::default())?;
            let outcomes = commands::cmd_mesh(&cfg)?;
            for o in &outcomes {
                let r = &o.report;
                writeln!(
                    stdout,
                    "{}: {} vertices, {} triangles, h = {:.4e}, straddling {}, orientation {}, labels {}, conformity {}, interface residual {:.2e}, quasi-uniformity {:.3}",
                    o.path.display(),
                    r.n_vertices,
                    r.n_triangles,
                    r.h,
                    r.straddle_count,
                    r.orientation_violations,
                    r.label_mismatches,
                    r.conformity_violations,
                    r.max_interface_residual,
                    r.quasi_uniformity_ratio
                )?;
            }
            commands::require_valid(&outcomes, cfg.rho_max)
        }
        Command::Solve(args) => {
            let cfg = resolve(&args, Overrides::default())?;
            let s = commands::cmd_solve(&cfg)?;
            writeln!(stdout, "{}", serde_json::to_string_pretty(&s).map_err(|e| Error::Io(e.into()))?)?;
            Ok(())
        }
        Command::Convergence(args) => {
            let extra = Overrides {
                mode: args.mode.as_deref().map(config::parse_mode).transpose()?,
                reference_layers: args.reference_layers,
                plot: args.plot,
                ..Overrides::default()
            };
            let cfg = resolve(&args.common, extra)?;
            if cfg.mode == ModeName::Reference {
                eprintln!("solving the {}-layer reference ...", cfg.reference_layers);
            }
            let outcome = commands::cmd_convergence(&cfg)?;
            write!(stdout, "{}", outcome.report.to_csv_string())?;
            Ok(())
        }
        Command::Selftest(args) => {
            let extra = Overrides {
                seed: args.seed,
                ..Overrides::default()
            };
            let cfg = resolve(&args.common, extra)?;
            let checks = commands::cmd_selftest(&cfg)?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                writeln!(stdout, "[{tag}] {} ({}; {:.2}s)", c.name, c.detail, c.seconds)?;
            }
            if failed > 0 {
                return Err(Error::Solver(format!("{failed} self-test check(s) failed")));
            }
            Ok(())
        }
    }
}
