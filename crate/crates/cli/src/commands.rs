//! Subcommand bodies. Each writes its artifacts under `RunConfig::out` and
//! returns a summary for the caller to print.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use stcontrol::fem::{assemble_state_matrix, DofMap, Space};
use stcontrol::mesh::{build_mesh, validate_mesh, write_mesh, SpaceTimeMesh, ValidationReport};
use stcontrol::metrics::{energy_error, star_norm_with, triple_norm_squared};
use stcontrol::problem::{derive_desired_state, DesiredState, ExactSolution, ProblemSpec};
use stcontrol::solver::{
    control_consistency, recover_control_riesz, solve, write_solution_csv, RieszSolver,
};
use stcontrol::study::{run_convergence, LevelResult, StudyOutcome};
use stcontrol::{Error, Result};

use crate::config::RunConfig;
use crate::svg;

pub const DEFAULT_SINGLE_LAYERS: usize = 30;
pub const DEFAULT_STUDY_LAYERS: [usize; 4] = [15, 30, 60, 120];

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json_lines<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut text = String::new();
    for item in items {
        text.push_str(&serde_json::to_string(item).map_err(|e| Error::Io(e.into()))?);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

fn checked_mesh(spec: &ProblemSpec, n: usize) -> Result<(SpaceTimeMesh, ValidationReport)> {
    let mesh = build_mesh(spec, n)?;
    let report = validate_mesh(&mesh, spec);
    Ok((mesh, report))
}

fn fail_invalid(n: usize, report: &ValidationReport, rho_max: f64) -> Result<()> {
    let failures = report.failures(rho_max);
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(failures.join("; ")).at_level(n))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshOutcome {
    pub layers: usize,
    pub path: PathBuf,
    pub report: ValidationReport,
}

/// Build, validate and write one mesh per requested layer count. Files are
/// written even for invalid meshes; see [`require_valid`].
pub fn cmd_mesh(cfg: &RunConfig) -> Result<Vec<MeshOutcome>> {
    prepare_out(&cfg.out)?;
    let mut outcomes = Vec::new();
    for n in cfg.layers_or(&[DEFAULT_SINGLE_LAYERS]) {
        let (mesh, report) = checked_mesh(&cfg.spec, n).map_err(|e| e.at_level(n))?;
        let path = cfg.out.join(format!("mesh_{n}.stmesh"));
        write_mesh(&mesh, &path)?;
        let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.into()))?;
        fs::write(cfg.out.join(format!("mesh_{n}_report.json")), json + "\n")?;
        outcomes.push(MeshOutcome {
            layers: n,
            path,
            report,
        });
    }
    Ok(outcomes)
}

/// First validation failure among `outcomes`, as a geometry error.
pub fn require_valid(outcomes: &[MeshOutcome], rho_max: f64) -> Result<()> {
    outcomes
        .iter()
        .try_for_each(|o| fail_invalid(o.layers, &o.report, rho_max))
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub problem: String,
    pub layers: usize,
    pub vertices: usize,
    pub dofs: usize,
    pub h: f64,
    pub adjoint_space: &'static str,
    pub eta: f64,
    /// Error against the closed-form pair, when one is known.
    pub error: Option<f64>,
    pub triple_u: f64,
    pub star_u: f64,
    pub triple_p: f64,
    pub residual: f64,
    pub control_consistency: f64,
    pub riesz_identity_gap: f64,
}

/// Solve on one mesh and write `solution.csv`, `u.svg`, `p.svg`, `z_f.svg`
/// and `summary.jsonl`.
pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveSummary> {
    let layers = cfg.layers_or(&[DEFAULT_SINGLE_LAYERS]);
    let n = match layers[..] {
        [n] => n,
        _ => {
            return Err(Error::Config(format!(
                "solve takes a single layer count, got {layers:?}"
            )))
        }
    };
    prepare_out(&cfg.out)?;
    let spec = &cfg.spec;
    let (mesh, report) = checked_mesh(spec, n)?;
    fail_invalid(n, &report, cfg.rho_max)?;
    let mesh = Arc::new(mesh);
    let (system, solution) = solve(&mesh, spec, &cfg.solver())?;

    let error = match spec.exact {
        Some(_) => Some(energy_error(spec, &solution, &cfg.metric())?),
        None => None,
    };
    let parallel = !cfg.serial;
    let riesz = RieszSolver::new(&mesh, spec, &cfg.assembly())?;
    let star = star_norm_with(&mesh, spec, &riesz, &solution.u, parallel)?;
    let triple_p = triple_norm_squared(&mesh, spec, &solution.p, parallel).sqrt();
    let consistency = control_consistency(&system, &solution)?;

    write_solution_csv(&solution, cfg.out.join("solution.csv"))?;
    let z = recover_control_riesz(&solution);
    for (name, values) in [("u", &solution.u), ("p", &solution.p), ("z_f", &z)] {
        let title = format!("{name}  ({}, {n} layers)", spec.name);
        fs::write(cfg.out.join(format!("{name}.svg")), svg::field_svg(&mesh, values, &title))?;
    }

    let summary = SolveSummary {
        problem: spec.name.clone(),
        layers: n,
        vertices: mesh.n_vertices(),
        dofs: solution.dofs,
        h: mesh.h,
        adjoint_space: cfg.adjoint_space.label(),
        eta: spec.eta,
        error,
        triple_u: star.triple,
        star_u: star.value,
        triple_p,
        residual: solution.residual,
        control_consistency: consistency,
        riesz_identity_gap: star.identity_gap,
    };
    write_json_lines(&cfg.out.join("summary.jsonl"), std::slice::from_ref(&summary))?;
    Ok(summary)
}

/// Run a refinement study and write `convergence.csv`, `levels.jsonl` and,
/// with `plot`, `convergence.svg`.
pub fn cmd_convergence(cfg: &RunConfig) -> Result<StudyOutcome> {
    let layers = cfg.layers_or(&DEFAULT_STUDY_LAYERS);
    if layers.len() < 3 {
        return Err(Error::Config(format!(
            "a convergence study needs at least three levels, got {layers:?}"
        )));
    }
    prepare_out(&cfg.out)?;
    for &n in &layers {
        let (_, report) = checked_mesh(&cfg.spec, n).map_err(|e| e.at_level(n))?;
        fail_invalid(n, &report, cfg.rho_max)?;
    }
    let outcome = run_convergence(&cfg.spec, &layers, &cfg.study())?;
    outcome.report.write_csv(cfg.out.join("convergence.csv"))?;
    let levels: Vec<LevelRecord> = outcome.levels.iter().map(LevelRecord::from).collect();
    write_json_lines(&cfg.out.join("levels.jsonl"), &levels)?;
    if cfg.plot {
        fs::write(cfg.out.join("convergence.svg"), svg::convergence_svg(&outcome.report))?;
    }
    Ok(outcome)
}

/// Per-level record without wall-clock time, so repeated runs give identical files.
#[derive(Debug, Clone, Serialize)]
struct LevelRecord {
    layers: usize,
    vertices: usize,
    dofs: usize,
    h: f64,
    error: f64,
    residual: f64,
    factor_nnz: usize,
}

impl From<&LevelResult> for LevelRecord {
    fn from(l: &LevelResult) -> Self {
        Self {
            layers: l.layers,
            vertices: l.vertices,
            dofs: l.dofs,
            h: l.h,
            error: l.error,
            residual: l.residual,
            factor_nnz: l.factor_nnz,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn check(name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let start = Instant::now();
    let (passed, detail) = match body() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Check {
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn random_vector(n: usize, dofs: &DofMap, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    dofs.apply(&mut v);
    v
}

/// Quick invariant checks on the configured problem, driven by `seed`.
pub fn cmd_selftest(cfg: &RunConfig) -> Result<Vec<Check>> {
    let spec = &cfg.spec;
    let assembly = cfg.assembly();
    let parallel = !cfg.serial;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();

    checks.push(check("mesh validity, 2..=60 layers", || {
        for n in 2..=60 {
            let (_, report) = checked_mesh(spec, n)?;
            if !report.is_valid(cfg.rho_max) {
                return Ok((false, format!("{n} layers: {}", report.failures(cfg.rho_max).join("; "))));
            }
        }
        Ok((true, "59 meshes valid".into()))
    }));

    let point_seed: u64 = rng.gen();
    checks.push(check("desired state vs finite differences", || {
        let Some(exact) = spec.exact.as_ref() else {
            return Ok((true, "skipped: no exact solution".into()));
        };
        if !matches!(spec.desired, DesiredState::DerivedFromExact) {
            return Ok((true, "skipped: desired state is not derived".into()));
        }
        let desired = derive_desired_state(spec)?;
        let mut rng = ChaCha8Rng::seed_from_u64(point_seed);
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let x = rng.gen_range(spec.x_min..spec.x_max);
            let t = rng.gen_range(1e-3 * spec.final_time..(1.0 - 1e-3) * spec.final_time);
            let want = finite_difference_desired(spec, exact, x, t);
            let got = desired(x, t);
            worst = worst.max((got - want).abs() / want.abs().max(f64::MIN_POSITIVE));
        }
        Ok((worst <= 1e-6, format!("max relative deviation {worst:.2e}")))
    }));

    let coercivity_seed: u64 = rng.gen();
    checks.push(check("coercivity u^T A u >= |||u|||^2", || {
        let mesh = build_mesh(spec, 8)?;
        let dofs = DofMap::new(&mesh, Space::U);
        let a = assemble_state_matrix(&mesh, spec, &dofs, &assembly);
        let mut rng = ChaCha8Rng::seed_from_u64(coercivity_seed);
        let mut worst = f64::INFINITY;
        for _ in 0..50 {
            let u = random_vector(mesh.n_vertices(), &dofs, &mut rng);
            let form = a.quadratic_form(&u, &u)?;
            let energy = triple_norm_squared(&mesh, spec, &u, parallel);
            worst = worst.min((form - energy) / energy);
        }
        Ok((worst >= -1e-10, format!("min (uAu - |||u|||^2)/|||u|||^2 = {worst:.3e}")))
    }));

    let riesz_seed: u64 = rng.gen();
    checks.push(check("discrete Riesz identity", || {
        let mesh = build_mesh(spec, 12)?;
        let riesz = RieszSolver::new(&mesh, spec, &assembly)?;
        let all = DofMap::new(&mesh, Space::Unconstrained);
        let mut rng = ChaCha8Rng::seed_from_u64(riesz_seed);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let w = random_vector(mesh.n_vertices(), &all, &mut rng);
            worst = worst.max(star_norm_with(&mesh, spec, &riesz, &w, parallel)?.identity_gap);
        }
        Ok((worst <= 1e-10, format!("max relative gap {worst:.2e}")))
    }));

    checks.push(check("control recovery consistency", || {
        let n = cfg.layers.as_ref().and_then(|l| l.first().copied()).unwrap_or(DEFAULT_SINGLE_LAYERS);
        let mesh = Arc::new(build_mesh(spec, n)?);
        let (system, solution) = solve(&mesh, spec, &cfg.solver())?;
        let c = control_consistency(&system, &solution)?;
        Ok((c <= 1e-8, format!("{n} layers: relative mismatch {c:.2e}")))
    }));

    checks.push(check("zero data gives zero solution", || {
        let mut zero = spec.clone();
        zero.desired = DesiredState::Zero;
        zero.exact = Some(ExactSolution::zero());
        let mesh = Arc::new(build_mesh(&zero, 10)?);
        let (_, solution) = solve(&mesh, &zero, &cfg.solver())?;
        let nonzero = solution.u.iter().chain(&solution.p).filter(|&&v| v != 0.0).count();
        Ok((
            nonzero == 0 && solution.residual == 0.0,
            format!("{nonzero} nonzero entries, residual {:.1e}", solution.residual),
        ))
    }));

    Ok(checks)
}

/// `u* + p_t + v p_x + kappa p_xx` with Richardson-extrapolated central differences
/// of the adjoint values on the branch of the true subdomain.
fn finite_difference_desired(spec: &ProblemSpec, exact: &ExactSolution, x: f64, t: f64) -> f64 {
    let branch = spec.subdomain_at(x, t);
    let p = |x: f64, t: f64| exact.adjoint.value(branch, x, t);
    let h = 1e-5;
    let richardson = |d: &dyn Fn(f64) -> f64| (4.0 * d(h / 2.0) - d(h)) / 3.0;
    let p_t = richardson(&|h| (p(x, t + h) - p(x, t - h)) / (2.0 * h));
    let p_x = richardson(&|h| (p(x + h, t) - p(x - h, t)) / (2.0 * h));
    let p_xx = richardson(&|h| (p(x + h, t) - 2.0 * p(x, t) + p(x - h, t)) / (h * h));
    exact.state.value(branch, x, t) + p_t + spec.velocity.value(t) * p_x + spec.kappa(branch) * p_xx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ConfigFile, Overrides, RunConfig};

    fn config(text: &str, out: &Path) -> RunConfig {
        let cli = Overrides {
            out: Some(out.to_path_buf()),
            serial: true,
            ..Overrides::default()
        };
        RunConfig::resolve(&ConfigFile::parse(text).unwrap(), &cli).unwrap()
    }

    #[test]
    fn mesh_writes_file_and_report() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config("[problem]\npreset = example1-static\n[discretization]\nlayers = 8\n", dir.path());
        let out = cmd_mesh(&cfg).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].report.straddle_count, 0);
        assert_eq!(out[0].report.conformity_violations, 0);
        let back = stcontrol::mesh::read_mesh(&out[0].path).unwrap();
        assert_eq!(back.n_vertices(), out[0].report.n_vertices);
        assert!(dir.path().join("mesh_8_report.json").exists());
        assert!(require_valid(&out, cfg.rho_max).is_ok());
    }

    #[test]
    fn zero_data_solve_is_zero() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config("[discretization]\nlayers = 6\n", dir.path());
        let s = cmd_solve(&cfg).unwrap();
        assert_eq!(s.error, Some(0.0));
        assert_eq!((s.triple_u, s.star_u, s.triple_p, s.residual), (0.0, 0.0, 0.0, 0.0));
        for f in ["solution.csv", "u.svg", "p.svg", "z_f.svg", "summary.jsonl"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let line = fs::read_to_string(dir.path().join("summary.jsonl")).unwrap();
        let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(v["layers"], 6);
    }

    #[test]
    fn solve_rejects_several_levels() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config("[discretization]\nlayers = 4, 8\n", dir.path());
        assert_eq!(cmd_solve(&cfg).unwrap_err().kind(), stcontrol::ErrorKind::Usage);
    }

    #[test]
    fn convergence_needs_three_levels() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config("[problem]\npreset = example1-static\n[discretization]\nlayers = 4, 8\n", dir.path());
        assert_eq!(cmd_convergence(&cfg).unwrap_err().kind(), stcontrol::ErrorKind::Usage);
    }

    #[test]
    fn serial_convergence_csv_is_reproducible() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let text = "[problem]\npreset = example1-moving\n[discretization]\nlayers = 4, 6, 8\n[run]\nplot = true\n";
        cmd_convergence(&config(text, a.path())).unwrap();
        cmd_convergence(&config(text, b.path())).unwrap();
        let read = |d: &Path| fs::read(d.join("convergence.csv")).unwrap();
        assert_eq!(read(a.path()), read(b.path()));
        let rows = stcontrol::metrics::read_convergence_rows(&read(a.path())[..]).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(a.path().join("convergence.svg").exists());
    }

    #[test]
    fn finite_difference_helper_matches_derivation() {
        let spec = ProblemSpec::example1(stcontrol::problem::Example1Variant::Moving);
        let desired = derive_desired_state(&spec).unwrap();
        let exact = spec.exact.as_ref().unwrap();
        let fd = finite_difference_desired(&spec, exact, 0.37, 0.61);
        assert!((fd - desired(0.37, 0.61)).abs() <= 1e-6 * fd.abs());
    }
}
