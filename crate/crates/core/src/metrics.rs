//! Seminorms, error functionals and convergence tables.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem::{
    assemble_time_weighted_load, map_elements, pairwise_sum, AssemblyOptions, P1Element,
    QuadratureRule,
};
use crate::mesh::{PointLocator, SpaceTimeMesh};
use crate::problem::{ExactSolution, ProblemSpec};
use crate::solver::{DiscreteSolution, RieszSolver, RIESZ_TOLERANCE};

/// Which gradient enters the error functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub enum GradientKind {
    /// `d_x` only.
    #[default]
    Spatial,
    /// `(d_x, d_t)`.
    SpaceTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricOptions {
    pub quad_subdiv: usize,
    pub gradient: GradientKind,
    pub parallel: bool,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            quad_subdiv: 1,
            gradient: GradientKind::Spatial,
            parallel: true,
        }
    }
}

impl MetricOptions {
    fn rule(&self) -> QuadratureRule {
        QuadratureRule::degree5().subdivided(self.quad_subdiv)
    }
}

/// `|||w|||^2 = sum_K kappa_K |d_x w|^2 |K|`, exact for P1.
pub fn triple_norm_squared(mesh: &SpaceTimeMesh, spec: &ProblemSpec, w: &[f64], parallel: bool) -> f64 {
    let terms = map_elements(mesh, parallel, |k| {
        let e = P1Element::new(mesh, k);
        let gx = e.gradient_of(mesh, k, w)[0];
        spec.kappa(mesh.triangles[k].region) * gx * gx * e.area
    });
    pairwise_sum(&terms)
}

pub fn triple_norm(mesh: &SpaceTimeMesh, spec: &ProblemSpec, w: &[f64]) -> f64 {
    triple_norm_squared(mesh, spec, w, true).sqrt()
}

/// Pieces of one `|||.|||_*` evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct StarNorm {
    pub value: f64,
    pub triple: f64,
    /// `|||z_h(d_t w)|||`.
    pub lift: f64,
    /// Relative gap of the discrete Riesz identity `r^T z = z^T K z`.
    pub identity_gap: f64,
}

/// `|||w|||_* = (|||w|||^2 + |||z_h(d_t w)|||^2)^(1/2)` using a factored Riesz
/// operator. Fails if the discrete Riesz identity is violated beyond
/// [`RIESZ_TOLERANCE`].
pub fn star_norm_with(
    mesh: &SpaceTimeMesh,
    spec: &ProblemSpec,
    riesz: &RieszSolver,
    w: &[f64],
    parallel: bool,
) -> Result<StarNorm> {
    let options = AssemblyOptions {
        parallel,
        ..AssemblyOptions::default()
    };
    let r = assemble_time_weighted_load(mesh, &riesz.dofs, w, &options);
    let z = riesz.solve(&r)?;
    let identity_gap = riesz.identity_gap(&r, &z)?;
    if !(identity_gap <= RIESZ_TOLERANCE) {
        return Err(Error::Solver(format!(
            "discrete Riesz identity violated: relative gap {identity_gap:.3e}"
        )));
    }
    let triple = triple_norm_squared(mesh, spec, w, parallel).sqrt();
    let lift = triple_norm_squared(mesh, spec, &z, parallel).sqrt();
    Ok(StarNorm {
        value: triple.hypot(lift),
        triple,
        lift,
        identity_gap,
    })
}

pub fn star_norm(mesh: &SpaceTimeMesh, spec: &ProblemSpec, w: &[f64]) -> Result<StarNorm> {
    let riesz = RieszSolver::new(mesh, spec, &AssemblyOptions::default())?;
    star_norm_with(mesh, spec, &riesz, w, true)
}

fn squared_gradient_gap(gradient: GradientKind, exact: [f64; 2], discrete: [f64; 2]) -> f64 {
    let dx = exact[0] - discrete[0];
    match gradient {
        GradientKind::Spatial => dx * dx,
        GradientKind::SpaceTime => {
            let dt = exact[1] - discrete[1];
            dx * dx + dt * dt
        }
    }
}

/// Error functional against a closed-form pair, for arbitrary nodal fields.
/// Exact branches are chosen by the true subdomain of each quadrature point.
pub fn energy_error_fields(
    mesh: &SpaceTimeMesh,
    spec: &ProblemSpec,
    exact: &ExactSolution,
    u: &[f64],
    p: &[f64],
    options: &MetricOptions,
) -> f64 {
    let rule = options.rule();
    let terms = map_elements(mesh, options.parallel, |k| {
        let e = P1Element::new(mesh, k);
        let gu = e.gradient_of(mesh, k, u);
        let gp = e.gradient_of(mesh, k, p);
        let mut acc = 0.0;
        for ([x, t], _, w) in rule.map(&e.corners) {
            let branch = spec.subdomain_at(x, t);
            let ju = exact.state.jet(branch, x, t);
            let jp = exact.adjoint.jet(branch, x, t);
            acc += w
                * (squared_gradient_gap(options.gradient, [ju.dx, ju.dt], gu)
                    + squared_gradient_gap(options.gradient, [jp.dx, jp.dt], gp));
        }
        acc * e.area
    });
    pairwise_sum(&terms).sqrt()
}

/// Error of a discrete solution against the exact pair of `spec`.
pub fn energy_error(spec: &ProblemSpec, solution: &DiscreteSolution, options: &MetricOptions) -> Result<f64> {
    let exact = spec.exact.as_ref().ok_or_else(|| {
        Error::Config(format!("problem `{}` has no exact state and adjoint", spec.name))
    })?;
    Ok(energy_error_fields(
        &solution.mesh,
        spec,
        exact,
        &solution.u,
        &solution.p,
        options,
    ))
}

/// Nodal state and adjoint on a mesh.
#[derive(Debug, Clone, Copy)]
pub struct NodalPair<'a> {
    pub mesh: &'a SpaceTimeMesh,
    pub u: &'a [f64],
    pub p: &'a [f64],
}

impl<'a> From<&'a DiscreteSolution> for NodalPair<'a> {
    fn from(s: &'a DiscreteSolution) -> Self {
        NodalPair {
            mesh: &s.mesh,
            u: &s.u,
            p: &s.p,
        }
    }
}

/// Error against a reference solution on a finer mesh. Quadrature runs on the
/// coarse mesh; reference gradients come from the fine triangle containing
/// each quadrature point.
pub fn reference_error(coarse: NodalPair<'_>, reference: NodalPair<'_>, options: &MetricOptions) -> Result<f64> {
    let locator = PointLocator::new(reference.mesh);
    let rule = options.rule();
    let mesh = coarse.mesh;
    let fine = reference.mesh;
    let terms: Vec<Result<f64>> = map_elements(mesh, options.parallel, |k| {
        let e = P1Element::new(mesh, k);
        let gu = e.gradient_of(mesh, k, coarse.u);
        let gp = e.gradient_of(mesh, k, coarse.p);
        let mut acc = 0.0;
        for ([x, t], _, w) in rule.map(&e.corners) {
            let (kf, _) = locator.locate(x, t)?;
            let ef = P1Element::new(fine, kf);
            let ru = ef.gradient_of(fine, kf, reference.u);
            let rp = ef.gradient_of(fine, kf, reference.p);
            acc += w
                * (squared_gradient_gap(options.gradient, ru, gu)
                    + squared_gradient_gap(options.gradient, rp, gp));
        }
        Ok(acc * e.area)
    });
    let terms: Vec<f64> = terms.into_iter().collect::<Result<_>>()?;
    Ok(pairwise_sum(&terms).sqrt())
}

/// Experimental orders `log(e_{k-1}/e_k) / log(h_{k-1}/h_k)`.
pub fn compute_eoc(levels: &[(f64, f64)]) -> Result<Vec<f64>> {
    if levels.len() < 2 {
        return Err(Error::Study(format!(
            "at least two refinement levels are needed, got {}",
            levels.len()
        )));
    }
    levels
        .windows(2)
        .map(|w| {
            let ((h0, e0), (h1, e1)) = (w[0], w[1]);
            if !(h1 < h0) {
                return Err(Error::Study(format!(
                    "mesh sizes must decrease strictly, got h = {h0} followed by {h1}"
                )));
            }
            Ok((e0 / e1).ln() / (h0 / h1).ln())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConvergenceRow {
    pub dofs: usize,
    pub h: f64,
    pub error: f64,
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConvergenceReport {
    pub preset: String,
    pub adjoint_space: String,
    pub quad_subdiv: usize,
    /// `E` for the exact-solution error, `E_r` for the reference error.
    pub metric: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// Rows from `(dofs, h, error)` triples ordered by decreasing `h`.
    pub fn new(
        preset: impl Into<String>,
        adjoint_space: impl Into<String>,
        quad_subdiv: usize,
        metric: impl Into<String>,
        levels: &[(usize, f64, f64)],
    ) -> Result<Self> {
        let orders = if levels.len() >= 2 {
            let pairs: Vec<(f64, f64)> = levels.iter().map(|&(_, h, e)| (h, e)).collect();
            compute_eoc(&pairs)?
        } else {
            Vec::new()
        };
        let rows = levels
            .iter()
            .enumerate()
            .map(|(k, &(dofs, h, error))| ConvergenceRow {
                dofs,
                h,
                error,
                order: k.checked_sub(1).map(|j| orders[j]),
            })
            .collect();
        Ok(Self {
            preset: preset.into(),
            adjoint_space: adjoint_space.into(),
            quad_subdiv,
            metric: metric.into(),
            rows,
        })
    }

    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order).collect()
    }

    pub fn write_csv_to(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["dofs", "h", "error", "order"])?;
        for row in &self.rows {
            w.write_record(&[
                row.dofs.to_string(),
                format!("{:.6e}", row.h),
                format!("{:.6e}", row.error),
                row.order.map_or(String::new(), |o| format!("{o:.4}")),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv_to(std::io::BufWriter::new(file))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }
}

/// Rows of a table written by [`ConvergenceReport::write_csv_to`].
pub fn read_convergence_rows(input: impl Read) -> Result<Vec<ConvergenceRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != ["dofs", "h", "error", "order"] {
        return Err(Error::Parse {
            line: 1,
            section: "convergence".into(),
            message: format!("unexpected header {header:?}"),
        });
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
