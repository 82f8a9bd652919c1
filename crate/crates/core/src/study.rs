//! Refinement studies: solve on a sequence of meshes and tabulate errors.

use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::mesh::build_mesh;
use crate::metrics::{energy_error, reference_error, ConvergenceReport, MetricOptions, NodalPair};
use crate::problem::ProblemSpec;
use crate::solver::{solve, DiscreteSolution, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMode {
    /// Against the closed-form state and adjoint.
    Exact,
    /// Against a discrete solution with this many time layers.
    Reference { layers: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub solver: SolverOptions,
    pub metric: MetricOptions,
    pub mode: ErrorMode,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            metric: MetricOptions::default(),
            mode: ErrorMode::Exact,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LevelResult {
    pub layers: usize,
    pub vertices: usize,
    pub dofs: usize,
    pub h: f64,
    pub error: f64,
    pub residual: f64,
    pub factor_nnz: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub report: ConvergenceReport,
    pub levels: Vec<LevelResult>,
    pub solutions: Vec<DiscreteSolution>,
}

/// Layer counts must be at least 2 and strictly increasing.
pub fn check_layers(layers: &[usize]) -> Result<()> {
    if layers.is_empty() {
        return Err(Error::Config("no refinement levels given".into()));
    }
    if let Some(&n) = layers.iter().find(|&&n| n < 2) {
        return Err(Error::Config(format!("layer counts must be at least 2, got {n}")));
    }
    if layers.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!(
            "layer counts must increase strictly, got {layers:?}"
        )));
    }
    Ok(())
}

pub fn run_convergence(spec: &ProblemSpec, layers: &[usize], options: &StudyOptions) -> Result<StudyOutcome> {
    check_layers(layers)?;
    let reference = match options.mode {
        ErrorMode::Exact => {
            if spec.exact.is_none() {
                return Err(Error::Config(format!(
                    "problem `{}` has no exact solution; use reference mode",
                    spec.name
                )));
            }
            None
        }
        ErrorMode::Reference { layers: r } => {
            let finest = *layers.last().expect("non-empty");
            if r <= finest {
                return Err(Error::Config(format!(
                    "reference mesh ({r} layers) must be finer than the finest level ({finest})"
                )));
            }
            let mesh = Arc::new(build_mesh(spec, r).map_err(|e| e.at_level(r))?);
            Some(solve(&mesh, spec, &options.solver).map_err(|e| e.at_level(r))?.1)
        }
    };

    let mut levels = Vec::with_capacity(layers.len());
    let mut solutions = Vec::with_capacity(layers.len());
    for &n in layers {
        let start = Instant::now();
        let mesh = Arc::new(build_mesh(spec, n).map_err(|e| e.at_level(n))?);
        let (_, solution) = solve(&mesh, spec, &options.solver).map_err(|e| e.at_level(n))?;
        let error = match &reference {
            None => energy_error(spec, &solution, &options.metric),
            Some(r) => reference_error(NodalPair::from(&solution), NodalPair::from(r), &options.metric),
        }
        .map_err(|e| e.at_level(n))?;
        levels.push(LevelResult {
            layers: n,
            vertices: mesh.n_vertices(),
            dofs: solution.dofs,
            h: mesh.h,
            error,
            residual: solution.residual,
            factor_nnz: solution.factor_nnz,
            seconds: start.elapsed().as_secs_f64(),
        });
        solutions.push(solution);
    }

    let triples: Vec<(usize, f64, f64)> = levels.iter().map(|l| (l.dofs, l.h, l.error)).collect();
    let report = ConvergenceReport::new(
        spec.name.clone(),
        options.solver.adjoint_space.label(),
        options.metric.quad_subdiv,
        match options.mode {
            ErrorMode::Exact => "E",
            ErrorMode::Reference { .. } => "E_r",
        },
        &triples,
    )?;
    Ok(StudyOutcome {
        report,
        levels,
        solutions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Example1Variant;

    #[test]
    fn layer_lists_are_checked() {
        assert!(check_layers(&[4, 8]).is_ok());
        assert!(check_layers(&[]).is_err());
        assert!(check_layers(&[1, 4]).is_err());
        assert!(check_layers(&[8, 4]).is_err());
        assert!(check_layers(&[4, 4]).is_err());
    }

    #[test]
    fn reference_must_be_finer() {
        let spec = ProblemSpec::example1(Example1Variant::Static);
        let options = StudyOptions {
            mode: ErrorMode::Reference { layers: 8 },
            ..StudyOptions::default()
        };
        assert!(matches!(
            run_convergence(&spec, &[4, 8], &options),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn small_exact_study_has_orders_from_second_row() {
        let spec = ProblemSpec::example1(Example1Variant::Moving);
        let out = run_convergence(&spec, &[4, 8], &StudyOptions::default()).unwrap();
        assert_eq!(out.report.rows.len(), 2);
        assert!(out.report.rows[0].order.is_none());
        assert!(out.report.rows[1].order.is_some());
        assert!(out.report.rows[0].h > out.report.rows[1].h);
    }

    #[test]
    fn level_failures_name_the_level() {
        let mut spec = ProblemSpec::example1(Example1Variant::Static);
        spec.offsets = (0.6, 0.4);
        let err = run_convergence(&spec, &[4, 8], &StudyOptions::default()).unwrap_err();
        assert!(matches!(err, Error::AtLevel { layers: 4, .. }));
        assert_eq!(err.kind(), crate::ErrorKind::Geometry);
        assert!(err.to_string().contains("4 layers"));
    }
}
