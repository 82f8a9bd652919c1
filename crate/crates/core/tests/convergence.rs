//! Approximation and quadrature behaviour under refinement.

use std::f64::consts::PI;
use std::sync::Arc;

use stcontrol::fem::{assemble_load, lagrange_interpolate, AssemblyOptions, DofMap, Space};
use stcontrol::mesh::build_mesh;
use stcontrol::metrics::{
    compute_eoc, energy_error, energy_error_fields, reference_error, MetricOptions, NodalPair,
};
use stcontrol::problem::{
    derive_desired_state, Example1Variant, ExactSolution, Jet, PiecewiseField, ProblemSpec, Subdomain,
};
use stcontrol::solver::{solve, SolverOptions};

#[derive(Debug)]
struct SineProduct;

impl PiecewiseField for SineProduct {
    fn jet(&self, _branch: Subdomain, x: f64, t: f64) -> Jet {
        let (sx, cx) = (PI * x).sin_cos();
        let (st, ct) = (PI * t).sin_cos();
        Jet {
            value: sx * st,
            dx: PI * cx * st,
            dt: PI * sx * ct,
            dxx: -PI * PI * sx * st,
            dtt: -PI * PI * sx * st,
            dxt: PI * PI * cx * ct,
        }
    }
}

fn interpolation_errors(spec: &ProblemSpec, exact: &ExactSolution, layers: &[usize]) -> Vec<(f64, f64)> {
    layers
        .iter()
        .map(|&n| {
            let mesh = build_mesh(spec, n).unwrap();
            let state = exact.state.clone();
            let u = lagrange_interpolate(&mesh, |x, t| state.value(spec.subdomain_at(x, t), x, t));
            let zero = vec![0.0; mesh.n_vertices()];
            let e = energy_error_fields(&mesh, spec, exact, &u, &zero, &MetricOptions::default());
            (mesh.h, e)
        })
        .collect()
}

#[test]
fn smooth_interpolant_converges_at_first_order() {
    let spec = ProblemSpec::example1(Example1Variant::Moving);
    let exact = ExactSolution {
        state: Arc::new(SineProduct),
        adjoint: Arc::new(stcontrol::problem::ZeroField),
    };
    let errors = interpolation_errors(&spec, &exact, &[8, 16, 32]);
    for order in compute_eoc(&errors).unwrap() {
        assert!(order >= 0.9, "order {order}, errors {errors:?}");
    }
}

#[test]
fn manufactured_state_interpolant_converges() {
    for variant in [Example1Variant::Static, Example1Variant::Moving] {
        let spec = ProblemSpec::example1(variant);
        let exact = spec.exact.clone().unwrap();
        let exact = ExactSolution {
            state: exact.state,
            adjoint: Arc::new(stcontrol::problem::ZeroField),
        };
        let errors = interpolation_errors(&spec, &exact, &[30, 60, 120]);
        for order in compute_eoc(&errors).unwrap() {
            assert!(order >= 0.8, "{variant:?}: order {order}, errors {errors:?}");
        }
    }
}

#[test]
fn linear_fields_are_interpolated_exactly() {
    #[derive(Debug)]
    struct Plane;
    impl PiecewiseField for Plane {
        fn jet(&self, _b: Subdomain, x: f64, t: f64) -> Jet {
            Jet {
                value: 2.0 * x - 3.0 * t + 1.0,
                dx: 2.0,
                dt: -3.0,
                ..Jet::default()
            }
        }
    }
    let spec = ProblemSpec::example1(Example1Variant::Moving);
    let exact = ExactSolution {
        state: Arc::new(Plane),
        adjoint: Arc::new(Plane),
    };
    let mesh = build_mesh(&spec, 7).unwrap();
    let w = lagrange_interpolate(&mesh, |x, t| 2.0 * x - 3.0 * t + 1.0);
    let e = energy_error_fields(&mesh, &spec, &exact, &w, &w, &MetricOptions::default());
    assert!(e < 1e-12, "{e}");
}

#[test]
fn load_vector_is_quadrature_converged() {
    let spec = ProblemSpec::example1(Example1Variant::Static);
    let mesh = build_mesh(&spec, 30).unwrap();
    let dofs = DofMap::new(&mesh, Space::U);
    let desired = derive_desired_state(&spec).unwrap();
    let load = |q: usize| {
        let options = AssemblyOptions {
            quad_subdiv: q,
            ..AssemblyOptions::default()
        };
        assemble_load(&mesh, &dofs, &desired, &options)
    };
    let (coarse, fine) = (load(1), load(2));
    let scale = fine.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = coarse.iter().zip(&fine).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff <= 1e-6 * scale, "relative change {}", diff / scale);
}

#[test]
fn error_functional_is_quadrature_converged() {
    for variant in [Example1Variant::Static, Example1Variant::Moving] {
        let spec = ProblemSpec::example1(variant);
        let mesh = Arc::new(build_mesh(&spec, 30).unwrap());
        let (_, solution) = solve(&mesh, &spec, &SolverOptions::default()).unwrap();
        let e = |q: usize| {
            let options = MetricOptions {
                quad_subdiv: q,
                ..MetricOptions::default()
            };
            energy_error(&spec, &solution, &options).unwrap()
        };
        let (e1, e2) = (e(1), e(2));
        assert!((e1 - e2).abs() <= 0.005 * e2, "{variant:?}: {e1} vs {e2}");
    }
}

#[test]
fn reference_error_tracks_exact_error() {
    let spec = ProblemSpec::example1(Example1Variant::Moving);
    let exact = spec.exact.clone().unwrap();
    let coarse = Arc::new(build_mesh(&spec, 10).unwrap());
    let (_, solution) = solve(&coarse, &spec, &SolverOptions::default()).unwrap();
    let fine = build_mesh(&spec, 80).unwrap();
    assert!(fine.h <= coarse.h / 6.0);
    let u = lagrange_interpolate(&fine, |x, t| exact.state.value(spec.subdomain_at(x, t), x, t));
    let p = lagrange_interpolate(&fine, |x, t| exact.adjoint.value(spec.subdomain_at(x, t), x, t));
    let options = MetricOptions::default();
    let e = energy_error(&spec, &solution, &options).unwrap();
    let e_r = reference_error(
        NodalPair::from(&solution),
        NodalPair {
            mesh: &fine,
            u: &u,
            p: &p,
        },
        &options,
    )
    .unwrap();
    assert!((e - e_r).abs() <= 0.05 * e, "{e} vs {e_r}");
}
