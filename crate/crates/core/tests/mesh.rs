//! Mesh generation contract: validity, refinement and file round trips.

use proptest::prelude::*;
use stcontrol::mesh::{build_mesh, read_mesh, validate_mesh, write_mesh, DEFAULT_RHO_MAX};
use stcontrol::problem::{DesiredState, Example1Variant, ProblemSpec, Velocity};

#[test]
fn doubling_layers_halves_mesh_size() {
    for variant in [Example1Variant::Static, Example1Variant::Moving] {
        let spec = ProblemSpec::example1(variant);
        for n in [4, 8, 15, 30, 60] {
            let coarse = build_mesh(&spec, n).unwrap();
            let fine = build_mesh(&spec, 2 * n).unwrap();
            let ratio = fine.h / coarse.h;
            assert!((0.4..=0.6).contains(&ratio), "{variant:?} n={n}: {ratio}");
        }
    }
}

#[test]
fn mesh_files_round_trip() {
    let spec = ProblemSpec::example1(Example1Variant::Moving);
    let mesh = build_mesh(&spec, 9).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.stmesh");
    write_mesh(&mesh, &path).unwrap();
    let back = read_mesh(&path).unwrap();
    assert_eq!(back.vertices, mesh.vertices);
    assert_eq!(back.triangles, mesh.triangles);
    assert_eq!(back.interface_edges, mesh.interface_edges);
    assert_eq!(back.boundary_tags, mesh.boundary_tags);
    assert_eq!(back.h, mesh.h);
    assert!(validate_mesh(&back, &spec).is_valid(DEFAULT_RHO_MAX));
}

#[test]
fn truncated_mesh_file_is_rejected() {
    let spec = ProblemSpec::example1(Example1Variant::Static);
    let mesh = build_mesh(&spec, 3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.stmesh");
    write_mesh(&mesh, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let cut: String = text.lines().take(text.lines().count() / 2).collect::<Vec<_>>().join("\n");
    std::fs::write(&path, cut).unwrap();
    assert!(read_mesh(&path).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sinusoidal_interfaces_give_valid_meshes(
        n in 2usize..40,
        amplitude in 0.0f64..0.6,
        cycles in 1u32..3,
    ) {
        let mut spec = ProblemSpec::example1(Example1Variant::Moving);
        let omega = 2.0 * std::f64::consts::PI * f64::from(cycles);
        spec.velocity = Velocity::Sine { amplitude, angular_frequency: omega };
        spec.desired = DesiredState::Zero;
        spec.exact = None;
        let mesh = build_mesh(&spec, n).unwrap();
        let report = validate_mesh(&mesh, &spec);
        prop_assert!(report.is_valid(DEFAULT_RHO_MAX), "{:?}", report.failures(DEFAULT_RHO_MAX));
    }
}
