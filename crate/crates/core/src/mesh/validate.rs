use std::collections::HashMap;

use super::{BoundaryTag, SpaceTimeMesh};
use crate::problem::{PointRegion, ProblemSpec, Subdomain};

/// Interface vertices must lie on an interface curve to within this distance.
pub const INTERFACE_FIT_TOLERANCE: f64 = 1e-10;
/// Default bound on [`ValidationReport::quasi_uniformity_ratio`].
pub const DEFAULT_RHO_MAX: f64 = 8.0;

/// Outcome of [`validate_mesh`]. Every count is a number of offending items.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ValidationReport {
    pub n_vertices: usize,
    pub n_triangles: usize,
    pub h: f64,
    /// Largest distance from an interface-edge endpoint to the nearest interface curve.
    pub max_interface_residual: f64,
    /// Triangles with vertices strictly inside both subdomains.
    pub straddle_count: usize,
    /// Triangles with non-positive signed area.
    pub orientation_violations: usize,
    /// Triangles whose label disagrees with a vertex strictly inside a subdomain.
    pub label_mismatches: usize,
    /// Max element diameter over min inscribed-circle diameter.
    pub quasi_uniformity_ratio: f64,
    /// Edges shared by more than two triangles, plus unpaired edges off the boundary.
    pub conformity_violations: usize,
}

impl ValidationReport {
    pub fn is_valid(&self, rho_max: f64) -> bool {
        self.failures(rho_max).is_empty()
    }

    /// Human-readable list of violated checks.
    pub fn failures(&self, rho_max: f64) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.max_interface_residual <= INTERFACE_FIT_TOLERANCE) {
            out.push(format!(
                "interface-fit residual {:.3e} exceeds {INTERFACE_FIT_TOLERANCE:e}",
                self.max_interface_residual
            ));
        }
        for (count, what) in [
            (self.straddle_count, "straddling triangles"),
            (self.orientation_violations, "orientation violations"),
            (self.label_mismatches, "region label mismatches"),
            (self.conformity_violations, "conformity violations"),
        ] {
            if count > 0 {
                out.push(format!("{count} {what}"));
            }
        }
        if !(self.quasi_uniformity_ratio <= rho_max) {
            out.push(format!(
                "quasi-uniformity ratio {:.3} exceeds {rho_max}",
                self.quasi_uniformity_ratio
            ));
        }
        out
    }
}

/// Check the interface-fitted mesh assumptions against the exact geometry.
pub fn validate_mesh(mesh: &SpaceTimeMesh, spec: &ProblemSpec) -> ValidationReport {
    let mut max_residual: f64 = 0.0;
    for edge in &mesh.interface_edges {
        for &v in edge {
            let [x, t] = mesh.vertices[v];
            let (left, right) = spec.interface_positions(t);
            max_residual = max_residual.max((x - left).abs().min((x - right).abs()));
        }
    }

    let regions: Vec<PointRegion> = mesh
        .vertices
        .iter()
        .map(|&[x, t]| spec.classify_point(x, t))
        .collect();

    let mut straddle = 0;
    let mut orientation = 0;
    let mut mismatch = 0;
    let mut max_diam: f64 = 0.0;
    let mut min_inscribed = f64::INFINITY;
    for (k, tri) in mesh.triangles.iter().enumerate() {
        if !(mesh.signed_area(k) > 0.0) {
            orientation += 1;
        }
        let mut seen_one = false;
        let mut seen_two = false;
        for &v in &tri.vertices {
            match regions[v] {
                PointRegion::Subdomain(Subdomain::One) => seen_one = true,
                PointRegion::Subdomain(Subdomain::Two) => seen_two = true,
                PointRegion::Interface => {}
            }
        }
        if seen_one && seen_two {
            straddle += 1;
        } else if (seen_one && tri.region != Subdomain::One)
            || (seen_two && tri.region != Subdomain::Two)
        {
            mismatch += 1;
        }
        max_diam = max_diam.max(mesh.diameter(k));
        min_inscribed = min_inscribed.min(mesh.inscribed_diameter(k));
    }

    let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in &mesh.triangles {
        let [a, b, c] = tri.vertices;
        for (p, q) in [(a, b), (b, c), (c, a)] {
            *edge_count.entry((p.min(q), p.max(q))).or_insert(0) += 1;
        }
    }
    let sides = [
        BoundaryTag::X_MIN,
        BoundaryTag::X_MAX,
        BoundaryTag::T_START,
        BoundaryTag::T_END,
    ];
    let mut conformity = 0;
    for (&(p, q), &count) in &edge_count {
        if count > 2 {
            conformity += 1;
        } else if count == 1 {
            let (tp, tq) = (mesh.boundary_tags[p], mesh.boundary_tags[q]);
            let on_boundary = sides.iter().any(|&s| tp.contains(s) && tq.contains(s));
            if !on_boundary {
                conformity += 1;
            }
        }
    }

    ValidationReport {
        n_vertices: mesh.n_vertices(),
        n_triangles: mesh.n_triangles(),
        h: mesh.h,
        max_interface_residual: max_residual,
        straddle_count: straddle,
        orientation_violations: orientation,
        label_mismatches: mismatch,
        quasi_uniformity_ratio: if mesh.triangles.is_empty() {
            0.0
        } else {
            max_diam / min_inscribed
        },
        conformity_violations: conformity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use crate::problem::Example1Variant;

    #[test]
    fn generated_meshes_are_clean() {
        for variant in [Example1Variant::Static, Example1Variant::Moving] {
            let spec = ProblemSpec::example1(variant);
            for n in [2, 5, 12, 30] {
                let mesh = build_mesh(&spec, n).unwrap();
                let report = validate_mesh(&mesh, &spec);
                assert!(report.is_valid(8.0), "{variant:?} n={n}: {:?}", report.failures(8.0));
            }
        }
    }

    #[test]
    fn flipped_triangle_is_reported() {
        let spec = ProblemSpec::example1(Example1Variant::Static);
        let mut mesh = build_mesh(&spec, 4).unwrap();
        mesh.triangles[3].vertices.swap(0, 1);
        let report = validate_mesh(&mesh, &spec);
        assert_eq!(report.orientation_violations, 1);
    }

    #[test]
    fn perturbed_interface_vertex_is_reported() {
        let spec = ProblemSpec::example1(Example1Variant::Static);
        let mut mesh = build_mesh(&spec, 4).unwrap();
        let v = mesh.interface_edges[2][0];
        mesh.vertices[v][0] += 1e-3;
        let report = validate_mesh(&mesh, &spec);
        assert!((report.max_interface_residual - 1e-3).abs() < 1e-12);
        assert!(!report.is_valid(8.0));
    }

    #[test]
    fn hole_is_a_conformity_violation() {
        let spec = ProblemSpec::example1(Example1Variant::Static);
        let mut mesh = build_mesh(&spec, 4).unwrap();
        let interior = (0..mesh.n_triangles())
            .find(|&k| {
                mesh.triangles[k]
                    .vertices
                    .iter()
                    .all(|&v| mesh.boundary_tags[v].is_interior())
            })
            .unwrap();
        mesh.triangles.remove(interior);
        let report = validate_mesh(&mesh, &spec);
        assert_eq!(report.conformity_violations, 3);
    }
}
