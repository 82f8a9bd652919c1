use super::{BoundaryTag, SpaceTimeMesh, Triangle};
use crate::error::{Error, Result};
use crate::problem::{ProblemSpec, Subdomain};

/// Knobs of the layered strip mesher.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    /// Uniform nodes closer than `cull_fraction * pitch` to an interface node
    /// are dropped.
    pub cull_fraction: f64,
    /// Minimum admissible node spacing on a time line, relative to the domain width.
    pub collision_tolerance: f64,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self {
            cull_fraction: 0.3,
            collision_tolerance: 1e-9,
        }
    }
}

/// Nodes on one time line, sorted by `x`.
struct TimeLine {
    t: f64,
    first_vertex: usize,
    xs: Vec<f64>,
    /// Local indices of the two interface nodes.
    left: usize,
    right: usize,
}

impl TimeLine {
    fn vertex(&self, local: usize) -> usize {
        self.first_vertex + local
    }
}

/// Build a layered interface-fitted mesh with `n_layers` time slabs.
pub fn build_mesh(spec: &ProblemSpec, n_layers: usize) -> Result<SpaceTimeMesh> {
    build_mesh_with(spec, n_layers, &MeshOptions::default())
}

pub fn build_mesh_with(
    spec: &ProblemSpec,
    n_layers: usize,
    options: &MeshOptions,
) -> Result<SpaceTimeMesh> {
    if n_layers < 2 {
        return Err(Error::Config(format!(
            "at least two time layers are required, got {n_layers}"
        )));
    }
    spec.validate()?;

    let width = spec.x_max - spec.x_min;
    let dt = spec.final_time / n_layers as f64;
    let n_x = ((width / dt).round() as usize).max(2);
    let pitch = width / n_x as f64;
    let cull = options.cull_fraction * pitch;
    let min_gap = options.collision_tolerance * width;

    let mut lines = Vec::with_capacity(n_layers + 1);
    let mut vertices = Vec::new();
    let mut tags = Vec::new();
    for j in 0..=n_layers {
        let t = spec.final_time * j as f64 / n_layers as f64;
        let (alpha, beta) = spec.interface_positions(t);
        let mut xs = Vec::with_capacity(n_x + 3);
        xs.push(spec.x_min);
        for k in 1..n_x {
            let x = spec.x_min + width * k as f64 / n_x as f64;
            if (x - alpha).abs() >= cull && (x - beta).abs() >= cull {
                xs.push(x);
            }
        }
        xs.push(spec.x_max);
        xs.push(alpha);
        xs.push(beta);
        xs.sort_by(f64::total_cmp);
        if let Some(w) = xs.windows(2).find(|w| w[1] - w[0] <= min_gap) {
            return Err(Error::Meshing {
                layer: j,
                message: format!(
                    "nodes at x = {} and x = {} collide on time line t = {t}",
                    w[0], w[1]
                ),
            });
        }
        let left = xs.iter().position(|&x| x == alpha).expect("interface node present");
        let right = xs.iter().position(|&x| x == beta).expect("interface node present");

        let first_vertex = vertices.len();
        for (local, &x) in xs.iter().enumerate() {
            vertices.push([x, t]);
            let mut tag = BoundaryTag::INTERIOR;
            if local == 0 {
                tag |= BoundaryTag::X_MIN;
            }
            if local == xs.len() - 1 {
                tag |= BoundaryTag::X_MAX;
            }
            if j == 0 {
                tag |= BoundaryTag::T_START;
            }
            if j == n_layers {
                tag |= BoundaryTag::T_END;
            }
            tags.push(tag);
        }
        lines.push(TimeLine {
            t,
            first_vertex,
            xs,
            left,
            right,
        });
    }

    let mut triangles = Vec::new();
    let mut interface_edges = Vec::with_capacity(2 * n_layers);
    for (j, pair) in lines.windows(2).enumerate() {
        let (bottom, top) = (&pair[0], &pair[1]);
        let ranges = [
            (0, bottom.left, 0, top.left),
            (bottom.left, bottom.right, top.left, top.right),
            (bottom.right, bottom.xs.len() - 1, top.right, top.xs.len() - 1),
        ];
        let start = triangles.len();
        for (b0, b1, t0, t1) in ranges {
            zigzag(bottom, b0..=b1, top, t0..=t1, &mut triangles);
        }
        for tri in &mut triangles[start..] {
            tri.region = classify_centroid(&vertices, tri.vertices, bottom, top);
        }
        if triangles[start..].is_empty() {
            return Err(Error::Meshing {
                layer: j,
                message: "strip produced no triangles".into(),
            });
        }
        interface_edges.push([bottom.vertex(bottom.left), top.vertex(top.left)]);
        interface_edges.push([bottom.vertex(bottom.right), top.vertex(top.right)]);
    }

    Ok(SpaceTimeMesh::from_parts(
        vertices,
        triangles,
        interface_edges,
        tags,
    ))
}

/// Triangulate the trapezoid between two monotone chains on consecutive time
/// lines. Each step adds the triangle across the shorter of the two candidate
/// diagonals; the last triangle closes on the segment joining the chain ends.
fn zigzag(
    bottom: &TimeLine,
    b: std::ops::RangeInclusive<usize>,
    top: &TimeLine,
    t: std::ops::RangeInclusive<usize>,
    out: &mut Vec<Triangle>,
) {
    let (mut i, b_end) = (*b.start(), *b.end());
    let (mut k, t_end) = (*t.start(), *t.end());
    while i < b_end || k < t_end {
        let advance_bottom = if i == b_end {
            false
        } else if k == t_end {
            true
        } else {
            let bottom_diag = (bottom.xs[i + 1] - top.xs[k]).abs();
            let top_diag = (top.xs[k + 1] - bottom.xs[i]).abs();
            bottom_diag <= top_diag
        };
        let vertices = if advance_bottom {
            i += 1;
            [bottom.vertex(i - 1), bottom.vertex(i), top.vertex(k)]
        } else {
            k += 1;
            [bottom.vertex(i), top.vertex(k), top.vertex(k - 1)]
        };
        out.push(Triangle {
            vertices,
            region: Subdomain::Two,
        });
    }
}

/// Centroid test against the piecewise-linear discrete interface of the strip.
fn classify_centroid(
    vertices: &[[f64; 2]],
    tri: [usize; 3],
    bottom: &TimeLine,
    top: &TimeLine,
) -> Subdomain {
    let xc = (vertices[tri[0]][0] + vertices[tri[1]][0] + vertices[tri[2]][0]) / 3.0;
    let tc = (vertices[tri[0]][1] + vertices[tri[1]][1] + vertices[tri[2]][1]) / 3.0;
    let theta = (tc - bottom.t) / (top.t - bottom.t);
    let lerp = |a: f64, b: f64| a + theta * (b - a);
    let left = lerp(bottom.xs[bottom.left], top.xs[top.left]);
    let right = lerp(bottom.xs[bottom.right], top.xs[top.right]);
    if left < xc && xc < right {
        Subdomain::One
    } else {
        Subdomain::Two
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::validate_mesh;
    use crate::problem::Example1Variant;

    #[test]
    fn static_four_layers_has_vertical_interface() {
        let spec = ProblemSpec::example1(Example1Variant::Static);
        let mesh = build_mesh(&spec, 4).unwrap();
        assert_eq!(mesh.interface_edges.len(), 8);
        let mut left = std::collections::BTreeSet::new();
        let mut right = std::collections::BTreeSet::new();
        for e in &mesh.interface_edges {
            for &v in e {
                let [x, _] = mesh.vertices[v];
                if x == 0.4 {
                    left.insert(v);
                } else if x == 0.6 {
                    right.insert(v);
                } else {
                    panic!("interface vertex off the curves: x = {x}");
                }
            }
        }
        assert_eq!(left.len(), 5);
        assert_eq!(right.len(), 5);
        let report = validate_mesh(&mesh, &spec);
        assert_eq!(report.max_interface_residual, 0.0);
    }

    #[test]
    fn smallest_mesh_smoke() {
        let spec = ProblemSpec::example1(Example1Variant::Static);
        let mesh = build_mesh(&spec, 2).unwrap();
        assert!(mesh.n_triangles() > 0);
        assert!((0..mesh.n_triangles()).all(|k| mesh.signed_area(k) > 0.0));
        assert!(mesh.region_area(Subdomain::One) > 0.0);
        assert!(mesh.region_area(Subdomain::Two) > 0.0);
    }

    #[test]
    fn one_layer_is_rejected() {
        let spec = ProblemSpec::example1(Example1Variant::Static);
        assert!(matches!(build_mesh(&spec, 1), Err(Error::Config(_))));
    }

    #[test]
    fn interface_collision_reported_with_layer() {
        let mut spec = ProblemSpec::example1(Example1Variant::Static);
        spec.offsets = (0.4, 0.4 + 1e-12);
        match build_mesh(&spec, 4) {
            Err(Error::Meshing { layer, .. }) => assert_eq!(layer, 0),
            other => panic!("expected meshing error, got {other:?}"),
        }
    }

    #[test]
    fn static_region_areas_exact() {
        let spec = ProblemSpec::example1(Example1Variant::Static);
        for n in [4, 7, 10] {
            let mesh = build_mesh(&spec, n).unwrap();
            assert!((mesh.region_area(Subdomain::One) - 0.2).abs() <= 5.0 * mesh.h * mesh.h);
            let total = mesh.region_area(Subdomain::One) + mesh.region_area(Subdomain::Two);
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
