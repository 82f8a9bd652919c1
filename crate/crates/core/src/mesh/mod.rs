//! Interface-fitted triangulations of the space-time cylinder.

mod build;
mod io;
mod locate;
mod validate;

pub use build::{build_mesh, MeshOptions};
pub use io::{read_mesh, read_mesh_from, write_mesh, write_mesh_to};
pub use locate::PointLocator;
pub use validate::{validate_mesh, ValidationReport, DEFAULT_RHO_MAX, INTERFACE_FIT_TOLERANCE};

use crate::problem::Subdomain;

/// Per-vertex boundary flags. The empty set marks an interior vertex.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct BoundaryTag(u8);

impl BoundaryTag {
    pub const INTERIOR: BoundaryTag = BoundaryTag(0);
    pub const X_MIN: BoundaryTag = BoundaryTag(1);
    pub const X_MAX: BoundaryTag = BoundaryTag(2);
    pub const T_START: BoundaryTag = BoundaryTag(4);
    pub const T_END: BoundaryTag = BoundaryTag(8);
    const ALL: u8 = 15;

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> Option<Self> {
        (bits & !Self::ALL == 0).then_some(BoundaryTag(bits))
    }

    pub fn contains(self, other: BoundaryTag) -> bool {
        self.0 & other.0 == other.0 && other.0 != 0
    }

    pub fn intersects(self, other: BoundaryTag) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_interior(self) -> bool {
        self.0 == 0
    }
}

impl std::ops::BitOr for BoundaryTag {
    type Output = BoundaryTag;
    fn bitor(self, rhs: BoundaryTag) -> BoundaryTag {
        BoundaryTag(self.0 | rhs.0)
    }
}

impl std::ops::BitOrAssign for BoundaryTag {
    fn bitor_assign(&mut self, rhs: BoundaryTag) {
        self.0 |= rhs.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangle {
    pub vertices: [usize; 3],
    pub region: Subdomain,
}

/// A triangulation of `(x_min, x_max) x (0, T)` whose discrete interface is a
/// union of edges with endpoints on the exact interface.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeMesh {
    /// `(x, t)` coordinates.
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<Triangle>,
    pub interface_edges: Vec<[usize; 2]>,
    pub boundary_tags: Vec<BoundaryTag>,
    /// Maximum element diameter, measured.
    pub h: f64,
}

impl SpaceTimeMesh {
    /// Assemble a mesh from raw parts, measuring `h`.
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<Triangle>,
        interface_edges: Vec<[usize; 2]>,
        boundary_tags: Vec<BoundaryTag>,
    ) -> Self {
        let mut mesh = Self {
            vertices,
            triangles,
            interface_edges,
            boundary_tags,
            h: 0.0,
        };
        mesh.h = mesh.max_diameter();
        mesh
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, k: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[k].vertices;
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area (positive for counter-clockwise orientation in `(x, t)`).
    pub fn signed_area(&self, k: usize) -> f64 {
        signed_area(&self.corners(k))
    }

    pub fn diameter(&self, k: usize) -> f64 {
        let p = self.corners(k);
        let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        d(p[0], p[1]).max(d(p[1], p[2])).max(d(p[2], p[0]))
    }

    /// Diameter of the inscribed circle, `4 |area| / perimeter`.
    pub fn inscribed_diameter(&self, k: usize) -> f64 {
        let p = self.corners(k);
        let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let perimeter = d(p[0], p[1]) + d(p[1], p[2]) + d(p[2], p[0]);
        4.0 * signed_area(&p).abs() / perimeter
    }

    fn max_diameter(&self) -> f64 {
        (0..self.triangles.len())
            .map(|k| self.diameter(k))
            .fold(0.0, f64::max)
    }

    /// Total area of the elements labelled `region`.
    pub fn region_area(&self, region: Subdomain) -> f64 {
        (0..self.triangles.len())
            .filter(|&k| self.triangles[k].region == region)
            .map(|k| self.signed_area(k).abs())
            .sum()
    }

    /// Bounding box `(x_min, x_max, t_min, t_max)` of the vertex set.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let mut bb = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for &[x, t] in &self.vertices {
            bb.0 = bb.0.min(x);
            bb.1 = bb.1.max(x);
            bb.2 = bb.2.min(t);
            bb.3 = bb.3.max(t);
        }
        bb
    }
}

pub(crate) fn signed_area(p: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]))
}
