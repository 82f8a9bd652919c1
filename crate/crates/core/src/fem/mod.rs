//! Continuous P1 space-time elements on triangles.

mod assembly;
mod dofs;
mod quadrature;

pub use assembly::{
    assemble_load, assemble_mass, assemble_spatial_stiffness, assemble_state_matrix,
    assemble_time_weighted_load, lagrange_interpolate, AssemblyOptions,
};
pub(crate) use assembly::map_elements;
pub use dofs::{DofMap, Space};
pub use quadrature::QuadratureRule;

use crate::mesh::SpaceTimeMesh;

/// Affine data of one triangle: area and the constant gradients of the three
/// barycentric basis functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P1Element {
    pub corners: [[f64; 2]; 3],
    pub area: f64,
    /// `grad[a] = [d/dx, d/dt]` of the basis function at corner `a`.
    pub grad: [[f64; 2]; 3],
}

impl P1Element {
    pub fn new(mesh: &SpaceTimeMesh, k: usize) -> Self {
        Self::from_corners(mesh.corners(k))
    }

    pub fn from_corners(p: [[f64; 2]; 3]) -> Self {
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let grad = [
            [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
            [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
            [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
        ];
        Self {
            corners: p,
            area: 0.5 * det.abs(),
            grad,
        }
    }

    /// Constant gradient `[w_x, w_t]` of the P1 function with these nodal values.
    #[inline]
    pub fn gradient(&self, nodal: [f64; 3]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for a in 0..3 {
            g[0] += nodal[a] * self.grad[a][0];
            g[1] += nodal[a] * self.grad[a][1];
        }
        g
    }

    /// Gradient of a global nodal vector restricted to triangle `k`.
    #[inline]
    pub fn gradient_of(&self, mesh: &SpaceTimeMesh, k: usize, w: &[f64]) -> [f64; 2] {
        let [a, b, c] = mesh.triangles[k].vertices;
        self.gradient([w[a], w[b], w[c]])
    }
}

/// Pairwise (cascade) summation; the result depends only on the order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if values.len() <= BLOCK {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradients_of_linear_function() {
        let e = P1Element::from_corners([[0.1, 0.2], [0.7, 0.25], [0.3, 0.9]]);
        let f = |p: [f64; 2]| 3.0 * p[0] - 2.0 * p[1] + 0.5;
        let g = e.gradient([f(e.corners[0]), f(e.corners[1]), f(e.corners[2])]);
        assert!((g[0] - 3.0).abs() < 1e-13 && (g[1] + 2.0).abs() < 1e-13);
        let sum: [f64; 2] = [
            e.grad.iter().map(|g| g[0]).sum(),
            e.grad.iter().map(|g| g[1]).sum(),
        ];
        assert!(sum[0].abs() < 1e-13 && sum[1].abs() < 1e-13);
    }

    #[test]
    fn pairwise_sum_matches_naive_for_integers() {
        let v: Vec<f64> = (0..1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
