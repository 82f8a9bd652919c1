//! Element loops. Every routine produces the same bits in serial and parallel
//! mode: element contributions are computed independently and merged in
//! element order.

use rayon::prelude::*;

use super::{DofMap, P1Element, QuadratureRule};
use crate::mesh::SpaceTimeMesh;
use crate::problem::ProblemSpec;
use crate::sparse::{CsrMatrix, DenseVector, TripletBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssemblyOptions {
    pub parallel: bool,
    /// Levels of uniform 4-fold subdivision for the degree-5 load rule.
    pub quad_subdiv: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            parallel: true,
            quad_subdiv: 1,
        }
    }
}

impl AssemblyOptions {
    pub fn serial() -> Self {
        Self {
            parallel: false,
            ..Self::default()
        }
    }

    pub fn load_rule(&self) -> QuadratureRule {
        QuadratureRule::degree5().subdivided(self.quad_subdiv)
    }
}

const CHUNK: usize = 2048;

/// Per-element values in element order.
pub(crate) fn map_elements<T, F>(mesh: &SpaceTimeMesh, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let n = mesh.n_triangles();
    if parallel && n > CHUNK {
        (0..n).into_par_iter().with_min_len(CHUNK / 4).map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Scatter element matrices into a square matrix, eliminating constrained
/// rows and columns and placing 1 on their diagonal.
fn scatter_matrix(mesh: &SpaceTimeMesh, dofs: &DofMap, local: &[[[f64; 3]; 3]]) -> CsrMatrix {
    let n = mesh.n_vertices();
    let mut b = TripletBuilder::with_capacity(n, n, 9 * local.len() + n);
    for (tri, m) in mesh.triangles.iter().zip(local) {
        for (a, &i) in tri.vertices.iter().enumerate() {
            if dofs.is_constrained(i) {
                continue;
            }
            for (c, &j) in tri.vertices.iter().enumerate() {
                if !dofs.is_constrained(j) {
                    b.push(i, j, m[a][c]);
                }
            }
        }
    }
    for i in dofs.constrained() {
        b.push(i, i, 1.0);
    }
    b.into_csr()
}

fn scatter_vector(mesh: &SpaceTimeMesh, dofs: &DofMap, local: &[[f64; 3]]) -> DenseVector {
    let mut out = vec![0.0; mesh.n_vertices()];
    for (tri, r) in mesh.triangles.iter().zip(local) {
        for (a, &i) in tri.vertices.iter().enumerate() {
            out[i] += r[a];
        }
    }
    dofs.apply(&mut out);
    out
}

/// `A[i][j] = a_h(psi_j, psi_i)`: time derivative, advection and
/// `kappa_h`-weighted spatial diffusion.
pub fn assemble_state_matrix(
    mesh: &SpaceTimeMesh,
    spec: &ProblemSpec,
    dofs: &DofMap,
    options: &AssemblyOptions,
) -> CsrMatrix {
    let rule = QuadratureRule::degree2();
    let local = map_elements(mesh, options.parallel, |k| {
        let e = P1Element::new(mesh, k);
        let kappa = spec.kappa(mesh.triangles[k].region);
        // Test-function moments: int psi_a and int v psi_a.
        let mut m0 = [0.0; 3];
        let mut mv = [0.0; 3];
        for ([_, t], lambda, w) in rule.map(&e.corners) {
            let v = spec.velocity.value(t);
            for a in 0..3 {
                m0[a] += w * lambda[a];
                mv[a] += w * v * lambda[a];
            }
        }
        let mut out = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let [gx, gt] = e.grad[b];
                out[a][b] = e.area
                    * (gt * m0[a] + gx * mv[a] + kappa * gx * e.grad[a][0]);
            }
        }
        out
    });
    scatter_matrix(mesh, dofs, &local)
}

/// `K[i][j] = int kappa_h d_x psi_j d_x psi_i`.
pub fn assemble_spatial_stiffness(
    mesh: &SpaceTimeMesh,
    spec: &ProblemSpec,
    dofs: &DofMap,
    options: &AssemblyOptions,
) -> CsrMatrix {
    let local = map_elements(mesh, options.parallel, |k| {
        let e = P1Element::new(mesh, k);
        let kappa = spec.kappa(mesh.triangles[k].region);
        let mut out = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                out[a][b] = kappa * e.grad[a][0] * e.grad[b][0] * e.area;
            }
        }
        out
    });
    scatter_matrix(mesh, dofs, &local)
}

/// Exact P1 mass matrix.
pub fn assemble_mass(mesh: &SpaceTimeMesh, dofs: &DofMap, options: &AssemblyOptions) -> CsrMatrix {
    let local = map_elements(mesh, options.parallel, |k| {
        let area = mesh.signed_area(k).abs();
        let mut out = [[area / 12.0; 3]; 3];
        for (a, row) in out.iter_mut().enumerate() {
            row[a] = area / 6.0;
        }
        out
    });
    scatter_matrix(mesh, dofs, &local)
}

/// `b[i] = int field psi_i` with the subdivided degree-5 rule.
pub fn assemble_load<F>(
    mesh: &SpaceTimeMesh,
    dofs: &DofMap,
    field: F,
    options: &AssemblyOptions,
) -> DenseVector
where
    F: Fn(f64, f64) -> f64 + Sync + Send,
{
    let rule = options.load_rule();
    let local = map_elements(mesh, options.parallel, |k| {
        let corners = mesh.corners(k);
        let area = mesh.signed_area(k).abs();
        let mut r = [0.0; 3];
        for ([x, t], lambda, w) in rule.map(&corners) {
            let f = field(x, t);
            for a in 0..3 {
                r[a] += w * f * lambda[a];
            }
        }
        r.map(|v| v * area)
    });
    scatter_vector(mesh, dofs, &local)
}

/// `r[i] = sum_K (d_t w_h)|_K int_K psi_i` for a nodal vector `w_h`.
pub fn assemble_time_weighted_load(
    mesh: &SpaceTimeMesh,
    dofs: &DofMap,
    w: &[f64],
    options: &AssemblyOptions,
) -> DenseVector {
    let local = map_elements(mesh, options.parallel, |k| {
        let e = P1Element::new(mesh, k);
        let dt = e.gradient_of(mesh, k, w)[1];
        [dt * e.area / 3.0; 3]
    });
    scatter_vector(mesh, dofs, &local)
}

/// Nodal values of `field`.
pub fn lagrange_interpolate<F>(mesh: &SpaceTimeMesh, field: F) -> DenseVector
where
    F: Fn(f64, f64) -> f64,
{
    mesh.vertices.iter().map(|&[x, t]| field(x, t)).collect()
}
