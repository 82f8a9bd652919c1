//! The discrete coupled state-adjoint system and its direct solution.
//!
//! Unknowns are ordered `[u; p]`. Block row 1 is tested with the adjoint
//! space, block row 2 with `U_h`:
//!
//! ```text
//! [ A    K/eta ] [u]   [ 0  ]
//! [ M    -A^T  ] [p] = [ b_d]
//! ```
//!
//! Rows whose test function is constrained are replaced by pins `x_c = 0` on
//! the constrained unknowns. The factorization works on the equivalent
//! operator obtained by scaling row 1 by `eta`, row 2 by `sqrt(eta)`, and
//! solving for `[p; sqrt(eta) u]`:
//!
//! ```text
//! [ K               sqrt(eta) A ]
//! [ -sqrt(eta) A^T  M           ]
//! ```
//!
//! whose symmetric part `diag(K, M)` is positive definite on free unknowns.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{
    assemble_load, assemble_mass, assemble_spatial_stiffness, assemble_state_matrix,
    AssemblyOptions, DofMap, Space,
};
use crate::mesh::SpaceTimeMesh;
use crate::problem::{derive_desired_state, ProblemSpec};
use crate::sparse::{
    relative_residual, CsrMatrix, DenseVector, LuOptions, Ordering, SparseCholesky, SparseLu,
    TripletBuilder,
};

/// Trial and test space of the adjoint variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum AdjointSpace {
    /// Zero initial values for both state and adjoint.
    #[default]
    U,
    /// Lateral constraints only.
    W,
}

impl AdjointSpace {
    pub fn space(self) -> Space {
        match self {
            AdjointSpace::U => Space::U,
            AdjointSpace::W => Space::W,
        }
    }

    pub fn label(self) -> &'static str {
        self.space().label()
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "U_h" | "U" | "u" | "U_h×U_h" => Some(AdjointSpace::U),
            "W_h" | "W" | "w" => Some(AdjointSpace::W),
            _ => None,
        }
    }
}

/// Largest accepted relative residual of any solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Largest accepted relative residual of a Riesz solve.
pub const RIESZ_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub adjoint_space: AdjointSpace,
    pub assembly: AssemblyOptions,
    pub lu: LuOptions,
    /// Iterative-refinement sweeps after the direct solve.
    pub refinement_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            adjoint_space: AdjointSpace::U,
            assembly: AssemblyOptions::default(),
            lu: LuOptions::default(),
            refinement_steps: 2,
        }
    }
}

/// Assembled optimality system.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub mesh: Arc<SpaceTimeMesh>,
    /// State form without constraints.
    pub a: CsrMatrix,
    /// `kappa_h` spatial stiffness without constraints.
    pub k: CsrMatrix,
    /// Mass matrix without constraints.
    pub m: CsrMatrix,
    /// Load of the desired state, zero at `U_h`-constrained vertices.
    pub b_d: DenseVector,
    pub eta: f64,
    pub state_dofs: DofMap,
    pub adjoint_dofs: DofMap,
    /// Combined `2N x 2N` operator acting on `[u; p]`.
    pub operator: CsrMatrix,
    /// `[0; b_d]`.
    pub rhs: DenseVector,
}

impl BlockSystem {
    pub fn n_vertices(&self) -> usize {
        self.mesh.n_vertices()
    }

    pub fn n_unknowns(&self) -> usize {
        2 * self.n_vertices()
    }

    /// Free unknowns of the block system; the degree-of-freedom count reported
    /// in convergence tables.
    pub fn n_free(&self) -> usize {
        self.state_dofs.n_free() + self.adjoint_dofs.n_free()
    }

    pub fn adjoint_space(&self) -> AdjointSpace {
        match self.adjoint_dofs.space() {
            Space::W => AdjointSpace::W,
            _ => AdjointSpace::U,
        }
    }

    /// Block `(r, c)` of the combined operator, `r, c` in `{0, 1}`.
    pub fn block(&self, r: usize, c: usize) -> CsrMatrix {
        let n = self.n_vertices();
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            let (cols, vals) = self.operator.row(r * n + i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j / n == c {
                    b.push(i, j - c * n, v);
                }
            }
        }
        b.into_csr()
    }

    /// Row `r` of the combined operator is a pin rather than a tested equation.
    pub fn is_pin_row(&self, r: usize) -> bool {
        let n = self.n_vertices();
        if r < n {
            self.adjoint_dofs.is_constrained(r)
        } else {
            self.state_dofs.is_constrained(r - n)
        }
    }

    /// Column `c` of the combined operator belongs to a constrained unknown.
    pub fn is_pinned_unknown(&self, c: usize) -> bool {
        let n = self.n_vertices();
        if c < n {
            self.state_dofs.is_constrained(c)
        } else {
            self.adjoint_dofs.is_constrained(c - n)
        }
    }

    /// Equivalent operator on `[p; sqrt(eta) u]` used for the factorization.
    pub fn scaled_operator(&self) -> CsrMatrix {
        let n = self.n_vertices();
        let s = self.eta.sqrt();
        let (u_dofs, p_dofs) = (&self.state_dofs, &self.adjoint_dofs);
        let at = self.a.transpose();
        let mut b = TripletBuilder::with_capacity(2 * n, 2 * n, 2 * self.operator.nnz());
        for i in 0..n {
            if p_dofs.is_constrained(i) {
                b.push(i, i, 1.0);
                continue;
            }
            let (cols, vals) = self.k.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if !p_dofs.is_constrained(j) {
                    b.push(i, j, v);
                }
            }
            let (cols, vals) = self.a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if !u_dofs.is_constrained(j) {
                    b.push(i, n + j, s * v);
                }
            }
        }
        for i in 0..n {
            if u_dofs.is_constrained(i) {
                b.push(n + i, n + i, 1.0);
                continue;
            }
            let (cols, vals) = at.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if !p_dofs.is_constrained(j) {
                    b.push(n + i, j, -s * v);
                }
            }
            let (cols, vals) = self.m.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if !u_dofs.is_constrained(j) {
                    b.push(n + i, n + j, v);
                }
            }
        }
        b.into_csr()
    }
}

/// Assemble the optimality system for `spec` on `mesh`.
pub fn build_block_system(
    mesh: &Arc<SpaceTimeMesh>,
    spec: &ProblemSpec,
    options: &SolverOptions,
) -> Result<BlockSystem> {
    spec.validate()?;
    if !(spec.eta > 0.0) {
        return Err(Error::Config(format!("eta must be positive, got {}", spec.eta)));
    }
    let full = DofMap::new(mesh, Space::Unconstrained);
    let state_dofs = DofMap::new(mesh, Space::U);
    let adjoint_dofs = DofMap::new(mesh, options.adjoint_space.space());
    let opts = &options.assembly;

    let a = assemble_state_matrix(mesh, spec, &full, opts);
    let k = assemble_spatial_stiffness(mesh, spec, &full, opts);
    let m = assemble_mass(mesh, &full, opts);
    let desired = derive_desired_state(spec)?;
    let b_d = assemble_load(mesh, &state_dofs, desired, opts);
    if let Some(i) = b_d.iter().position(|v| !v.is_finite()) {
        return Err(Error::Assembly(format!(
            "desired-state load is not finite at vertex {i}"
        )));
    }

    let n = mesh.n_vertices();
    let inv_eta = 1.0 / spec.eta;
    let at = a.transpose();
    let mut b = TripletBuilder::with_capacity(2 * n, 2 * n, 4 * a.nnz());
    for i in 0..n {
        if adjoint_dofs.is_constrained(i) {
            b.push(i, i, 1.0);
            continue;
        }
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if !state_dofs.is_constrained(j) {
                b.push(i, j, v);
            }
        }
        let (cols, vals) = k.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if !adjoint_dofs.is_constrained(j) {
                b.push(i, n + j, inv_eta * v);
            }
        }
    }
    for i in 0..n {
        if state_dofs.is_constrained(i) {
            // Constrained adjoint unknowns are pinned here; the remaining
            // constrained state unknowns (t = 0 vertices free in W_h) as well.
            let target = if adjoint_dofs.is_constrained(i) { n + i } else { i };
            b.push(n + i, target, 1.0);
            continue;
        }
        let (cols, vals) = m.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if !state_dofs.is_constrained(j) {
                b.push(n + i, j, v);
            }
        }
        let (cols, vals) = at.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if !adjoint_dofs.is_constrained(j) {
                b.push(n + i, n + j, -v);
            }
        }
    }
    let operator = b.into_csr();
    let mut rhs = vec![0.0; 2 * n];
    rhs[n..].copy_from_slice(&b_d);

    Ok(BlockSystem {
        mesh: Arc::clone(mesh),
        a,
        k,
        m,
        b_d,
        eta: spec.eta,
        state_dofs,
        adjoint_dofs,
        operator,
        rhs,
    })
}

/// Nodal state and adjoint of the discrete optimality system.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub mesh: Arc<SpaceTimeMesh>,
    pub u: DenseVector,
    pub p: DenseVector,
    /// Relative residual `||S x - rhs|| / ||rhs||` of the combined operator.
    pub residual: f64,
    pub eta: f64,
    pub adjoint_space: AdjointSpace,
    /// Free unknowns of the system that produced this solution.
    pub dofs: usize,
    /// Stored entries of the LU factors.
    pub factor_nnz: usize,
}

/// Factor and solve the optimality system.
pub fn solve_optimality(system: &BlockSystem, options: &SolverOptions) -> Result<DiscreteSolution> {
    let n = system.n_vertices();
    let s = system.eta.sqrt();
    let scaled = system.scaled_operator();
    let mut scaled_rhs = vec![0.0; 2 * n];
    for (dst, &v) in scaled_rhs[n..].iter_mut().zip(&system.b_d) {
        *dst = s * v;
    }
    let lu = SparseLu::factor(&scaled, &options.lu)?;
    let (y, _) = lu.solve_refined(&scaled, &scaled_rhs, options.refinement_steps)?;

    let p = y[..n].to_vec();
    let u: Vec<f64> = y[n..].iter().map(|v| v / s).collect();
    let mut x = u.clone();
    x.extend_from_slice(&p);
    let residual = relative_residual(&system.operator, &x, &system.rhs)?;
    if !(residual <= RESIDUAL_TOLERANCE) {
        return Err(Error::Solver(format!(
            "relative residual {residual:.3e} exceeds {RESIDUAL_TOLERANCE:e}"
        )));
    }
    Ok(DiscreteSolution {
        mesh: Arc::clone(&system.mesh),
        u,
        p,
        residual,
        eta: system.eta,
        adjoint_space: system.adjoint_space(),
        dofs: system.n_free(),
        factor_nnz: lu.factor_nnz(),
    })
}

/// Build and solve in one step.
pub fn solve(
    mesh: &Arc<SpaceTimeMesh>,
    spec: &ProblemSpec,
    options: &SolverOptions,
) -> Result<(BlockSystem, DiscreteSolution)> {
    let system = build_block_system(mesh, spec, options)?;
    let solution = solve_optimality(&system, options)?;
    Ok((system, solution))
}

/// Nodal Riesz representative `z_f = -p / eta` of the optimal control.
pub fn recover_control_riesz(solution: &DiscreteSolution) -> DenseVector {
    let scale = -1.0 / solution.eta;
    solution.p.iter().map(|v| scale * v).collect()
}

/// `max_i |(A u)_i - (K z_f)_i| / ||K z_f||_inf` over rows tested with free
/// adjoint-space functions. Zero when `K z_f` vanishes identically and the
/// state residual does too.
pub fn control_consistency(system: &BlockSystem, solution: &DiscreteSolution) -> Result<f64> {
    let z = recover_control_riesz(solution);
    let au = system.a.mul_vec(&solution.u)?;
    let kz = system.k.mul_vec(&z)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in system.adjoint_dofs.free() {
        worst = worst.max((au[i] - kz[i]).abs());
        scale = scale.max(kz[i].abs());
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// Factored `kappa_h` stiffness on `W_h`, for repeated Riesz solves.
#[derive(Debug, Clone)]
pub struct RieszSolver {
    pub dofs: DofMap,
    pub stiffness: CsrMatrix,
    factor: SparseCholesky,
}

impl RieszSolver {
    pub fn new(mesh: &SpaceTimeMesh, spec: &ProblemSpec, options: &AssemblyOptions) -> Result<Self> {
        let dofs = DofMap::new(mesh, Space::W);
        let stiffness = assemble_spatial_stiffness(mesh, spec, &dofs, options);
        let factor = SparseCholesky::factor(&stiffness, Ordering::Auto)?;
        Ok(Self {
            dofs,
            stiffness,
            factor,
        })
    }

    /// Solve `K z = rhs` on `W_h`. Constrained entries of `rhs` must vanish.
    pub fn solve(&self, rhs: &[f64]) -> Result<DenseVector> {
        if let Some(i) = self.dofs.constrained().find(|&i| rhs[i] != 0.0) {
            return Err(Error::Solver(format!(
                "Riesz load is nonzero at constrained vertex {i}"
            )));
        }
        let (z, res) = self.factor.solve_checked(&self.stiffness, rhs)?;
        if !(res <= RIESZ_TOLERANCE) {
            return Err(Error::Solver(format!(
                "Riesz solve residual {res:.3e} exceeds {RIESZ_TOLERANCE:e}"
            )));
        }
        Ok(z)
    }

    /// Relative gap `|rhs^T z - z^T K z| / max(|rhs^T z|, tiny)`.
    pub fn identity_gap(&self, rhs: &[f64], z: &[f64]) -> Result<f64> {
        let lhs: f64 = rhs.iter().zip(z).map(|(a, b)| a * b).sum();
        let energy = self.stiffness.quadratic_form(z, z)?;
        let scale = lhs.abs().max(energy.abs());
        Ok(if scale > 0.0 { (lhs - energy).abs() / scale } else { 0.0 })
    }
}

/// One-shot Riesz solve `K z = rhs` on `W_h`.
pub fn solve_riesz(
    mesh: &SpaceTimeMesh,
    spec: &ProblemSpec,
    rhs: &[f64],
    options: &AssemblyOptions,
) -> Result<DenseVector> {
    RieszSolver::new(mesh, spec, options)?.solve(rhs)
}

/// Write `vertex_id,x,t,u,p,z_f`.
pub fn write_solution_csv(solution: &DiscreteSolution, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_solution_csv_to(solution, std::io::BufWriter::new(file))
}

pub fn write_solution_csv_to(solution: &DiscreteSolution, out: impl Write) -> Result<()> {
    let z = recover_control_riesz(solution);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["vertex_id", "x", "t", "u", "p", "z_f"])?;
    for (i, &[x, t]) in solution.mesh.vertices.iter().enumerate() {
        w.write_record(&[
            i.to_string(),
            format!("{x:.16e}"),
            format!("{t:.16e}"),
            format!("{:.16e}", solution.u[i]),
            format!("{:.16e}", solution.p[i]),
            format!("{:.16e}", z[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row of a solution table.
#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize)]
pub struct SolutionRecord {
    pub vertex_id: usize,
    pub x: f64,
    pub t: f64,
    pub u: f64,
    pub p: f64,
    pub z_f: f64,
}

pub fn read_solution_csv(path: impl AsRef<Path>) -> Result<Vec<SolutionRecord>> {
    read_solution_csv_from(std::fs::File::open(path)?)
}

pub fn read_solution_csv_from(input: impl Read) -> Result<Vec<SolutionRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let records: Vec<SolutionRecord> = r.deserialize().collect::<std::result::Result<_, _>>()?;
    if let Some((k, rec)) = records.iter().enumerate().find(|(k, rec)| rec.vertex_id != *k) {
        return Err(Error::Parse {
            line: k + 2,
            section: "solution".into(),
            message: format!("vertex ids must run 0, 1, 2, ...; found {}", rec.vertex_id),
        });
    }
    Ok(records)
}
