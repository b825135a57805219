//! Linear solvers for the assembled finite element systems.
//!
//! Dirichlet problems are reduced to the free (interior) unknowns by moving
//! the columns of the fixed nodes to the right hand side, then solved with
//! Jacobi-preconditioned conjugate gradients. Pure Neumann problems are
//! singular up to constants; they are posed with an explicit mean-value
//! constraint as the bordered saddle point system
//!
//! ```text
//! [ A  c ] [u]   [rhs]
//! [ c^T 0] [l] = [ 0 ]
//! ```
//!
//! where `c` holds the lumped boundary quadrature weights. Since the kernel
//! of `A` (the constants) is not orthogonal to `c`, the operator `P A P`
//! with the orthogonal projector `P = I - c c^T / (c^T c)` is positive
//! definite on the range of `P`, and the system is solved by projected
//! preconditioned conjugate gradients followed by an explicit multiplier
//! update. Compatibility of the right hand side is not required: any
//! incompatible component is absorbed by the multiplier.
//!
//! All solves start from the zero vector and apply updates in a fixed
//! order, so results are reproducible bit for bit.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Tolerances of the iterative solvers.
///
/// A solve succeeds when the residual norm drops below
/// `rel_tol * (1 + ||rhs||)`; it fails after `max_iter_factor * n`
/// iterations, where `n` is the number of unknowns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub max_iter_factor: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { rel_tol: 1e-10, max_iter_factor: 10 }
    }
}

/// Solution of a Dirichlet problem, with solver diagnostics.
#[derive(Clone, Debug)]
pub struct DirichletSolution {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solution of a mean-constrained Neumann problem.
#[derive(Clone, Debug)]
pub struct NeumannSolution {
    pub values: Vec<f64>,
    /// Lagrange multiplier of the mean-value constraint.
    pub multiplier: f64,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients with zero initial guess.
///
/// `apply` evaluates the operator, `precondition` applies an SPD
/// approximate inverse. Returns the solution, the iteration count and the
/// final residual norm once `||r|| <= threshold`. On failure the reported
/// residual is `||r|| / scale`, matching the relative tolerance convention
/// of [`SolverOptions`].
fn pcg(
    apply: &mut dyn FnMut(&[f64], &mut [f64]),
    precondition: &mut dyn FnMut(&[f64], &mut [f64]),
    rhs: &[f64],
    threshold: f64,
    scale: f64,
    max_iterations: usize,
) -> Result<(Vec<f64>, usize, f64)> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut res = norm(&r);
    if res <= threshold {
        return Ok((x, 0, res));
    }
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for iteration in 1..=max_iterations {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::internal(format!(
                "conjugate gradients met a non-positive curvature {pap:.3e}; operator is not positive definite"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm(&r);
        if res <= threshold {
            return Ok((x, iteration, res));
        }
        precondition(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure { iterations: max_iterations, residual: res / scale })
}

fn jacobi_weights(matrix: &CsrMatrix) -> Result<Vec<f64>> {
    let mut inv = matrix.diagonal();
    for d in inv.iter_mut() {
        if *d <= 0.0 {
            return Err(Error::internal(format!(
                "non-positive diagonal entry {d:.3e}; system is not positive definite"
            )));
        }
        *d = 1.0 / *d;
    }
    Ok(inv)
}

/// Solves `A u = rhs` with the listed nodal values held fixed.
///
/// `fixed` must contain distinct, in-range node indices; in the forward
/// problem it covers exactly the boundary nodes. The fixed columns are
/// moved to the right hand side and the free block, which is symmetric
/// positive definite for a positive conductivity, is solved by
/// Jacobi-preconditioned conjugate gradients.
pub fn solve_dirichlet_system(
    matrix: &CsrMatrix,
    rhs: &[f64],
    fixed: &[(usize, f64)],
    options: &SolverOptions,
) -> Result<DirichletSolution> {
    let n = matrix.dim();
    if rhs.len() != n {
        return Err(Error::invalid("right hand side length does not match the matrix"));
    }
    let mut fixed_value = vec![None; n];
    for &(node, value) in fixed {
        if node >= n {
            return Err(Error::invalid(format!("fixed node {node} out of range")));
        }
        if fixed_value[node].replace(value).is_some() {
            return Err(Error::invalid(format!("node {node} fixed twice")));
        }
    }

    // Index map from global nodes to free unknowns.
    let mut free_index = vec![usize::MAX; n];
    let mut free_nodes = Vec::new();
    for i in 0..n {
        if fixed_value[i].is_none() {
            free_index[i] = free_nodes.len();
            free_nodes.push(i);
        }
    }
    let n_free = free_nodes.len();

    let mut values = vec![0.0; n];
    for i in 0..n {
        if let Some(g) = fixed_value[i] {
            values[i] = g;
        }
    }
    if n_free == 0 {
        return Ok(DirichletSolution { values, iterations: 0, relative_residual: 0.0 });
    }

    // Lifting: rhs_f = (rhs - A g_ext) restricted to the free nodes.
    let lifted = matrix.matvec_alloc(&values);
    let mut rhs_free = Vec::with_capacity(n_free);
    for &i in &free_nodes {
        rhs_free.push(rhs[i] - lifted[i]);
    }

    // Extract the free-free block; rows of the source are already sorted.
    let mut row_ptr = Vec::with_capacity(n_free + 1);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for &i in &free_nodes {
        for (j, v) in matrix.row_entries(i) {
            if free_index[j] != usize::MAX {
                col_idx.push(free_index[j]);
                vals.push(v);
            }
        }
        row_ptr.push(col_idx.len());
    }
    let reduced = CsrMatrix::from_raw(n_free, row_ptr, col_idx, vals);

    let inv_diag = jacobi_weights(&reduced)?;
    let scale = 1.0 + norm(&rhs_free);
    let threshold = options.rel_tol * scale;
    let max_iterations = options.max_iter_factor.max(1) * n_free;
    let (solution, iterations, residual) = pcg(
        &mut |x, y| reduced.matvec(x, y),
        &mut |r, z| {
            for i in 0..r.len() {
                z[i] = inv_diag[i] * r[i];
            }
        },
        &rhs_free,
        threshold,
        scale,
        max_iterations,
    )?;

    for (k, &i) in free_nodes.iter().enumerate() {
        values[i] = solution[k];
    }
    Ok(DirichletSolution { values, iterations, relative_residual: residual / scale })
}

/// Solves the bordered system `[A c; c^T 0] [u; l] = [rhs; 0]`.
///
/// Returns the primal solution with `c^T u = 0`, and the multiplier `l`
/// chosen so that `||A u + l c - rhs|| <= rel_tol * (1 + ||rhs||)`. The
/// constraint vector must not be orthogonal to the constants spanning the
/// kernel of `A`, which holds for the lumped boundary weights.
pub fn solve_neumann_system(
    matrix: &CsrMatrix,
    rhs: &[f64],
    constraint: &[f64],
    options: &SolverOptions,
) -> Result<NeumannSolution> {
    let n = matrix.dim();
    if rhs.len() != n || constraint.len() != n {
        return Err(Error::invalid("vector lengths do not match the matrix"));
    }
    let cc = dot(constraint, constraint);
    if cc <= 0.0 {
        return Err(Error::invalid("constraint vector must be nonzero"));
    }

    let project = |v: &mut [f64]| {
        let factor = dot(constraint, v) / cc;
        for (vi, ci) in v.iter_mut().zip(constraint) {
            *vi -= factor * ci;
        }
    };

    let inv_diag = jacobi_weights(matrix)?;
    let mut projected_rhs = rhs.to_vec();
    project(&mut projected_rhs);
    let scale = 1.0 + norm(rhs);
    let threshold = options.rel_tol * scale;
    let max_iterations = options.max_iter_factor.max(1) * n;

    let (mut values, iterations, _residual) = pcg(
        &mut |x, y| {
            matrix.matvec(x, y);
            project(y);
        },
        &mut |r, z| {
            for i in 0..n {
                z[i] = inv_diag[i] * r[i];
            }
            project(z);
        },
        &projected_rhs,
        threshold,
        scale,
        max_iterations,
    )?;
    // Guard against drift out of the constraint plane.
    project(&mut values);

    let residual_vec = {
        let mut au = matrix.matvec_alloc(&values);
        for i in 0..n {
            au[i] = rhs[i] - au[i];
        }
        au
    };
    let multiplier = dot(constraint, &residual_vec) / cc;

    let mut full_residual = 0.0;
    for i in 0..n {
        full_residual += (residual_vec[i] - multiplier * constraint[i]).powi(2);
    }
    Ok(NeumannSolution {
        values,
        multiplier,
        iterations,
        relative_residual: full_residual.sqrt() / scale,
    })
}
