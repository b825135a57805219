//! Shared helpers for the integration suites: a dense LU oracle for the
//! sparse solvers and canned measurement setups.

#![allow(dead_code)]

use eit_core::experiments::{generate_exact_data, restrict_data, Phantom};
use eit_core::forward::Measurement;
use eit_core::solve::SolverOptions;
use eit_core::{CsrMatrix, Mesh};

/// Dense LU factorization with partial pivoting; returns the solution of
/// `a x = b`. Panics on singular input — oracle use only.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty column");
        assert!(a[pivot][col].abs() > 1e-300, "singular oracle system");
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut sum = b[row];
        for k in row + 1..n {
            sum -= a[row][k] * x[k];
        }
        x[row] = sum / a[row][row];
    }
    x
}

/// Expands a sparse matrix into a dense row-major array.
pub fn dense_from_csr(matrix: &CsrMatrix) -> Vec<Vec<f64>> {
    let n = matrix.dim();
    let mut dense = vec![vec![0.0; n]; n];
    for (i, j, v) in matrix.entries() {
        dense[i][j] += v;
    }
    dense
}

/// Direct solve of the Dirichlet system: fixed nodal values eliminated
/// exactly, the free block solved by dense LU.
pub fn dense_dirichlet(matrix: &CsrMatrix, rhs: &[f64], fixed: &[(usize, f64)]) -> Vec<f64> {
    let n = matrix.dim();
    let mut value = vec![None; n];
    for &(node, g) in fixed {
        value[node] = Some(g);
    }
    let free: Vec<usize> = (0..n).filter(|&i| value[i].is_none()).collect();
    let dense = dense_from_csr(matrix);
    let mut reduced = vec![vec![0.0; free.len()]; free.len()];
    let mut reduced_rhs = Vec::with_capacity(free.len());
    for (r, &i) in free.iter().enumerate() {
        let mut b = rhs[i];
        for j in 0..n {
            match value[j] {
                Some(g) => b -= dense[i][j] * g,
                None => {}
            }
        }
        reduced_rhs.push(b);
        for (c, &j) in free.iter().enumerate() {
            reduced[r][c] = dense[i][j];
        }
    }
    let interior = dense_solve(reduced, reduced_rhs);
    let mut out = vec![0.0; n];
    for (i, v) in value.iter().enumerate() {
        if let Some(g) = v {
            out[i] = *g;
        }
    }
    for (r, &i) in free.iter().enumerate() {
        out[i] = interior[r];
    }
    out
}

/// Direct solve of the constrained Neumann system via the bordered
/// `[[A, c], [c^T, 0]]` form; returns the primal part.
pub fn dense_neumann(matrix: &CsrMatrix, rhs: &[f64], constraint: &[f64]) -> Vec<f64> {
    let n = matrix.dim();
    let dense = dense_from_csr(matrix);
    let mut bordered = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            bordered[i][j] = dense[i][j];
        }
        bordered[i][n] = constraint[i];
        bordered[n][i] = constraint[i];
    }
    let mut b = rhs.to_vec();
    b.push(0.0);
    let mut x = dense_solve(bordered, b);
    x.truncate(n);
    x
}

/// Relative Euclidean distance `|a - b| / max(|b|, floor)`.
pub fn relative_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale.max(1e-30)
}

/// Exact measurement for the base current pattern, generated on
/// `data_level` and restricted to `mesh`.
pub fn restricted_measurement(mesh: &Mesh, data_level: u32) -> Measurement {
    let phantom = Phantom::new();
    let fine = Mesh::structured(data_level).expect("fine mesh");
    let exact = generate_exact_data(&phantom, &fine, [1.0, 2.0, 3.0, 4.0], &SolverOptions::default())
        .expect("data generation");
    restrict_data(&fine, &exact, mesh).expect("restriction")
}
