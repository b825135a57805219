//! The iterative solvers against a dense LU oracle: on coarse meshes both
//! the constrained Neumann solve and the Dirichlet solve must agree with a
//! direct factorization of the same system to near machine precision.

mod common;

use common::{dense_dirichlet, dense_neumann, relative_distance, restricted_measurement};
use eit_core::fem::{assemble_load_with, assemble_neumann_rhs, assemble_stiffness};
use eit_core::solve::{solve_dirichlet_system, solve_neumann_system, SolverOptions};
use eit_core::{Mesh, NodalField};

fn varying_conductivity(mesh: &Mesh) -> NodalField {
    NodalField::from_fn(mesh, |x, y| 1.0 + 0.5 * (x * y).sin() + 0.3 * (x + y).cos())
}

fn tight() -> SolverOptions {
    SolverOptions { rel_tol: 1e-13, max_iter_factor: 40 }
}

#[test]
fn neumann_solver_matches_dense_factorization() {
    for level in [4, 8] {
        let mesh = Mesh::structured(level).unwrap();
        let q = varying_conductivity(&mesh);
        let matrix = assemble_stiffness(&mesh, &q).unwrap();
        let measurement = restricted_measurement(&mesh, 16);
        let load = assemble_load_with(&mesh, |x, y| x - 0.5 * y);
        let boundary = assemble_neumann_rhs(&mesh, measurement.current()).unwrap();
        let rhs: Vec<f64> = load.iter().zip(&boundary).map(|(f, j)| f + j).collect();
        let constraint = mesh.boundary_lumped_weights();

        let iterative = solve_neumann_system(&matrix, &rhs, &constraint, &tight()).unwrap();
        let direct = dense_neumann(&matrix, &rhs, &constraint);
        let distance = relative_distance(&iterative.values, &direct);
        assert!(
            distance <= 1e-9,
            "level {level}: Neumann solve is {distance:.3e} from the dense oracle"
        );
        // The weighted boundary mean of the iterative solution is zero.
        let mean: f64 =
            constraint.iter().zip(&iterative.values).map(|(c, u)| c * u).sum();
        let scale: f64 = iterative.values.iter().map(|u| u * u).sum::<f64>().sqrt();
        assert!(mean.abs() <= 1e-10 * (1.0 + scale));
    }
}

#[test]
fn dirichlet_solver_matches_dense_factorization() {
    for level in [4, 8] {
        let mesh = Mesh::structured(level).unwrap();
        let q = varying_conductivity(&mesh);
        let matrix = assemble_stiffness(&mesh, &q).unwrap();
        let measurement = restricted_measurement(&mesh, 16);
        let load = assemble_load_with(&mesh, |x, y| 0.7 * x * y);
        let fixed: Vec<(usize, f64)> = mesh
            .boundary_nodes()
            .iter()
            .zip(measurement.voltage())
            .map(|(&node, &g)| (node, g))
            .collect();

        let iterative = solve_dirichlet_system(&matrix, &load, &fixed, &tight()).unwrap();
        let direct = dense_dirichlet(&matrix, &load, &fixed);
        let distance = relative_distance(&iterative.values, &direct);
        assert!(
            distance <= 1e-9,
            "level {level}: Dirichlet solve is {distance:.3e} from the dense oracle"
        );
        // Fixed nodes are imposed exactly, not approximately.
        for &(node, g) in &fixed {
            assert_eq!(iterative.values[node], g);
        }
    }
}

/// The multiplier returned by the constrained solve makes the full bordered
/// residual small, not just the projected one.
#[test]
fn neumann_multiplier_closes_the_bordered_residual() {
    let mesh = Mesh::structured(8).unwrap();
    let q = varying_conductivity(&mesh);
    let matrix = assemble_stiffness(&mesh, &q).unwrap();
    let measurement = restricted_measurement(&mesh, 16);
    let boundary = assemble_neumann_rhs(&mesh, measurement.current()).unwrap();
    let constraint = mesh.boundary_lumped_weights();

    let solution = solve_neumann_system(&matrix, &boundary, &constraint, &tight()).unwrap();
    let mut residual = matrix.matvec_alloc(&solution.values);
    for ((r, c), b) in residual.iter_mut().zip(&constraint).zip(&boundary) {
        *r += solution.multiplier * c - b;
    }
    let norm: f64 = residual.iter().map(|r| r * r).sum::<f64>().sqrt();
    let scale: f64 = 1.0 + boundary.iter().map(|b| b * b).sum::<f64>().sqrt();
    assert!(norm <= 1e-9 * scale, "bordered residual {norm:.3e} too large");
}
