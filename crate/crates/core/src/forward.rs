//! Discrete forward problems for a given conductivity: the Neumann problem
//! driven by a boundary current and the Dirichlet problem driven by a
//! boundary voltage, both with the same volumetric source.

use crate::error::{Error, Result};
use crate::fem::{assemble_neumann_rhs, assemble_stiffness};
use crate::mesh::{Mesh, NodalField};
use crate::solve::{solve_dirichlet_system, solve_neumann_system, SolverOptions};
use crate::sparse::CsrMatrix;

/// One boundary measurement pair: the applied current, constant on each
/// boundary edge, and the observed voltage at the boundary nodes. Both
/// follow the counterclockwise boundary ordering of the mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    level: u32,
    current: Vec<f64>,
    voltage: Vec<f64>,
}

impl Measurement {
    pub fn new(mesh: &Mesh, current: Vec<f64>, voltage: Vec<f64>) -> Result<Self> {
        if current.len() != mesh.boundary_edges().len() {
            return Err(Error::invalid(format!(
                "current has {} values, expected one per boundary edge ({})",
                current.len(),
                mesh.boundary_edges().len()
            )));
        }
        if voltage.len() != mesh.boundary_nodes().len() {
            return Err(Error::invalid(format!(
                "voltage has {} values, expected one per boundary node ({})",
                voltage.len(),
                mesh.boundary_nodes().len()
            )));
        }
        Ok(Measurement { level: mesh.level(), current, voltage })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Current density per boundary edge, counterclockwise.
    pub fn current(&self) -> &[f64] {
        &self.current
    }

    /// Voltage per boundary node, counterclockwise.
    pub fn voltage(&self) -> &[f64] {
        &self.voltage
    }

    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.level != mesh.level() {
            return Err(Error::invalid(format!(
                "measurement on level {} does not match mesh of level {}",
                self.level,
                mesh.level()
            )));
        }
        Ok(())
    }
}

/// Neumann and Dirichlet states computed from one measurement pair.
#[derive(Clone, Debug)]
pub struct ForwardPair {
    pub neumann: NodalField,
    pub dirichlet: NodalField,
}

fn check_conductivity(mesh: &Mesh, q: &NodalField) -> Result<()> {
    q.check_mesh(mesh)?;
    let min = q.values().iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(Error::invalid(format!(
            "conductivity must be strictly positive, found minimum {min}"
        )));
    }
    Ok(())
}

fn check_load(mesh: &Mesh, load: &[f64]) -> Result<()> {
    if load.len() != mesh.num_nodes() {
        return Err(Error::invalid("load vector length does not match the mesh"));
    }
    Ok(())
}

/// Solves the current-driven problem with the weighted boundary mean of the
/// solution constrained to zero. `load` is the assembled source functional.
pub fn neumann_solve(
    mesh: &Mesh,
    q: &NodalField,
    load: &[f64],
    measurement: &Measurement,
    options: &SolverOptions,
) -> Result<NodalField> {
    check_conductivity(mesh, q)?;
    check_load(mesh, load)?;
    measurement.check_mesh(mesh)?;
    let matrix = assemble_stiffness(mesh, q)?;
    neumann_solve_assembled(mesh, &matrix, load, measurement, options)
}

/// Variant of [`neumann_solve`] reusing an already assembled stiffness matrix.
pub fn neumann_solve_assembled(
    mesh: &Mesh,
    matrix: &CsrMatrix,
    load: &[f64],
    measurement: &Measurement,
    options: &SolverOptions,
) -> Result<NodalField> {
    let boundary = assemble_neumann_rhs(mesh, measurement.current())?;
    let rhs: Vec<f64> = load.iter().zip(&boundary).map(|(f, j)| f + j).collect();
    let constraint = mesh.boundary_lumped_weights();
    let solution = solve_neumann_system(matrix, &rhs, &constraint, options)?;
    NodalField::from_values(mesh, solution.values)
}

/// Solves the voltage-driven problem with the measured voltage imposed at
/// the boundary nodes.
pub fn dirichlet_solve(
    mesh: &Mesh,
    q: &NodalField,
    load: &[f64],
    measurement: &Measurement,
    options: &SolverOptions,
) -> Result<NodalField> {
    check_conductivity(mesh, q)?;
    check_load(mesh, load)?;
    measurement.check_mesh(mesh)?;
    let matrix = assemble_stiffness(mesh, q)?;
    dirichlet_solve_assembled(mesh, &matrix, load, measurement, options)
}

/// Variant of [`dirichlet_solve`] reusing an already assembled stiffness matrix.
pub fn dirichlet_solve_assembled(
    mesh: &Mesh,
    matrix: &CsrMatrix,
    load: &[f64],
    measurement: &Measurement,
    options: &SolverOptions,
) -> Result<NodalField> {
    let fixed: Vec<(usize, f64)> = mesh
        .boundary_nodes()
        .iter()
        .zip(measurement.voltage())
        .map(|(&node, &g)| (node, g))
        .collect();
    let solution = solve_dirichlet_system(matrix, load, &fixed, options)?;
    NodalField::from_values(mesh, solution.values)
}

/// Computes both states of a measurement with a single matrix assembly.
pub fn forward_pair(
    mesh: &Mesh,
    q: &NodalField,
    load: &[f64],
    measurement: &Measurement,
    options: &SolverOptions,
) -> Result<ForwardPair> {
    check_conductivity(mesh, q)?;
    check_load(mesh, load)?;
    measurement.check_mesh(mesh)?;
    let matrix = assemble_stiffness(mesh, q)?;
    Ok(ForwardPair {
        neumann: neumann_solve_assembled(mesh, &matrix, load, measurement, options)?,
        dirichlet: dirichlet_solve_assembled(mesh, &matrix, load, measurement, options)?,
    })
}
