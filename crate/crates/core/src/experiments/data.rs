//! Synthetic boundary data: exact measurements computed on a fine mesh and
//! their restriction to coarser reconstruction meshes.
//!
//! Generating data on a finer mesh than the one used for reconstruction
//! avoids the inverse crime of inverting the very operator that produced
//! the data.

use crate::error::{Error, Result};
use crate::fem::assemble_load;
use crate::forward::{neumann_solve, Measurement};
use crate::mesh::{boundary_trace, Mesh};
use crate::solve::SolverOptions;

use super::phantom::{boundary_current, Phantom};

/// Solves the current-driven problem for the phantom conductivity on the
/// fine mesh and records the exact measurement pair: the applied current
/// and the boundary trace of the solution.
pub fn generate_exact_data(
    phantom: &Phantom,
    fine_mesh: &Mesh,
    pattern: [f64; 4],
    options: &SolverOptions,
) -> Result<Measurement> {
    let q = phantom.interpolate(fine_mesh);
    let load = assemble_load(fine_mesh, &phantom.source())?;
    let current = boundary_current(fine_mesh, pattern);
    let probe = Measurement::new(
        fine_mesh,
        current.clone(),
        vec![0.0; fine_mesh.boundary_nodes().len()],
    )?;
    let state = neumann_solve(fine_mesh, &q, &load, &probe, options)?;
    let voltage: Vec<f64> =
        boundary_trace(fine_mesh, &state)?.into_iter().map(|(_, v)| v).collect();
    Measurement::new(fine_mesh, current, voltage)
}

/// Restricts a fine-mesh measurement to a nested coarser mesh.
///
/// Both meshes order their boundary counterclockwise from the same corner,
/// so coarse boundary node `k` coincides with fine boundary node `k * r`
/// and coarse edge `k` covers the fine edges `k*r .. (k+1)*r`, where `r`
/// is the level ratio. Voltages are copied at the shared nodes. The
/// current must be constant across the fine edges under each coarse edge
/// (which holds for the pattern currents on even levels, whose sign
/// changes happen at corners and side midpoints); the shared constant
/// becomes the coarse edge value.
pub fn restrict_data(
    fine_mesh: &Mesh,
    measurement: &Measurement,
    coarse_mesh: &Mesh,
) -> Result<Measurement> {
    measurement.check_mesh(fine_mesh)?;
    if fine_mesh.level() % coarse_mesh.level() != 0 {
        return Err(Error::invalid(format!(
            "fine level {} is not a multiple of coarse level {}",
            fine_mesh.level(),
            coarse_mesh.level()
        )));
    }
    let ratio = (fine_mesh.level() / coarse_mesh.level()) as usize;
    let coarse_boundary = coarse_mesh.boundary_nodes().len();

    let voltage: Vec<f64> =
        (0..coarse_boundary).map(|k| measurement.voltage()[k * ratio]).collect();

    let mut current = Vec::with_capacity(coarse_boundary);
    for k in 0..coarse_boundary {
        let fine_values = &measurement.current()[k * ratio..(k + 1) * ratio];
        let value = fine_values[0];
        if fine_values.iter().any(|&v| v != value) {
            return Err(Error::invalid(format!(
                "current is not constant across coarse boundary edge {k}"
            )));
        }
        current.push(value);
    }
    Measurement::new(coarse_mesh, current, voltage)
}
