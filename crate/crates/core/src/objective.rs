//! The regularized Kohn-Vogelius objective and its reduced gradient.
//!
//! For a conductivity `q` and a measurement pair, the misfit is the energy
//! of the gap between the current-driven and the voltage-driven state,
//!
//! ```text
//! misfit(q) = integral of q |grad(u_N - u_D)|^2
//! ```
//!
//! averaged over the measurements when there are several. Regularization
//! adds `rho` times the smoothed total variation
//! `integral of sqrt(|grad q|^2 + epsilon)`. The gradient with respect to
//! the nodal values of `q` has a closed form in the two states and needs no
//! adjoint solves: the misfit contributes
//! `integral of phi_j (|grad u_D|^2 - |grad u_N|^2)` per node `j` (averaged
//! over measurements), the regularizer contributes
//! `rho * integral of (grad q . grad phi_j) / sqrt(|grad q|^2 + epsilon)`.
//! Both integrands are constant per triangle, so the integrals are exact.

use crate::error::{Error, Result};
use crate::fem::{assemble_load, assemble_neumann_rhs, PiecewiseConstantSource, StiffnessAssembler};
use crate::forward::{ForwardPair, Measurement};
use crate::mesh::{Mesh, NodalField};
use crate::solve::{solve_dirichlet_system, solve_neumann_system, SolverOptions};

/// Parameters of the regularized objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveParams {
    /// Regularization weight, nonnegative.
    pub rho: f64,
    /// Total variation smoothing parameter, strictly positive.
    pub epsilon: f64,
    /// Lower conductivity bound, strictly positive.
    pub lower: f64,
    /// Upper conductivity bound.
    pub upper: f64,
}

impl ObjectiveParams {
    pub fn validated(rho: f64, epsilon: f64, lower: f64, upper: f64) -> Result<Self> {
        if !(rho >= 0.0) {
            return Err(Error::invalid("regularization weight must be nonnegative"));
        }
        if !(epsilon > 0.0) {
            return Err(Error::invalid("smoothing parameter must be positive"));
        }
        if !(lower > 0.0 && upper > lower) {
            return Err(Error::invalid("bounds must satisfy 0 < lower < upper"));
        }
        Ok(ObjectiveParams { rho, epsilon, lower, upper })
    }
}

/// Objective value split into its parts; `total = misfit + rho * tv`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveValue {
    pub total: f64,
    pub misfit: f64,
    pub tv: f64,
}

/// Kohn-Vogelius misfit of one forward pair: the conductivity-weighted
/// squared gradient of the gap between the two states.
pub fn kv_misfit(mesh: &Mesh, q: &NodalField, pair: &ForwardPair) -> Result<f64> {
    q.check_mesh(mesh)?;
    pair.neumann.check_mesh(mesh)?;
    pair.dirichlet.check_mesh(mesh)?;
    let un = pair.neumann.values();
    let ud = pair.dirichlet.values();
    let qv = q.values();
    let mut total = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let geo = mesh.triangle_geometry(t);
        let mut gx = 0.0;
        let mut gy = 0.0;
        for (k, &node) in tri.iter().enumerate() {
            let w = un[node] - ud[node];
            gx += w * geo.grads[k][0];
            gy += w * geo.grads[k][1];
        }
        let mean_q = (qv[tri[0]] + qv[tri[1]] + qv[tri[2]]) / 3.0;
        total += mean_q * (gx * gx + gy * gy) * geo.area;
    }
    Ok(total)
}

/// Smoothed total variation `integral of sqrt(|grad q|^2 + epsilon)`.
pub fn tv_smooth(mesh: &Mesh, q: &NodalField, epsilon: f64) -> Result<f64> {
    q.check_mesh(mesh)?;
    if !(epsilon > 0.0) {
        return Err(Error::invalid("smoothing parameter must be positive"));
    }
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let g = q.triangle_gradient(mesh, t);
        let area = mesh.triangle_geometry(t).area;
        total += (g[0] * g[0] + g[1] * g[1] + epsilon).sqrt() * area;
    }
    Ok(total)
}

/// Gradient of the regularized objective with respect to the nodal values
/// of `q`, given the forward pairs of all measurements at `q`.
pub fn kv_gradient(
    mesh: &Mesh,
    q: &NodalField,
    pairs: &[ForwardPair],
    params: &ObjectiveParams,
) -> Result<NodalField> {
    q.check_mesh(mesh)?;
    if pairs.is_empty() {
        return Err(Error::invalid("gradient needs at least one forward pair"));
    }
    for pair in pairs {
        pair.neumann.check_mesh(mesh)?;
        pair.dirichlet.check_mesh(mesh)?;
    }
    let weight = 1.0 / pairs.len() as f64;
    let qv = q.values();
    let mut grad = vec![0.0; mesh.num_nodes()];

    for (t, tri) in mesh.triangles().iter().enumerate() {
        let geo = mesh.triangle_geometry(t);
        // Misfit part: |grad u_D|^2 - |grad u_N|^2, averaged over pairs,
        // times the integral of the vertex basis functions, area/3.
        let mut gap = 0.0;
        for pair in pairs {
            let un = pair.neumann.values();
            let ud = pair.dirichlet.values();
            let (mut nx, mut ny, mut dx, mut dy) = (0.0, 0.0, 0.0, 0.0);
            for (k, &node) in tri.iter().enumerate() {
                nx += un[node] * geo.grads[k][0];
                ny += un[node] * geo.grads[k][1];
                dx += ud[node] * geo.grads[k][0];
                dy += ud[node] * geo.grads[k][1];
            }
            gap += (dx * dx + dy * dy) - (nx * nx + ny * ny);
        }
        let misfit_contrib = weight * gap * geo.area / 3.0;

        // Regularizer part: grad q . grad phi_j scaled by the smoothed norm.
        let (mut qx, mut qy) = (0.0, 0.0);
        for (k, &node) in tri.iter().enumerate() {
            qx += qv[node] * geo.grads[k][0];
            qy += qv[node] * geo.grads[k][1];
        }
        let denom = (qx * qx + qy * qy + params.epsilon).sqrt();
        for (k, &node) in tri.iter().enumerate() {
            let tv_contrib =
                params.rho * geo.area * (qx * geo.grads[k][0] + qy * geo.grads[k][1]) / denom;
            grad[node] += misfit_contrib + tv_contrib;
        }
    }
    NodalField::from_values(mesh, grad)
}

/// Evaluation engine for a fixed mesh, source and measurement set.
///
/// Holds everything that does not change while the conductivity varies:
/// the stiffness assembler with its precomputed sparsity pattern, the
/// assembled load vector, the per-measurement Neumann right hand sides and
/// the boundary constraint weights. The optimizer calls
/// [`KvObjective::evaluate`] and [`KvObjective::gradient`] in its inner
/// loop.
pub struct KvObjective<'a> {
    mesh: &'a Mesh,
    params: ObjectiveParams,
    options: SolverOptions,
    assembler: StiffnessAssembler,
    load: Vec<f64>,
    constraint: Vec<f64>,
    measurements: Vec<Measurement>,
    /// Per measurement: load plus boundary current functional.
    neumann_rhs: Vec<Vec<f64>>,
}

impl<'a> KvObjective<'a> {
    pub fn new(
        mesh: &'a Mesh,
        source: &PiecewiseConstantSource,
        measurements: Vec<Measurement>,
        params: ObjectiveParams,
        options: SolverOptions,
    ) -> Result<Self> {
        if measurements.is_empty() {
            return Err(Error::invalid("at least one measurement is required"));
        }
        for m in &measurements {
            m.check_mesh(mesh)?;
        }
        let load = assemble_load(mesh, source)?;
        let mut neumann_rhs = Vec::with_capacity(measurements.len());
        for m in &measurements {
            let boundary = assemble_neumann_rhs(mesh, m.current())?;
            neumann_rhs.push(load.iter().zip(&boundary).map(|(f, j)| f + j).collect());
        }
        Ok(KvObjective {
            mesh,
            params,
            options,
            assembler: StiffnessAssembler::new(mesh),
            load,
            constraint: mesh.boundary_lumped_weights(),
            measurements,
            neumann_rhs,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        self.mesh
    }

    pub fn params(&self) -> &ObjectiveParams {
        &self.params
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    fn check_feasible(&self, q: &NodalField) -> Result<()> {
        q.check_mesh(self.mesh)?;
        // Tiny slack tolerates representation round-off after projection.
        let slack = 1e-12 * self.params.upper;
        for &v in q.values() {
            if !(v >= self.params.lower - slack && v <= self.params.upper + slack) {
                return Err(Error::invalid(format!(
                    "conductivity value {v} violates the bounds [{}, {}]",
                    self.params.lower, self.params.upper
                )));
            }
        }
        Ok(())
    }

    /// Solves both states of every measurement at `q` with one assembly.
    pub fn solve_pairs(&self, q: &NodalField) -> Result<Vec<ForwardPair>> {
        self.check_feasible(q)?;
        let matrix = self.assembler.assemble(self.mesh, q)?;
        let mut pairs = Vec::with_capacity(self.measurements.len());
        for (m, rhs) in self.measurements.iter().zip(&self.neumann_rhs) {
            let neumann = solve_neumann_system(&matrix, rhs, &self.constraint, &self.options)?;
            let fixed: Vec<(usize, f64)> = self
                .mesh
                .boundary_nodes()
                .iter()
                .zip(m.voltage())
                .map(|(&node, &g)| (node, g))
                .collect();
            let dirichlet =
                solve_dirichlet_system(&matrix, &self.load, &fixed, &self.options)?;
            pairs.push(ForwardPair {
                neumann: NodalField::from_values(self.mesh, neumann.values)?,
                dirichlet: NodalField::from_values(self.mesh, dirichlet.values)?,
            });
        }
        Ok(pairs)
    }

    /// Objective value from already computed pairs.
    pub fn value_from_pairs(&self, q: &NodalField, pairs: &[ForwardPair]) -> Result<ObjectiveValue> {
        if pairs.len() != self.measurements.len() {
            return Err(Error::invalid("pair count does not match the measurement count"));
        }
        let mut misfit = 0.0;
        for pair in pairs {
            misfit += kv_misfit(self.mesh, q, pair)?;
        }
        misfit /= pairs.len() as f64;
        let tv = tv_smooth(self.mesh, q, self.params.epsilon)?;
        Ok(ObjectiveValue { total: misfit + self.params.rho * tv, misfit, tv })
    }

    /// Solves the forward pairs at `q` and evaluates the objective.
    pub fn evaluate(&self, q: &NodalField) -> Result<(ObjectiveValue, Vec<ForwardPair>)> {
        let pairs = self.solve_pairs(q)?;
        let value = self.value_from_pairs(q, &pairs)?;
        Ok((value, pairs))
    }

    /// Gradient at `q` given the pairs solved at the same `q`.
    pub fn gradient(&self, q: &NodalField, pairs: &[ForwardPair]) -> Result<NodalField> {
        if pairs.len() != self.measurements.len() {
            return Err(Error::invalid("pair count does not match the measurement count"));
        }
        kv_gradient(self.mesh, q, pairs, &self.params)
    }
}
