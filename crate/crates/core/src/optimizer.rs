//! Projected gradient descent with an Armijo line search, and the
//! coarse-to-fine reconstruction driver built on top of it.
//!
//! Each iteration forms the trial iterate `clamp(q - beta * grad, bounds)`
//! and accepts it when the monitored quantity
//!
//! ```text
//! L = objective(trial) - objective(q) + tau * beta * ||trial - q||_{L2}^2
//! ```
//!
//! is nonpositive; otherwise the step size is halved and the trial is
//! recomputed. The accepted step size carries over to the next iteration
//! instead of being reset, which in practice lets the step settle near the
//! largest acceptable value. Iteration stops when
//!
//! ```text
//! tolerance = ||grad||_{L2} - tau1 - tau2 * ||grad at start||_{L2}
//! ```
//!
//! is nonpositive, evaluated at the just-accepted iterate, or when the
//! iteration cap is reached. A line search whose step size underflows the
//! stall threshold ends the run gracefully with the incumbent iterate and
//! a diagnostic stop reason.

use crate::error::{Error, Result};
use crate::fem::{assemble_mass, PiecewiseConstantSource};
use crate::forward::Measurement;
use crate::mesh::{interpolate_nodal, Mesh, NodalField};
use crate::objective::{KvObjective, ObjectiveParams};
use crate::solve::SolverOptions;
use crate::sparse::CsrMatrix;

/// Settings of the projected Armijo iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmijoConfig {
    /// Initial step size.
    pub beta0: f64,
    /// Weight of the squared step norm in the acceptance test.
    pub tau: f64,
    /// Absolute part of the stopping threshold.
    pub tau1: f64,
    /// Part of the stopping threshold relative to the initial gradient norm.
    pub tau2: f64,
    /// Iteration cap.
    pub max_iterations: usize,
    /// Reset the step size to `beta0` at the start of every line search
    /// instead of carrying the previous accepted value.
    pub reset_beta: bool,
    /// Step sizes below this value end the run as stalled.
    pub stall_beta: f64,
}

impl ArmijoConfig {
    /// Default settings with the mesh-dependent stopping threshold
    /// `tau1 = 1e-3 * sqrt(h)`, `tau2 = 1e-2 * sqrt(h)`.
    pub fn for_mesh_size(h: f64) -> Self {
        ArmijoConfig {
            beta0: 0.75,
            tau: 1e-4,
            tau1: 1e-3 * h.sqrt(),
            tau2: 1e-2 * h.sqrt(),
            max_iterations: 1000,
            reset_beta: false,
            stall_beta: 1e-16,
        }
    }
}

/// Why the iteration ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// The stopping tolerance became nonpositive.
    Converged,
    /// The iteration cap was exhausted.
    IterationCap,
    /// The line search could not find an acceptable step.
    Stalled,
}

/// State of one accepted iterate (row `iteration = 0` is the start value).
#[derive(Clone, Copy, Debug)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub misfit: f64,
    pub tv: f64,
    pub gradient_norm: f64,
    pub tolerance: f64,
    pub step_size: f64,
    /// False only for the initial record.
    pub accepted: bool,
}

/// Outcome of a projected Armijo run.
#[derive(Clone, Debug)]
pub struct ArmijoResult {
    pub q: NodalField,
    pub records: Vec<IterationRecord>,
    pub stop: StopReason,
}

impl ArmijoResult {
    /// Number of accepted descent steps.
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iteration)
    }

    pub fn final_record(&self) -> &IterationRecord {
        self.records.last().expect("a run always has the initial record")
    }
}

/// Clamps every nodal value into `[lower, upper]`.
pub fn project(field: &mut NodalField, lower: f64, upper: f64) {
    for v in field.values_mut() {
        *v = v.clamp(lower, upper);
    }
}

/// L2 norm of a nodal field through the consistent mass matrix.
pub fn gradient_l2_norm(mass: &CsrMatrix, field: &NodalField) -> Result<f64> {
    let form = mass.quadratic_form(field.values());
    if form < 0.0 {
        return Err(Error::internal(format!(
            "mass quadratic form is negative ({form:.3e}); the matrix is not positive definite"
        )));
    }
    Ok(form.sqrt())
}

fn l2_distance(mass: &CsrMatrix, a: &NodalField, b: &NodalField) -> f64 {
    let diff: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
    mass.quadratic_form(&diff)
}

/// Projected Armijo descent on the given objective from the start value `q0`.
pub fn projected_armijo(
    objective: &KvObjective,
    q0: &NodalField,
    config: &ArmijoConfig,
) -> Result<ArmijoResult> {
    projected_armijo_observed(objective, q0, config, |_, _| {})
}

/// Variant of [`projected_armijo`] that reports every accepted iterate to
/// an observer, including the initial one.
pub fn projected_armijo_observed(
    objective: &KvObjective,
    q0: &NodalField,
    config: &ArmijoConfig,
    mut observer: impl FnMut(&NodalField, &IterationRecord),
) -> Result<ArmijoResult> {
    if !(config.beta0 > 0.0) || !(config.tau > 0.0) {
        return Err(Error::invalid("step size and acceptance weight must be positive"));
    }
    let mesh = objective.mesh();
    let params = *objective.params();
    let mass = assemble_mass(mesh);

    let mut q = q0.clone();
    q.check_mesh(mesh)?;
    project(&mut q, params.lower, params.upper);

    let (mut value, mut pairs) = objective.evaluate(&q)?;
    let mut gradient = objective.gradient(&q, &pairs)?;
    let mut gradient_norm = gradient_l2_norm(&mass, &gradient)?;
    let initial_gradient_norm = gradient_norm;
    let tolerance_of = |g: f64| g - config.tau1 - config.tau2 * initial_gradient_norm;
    let mut tolerance = tolerance_of(gradient_norm);
    let mut beta = config.beta0;

    let mut records = Vec::new();
    let record = IterationRecord {
        iteration: 0,
        objective: value.total,
        misfit: value.misfit,
        tv: value.tv,
        gradient_norm,
        tolerance,
        step_size: beta,
        accepted: false,
    };
    observer(&q, &record);
    records.push(record);

    let mut iteration = 0;
    while tolerance > 0.0 && iteration < config.max_iterations {
        if config.reset_beta {
            beta = config.beta0;
        }
        // Line search: halve the step until the monitored quantity is
        // nonpositive.
        let (trial, trial_value, trial_pairs) = loop {
            let mut trial = q.clone();
            for (t, g) in trial.values_mut().iter_mut().zip(gradient.values()) {
                *t = (*t - beta * g).clamp(params.lower, params.upper);
            }
            let (trial_value, trial_pairs) = objective.evaluate(&trial)?;
            let step_norm2 = l2_distance(&mass, &trial, &q);
            let monitored = trial_value.total - value.total + config.tau * beta * step_norm2;
            if monitored <= 0.0 {
                break (trial, trial_value, trial_pairs);
            }
            beta *= 0.5;
            if beta < config.stall_beta {
                return Ok(ArmijoResult { q, records, stop: StopReason::Stalled });
            }
        };

        q = trial;
        value = trial_value;
        pairs = trial_pairs;
        iteration += 1;
        gradient = objective.gradient(&q, &pairs)?;
        gradient_norm = gradient_l2_norm(&mass, &gradient)?;
        tolerance = tolerance_of(gradient_norm);

        let record = IterationRecord {
            iteration,
            objective: value.total,
            misfit: value.misfit,
            tv: value.tv,
            gradient_norm,
            tolerance,
            step_size: beta,
            accepted: true,
        };
        observer(&q, &record);
        records.push(record);
    }

    let stop = if tolerance <= 0.0 { StopReason::Converged } else { StopReason::IterationCap };
    Ok(ArmijoResult { q, records, stop })
}

/// Parameters of the coarse-to-fine reconstruction ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSchedule {
    /// Mesh levels in ascending order; each must divide the next so the
    /// iterate can be carried up by nested interpolation.
    pub levels: Vec<u32>,
    /// Constant start value on the coarsest level.
    pub q0_value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Regularization weight per level: `rho = rho_scale * sqrt(h)`.
    pub rho_scale: f64,
    /// Smoothing parameter; `None` ties it to the level weight, `epsilon = rho`.
    pub epsilon: Option<f64>,
    pub tau: f64,
    pub beta0: f64,
    pub max_iterations: usize,
    pub reset_beta: bool,
    pub solver: SolverOptions,
}

impl LevelSchedule {
    /// The standard ladder 4, 8, 16, 32, 64 with the default parameters.
    pub fn standard() -> Self {
        LevelSchedule {
            levels: vec![4, 8, 16, 32, 64],
            q0_value: 1.5,
            lower: 0.05,
            upper: 10.0,
            rho_scale: 0.01,
            epsilon: None,
            tau: 1e-4,
            beta0: 0.75,
            max_iterations: 1000,
            reset_beta: false,
            solver: SolverOptions::default(),
        }
    }

    /// Regularization weight used on a mesh of size `h`.
    pub fn rho(&self, h: f64) -> f64 {
        self.rho_scale * h.sqrt()
    }

    fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::invalid("the level ladder must not be empty"));
        }
        for pair in self.levels.windows(2) {
            if pair[1] <= pair[0] || pair[1] % pair[0] != 0 {
                return Err(Error::invalid(format!(
                    "levels must ascend by integer factors, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(())
    }
}

/// Result of one rung of the reconstruction ladder.
#[derive(Clone, Debug)]
pub struct LevelOutcome {
    pub level: u32,
    pub rho: f64,
    pub epsilon: f64,
    pub q: NodalField,
    pub records: Vec<IterationRecord>,
    pub stop: StopReason,
    /// The measurements the level was reconstructed from.
    pub measurements: Vec<Measurement>,
}

/// Runs the reconstruction across the level ladder, interpolating each
/// final iterate as the start value of the next level. `data` supplies the
/// measurement set for every level.
pub fn multilevel_reconstruct(
    schedule: &LevelSchedule,
    source: &PiecewiseConstantSource,
    mut data: impl FnMut(u32, &Mesh) -> Result<Vec<Measurement>>,
) -> Result<Vec<LevelOutcome>> {
    schedule.validate()?;
    let mut outcomes: Vec<LevelOutcome> = Vec::with_capacity(schedule.levels.len());
    let mut carried: Option<(Mesh, NodalField)> = None;

    for &level in &schedule.levels {
        let mesh = Mesh::structured(level)?;
        let measurements = data(level, &mesh)?;
        let h = mesh.mesh_size();
        let rho = schedule.rho(h);
        let epsilon = schedule.epsilon.unwrap_or(rho);
        let params = ObjectiveParams::validated(rho, epsilon, schedule.lower, schedule.upper)?;
        let engine =
            KvObjective::new(&mesh, source, measurements.clone(), params, schedule.solver)?;

        let q0 = match &carried {
            None => NodalField::constant(&mesh, schedule.q0_value),
            Some((coarse, q)) => interpolate_nodal(coarse, q, &mesh)?,
        };
        let config = ArmijoConfig {
            beta0: schedule.beta0,
            tau: schedule.tau,
            max_iterations: schedule.max_iterations,
            reset_beta: schedule.reset_beta,
            ..ArmijoConfig::for_mesh_size(h)
        };
        let result = projected_armijo(&engine, &q0, &config)?;
        carried = Some((mesh, result.q.clone()));
        outcomes.push(LevelOutcome {
            level,
            rho,
            epsilon,
            q: result.q,
            records: result.records,
            stop: result.stop,
            measurements,
        });
    }
    Ok(outcomes)
}
