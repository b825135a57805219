//! Reconstruction experiments with synthetic noisy data: multilevel runs
//! against the two-inclusion phantom, error reports and observed
//! convergence orders.

pub mod data;
pub mod noise;
pub mod phantom;

pub use data::{generate_exact_data, restrict_data};
pub use noise::{add_noise, noise_stream, NoiseMode, NoiseSpec, RNG_ID};
pub use phantom::{boundary_current, measurement_patterns, Phantom};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fem::{assemble_load, assemble_mass};
use crate::forward::{forward_pair, Measurement};
use crate::mesh::{Mesh, NodalField};
use crate::optimizer::{
    gradient_l2_norm, multilevel_reconstruct, IterationRecord, LevelSchedule, StopReason,
};
use crate::solve::SolverOptions;

/// Which of the three synthetic studies to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExampleId {
    /// Level-coupled noise, single measurement: convergence history study.
    One,
    /// Fixed noise amplitudes, single measurement: noise sensitivity study.
    Two,
    /// Fixed noise amplitude, growing measurement sets.
    Three,
}

impl ExampleId {
    pub fn number(self) -> u8 {
        match self {
            ExampleId::One => 1,
            ExampleId::Two => 2,
            ExampleId::Three => 3,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(ExampleId::One),
            2 => Ok(ExampleId::Two),
            3 => Ok(ExampleId::Three),
            other => Err(Error::invalid(format!("unknown example {other}; expected 1, 2 or 3"))),
        }
    }
}

/// Settings of an experiment run. The defaults reproduce the reference
/// setup: ladder 4..64 with data generated at level 128, conductivity
/// bounds [0.05, 10], level-coupled regularization `0.01 * sqrt(h)` with
/// the smoothing parameter tied to it, start value 1.5, initial step 0.75.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    /// Reconstruction levels, ascending, each dividing the next.
    pub levels: Vec<u32>,
    /// Level on which the exact data is generated.
    pub data_level: u32,
    pub seed: u64,
    /// Fixed noise amplitude; `None` couples it to the level.
    pub theta: Option<f64>,
    /// Amplitudes swept by the noise sensitivity study.
    pub thetas: Vec<f64>,
    /// Measurement set sizes swept by the multi-measurement study.
    pub measurement_counts: Vec<usize>,
    pub lower: f64,
    pub upper: f64,
    pub rho_scale: f64,
    /// Smoothing parameter override; `None` ties it to the level weight.
    pub epsilon: Option<f64>,
    pub q0: f64,
    pub beta0: f64,
    pub tau: f64,
    pub max_iterations: usize,
    pub reset_beta: bool,
    pub solver: SolverOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            levels: vec![4, 8, 16, 32, 64],
            data_level: 128,
            seed: 1,
            theta: None,
            thetas: vec![0.005, 0.01, 0.05, 0.1],
            measurement_counts: vec![1, 6, 16],
            lower: 0.05,
            upper: 10.0,
            rho_scale: 0.01,
            epsilon: None,
            q0: 1.5,
            beta0: 0.75,
            tau: 1e-4,
            max_iterations: 1000,
            reset_beta: false,
            solver: SolverOptions::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::config("at least one reconstruction level is required"));
        }
        for pair in self.levels.windows(2) {
            if pair[1] <= pair[0] || pair[1] % pair[0] != 0 {
                return Err(Error::config(format!(
                    "levels must ascend by integer factors, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        let finest = *self.levels.last().unwrap();
        if self.data_level < finest || self.data_level % finest != 0 {
            return Err(Error::config(format!(
                "data level {} must be a multiple of the finest level {finest}",
                self.data_level
            )));
        }
        if let Some(theta) = self.theta {
            if !(theta >= 0.0) {
                return Err(Error::config("noise amplitude must be nonnegative"));
            }
        }
        if self.thetas.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::config("noise amplitudes must be nonnegative"));
        }
        if !(self.lower > 0.0 && self.upper > self.lower) {
            return Err(Error::config("bounds must satisfy 0 < lower < upper"));
        }
        if !(self.rho_scale >= 0.0) {
            return Err(Error::config("regularization scale must be nonnegative"));
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return Err(Error::config("smoothing parameter must be positive"));
            }
        }
        if !(self.beta0 > 0.0 && self.tau > 0.0) {
            return Err(Error::config("step size and acceptance weight must be positive"));
        }
        for &count in &self.measurement_counts {
            measurement_patterns(count)?;
        }
        Ok(())
    }

    fn schedule(&self) -> LevelSchedule {
        LevelSchedule {
            levels: self.levels.clone(),
            q0_value: self.q0,
            lower: self.lower,
            upper: self.upper,
            rho_scale: self.rho_scale,
            epsilon: self.epsilon,
            tau: self.tau,
            beta0: self.beta0,
            max_iterations: self.max_iterations,
            reset_beta: self.reset_beta,
            solver: self.solver,
        }
    }
}

/// Error figures of one reconstruction level.
#[derive(Clone, Copy, Debug)]
pub struct ErrorReport {
    pub level: u32,
    pub h: f64,
    pub rho: f64,
    /// Noise amplitude applied on this level.
    pub theta: f64,
    /// Boundary data error, averaged over the measurements.
    pub delta: f64,
    /// Accepted descent steps.
    pub iterations: usize,
    /// Final value of the stopping tolerance.
    pub tolerance: f64,
    /// L2 distance of the reconstruction from the interpolated phantom.
    pub error_q: f64,
    /// L2 distance between the current-driven states of the reconstructed
    /// and the phantom conductivity, for the first measurement.
    pub error_neumann: f64,
    /// Same for the voltage-driven states.
    pub error_dirichlet: f64,
}

/// Everything recorded about one level of a reconstruction ladder.
#[derive(Clone, Debug)]
pub struct LevelReport {
    pub report: ErrorReport,
    pub records: Vec<IterationRecord>,
    pub stop: StopReason,
    pub q: NodalField,
    pub q_true: NodalField,
    pub state_neumann: NodalField,
    pub state_dirichlet: NodalField,
}

/// Observed convergence orders between consecutive ladder levels.
#[derive(Clone, Debug, PartialEq)]
pub struct EocSeries {
    pub rates: Vec<f64>,
    pub mean: f64,
}

/// Computes pairwise observed convergence orders from (mesh size, error)
/// pairs: `(ln e1 - ln e2) / (ln h1 - ln h2)` for consecutive entries,
/// plus their mean.
pub fn compute_eoc(history: &[(f64, f64)]) -> Result<EocSeries> {
    if history.len() < 2 {
        return Err(Error::invalid("convergence orders need at least two levels"));
    }
    for &(h, e) in history {
        if !(h > 0.0) || !(e > 0.0) {
            return Err(Error::invalid("mesh sizes and errors must be positive"));
        }
    }
    let mut rates = Vec::with_capacity(history.len() - 1);
    for pair in history.windows(2) {
        let (h1, e1) = pair[0];
        let (h2, e2) = pair[1];
        if h1 == h2 {
            return Err(Error::invalid("mesh sizes must be distinct"));
        }
        rates.push((e1.ln() - e2.ln()) / (h1.ln() - h2.ln()));
    }
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    Ok(EocSeries { rates, mean })
}

/// One column of an example: a fixed noise setting and measurement count,
/// reconstructed across the whole level ladder.
#[derive(Clone, Debug)]
pub struct ExperimentCell {
    /// Filename-friendly tag, empty for single-cell examples.
    pub label: String,
    /// Fixed noise amplitude of the cell, `None` if level-coupled.
    pub theta: Option<f64>,
    pub measurement_count: usize,
    pub levels: Vec<LevelReport>,
    pub eoc_q: Option<EocSeries>,
    pub eoc_neumann: Option<EocSeries>,
    pub eoc_dirichlet: Option<EocSeries>,
}

/// A full example run.
#[derive(Clone, Debug)]
pub struct ExampleRun {
    pub example: ExampleId,
    pub cells: Vec<ExperimentCell>,
}

/// Reconstruction errors with the fields needed to report them.
pub struct ErrorMetrics {
    pub error_q: f64,
    pub error_neumann: f64,
    pub error_dirichlet: f64,
    pub q_true: NodalField,
    pub state_neumann: NodalField,
    pub state_dirichlet: NodalField,
}

/// Compares a reconstruction against the interpolated phantom: the L2
/// conductivity error and the L2 distances between the forward states.
/// The reconstructed states are driven by the (noisy) measurement the run
/// used, the phantom states by the exact measurement.
pub fn error_metrics(
    mesh: &Mesh,
    phantom: &Phantom,
    q: &NodalField,
    measurement: &Measurement,
    exact: &Measurement,
    options: &SolverOptions,
) -> Result<ErrorMetrics> {
    q.check_mesh(mesh)?;
    let q_true = phantom.interpolate(mesh);
    let mass = assemble_mass(mesh);
    let diff = NodalField::from_values(
        mesh,
        q.values().iter().zip(q_true.values()).map(|(a, b)| a - b).collect(),
    )?;
    let error_q = gradient_l2_norm(&mass, &diff)?;

    let load = assemble_load(mesh, &phantom.source())?;
    let pair_rec = forward_pair(mesh, q, &load, measurement, options)?;
    let pair_true = forward_pair(mesh, &q_true, &load, exact, options)?;
    let state_error = |a: &NodalField, b: &NodalField| -> Result<f64> {
        let diff = NodalField::from_values(
            mesh,
            a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect(),
        )?;
        gradient_l2_norm(&mass, &diff)
    };
    Ok(ErrorMetrics {
        error_q,
        error_neumann: state_error(&pair_rec.neumann, &pair_true.neumann)?,
        error_dirichlet: state_error(&pair_rec.dirichlet, &pair_true.dirichlet)?,
        q_true,
        state_neumann: pair_rec.neumann,
        state_dirichlet: pair_rec.dirichlet,
    })
}

/// Runs one noise setting and measurement count across the level ladder.
fn run_cell(
    phantom: &Phantom,
    fine_mesh: &Mesh,
    config: &ExperimentConfig,
    mode: NoiseMode,
    count: usize,
    label: String,
) -> Result<ExperimentCell> {
    let patterns = measurement_patterns(count)?;
    let fine_data: Vec<Measurement> = patterns
        .iter()
        .map(|&p| generate_exact_data(phantom, fine_mesh, p, &config.solver))
        .collect::<Result<_>>()?;

    let schedule = config.schedule();
    let source = phantom.source();
    let mut deltas: HashMap<u32, f64> = HashMap::new();
    let mut thetas: HashMap<u32, f64> = HashMap::new();
    let mut exact_first: HashMap<u32, Measurement> = HashMap::new();
    let outcomes = multilevel_reconstruct(&schedule, &source, |level, mesh| {
        let amplitude = mode.amplitude(mesh.mesh_size(), schedule.rho(mesh.mesh_size()));
        let mut measurements = Vec::with_capacity(fine_data.len());
        let mut delta_sum = 0.0;
        for (i, fine) in fine_data.iter().enumerate() {
            let exact = restrict_data(fine_mesh, fine, mesh)?;
            let (noisy, delta) =
                add_noise(mesh, &exact, amplitude, config.seed, noise_stream(level, i))?;
            delta_sum += delta;
            if i == 0 {
                exact_first.insert(level, exact);
            }
            measurements.push(noisy);
        }
        deltas.insert(level, delta_sum / fine_data.len() as f64);
        thetas.insert(level, amplitude);
        Ok(measurements)
    })?;

    let mut levels = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        let mesh = Mesh::structured(outcome.level)?;
        let metrics = error_metrics(
            &mesh,
            phantom,
            &outcome.q,
            &outcome.measurements[0],
            &exact_first[&outcome.level],
            &config.solver,
        )?;
        let last = outcome.records.last().expect("runs always have records");
        levels.push(LevelReport {
            report: ErrorReport {
                level: outcome.level,
                h: mesh.mesh_size(),
                rho: outcome.rho,
                theta: thetas[&outcome.level],
                delta: deltas[&outcome.level],
                iterations: last.iteration,
                tolerance: last.tolerance,
                error_q: metrics.error_q,
                error_neumann: metrics.error_neumann,
                error_dirichlet: metrics.error_dirichlet,
            },
            records: outcome.records,
            stop: outcome.stop,
            q: outcome.q,
            q_true: metrics.q_true,
            state_neumann: metrics.state_neumann,
            state_dirichlet: metrics.state_dirichlet,
        });
    }

    let series = |value: fn(&ErrorReport) -> f64| -> Result<Option<EocSeries>> {
        if levels.len() < 2 {
            return Ok(None);
        }
        let history: Vec<(f64, f64)> =
            levels.iter().map(|l| (l.report.h, value(&l.report))).collect();
        compute_eoc(&history).map(Some)
    };
    let eoc_q = series(|r| r.error_q)?;
    let eoc_neumann = series(|r| r.error_neumann)?;
    let eoc_dirichlet = series(|r| r.error_dirichlet)?;

    Ok(ExperimentCell {
        label,
        theta: match mode {
            NoiseMode::Fixed(t) => Some(t),
            NoiseMode::LevelCoupled => None,
        },
        measurement_count: count,
        levels,
        eoc_q,
        eoc_neumann,
        eoc_dirichlet,
    })
}

/// Runs one of the three studies with the given settings.
pub fn run_example(example: ExampleId, config: &ExperimentConfig) -> Result<ExampleRun> {
    config.validate()?;
    let phantom = Phantom::new();
    let fine_mesh = Mesh::structured(config.data_level)?;

    let cells = match example {
        ExampleId::One => {
            let mode = match config.theta {
                Some(theta) => NoiseMode::Fixed(theta),
                None => NoiseMode::LevelCoupled,
            };
            vec![run_cell(&phantom, &fine_mesh, config, mode, 1, String::new())?]
        }
        ExampleId::Two => {
            let mut cells = Vec::with_capacity(config.thetas.len());
            for &theta in &config.thetas {
                cells.push(run_cell(
                    &phantom,
                    &fine_mesh,
                    config,
                    NoiseMode::Fixed(theta),
                    1,
                    format!("theta_{theta}"),
                )?);
            }
            cells
        }
        ExampleId::Three => {
            let theta = config.theta.unwrap_or(0.1);
            let mut cells = Vec::with_capacity(config.measurement_counts.len());
            for &count in &config.measurement_counts {
                cells.push(run_cell(
                    &phantom,
                    &fine_mesh,
                    config,
                    NoiseMode::Fixed(theta),
                    count,
                    format!("patterns_{count}"),
                )?);
            }
            cells
        }
    };
    Ok(ExampleRun { example, cells })
}

/// Runs a single reconstruction ladder outside the example presets, with
/// the noise mode taken from the configuration.
pub fn run_reconstruction(config: &ExperimentConfig) -> Result<ExperimentCell> {
    config.validate()?;
    let phantom = Phantom::new();
    let fine_mesh = Mesh::structured(config.data_level)?;
    let mode = match config.theta {
        Some(theta) => NoiseMode::Fixed(theta),
        None => NoiseMode::LevelCoupled,
    };
    run_cell(&phantom, &fine_mesh, config, mode, 1, String::new())
}
