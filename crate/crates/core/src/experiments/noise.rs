//! Synthetic measurement noise.
//!
//! Random draws use the ChaCha8 stream cipher generator, seeded from a
//! 64-bit run seed with a per-(level, measurement) stream id, so every
//! measurement is perturbed reproducibly and independently of how many
//! other measurements exist.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::forward::Measurement;
use crate::mesh::Mesh;

/// Identifier of the random generator written into run manifests.
pub const RNG_ID: &str = "chacha8";

/// How the noise amplitude is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseMode {
    /// Amplitude coupled to the discretization: `theta = h * sqrt(rho)`.
    LevelCoupled,
    /// Fixed amplitude on every level.
    Fixed(f64),
}

impl NoiseMode {
    pub fn amplitude(&self, h: f64, rho: f64) -> f64 {
        match *self {
            NoiseMode::LevelCoupled => h * rho.sqrt(),
            NoiseMode::Fixed(theta) => theta,
        }
    }
}

/// Noise settings of a reconstruction run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub mode: NoiseMode,
    pub seed: u64,
}

/// Stream id for the draws of one measurement on one level.
pub fn noise_stream(level: u32, measurement: usize) -> u64 {
    ((level as u64) << 32) | measurement as u64
}

/// Perturbs a measurement with uniform noise of the given amplitude and
/// returns it together with the boundary data error
/// `delta = ||j_noisy - j|| + ||g_noisy - g||` in the boundary L2 norm.
///
/// One uniform draw in (-1,1) is made per boundary node for the current
/// and one per boundary node for the voltage, in counterclockwise order;
/// the perturbation of an edge current is the average of its endpoint
/// draws. The voltage error uses the lumped (trapezoidal) boundary
/// quadrature; the current error is exact since the perturbation is
/// constant per edge.
pub fn add_noise(
    mesh: &Mesh,
    exact: &Measurement,
    amplitude: f64,
    seed: u64,
    stream: u64,
) -> Result<(Measurement, f64)> {
    exact.check_mesh(mesh)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);

    let n_boundary = mesh.boundary_nodes().len();
    let current_draws: Vec<f64> = (0..n_boundary).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let voltage_draws: Vec<f64> = (0..n_boundary).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let mut current = exact.current().to_vec();
    let mut current_error2 = 0.0;
    for (k, edge) in mesh.boundary_edges().iter().enumerate() {
        let draw = 0.5 * (current_draws[k] + current_draws[(k + 1) % n_boundary]);
        let perturbation = amplitude * draw;
        current[k] += perturbation;
        current_error2 += mesh.edge_length(edge) * perturbation * perturbation;
    }

    let weights = mesh.boundary_lumped_weights();
    let mut voltage = exact.voltage().to_vec();
    let mut voltage_error2 = 0.0;
    for (k, &node) in mesh.boundary_nodes().iter().enumerate() {
        let perturbation = amplitude * voltage_draws[k];
        voltage[k] += perturbation;
        voltage_error2 += weights[node] * perturbation * perturbation;
    }

    let delta = current_error2.sqrt() + voltage_error2.sqrt();
    Ok((Measurement::new(mesh, current, voltage)?, delta))
}
