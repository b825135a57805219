//! Behavior of the experiment driver on reduced ladders: report
//! consistency, determinism, and the directional effects of noise level
//! and measurement count on the reconstruction error.

use eit_core::experiments::{
    generate_exact_data, restrict_data, run_example, run_reconstruction, ExampleId,
    ExperimentCell, ExperimentConfig, Phantom,
};
use eit_core::solve::SolverOptions;
use eit_core::Mesh;

/// A ladder small enough for repeated statistical runs.
fn reduced_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        levels: vec![4, 8, 16],
        data_level: 32,
        seed,
        max_iterations: 300,
        ..ExperimentConfig::default()
    }
}

fn final_error_q(cell: &ExperimentCell) -> f64 {
    cell.levels.last().unwrap().report.error_q
}

#[test]
fn reports_are_internally_consistent() {
    let config = ExperimentConfig { levels: vec![4, 8], data_level: 16, ..reduced_config(1) };
    let cell = run_reconstruction(&config).unwrap();

    assert_eq!(cell.measurement_count, 1);
    assert_eq!(cell.theta, None);
    assert_eq!(cell.levels.len(), 2);
    for (report, &level) in cell.levels.iter().zip(&config.levels) {
        let r = &report.report;
        let mesh = Mesh::structured(level).unwrap();
        assert_eq!(r.level, level);
        assert_eq!(r.h, mesh.mesh_size());
        assert_eq!(r.rho, 0.01 * mesh.mesh_size().sqrt());
        // Level-coupled amplitude theta = h * sqrt(rho).
        assert_eq!(r.theta, mesh.mesh_size() * r.rho.sqrt());
        assert!(r.delta > 0.0);
        assert!(r.error_q > 0.0);
        assert!(r.error_neumann > 0.0);
        assert!(r.error_dirichlet > 0.0);
        let last = report.records.last().unwrap();
        assert_eq!(r.iterations, last.iteration);
        assert_eq!(r.tolerance, last.tolerance);
        assert_eq!(report.q.level(), level);
        assert_eq!(report.q_true.level(), level);
    }
    let eoc = cell.eoc_q.as_ref().expect("two levels give one rate");
    assert_eq!(eoc.rates.len(), 1);
    assert_eq!(eoc.mean, eoc.rates[0]);
    assert!(cell.eoc_neumann.is_some());
    assert!(cell.eoc_dirichlet.is_some());
}

#[test]
fn single_level_ladder_reports_no_convergence_orders() {
    let config = ExperimentConfig {
        levels: vec![4],
        data_level: 16,
        max_iterations: 50,
        ..ExperimentConfig::default()
    };
    let cell = run_reconstruction(&config).unwrap();
    assert_eq!(cell.levels.len(), 1);
    assert!(cell.eoc_q.is_none());
    assert!(cell.eoc_neumann.is_none());
    assert!(cell.eoc_dirichlet.is_none());
}

/// The whole pipeline is a pure function of its configuration: repeating a
/// run reproduces every reported number to the bit.
#[test]
fn identical_configs_reproduce_identical_results() {
    let config = ExperimentConfig {
        levels: vec![4, 8],
        data_level: 16,
        max_iterations: 60,
        ..reduced_config(7)
    };
    let first = run_reconstruction(&config).unwrap();
    let second = run_reconstruction(&config).unwrap();
    for (a, b) in first.levels.iter().zip(&second.levels) {
        assert_eq!(a.report.error_q.to_bits(), b.report.error_q.to_bits());
        assert_eq!(a.report.delta.to_bits(), b.report.delta.to_bits());
        assert_eq!(a.report.iterations, b.report.iterations);
        assert_eq!(a.records.len(), b.records.len());
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.objective.to_bits(), rb.objective.to_bits());
            assert_eq!(ra.step_size.to_bits(), rb.step_size.to_bits());
        }
        assert_eq!(a.q.values(), b.q.values());
    }
}

#[test]
fn the_seed_changes_the_noise_draws() {
    let base = ExperimentConfig {
        levels: vec![4],
        data_level: 8,
        max_iterations: 5,
        ..ExperimentConfig::default()
    };
    let one = run_reconstruction(&ExperimentConfig { seed: 1, ..base.clone() }).unwrap();
    let two = run_reconstruction(&ExperimentConfig { seed: 2, ..base.clone() }).unwrap();
    assert_ne!(
        one.levels[0].report.delta.to_bits(),
        two.levels[0].report.delta.to_bits(),
        "different seeds must perturb the data differently"
    );
}

/// The level-coupled noise amplitude shrinks with the mesh, so the reported
/// boundary data error decreases strictly along the ladder.
#[test]
fn level_coupled_data_error_decreases_along_the_ladder() {
    let cell = run_reconstruction(&reduced_config(3)).unwrap();
    for pair in cell.levels.windows(2) {
        assert!(
            pair[1].report.delta < pair[0].report.delta,
            "delta rose from {} to {}",
            pair[0].report.delta,
            pair[1].report.delta
        );
    }
}

/// Restricting fine data to the mesh it was generated on changes nothing.
#[test]
fn restriction_to_the_generating_mesh_is_the_identity() {
    let phantom = Phantom::new();
    let mesh = Mesh::structured(8).unwrap();
    let exact =
        generate_exact_data(&phantom, &mesh, [1.0, 2.0, 3.0, 4.0], &SolverOptions::default())
            .unwrap();
    let restricted = restrict_data(&mesh, &exact, &mesh).unwrap();
    assert_eq!(restricted, exact);
}

/// Stronger noise gives worse reconstructions: the seed-averaged final
/// error grows with the amplitude.
#[test]
fn noise_amplitude_drives_the_reconstruction_error() {
    let thetas = [0.005, 0.1];
    let mut means = [0.0; 2];
    let seeds: Vec<u64> = (1..=5).collect();
    for &seed in &seeds {
        let config =
            ExperimentConfig { thetas: thetas.to_vec(), ..reduced_config(seed) };
        let run = run_example(ExampleId::Two, &config).unwrap();
        assert_eq!(run.cells.len(), 2);
        for (mean, cell) in means.iter_mut().zip(&run.cells) {
            *mean += final_error_q(cell) / seeds.len() as f64;
        }
    }
    assert!(
        means[1] > means[0],
        "error at theta=0.1 ({}) should exceed error at theta=0.005 ({})",
        means[1],
        means[0]
    );
}

/// Averaging the misfit over more measurements does not hurt: the
/// seed-averaged final error with sixteen measurements stays at or below
/// the single-measurement error.
#[test]
fn more_measurements_do_not_worsen_the_reconstruction() {
    let mut mean_one = 0.0;
    let mut mean_many = 0.0;
    let seeds: Vec<u64> = (1..=5).collect();
    for &seed in &seeds {
        let config = ExperimentConfig {
            theta: Some(0.1),
            measurement_counts: vec![1, 16],
            ..reduced_config(seed)
        };
        let run = run_example(ExampleId::Three, &config).unwrap();
        assert_eq!(run.cells.len(), 2);
        assert_eq!(run.cells[0].measurement_count, 1);
        assert_eq!(run.cells[1].measurement_count, 16);
        mean_one += final_error_q(&run.cells[0]) / seeds.len() as f64;
        mean_many += final_error_q(&run.cells[1]) / seeds.len() as f64;
    }
    assert!(
        mean_many <= mean_one,
        "sixteen measurements ({mean_many}) should not be worse than one ({mean_one})"
    );
}

#[test]
fn example_cells_carry_their_sweep_labels() {
    let config = ExperimentConfig {
        levels: vec![4],
        data_level: 8,
        max_iterations: 10,
        thetas: vec![0.01, 0.05],
        measurement_counts: vec![1, 6],
        ..ExperimentConfig::default()
    };
    let two = run_example(ExampleId::Two, &config).unwrap();
    let labels: Vec<&str> = two.cells.iter().map(|c| c.label.as_str()).collect();
    assert_eq!(labels, ["theta_0.01", "theta_0.05"]);
    assert_eq!(two.cells[0].theta, Some(0.01));

    let three = run_example(ExampleId::Three, &config).unwrap();
    let labels: Vec<&str> = three.cells.iter().map(|c| c.label.as_str()).collect();
    assert_eq!(labels, ["patterns_1", "patterns_6"]);
    // The sweep reuses the default amplitude when none is set.
    assert_eq!(three.cells[0].theta, Some(0.1));

    let one = run_example(ExampleId::One, &config).unwrap();
    assert_eq!(one.cells.len(), 1);
    assert!(one.cells[0].label.is_empty());
}
