//! Command line driver for the conductivity reconstruction library.
//!
//! Subcommands cover the library end to end: `mesh-info` reports mesh
//! sizes, `forward` produces (optionally noisy) synthetic boundary data,
//! `reconstruct` runs one multilevel reconstruction ladder, and
//! `example 1|2|3` runs the built-in studies. Settings resolve in three
//! layers: built-in defaults, then a `--config` file, then flags.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eit_core::experiments::{
    add_noise, generate_exact_data, noise_stream, restrict_data, run_example, run_reconstruction,
    ExampleId, ExperimentCell, Phantom,
};
use eit_core::fem::assemble_load;
use eit_core::forward::forward_pair;
use eit_core::io::{emit_example, emit_forward, emit_reconstruction, parse_config, RunConfig};
use eit_core::{Error, Mesh, Result};

#[derive(Parser)]
#[command(
    name = "eit",
    version,
    about = "Conductivity reconstruction from noisy boundary measurements"
)]
struct Cli {
    /// Configuration file applied on top of the built-in defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory for tables, histories, fields and the manifest.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed of the noise generator.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fixed noise amplitude; when absent the amplitude is coupled to the
    /// mesh level where the command involves noise at all.
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Scale of the level-coupled regularization weight.
    #[arg(long = "rho-scale", global = true)]
    rho_scale: Option<f64>,
    /// Mesh refinement level. `mesh-info` and `forward` use it directly;
    /// `reconstruct` and `example` expand it into the ladder 4, 8, ..., level.
    #[arg(long, global = true)]
    level: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the size of the structured mesh at the selected level.
    MeshInfo,
    /// Solve the phantom forward problem and write the boundary data.
    Forward,
    /// Run one multilevel reconstruction and write its reports.
    Reconstruct,
    /// Run one of the built-in studies.
    Example {
        /// Study number: 1 (level-coupled noise), 2 (noise sweep),
        /// 3 (measurement-count sweep).
        number: u8,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code(&error))
        }
    }
}

/// Stable exit codes: 2 for configuration and argument errors, 3 when an
/// iterative solve fails, 4 for file system errors, 1 otherwise.
fn exit_code(error: &Error) -> u8 {
    match error {
        Error::InvalidArgument(_) | Error::Config(_) => 2,
        Error::SolverFailure { .. } => 3,
        Error::Io { .. } => 4,
        Error::Internal(_) => 1,
    }
}

fn run(cli: &Cli) -> Result<()> {
    let config = resolve_config(cli)?;
    match cli.command {
        Command::MeshInfo => mesh_info(single_level(cli, &config)),
        Command::Forward => forward(&config, single_level(cli, &config)),
        Command::Reconstruct => reconstruct(&config),
        Command::Example { number } => example(&config, number),
    }
}

/// Applies the flag overrides on top of the file (or default) settings and
/// validates the result.
fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out {
        config.output.dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        config.experiment.seed = seed;
    }
    if let Some(theta) = cli.theta {
        config.experiment.theta = Some(theta);
    }
    if let Some(scale) = cli.rho_scale {
        config.experiment.rho_scale = scale;
    }
    if let Some(level) = cli.level {
        if matches!(cli.command, Command::Reconstruct | Command::Example { .. }) {
            config.experiment.levels = doubling_ladder(level)?;
        }
    }
    config.experiment.validate()?;
    Ok(config)
}

/// Expands a finest level into the ladder 4, 8, ..., level.
fn doubling_ladder(level: u32) -> Result<Vec<u32>> {
    let mut ladder = vec![level];
    let mut l = level;
    while l > 4 && l % 2 == 0 {
        l /= 2;
        ladder.push(l);
    }
    if l != 4 {
        return Err(Error::config(format!(
            "level {level} is not reachable by doubling from 4"
        )));
    }
    ladder.reverse();
    Ok(ladder)
}

/// The level used by the single-mesh commands: the flag if given, else the
/// finest level of the configured ladder.
fn single_level(cli: &Cli, config: &RunConfig) -> u32 {
    cli.level.unwrap_or_else(|| *config.experiment.levels.last().unwrap())
}

fn mesh_info(level: u32) -> Result<()> {
    let mesh = Mesh::structured(level)?;
    println!(
        "{} nodes, {} triangles, h={:.4}",
        mesh.num_nodes(),
        mesh.num_triangles(),
        mesh.mesh_size()
    );
    println!(
        "{} boundary nodes, {} boundary edges",
        mesh.boundary_nodes().len(),
        mesh.boundary_edges().len()
    );
    Ok(())
}

fn forward(config: &RunConfig, level: u32) -> Result<()> {
    let settings = &config.experiment;
    if settings.data_level < level || settings.data_level % level != 0 {
        return Err(Error::config(format!(
            "data level {} is not a multiple of level {level}; set [mesh] data_level",
            settings.data_level
        )));
    }
    let phantom = Phantom::new();
    let mesh = Mesh::structured(level)?;
    let fine = Mesh::structured(settings.data_level)?;
    let exact = generate_exact_data(&phantom, &fine, [1.0, 2.0, 3.0, 4.0], &settings.solver)?;
    let restricted = restrict_data(&fine, &exact, &mesh)?;
    let (measurement, delta) = match settings.theta {
        Some(theta) => {
            add_noise(&mesh, &restricted, theta, settings.seed, noise_stream(level, 0))?
        }
        None => (restricted, 0.0),
    };

    let q = phantom.interpolate(&mesh);
    let load = assemble_load(&mesh, &phantom.source())?;
    let pair = forward_pair(&mesh, &q, &load, &measurement, &settings.solver)?;
    let fields =
        [("q", &q), ("state_neumann", &pair.neumann), ("state_dirichlet", &pair.dirichlet)];
    let written = emit_forward(&mesh, &measurement, &fields, config)?;
    if settings.theta.is_some() {
        println!("data error delta = {delta:.4e}");
    }
    report_written(&written);
    Ok(())
}

fn reconstruct(config: &RunConfig) -> Result<()> {
    let cell = run_reconstruction(&config.experiment)?;
    print_cell(&cell);
    let written = emit_reconstruction(&cell, config)?;
    report_written(&written);
    Ok(())
}

fn example(config: &RunConfig, number: u8) -> Result<()> {
    let id = ExampleId::from_number(number)?;
    let run = run_example(id, &config.experiment)?;
    for cell in &run.cells {
        print_cell(cell);
    }
    let written = emit_example(&run, config)?;
    report_written(&written);
    Ok(())
}

fn print_cell(cell: &ExperimentCell) {
    if !cell.label.is_empty() {
        println!("[{}]", cell.label);
    }
    for level in &cell.levels {
        let r = &level.report;
        println!(
            "level {:>3}: {:>4} iterations, error_q={:.4e}, error_N={:.4e}, error_D={:.4e}, delta={:.4e}",
            r.level, r.iterations, r.error_q, r.error_neumann, r.error_dirichlet, r.delta
        );
    }
    if let (Some(q), Some(n), Some(d)) = (&cell.eoc_q, &cell.eoc_neumann, &cell.eoc_dirichlet) {
        println!("mean EOC: q={:.4}, state_N={:.4}, state_D={:.4}", q.mean, n.mean, d.mean);
    }
}

fn report_written(paths: &[PathBuf]) {
    for path in paths {
        println!("wrote {}", path.display());
    }
}
