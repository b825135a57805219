//! File emission for experiment runs.
//!
//! Every file is written atomically: the content goes to a unique
//! temporary name in the target directory first and is renamed into place
//! only when complete, so a failing run never leaves partial files behind.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::experiments::{ExampleRun, ExperimentCell};
use crate::forward::Measurement;
use crate::mesh::{Mesh, NodalField};

use super::config::{emit_manifest, RunConfig};
use super::table::{error_table_csv, history_csv, measurement_csv};
use super::vtk::vtk_unstructured;

static TEMP_ID: AtomicU64 = AtomicU64::new(0);

/// Writes `content` to `path` atomically via a temporary file and rename.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("path {} has no file name", path.display())))?;
    let unique = TEMP_ID.fetch_add(1, Ordering::Relaxed);
    let mut temp_name = std::ffi::OsString::from(format!(".{}-", std::process::id()));
    temp_name.push(file_name);
    temp_name.push(format!(".{unique}.tmp"));
    let temp = path.with_file_name(temp_name);

    std::fs::write(&temp, content).map_err(|e| Error::io(temp.display().to_string(), e))?;
    if let Err(e) = std::fs::rename(&temp, path) {
        let _ = std::fs::remove_file(&temp);
        return Err(Error::io(path.display().to_string(), e));
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))
}

fn cell_prefix(base: &str, cell: &ExperimentCell) -> String {
    if cell.label.is_empty() {
        base.to_string()
    } else {
        format!("{base}_{}", cell.label)
    }
}

fn emit_cell(
    dir: &Path,
    prefix: &str,
    cell: &ExperimentCell,
    vtk: bool,
    written: &mut Vec<PathBuf>,
) -> Result<()> {
    let table_path = dir.join(format!("{prefix}_table.csv"));
    write_atomic(&table_path, &error_table_csv(cell))?;
    written.push(table_path);

    for level in &cell.levels {
        let history_path = dir.join(format!("{prefix}_history_l{}.csv", level.report.level));
        write_atomic(&history_path, &history_csv(&level.records))?;
        written.push(history_path);

        if vtk {
            let mesh = Mesh::structured(level.report.level)?;
            let error = NodalField::from_values(
                &mesh,
                level
                    .q
                    .values()
                    .iter()
                    .zip(level.q_true.values())
                    .map(|(a, b)| a - b)
                    .collect(),
            )?;
            let text = vtk_unstructured(
                &mesh,
                &[
                    ("q", &level.q),
                    ("q_true", &level.q_true),
                    ("q_error", &error),
                    ("state_neumann", &level.state_neumann),
                    ("state_dirichlet", &level.state_dirichlet),
                ],
            )?;
            let vtk_path = dir.join(format!("{prefix}_fields_l{}.vtk", level.report.level));
            write_atomic(&vtk_path, &text)?;
            written.push(vtk_path);
        }
    }
    Ok(())
}

/// Writes the tables, histories, field files and the manifest of an
/// example run into the configured output directory. Returns the paths
/// written, manifest first.
pub fn emit_example(run: &ExampleRun, config: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = &config.output.dir;
    ensure_dir(dir)?;
    let mut written = Vec::new();
    let manifest_path = dir.join("manifest.txt");
    write_atomic(&manifest_path, &emit_manifest(config))?;
    written.push(manifest_path);
    let base = format!("example{}", run.example.number());
    for cell in &run.cells {
        let prefix = cell_prefix(&base, cell);
        emit_cell(dir, &prefix, cell, config.output.vtk, &mut written)?;
    }
    Ok(written)
}

/// Writes the outputs of a single reconstruction ladder.
pub fn emit_reconstruction(cell: &ExperimentCell, config: &RunConfig) -> Result<Vec<PathBuf>> {
    let dir = &config.output.dir;
    ensure_dir(dir)?;
    let mut written = Vec::new();
    let manifest_path = dir.join("manifest.txt");
    write_atomic(&manifest_path, &emit_manifest(config))?;
    written.push(manifest_path);
    let prefix = cell_prefix("reconstruction", cell);
    emit_cell(dir, &prefix, cell, config.output.vtk, &mut written)?;
    Ok(written)
}

/// Writes a forward solve: the measurement data and, optionally, the field
/// file with the conductivity and both states.
pub fn emit_forward(
    mesh: &Mesh,
    measurement: &Measurement,
    fields: &[(&str, &NodalField)],
    config: &RunConfig,
) -> Result<Vec<PathBuf>> {
    let dir = &config.output.dir;
    ensure_dir(dir)?;
    let mut written = Vec::new();
    let manifest_path = dir.join("manifest.txt");
    write_atomic(&manifest_path, &emit_manifest(config))?;
    written.push(manifest_path);
    let csv_path = dir.join(format!("measurement_l{}.csv", mesh.level()));
    write_atomic(&csv_path, &measurement_csv(mesh, measurement))?;
    written.push(csv_path);
    if config.output.vtk {
        let vtk_path = dir.join(format!("forward_fields_l{}.vtk", mesh.level()));
        write_atomic(&vtk_path, &vtk_unstructured(mesh, fields)?)?;
        written.push(vtk_path);
    }
    Ok(written)
}
