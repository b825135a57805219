//! The file layer end to end: a mini study emitted to disk honors the file
//! contract, its manifest reproduces the run byte for byte, and the written
//! artifacts parse back consistently.

use std::fs;
use std::path::{Path, PathBuf};

use eit_core::experiments::{run_example, ExampleId};
use eit_core::io::{emit_example, emit_manifest, parse_config, parse_config_str, RunConfig};

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("eit-roundtrip-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }

    fn path(&self) -> &Path {
        &self.0
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn mini_config(dir: &Path) -> RunConfig {
    let mut config = RunConfig::default();
    config.experiment.levels = vec![4, 8];
    config.experiment.data_level = 16;
    config.experiment.max_iterations = 40;
    config.experiment.seed = 11;
    config.output.dir = dir.to_path_buf();
    config
}

/// A study over two levels writes the manifest, one error table per cell,
/// one history per level and one field file per level.
#[test]
fn emitted_files_honor_the_contract() {
    let dir = TempDir::new("contract");
    let config = mini_config(dir.path());
    let run = run_example(ExampleId::One, &config.experiment).unwrap();
    let written = emit_example(&run, &config).unwrap();

    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        [
            "manifest.txt",
            "example1_table.csv",
            "example1_history_l4.csv",
            "example1_fields_l4.vtk",
            "example1_history_l8.csv",
            "example1_fields_l8.vtk",
        ]
    );
    for path in &written {
        let metadata = fs::metadata(path).unwrap();
        assert!(metadata.len() > 0, "{} is empty", path.display());
    }
    // No stray temporaries remain next to the outputs.
    let extras: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| !names.contains(&e.file_name().to_string_lossy().into_owned()))
        .collect();
    assert!(extras.is_empty(), "unexpected files: {extras:?}");

    // Table: header, one row per level, one mean row.
    let table = fs::read_to_string(&written[1]).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 1 + 2 + 1);
    assert!(lines[0].starts_with("level,h,rho,theta,delta,iterations"));
    assert!(lines[1].starts_with("4,"));
    assert!(lines[2].starts_with("8,"));
    assert!(lines[3].starts_with("mean,"));

    // History: header plus the initial record plus one row per step.
    let history = fs::read_to_string(&written[2]).unwrap();
    let steps = run.cells[0].levels[0].report.iterations;
    assert_eq!(history.lines().count(), 1 + 1 + steps);

    // Field files parse as VTK with matching point counts.
    let vtk = fs::read_to_string(&written[3]).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0\n"));
    assert!(vtk.contains("POINTS 25 double"));
    assert!(vtk.contains("CELLS 32 128"));
    for field in ["q", "q_true", "q_error", "state_neumann", "state_dirichlet"] {
        assert!(vtk.contains(&format!("SCALARS {field} double 1")), "missing field {field}");
    }
}

/// Feeding the emitted manifest back reproduces every CSV byte for byte.
#[test]
fn rerun_from_the_manifest_is_byte_identical() {
    let dir_a = TempDir::new("first");
    let config = mini_config(dir_a.path());
    let run = run_example(ExampleId::One, &config.experiment).unwrap();
    let written_a = emit_example(&run, &config).unwrap();

    let mut reread = parse_config(&written_a[0]).unwrap();
    assert_eq!(reread.experiment, config.experiment);

    let dir_b = TempDir::new("second");
    reread.output.dir = dir_b.path().to_path_buf();
    let rerun = run_example(ExampleId::One, &reread.experiment).unwrap();
    let written_b = emit_example(&rerun, &reread).unwrap();

    assert_eq!(written_a.len(), written_b.len());
    for (a, b) in written_a.iter().zip(&written_b).skip(1) {
        assert_eq!(a.file_name(), b.file_name());
        let bytes_a = fs::read(a).unwrap();
        let bytes_b = fs::read(b).unwrap();
        assert_eq!(bytes_a, bytes_b, "{} differs between runs", a.display());
    }
}

/// The manifest records the full configuration, not just the overrides.
#[test]
fn manifest_text_is_complete_and_reparsable() {
    let dir = TempDir::new("manifest");
    let mut config = mini_config(dir.path());
    config.experiment.theta = Some(0.025);
    config.experiment.epsilon = Some(1e-3);
    let text = emit_manifest(&config);
    for section in ["[mesh]", "[noise]", "[objective]", "[optimizer]", "[solver]", "[experiment]", "[output]", "[meta]"] {
        assert!(text.contains(section), "manifest lacks {section}");
    }
    assert!(text.contains("rng = chacha8"));
    let parsed = parse_config_str(&text).unwrap();
    assert_eq!(parsed, config);
}

#[test]
fn unwritable_output_directory_fails_without_artifacts() {
    let dir = TempDir::new("unwritable");
    // A file where the output directory should be makes creation fail.
    let blocked = dir.path().join("not-a-dir");
    fs::write(&blocked, "occupied").unwrap();

    let mut config = mini_config(&blocked);
    config.experiment.levels = vec![4];
    config.experiment.data_level = 4;
    config.experiment.max_iterations = 1;
    let run = run_example(ExampleId::One, &config.experiment).unwrap();
    let result = emit_example(&run, &config);
    assert!(result.is_err());
    assert!(fs::read_to_string(&blocked).unwrap() == "occupied");
}
