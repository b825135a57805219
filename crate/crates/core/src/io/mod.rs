//! File formats of the command line driver: run configuration and
//! manifests, CSV tables, and VTK field exports.

pub mod config;
pub mod outputs;
pub mod table;
pub mod vtk;

pub use config::{emit_manifest, parse_config, parse_config_str, OutputConfig, RunConfig};
pub use outputs::{emit_example, emit_forward, emit_reconstruction, write_atomic};
pub use table::{error_table_csv, history_csv, measurement_csv};
pub use vtk::vtk_unstructured;
