//! Minimal library usage: one short reconstruction ladder, printed per level.

use eit_core::experiments::{run_reconstruction, ExperimentConfig};

fn main() -> eit_core::Result<()> {
    let mut config = ExperimentConfig::default();
    config.levels = vec![4, 8, 16];
    config.seed = 7;
    let cell = run_reconstruction(&config)?;
    for level in &cell.levels {
        let report = &level.report;
        println!("level {:>3}: error_q = {:.4}", report.level, report.error_q);
    }
    Ok(())
}
