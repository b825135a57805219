//! Plain-text run configuration.
//!
//! The format is sectioned `key = value` lines with `#` comments. Every
//! key is optional and falls back to its default, but unknown sections,
//! unknown keys and duplicate keys are rejected with the offending path.
//! [`emit_manifest`] renders a configuration back into this format,
//! together with a `[meta]` section naming the crate version and the
//! random generator, so a manifest written next to the results of a run
//! can be passed back as `--config` to reproduce it.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiments::{ExperimentConfig, RNG_ID};

/// Output settings of the command line driver.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub vtk: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), vtk: true }
    }
}

/// Full configuration of a run: experiment settings plus output settings.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub output: OutputConfig,
}

fn parse_value<T: std::str::FromStr>(path: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("key {path}: cannot parse value '{value}'")))
}

fn parse_list<T: std::str::FromStr>(path: &str, value: &str) -> Result<Vec<T>> {
    value.split_whitespace().map(|item| parse_value(path, item)).collect()
}

/// Parses a configuration from its text form, on top of the defaults.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    let mut section = String::new();
    let mut seen: Vec<String> = Vec::new();

    for (number, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::config(format!("line {}: malformed section header", number + 1)))?
                .trim();
            match name {
                "mesh" | "noise" | "objective" | "optimizer" | "solver" | "experiment"
                | "output" | "meta" => section = name.to_string(),
                other => return Err(Error::config(format!("unknown section [{other}]"))),
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(format!("line {}: expected 'key = value'", number + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        if section.is_empty() {
            return Err(Error::config(format!("key {key} appears before any section")));
        }
        let path = format!("{section}.{key}");
        if seen.contains(&path) {
            return Err(Error::config(format!("duplicate key {path}")));
        }
        seen.push(path.clone());

        let experiment = &mut config.experiment;
        match (section.as_str(), key) {
            ("mesh", "levels") => experiment.levels = parse_list(&path, value)?,
            ("mesh", "data_level") => experiment.data_level = parse_value(&path, value)?,
            ("noise", "theta") => experiment.theta = Some(parse_value(&path, value)?),
            ("noise", "seed") => experiment.seed = parse_value(&path, value)?,
            ("objective", "lower") => experiment.lower = parse_value(&path, value)?,
            ("objective", "upper") => experiment.upper = parse_value(&path, value)?,
            ("objective", "rho_scale") => experiment.rho_scale = parse_value(&path, value)?,
            ("objective", "epsilon") => experiment.epsilon = Some(parse_value(&path, value)?),
            ("optimizer", "q0") => experiment.q0 = parse_value(&path, value)?,
            ("optimizer", "beta0") => experiment.beta0 = parse_value(&path, value)?,
            ("optimizer", "tau") => experiment.tau = parse_value(&path, value)?,
            ("optimizer", "max_iterations") => {
                experiment.max_iterations = parse_value(&path, value)?
            }
            ("optimizer", "reset_beta") => experiment.reset_beta = parse_value(&path, value)?,
            ("solver", "rel_tol") => experiment.solver.rel_tol = parse_value(&path, value)?,
            ("solver", "max_iter_factor") => {
                experiment.solver.max_iter_factor = parse_value(&path, value)?
            }
            ("experiment", "thetas") => experiment.thetas = parse_list(&path, value)?,
            ("experiment", "measurement_counts") => {
                experiment.measurement_counts = parse_list(&path, value)?
            }
            ("output", "dir") => config.output.dir = PathBuf::from(value),
            ("output", "vtk") => config.output.vtk = parse_value(&path, value)?,
            ("meta", "version") => {}
            ("meta", "rng") => {
                if value != RNG_ID {
                    return Err(Error::config(format!(
                        "manifest was produced with rng '{value}', this build uses '{RNG_ID}'"
                    )));
                }
            }
            _ => return Err(Error::config(format!("unknown key {path}"))),
        }
    }
    config.experiment.validate()?;
    if config.output.dir.as_os_str().is_empty() {
        return Err(Error::config("output.dir must not be empty"));
    }
    Ok(config)
}

/// Reads and parses a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_config_str(&text)
}

fn push_list<T: std::fmt::Display>(out: &mut String, key: &str, items: &[T]) {
    out.push_str(key);
    out.push_str(" =");
    for item in items {
        out.push_str(&format!(" {item}"));
    }
    out.push('\n');
}

/// Renders a configuration as manifest text, loadable by
/// [`parse_config_str`]. Floating point values use the shortest
/// representation that parses back to the same number.
pub fn emit_manifest(config: &RunConfig) -> String {
    let e = &config.experiment;
    let mut out = String::new();
    out.push_str("[mesh]\n");
    push_list(&mut out, "levels", &e.levels);
    out.push_str(&format!("data_level = {}\n", e.data_level));
    out.push_str("\n[noise]\n");
    if let Some(theta) = e.theta {
        out.push_str(&format!("theta = {theta}\n"));
    }
    out.push_str(&format!("seed = {}\n", e.seed));
    out.push_str("\n[objective]\n");
    out.push_str(&format!("lower = {}\n", e.lower));
    out.push_str(&format!("upper = {}\n", e.upper));
    out.push_str(&format!("rho_scale = {}\n", e.rho_scale));
    if let Some(epsilon) = e.epsilon {
        out.push_str(&format!("epsilon = {epsilon}\n"));
    }
    out.push_str("\n[optimizer]\n");
    out.push_str(&format!("q0 = {}\n", e.q0));
    out.push_str(&format!("beta0 = {}\n", e.beta0));
    out.push_str(&format!("tau = {}\n", e.tau));
    out.push_str(&format!("max_iterations = {}\n", e.max_iterations));
    out.push_str(&format!("reset_beta = {}\n", e.reset_beta));
    out.push_str("\n[solver]\n");
    out.push_str(&format!("rel_tol = {}\n", e.solver.rel_tol));
    out.push_str(&format!("max_iter_factor = {}\n", e.solver.max_iter_factor));
    out.push_str("\n[experiment]\n");
    push_list(&mut out, "thetas", &e.thetas);
    push_list(&mut out, "measurement_counts", &e.measurement_counts);
    out.push_str("\n[output]\n");
    out.push_str(&format!("dir = {}\n", config.output.dir.display()));
    out.push_str(&format!("vtk = {}\n", config.output.vtk));
    out.push_str("\n[meta]\n");
    out.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("rng = {RNG_ID}\n"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_the_manifest() {
        let config = RunConfig::default();
        let manifest = emit_manifest(&config);
        let parsed = parse_config_str(&manifest).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn modified_values_round_trip_exactly() {
        let mut config = RunConfig::default();
        config.experiment.levels = vec![4, 8, 16];
        config.experiment.data_level = 32;
        config.experiment.theta = Some(0.017);
        config.experiment.seed = 42;
        config.experiment.epsilon = Some(3.3e-4);
        config.experiment.rho_scale = 0.02;
        config.experiment.reset_beta = true;
        config.output.dir = PathBuf::from("results/run1");
        config.output.vtk = false;
        let parsed = parse_config_str(&emit_manifest(&config)).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected_by_path() {
        let err = parse_config_str("[noise]\nthetaa = 1\n").unwrap_err();
        assert!(err.to_string().contains("noise.thetaa"), "{err}");
        let err = parse_config_str("[nois]\ntheta = 1\n").unwrap_err();
        assert!(err.to_string().contains("[nois]"), "{err}");
        let err = parse_config_str("theta = 1\n").unwrap_err();
        assert!(err.to_string().contains("before any section"), "{err}");
    }

    #[test]
    fn duplicate_keys_and_bad_values_are_rejected() {
        let err = parse_config_str("[noise]\nseed = 1\nseed = 2\n").unwrap_err();
        assert!(err.to_string().contains("duplicate key noise.seed"), "{err}");
        let err = parse_config_str("[noise]\nseed = pony\n").unwrap_err();
        assert!(err.to_string().contains("cannot parse value 'pony'"), "{err}");
    }

    #[test]
    fn semantic_validation_applies_after_parsing() {
        let err = parse_config_str("[mesh]\nlevels = 4 6\n").unwrap_err();
        assert!(err.to_string().contains("integer factors"), "{err}");
        let err = parse_config_str("[objective]\nlower = 2\nupper = 1\n").unwrap_err();
        assert!(err.to_string().contains("bounds"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "\n# a comment\n[noise]\nseed = 9  # trailing comment\n\n";
        let config = parse_config_str(text).unwrap();
        assert_eq!(config.experiment.seed, 9);
    }

    #[test]
    fn foreign_rng_manifests_are_rejected() {
        let err = parse_config_str("[meta]\nrng = mt19937\n").unwrap_err();
        assert!(err.to_string().contains("mt19937"), "{err}");
        parse_config_str("[meta]\nrng = chacha8\nversion = 9.9.9\n").unwrap();
    }
}
