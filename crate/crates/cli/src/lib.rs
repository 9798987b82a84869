//! Config-driven experiment runner: parses a TOML experiment description,
//! runs it through `stirap_oct`, and renders CSV/JSON artifacts.

pub mod artifacts;
pub mod calibrate;
pub mod config;
pub mod error;
pub mod experiment;

use std::path::{Path, PathBuf};

pub use artifacts::{render, write_atomic, Artifact};
pub use config::{ExperimentConfig, Kind};
pub use error::CliError;
pub use experiment::{run_experiment, Outcome};

/// Output directory: the explicit override, else the config's `output`
/// (relative to the config file), else `out/<config stem>`.
pub fn output_dir(config_path: &Path, cfg: &ExperimentConfig, explicit: Option<&Path>) -> PathBuf {
    if let Some(dir) = explicit {
        return dir.to_path_buf();
    }
    if let Some(out) = &cfg.output {
        if out.is_absolute() {
            return out.clone();
        }
        return config_path.parent().unwrap_or(Path::new(".")).join(out);
    }
    let stem = config_path
        .file_stem()
        .map_or_else(|| "experiment".into(), |s| s.to_string_lossy().into_owned());
    PathBuf::from("out").join(stem)
}

/// Runs `cfg`, writes its artifacts to `dir`, and returns them. A calibration
/// that selects nothing still writes its table before failing.
pub fn execute(
    cfg: &ExperimentConfig,
    seed: Option<u64>,
    dir: &Path,
) -> Result<Vec<Artifact>, CliError> {
    let outcome = run_experiment(cfg, seed)?;
    let files = render(cfg, &outcome);
    write_atomic(dir, &files)?;
    if let Outcome::Calibration(c) = &outcome {
        if c.selected.is_none() {
            return Err(CliError::Calibration(format!(
                "none of the {} grid points meets the thresholds; see {}",
                c.rows.len(),
                dir.join("calibration.csv").display()
            )));
        }
    }
    Ok(files)
}
