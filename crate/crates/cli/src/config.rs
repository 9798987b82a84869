//! TOML experiment configuration.
//!
//! Every table rejects unknown keys. Physical quantities use the library
//! units: fs for times, rad/fs for Rabi frequencies and detunings, 1/fs for
//! decay rates. Level indices in configs are 1-based.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use stirap_oct::{Channel, ControlField, LevelSystem, OctConfig, StirapParams, TimeGrid};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Stirap,
    OctStandard,
    OctConstrained,
    RobustnessAlpha,
    RobustnessBeta,
    FourLevel,
    Calibrate,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Stirap => "stirap",
            Kind::OctStandard => "oct-standard",
            Kind::OctConstrained => "oct-constrained",
            Kind::RobustnessAlpha => "robustness-alpha",
            Kind::RobustnessBeta => "robustness-beta",
            Kind::FourLevel => "four-level",
            Kind::Calibrate => "calibrate",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    /// Free-form label copied into the summary.
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub system: SystemConfig,
    #[serde(default)]
    pub stirap: Option<StirapConfig>,
    #[serde(default)]
    pub oct: Option<OctSection>,
    #[serde(default)]
    pub guess: Vec<GuessPulse>,
    #[serde(default)]
    pub robustness: Option<RobustnessConfig>,
    #[serde(default)]
    pub calibrate: Option<CalibrateConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// One detuning per level; zeros when omitted.
    #[serde(default)]
    pub detunings: Option<Vec<f64>>,
    #[serde(default = "default_total_time")]
    pub total_time: f64,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
}

fn default_levels() -> usize {
    3
}
fn default_total_time() -> f64 {
    100.0
}
fn default_n_steps() -> usize {
    2000
}

impl SystemConfig {
    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        Ok(TimeGrid::new(self.total_time, self.n_steps)?)
    }

    pub fn channels(&self) -> Result<Vec<Channel>, CliError> {
        match self.levels {
            3 => Ok(vec![Channel::Pump, Channel::Stokes]),
            4 => Ok(vec![Channel::Pump, Channel::Intermediate, Channel::Stokes]),
            n => Err(CliError::Config(format!("levels must be 3 or 4, got {n}"))),
        }
    }

    pub fn level_system(&self) -> Result<LevelSystem, CliError> {
        let channels = self.channels()?;
        let detunings = match &self.detunings {
            Some(d) if d.len() != self.levels => {
                return Err(CliError::Config(format!(
                    "detunings has {} entries for {} levels",
                    d.len(),
                    self.levels
                )))
            }
            Some(d) => d.clone(),
            None => vec![0.0; self.levels],
        };
        Ok(LevelSystem::new(
            detunings,
            vec![0.0; self.levels],
            &channels,
        )?)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StirapConfig {
    /// Exactly one of `peak_amplitude` and `adiabaticity` is required for
    /// the `stirap` kind; robustness kinds derive the amplitude themselves.
    #[serde(default)]
    pub peak_amplitude: Option<f64>,
    #[serde(default)]
    pub adiabaticity: Option<f64>,
    pub width: f64,
    pub delay: f64,
}

impl StirapConfig {
    /// Parameters at unit amplitude, for rescaling.
    pub fn shape(&self, total_time: f64) -> Result<StirapParams, CliError> {
        Ok(StirapParams::new(1.0, self.width, self.delay, total_time)?)
    }

    pub fn params(&self, total_time: f64) -> Result<StirapParams, CliError> {
        let shape = self.shape(total_time)?;
        match (self.peak_amplitude, self.adiabaticity) {
            (Some(a), None) => Ok(shape.with_peak_amplitude(a)?),
            (None, Some(w)) => Ok(shape.with_adiabaticity(w)?),
            _ => Err(CliError::Config(
                "[stirap] needs exactly one of peak_amplitude, adiabaticity".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OctSection {
    pub lambda_0: f64,
    #[serde(default)]
    pub lambda_b: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_convergence_tol")]
    pub convergence_tol: f64,
    #[serde(default = "default_convergence_window")]
    pub convergence_window: usize,
    #[serde(default = "default_slack")]
    pub monotonic_slack: f64,
    #[serde(default)]
    pub snapshot_interval: usize,
    /// Allowed levels (1-based); first and last level when omitted.
    #[serde(default)]
    pub allowed: Option<Vec<usize>>,
}

fn default_max_iterations() -> usize {
    1000
}
fn default_convergence_tol() -> f64 {
    1e-7
}
fn default_convergence_window() -> usize {
    5
}
fn default_slack() -> f64 {
    1e-9
}

impl OctSection {
    pub fn to_config(&self, n_levels: usize) -> Result<OctConfig, CliError> {
        let mut cfg = OctConfig::transfer(n_levels, self.lambda_0, self.lambda_b);
        cfg.max_iterations = self.max_iterations;
        cfg.convergence_tol = self.convergence_tol;
        cfg.convergence_window = self.convergence_window;
        cfg.monotonic_slack = self.monotonic_slack;
        cfg.snapshot_interval = self.snapshot_interval;
        if let Some(levels) = &self.allowed {
            let mut allowed = vec![false; n_levels];
            for &l in levels {
                if l == 0 || l > n_levels {
                    return Err(CliError::Config(format!(
                        "allowed level {l} outside 1..={n_levels}"
                    )));
                }
                allowed[l - 1] = true;
            }
            cfg.allowed = allowed;
        }
        cfg.validate(n_levels)?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ChannelName {
    Pump,
    Stokes,
    Intermediate,
}

impl From<ChannelName> for Channel {
    fn from(c: ChannelName) -> Self {
        match c {
            ChannelName::Pump => Channel::Pump,
            ChannelName::Stokes => Channel::Stokes,
            ChannelName::Intermediate => Channel::Intermediate,
        }
    }
}

/// Gaussian initial guess for one channel.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuessPulse {
    pub channel: ChannelName,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

/// Builds the guess fields in chain order.
pub fn guess_fields(
    guess: &[GuessPulse],
    channels: &[Channel],
    grid: TimeGrid,
) -> Result<Vec<ControlField>, CliError> {
    channels
        .iter()
        .map(|&c| {
            let mut matching = guess.iter().filter(|g| Channel::from(g.channel) == c);
            let g = matching
                .next()
                .ok_or_else(|| CliError::Config(format!("no [[guess]] entry for channel {c}")))?;
            if matching.next().is_some() {
                return Err(CliError::Config(format!(
                    "two [[guess]] entries for channel {c}"
                )));
            }
            Ok(ControlField::gaussian(
                grid,
                c,
                g.amplitude,
                g.center,
                g.width,
            )?)
        })
        .collect::<Result<Vec<_>, _>>()
        .and_then(|fields| {
            if guess.len() != channels.len() {
                return Err(CliError::Config(format!(
                    "{} [[guess]] entries for {} channels",
                    guess.len(),
                    channels.len()
                )));
            }
            Ok(fields)
        })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessConfig {
    /// Alpha (rad/fs) or beta values, strictly increasing from 0.
    pub ladder: Vec<f64>,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    #[serde(default)]
    pub seed: u64,
    /// Decay unit `Gamma` (1/fs); `1/T` when omitted.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Lossy level (1-based).
    #[serde(default = "default_decay_level")]
    pub decay_level: usize,
    /// STIRAP adiabaticities to compare against the optimized fields. When
    /// omitted the STIRAP amplitude is matched to the optimized field energy.
    #[serde(default)]
    pub stirap_adiabaticity: Option<Vec<f64>>,
}

fn default_realizations() -> usize {
    50
}
fn default_decay_level() -> usize {
    2
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationTarget {
    Stirap,
    Oct,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateConfig {
    pub target: CalibrationTarget,
    #[serde(default = "default_min_yield")]
    pub min_yield: f64,
    /// Bound on the largest population of any non-allowed level.
    #[serde(default = "default_max_peak")]
    pub max_peak_intermediate: f64,
    /// STIRAP only: among passing points pick the one whose peak
    /// intermediate population is closest to this value.
    #[serde(default)]
    pub target_peak_intermediate: Option<f64>,
    #[serde(default)]
    pub lambda_0: Vec<f64>,
    #[serde(default)]
    pub lambda_b: Vec<f64>,
    #[serde(default)]
    pub peak_amplitude: Vec<f64>,
    #[serde(default)]
    pub width: Vec<f64>,
    #[serde(default)]
    pub delay: Vec<f64>,
}

fn default_min_yield() -> f64 {
    0.9
}
fn default_max_peak() -> f64 {
    0.01
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Cross-table checks that serde cannot express.
    fn check(&self) -> Result<(), CliError> {
        let need = |present: bool, table: &str| {
            if present {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "kind {} requires [{table}]",
                    self.kind.as_str()
                )))
            }
        };
        self.system.channels()?;
        match self.kind {
            Kind::Stirap => {
                need(self.stirap.is_some(), "stirap")?;
                if self.system.levels != 3 {
                    return Err(CliError::Config("stirap runs on 3 levels".into()));
                }
            }
            Kind::OctStandard | Kind::OctConstrained | Kind::FourLevel => {
                need(self.oct.is_some(), "oct")?;
                need(!self.guess.is_empty(), "[guess]")?;
                let lb = self.oct.as_ref().map_or(0.0, |o| o.lambda_b);
                if self.kind == Kind::OctStandard && lb != 0.0 {
                    return Err(CliError::Config(
                        "oct-standard requires lambda_b = 0".into(),
                    ));
                }
                if self.kind == Kind::OctConstrained && lb <= 0.0 {
                    return Err(CliError::Config(
                        "oct-constrained requires lambda_b > 0".into(),
                    ));
                }
                if self.kind == Kind::FourLevel && self.system.levels != 4 {
                    return Err(CliError::Config("four-level requires levels = 4".into()));
                }
            }
            Kind::RobustnessAlpha | Kind::RobustnessBeta => {
                need(self.oct.is_some(), "oct")?;
                need(!self.guess.is_empty(), "[guess]")?;
                need(self.stirap.is_some(), "stirap")?;
                need(self.robustness.is_some(), "robustness")?;
                if self.system.levels != 3 {
                    return Err(CliError::Config("robustness sweeps run on 3 levels".into()));
                }
            }
            Kind::Calibrate => {
                need(self.calibrate.is_some(), "calibrate")?;
                let cal = self.calibrate.as_ref().expect("checked");
                match cal.target {
                    CalibrationTarget::Oct => {
                        need(self.oct.is_some(), "oct")?;
                        need(!self.guess.is_empty(), "[guess]")?;
                        if cal.lambda_0.is_empty() || cal.lambda_b.is_empty() {
                            return Err(CliError::Config(
                                "oct calibration needs lambda_0 and lambda_b grids".into(),
                            ));
                        }
                    }
                    CalibrationTarget::Stirap => {
                        if cal.peak_amplitude.is_empty()
                            || cal.width.is_empty()
                            || cal.delay.is_empty()
                        {
                            return Err(CliError::Config(
                                "stirap calibration needs peak_amplitude, width and delay grids"
                                    .into(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
