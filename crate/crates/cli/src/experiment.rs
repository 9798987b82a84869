//! Dispatch from a parsed config to the library, with typed results.

use stirap_oct::krotov::diagnose;
use stirap_oct::propagator::NORM_TOLERANCE;
use stirap_oct::robustness::SweepSetup;
use stirap_oct::{
    field_energy, fwhm_ratio, krotov_iterate, make_stirap_fields, match_energy, propagate_forward,
    pulse_ordering, sweep, ControlField, KrotovRun, LevelSystem, OctConfig, PulseOrdering,
    StateVector, StirapParams, SweepAxis, SweepResult, TimeGrid, Trajectory,
};

use crate::calibrate::{calibrate, CalibrationOutcome};
use crate::config::{guess_fields, ExperimentConfig, Kind};
use crate::error::CliError;

#[derive(Clone, Debug)]
pub struct StirapOutcome {
    pub params: StirapParams,
    pub fields: Vec<ControlField>,
    pub trajectory: Trajectory,
    pub ordering: PulseOrdering,
}

#[derive(Clone, Debug)]
pub struct OctOutcome {
    pub config: OctConfig,
    pub guess: Vec<ControlField>,
    pub run: KrotovRun,
    pub ordering: PulseOrdering,
}

impl OctOutcome {
    pub fn trajectory(&self) -> &Trajectory {
        &self.run.final_trajectory
    }

    pub fn fields(&self) -> &[ControlField] {
        &self.run.final_fields
    }
}

/// One method's fields and their sweep.
#[derive(Clone, Debug)]
pub struct Curve {
    pub name: String,
    pub fields: Vec<ControlField>,
    /// Set for analytic STIRAP curves.
    pub stirap: Option<StirapParams>,
    pub sweep: SweepResult,
}

#[derive(Clone, Debug)]
pub struct RobustnessOutcome {
    pub axis: SweepAxis,
    pub oct: OctOutcome,
    /// Optimized curve first, then the STIRAP curves.
    pub curves: Vec<Curve>,
    /// Mean STIRAP FWHM over mean optimized FWHM, for the first STIRAP curve.
    pub fwhm_ratio: f64,
}

impl RobustnessOutcome {
    pub fn curve(&self, name: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Stirap(StirapOutcome),
    Oct(OctOutcome),
    Robustness(RobustnessOutcome),
    Calibration(CalibrationOutcome),
}

/// Checks norm conservation (lossless) or monotone decay (lossy).
pub fn check_norms(system: &LevelSystem, trajectory: &Trajectory) -> Result<(), CliError> {
    let norms = trajectory.norms();
    if system.is_lossless() {
        if let Some((i, n)) = norms
            .iter()
            .enumerate()
            .find(|(_, n)| (**n - 1.0).abs() > NORM_TOLERANCE)
        {
            return Err(CliError::Physics(format!(
                "norm {n} at t = {} fs in a loss-free system",
                trajectory.grid().time(i)
            )));
        }
    } else if norms.windows(2).any(|w| w[1] > w[0] + NORM_TOLERANCE) {
        return Err(CliError::Physics("norm increased in a lossy system".into()));
    }
    Ok(())
}

fn initial_state(system: &LevelSystem) -> StateVector {
    StateVector::basis(system.n_levels(), 0).expect("at least three levels")
}

pub fn run_stirap(cfg: &ExperimentConfig) -> Result<StirapOutcome, CliError> {
    let system = cfg.system.level_system()?;
    let grid = cfg.system.grid()?;
    let params = cfg
        .stirap
        .as_ref()
        .expect("checked at parse time")
        .params(cfg.system.total_time)?;
    let (pump, stokes) = make_stirap_fields(&params, grid)?;
    let fields = vec![pump, stokes];
    let trajectory = propagate_forward(&system, &fields, &initial_state(&system))?;
    check_norms(&system, &trajectory)?;
    let ordering = pulse_ordering(&fields)?;
    Ok(StirapOutcome {
        params,
        fields,
        trajectory,
        ordering,
    })
}

pub fn run_oct(cfg: &ExperimentConfig) -> Result<OctOutcome, CliError> {
    let system = cfg.system.level_system()?;
    let grid = cfg.system.grid()?;
    let config = cfg
        .oct
        .as_ref()
        .expect("checked at parse time")
        .to_config(system.n_levels())?;
    let guess = guess_fields(&cfg.guess, &system.channels(), grid)?;
    let run = krotov_iterate(&system, &config, &guess)?;
    check_norms(&system, &run.final_trajectory)?;
    let ordering = pulse_ordering(&run.final_fields)?;
    Ok(OctOutcome {
        config,
        guess,
        run,
        ordering,
    })
}

fn curve(
    name: String,
    setup: SweepSetup,
    axis: &SweepAxis,
    stirap: Option<StirapParams>,
) -> Result<Curve, CliError> {
    let sweep = sweep(&setup, axis)?;
    Ok(Curve {
        name,
        fields: setup.fields,
        stirap,
        sweep,
    })
}

pub fn run_robustness(
    cfg: &ExperimentConfig,
    seed: Option<u64>,
) -> Result<RobustnessOutcome, CliError> {
    let rob = cfg.robustness.as_ref().expect("checked at parse time");
    let system = cfg.system.level_system()?;
    let grid: TimeGrid = cfg.system.grid()?;
    let axis = match cfg.kind {
        Kind::RobustnessAlpha => SweepAxis::Alpha(rob.ladder.clone()),
        Kind::RobustnessBeta => SweepAxis::Beta(rob.ladder.clone()),
        _ => unreachable!("dispatch only sends robustness kinds"),
    };
    if rob.ladder.first() != Some(&0.0) {
        return Err(CliError::Config("robustness ladder must start at 0".into()));
    }
    if rob.decay_level == 0 || rob.decay_level > system.n_levels() {
        return Err(CliError::Config(format!(
            "decay_level {} out of range",
            rob.decay_level
        )));
    }

    let oct = run_oct(cfg)?;
    let shape = cfg
        .stirap
        .as_ref()
        .expect("checked at parse time")
        .shape(cfg.system.total_time)?;
    let stirap_params: Vec<(String, StirapParams)> = match &rob.stirap_adiabaticity {
        None => vec![(
            "stirap".to_string(),
            match_energy(&shape, grid, field_energy(oct.fields()))?,
        )],
        Some(list) => list
            .iter()
            .map(|&w| Ok((format!("stirap_wt{w}"), shape.with_adiabaticity(w)?)))
            .collect::<Result<_, CliError>>()?,
    };

    let setup = |fields: Vec<ControlField>| SweepSetup {
        system: system.clone(),
        fields,
        initial_level: 0,
        target_level: system.n_levels() - 1,
        decay_level: rob.decay_level - 1,
        gamma: rob.gamma.unwrap_or(1.0 / cfg.system.total_time),
        n_realizations: rob.n_realizations,
        seed: seed.unwrap_or(rob.seed),
    };

    let mut curves = vec![curve(
        "oct".into(),
        setup(oct.fields().to_vec()),
        &axis,
        None,
    )?];
    for (name, params) in stirap_params {
        let (pump, stokes) = make_stirap_fields(&params, grid)?;
        curves.push(curve(name, setup(vec![pump, stokes]), &axis, Some(params))?);
    }
    let fwhm_ratio = fwhm_ratio(oct.fields(), &curves[1].fields)?;
    Ok(RobustnessOutcome {
        axis,
        oct,
        curves,
        fwhm_ratio,
    })
}

/// Runs whatever `cfg.kind` asks for. `seed` overrides the config seed.
pub fn run_experiment(cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Outcome, CliError> {
    match cfg.kind {
        Kind::Stirap => run_stirap(cfg).map(Outcome::Stirap),
        Kind::OctStandard | Kind::OctConstrained | Kind::FourLevel => {
            run_oct(cfg).map(Outcome::Oct)
        }
        Kind::RobustnessAlpha | Kind::RobustnessBeta => {
            run_robustness(cfg, seed).map(Outcome::Robustness)
        }
        Kind::Calibrate => calibrate(cfg).map(Outcome::Calibration),
    }
}

/// Largest population over the levels outside the allowed subspace:
/// `(level, population, time)`, 0-based level.
pub fn peak_forbidden(trajectory: &Trajectory, allowed: &[bool]) -> (usize, f64, f64) {
    allowed
        .iter()
        .enumerate()
        .filter(|(_, &a)| !a)
        .map(|(l, _)| {
            let (p, t) = trajectory.peak(l);
            (l, p, t)
        })
        .fold((0, f64::NEG_INFINITY, 0.0), |acc, x| {
            if x.1 > acc.1 {
                x
            } else {
                acc
            }
        })
}

/// Does the `inner` pulse's half-maximum window contain the centroids of
/// every other pulse, with the largest peak amplitude?
pub fn straddles(fields: &[ControlField], inner: usize) -> Result<bool, CliError> {
    let d = diagnose(&fields[inner])?;
    let (lo, hi) = (d.centroid - 0.5 * d.fwhm, d.centroid + 0.5 * d.fwhm);
    for (i, f) in fields.iter().enumerate() {
        if i == inner {
            continue;
        }
        let o = diagnose(f)?;
        if o.centroid < lo || o.centroid > hi || o.peak_amplitude >= d.peak_amplitude {
            return Ok(false);
        }
    }
    Ok(true)
}
