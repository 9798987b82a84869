//! Deterministic grid searches for the STIRAP pulse parameters and the
//! Krotov weights.

use rayon::prelude::*;
use stirap_oct::{
    field_energy, krotov_iterate, make_stirap_fields, propagate_forward, StateVector, StirapParams,
};

use crate::config::{guess_fields, CalibrateConfig, CalibrationTarget, ExperimentConfig};
use crate::error::CliError;
use crate::experiment::peak_forbidden;

/// One evaluated grid point. `params` lists `(name, value)` in column order.
#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationRow {
    pub params: Vec<(&'static str, f64)>,
    pub yield_: f64,
    pub peak_intermediate: f64,
    /// Iterations run (OCT) or 0 (STIRAP).
    pub iterations: usize,
    pub energy: f64,
    /// `ok`, `fail`, or the reason the point could not be evaluated.
    pub status: String,
}

impl CalibrationRow {
    pub fn passed(&self) -> bool {
        self.status == "ok"
    }

    pub fn param(&self, name: &str) -> f64 {
        self.params
            .iter()
            .find(|(n, _)| *n == name)
            .map_or(f64::NAN, |(_, v)| *v)
    }
}

#[derive(Clone, Debug)]
pub struct CalibrationOutcome {
    pub target: CalibrationTarget,
    pub rows: Vec<CalibrationRow>,
    /// Index into `rows` of the chosen point.
    pub selected: Option<usize>,
}

impl CalibrationOutcome {
    pub fn selected_row(&self) -> Option<&CalibrationRow> {
        self.selected.map(|i| &self.rows[i])
    }
}

fn status(cal: &CalibrateConfig, yield_: f64, peak: f64) -> String {
    if yield_ >= cal.min_yield && peak <= cal.max_peak_intermediate {
        "ok".into()
    } else {
        "fail".into()
    }
}

fn calibrate_stirap(
    cfg: &ExperimentConfig,
    cal: &CalibrateConfig,
) -> Result<Vec<CalibrationRow>, CliError> {
    let system = cfg.system.level_system()?;
    let grid = cfg.system.grid()?;
    let t = cfg.system.total_time;
    let mut points = Vec::new();
    for &w in &cal.width {
        for &d in &cal.delay {
            for &a in &cal.peak_amplitude {
                points.push(StirapParams::new(a, w, d, t)?);
            }
        }
    }
    let allowed = [true, false, true];
    points
        .par_iter()
        .map(|p| {
            let (pump, stokes) = make_stirap_fields(p, grid)?;
            let fields = [pump, stokes];
            let tr = propagate_forward(&system, &fields, &StateVector::basis(3, 0)?)?;
            let yield_ = tr.final_populations()[2];
            let peak = peak_forbidden(&tr, &allowed).1;
            Ok(CalibrationRow {
                params: vec![
                    ("peak_amplitude", p.peak_amplitude),
                    ("width", p.width),
                    ("delay", p.delay),
                ],
                yield_,
                peak_intermediate: peak,
                iterations: 0,
                energy: field_energy(&fields),
                status: status(cal, yield_, peak),
            })
        })
        .collect()
}

fn calibrate_oct(
    cfg: &ExperimentConfig,
    cal: &CalibrateConfig,
) -> Result<Vec<CalibrationRow>, CliError> {
    let system = cfg.system.level_system()?;
    let grid = cfg.system.grid()?;
    let guess = guess_fields(&cfg.guess, &system.channels(), grid)?;
    let section = cfg.oct.as_ref().expect("checked at parse time");
    let mut points = Vec::new();
    for &l0 in &cal.lambda_0 {
        for &lb in &cal.lambda_b {
            let mut s = section.clone();
            s.lambda_0 = l0;
            s.lambda_b = lb;
            points.push(s.to_config(system.n_levels())?);
        }
    }
    points
        .par_iter()
        .map(|oc| {
            let params = vec![("lambda_0", oc.lambda_0), ("lambda_b", oc.lambda_b)];
            match krotov_iterate(&system, oc, &guess) {
                Ok(run) => {
                    let yield_ = run.final_value().yield_;
                    let peak = peak_forbidden(&run.final_trajectory, &oc.allowed).1;
                    Ok(CalibrationRow {
                        params,
                        yield_,
                        peak_intermediate: peak,
                        iterations: run.n_iterations(),
                        energy: field_energy(&run.final_fields),
                        status: status(cal, yield_, peak),
                    })
                }
                Err(e @ stirap_oct::Error::NonMonotonic { .. }) => Ok(CalibrationRow {
                    params,
                    yield_: f64::NAN,
                    peak_intermediate: f64::NAN,
                    iterations: 0,
                    energy: f64::NAN,
                    status: format!("non-monotonic ({e})"),
                }),
                Err(e) => Err(e.into()),
            }
        })
        .collect()
}

/// Index of the chosen row. OCT: smallest `lambda_b`, then smallest peak,
/// then smallest `lambda_0`. STIRAP: peak closest to the target if one is
/// given, otherwise smallest energy. Ties go to the earlier grid point.
pub fn select(
    target: CalibrationTarget,
    cal: &CalibrateConfig,
    rows: &[CalibrationRow],
) -> Option<usize> {
    let key = |r: &CalibrationRow| -> Vec<f64> {
        match target {
            CalibrationTarget::Oct => {
                vec![
                    r.param("lambda_b"),
                    r.peak_intermediate,
                    r.param("lambda_0"),
                ]
            }
            CalibrationTarget::Stirap => match cal.target_peak_intermediate {
                Some(p) => vec![(r.peak_intermediate - p).abs(), r.energy],
                None => vec![r.energy],
            },
        }
    };
    rows.iter()
        .enumerate()
        .filter(|(_, r)| r.passed())
        .min_by(|(i, a), (j, b)| {
            key(a)
                .partial_cmp(&key(b))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(i.cmp(j))
        })
        .map(|(i, _)| i)
}

/// Evaluates the whole grid. An empty selection is not an error here; the
/// caller reports it after writing the table.
pub fn calibrate(cfg: &ExperimentConfig) -> Result<CalibrationOutcome, CliError> {
    let cal = cfg
        .calibrate
        .as_ref()
        .ok_or_else(|| CliError::Config("calibration needs a [calibrate] table".into()))?;
    let rows = match cal.target {
        CalibrationTarget::Stirap => calibrate_stirap(cfg, cal)?,
        CalibrationTarget::Oct => calibrate_oct(cfg, cal)?,
    };
    let selected = select(cal.target, cal, &rows);
    Ok(CalibrationOutcome {
        target: cal.target,
        rows,
        selected,
    })
}
