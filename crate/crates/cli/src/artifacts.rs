//! CSV and JSON artifacts. Numbers carry 12 significant digits so that
//! replays can be diffed byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};
use stirap_oct::krotov::PulseDiagnostics;
use stirap_oct::{
    adiabaticity, field_energy, ControlField, PulseOrdering, SweepResult, Trajectory,
};

use crate::calibrate::CalibrationOutcome;
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiment::{peak_forbidden, OctOutcome, Outcome, RobustnessOutcome, StirapOutcome};

/// A named file body, written only once the whole experiment succeeded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// `x` in scientific notation with 12 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        "nan".into()
    }
}

/// `x` rounded to 12 significant digits as a JSON number (null if not finite).
pub fn jnum(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let r: f64 = num(x).parse().expect("formatted float parses");
    json!(r)
}

fn jvec(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| jnum(x)).collect())
}

pub fn populations_csv(tr: &Trajectory) -> String {
    let n = tr.final_populations().len();
    let mut out = String::from("t_fs");
    for l in 1..=n {
        let _ = write!(out, ",P{l}");
    }
    out.push_str(",norm\n");
    for (i, (p, norm)) in tr.populations().iter().zip(tr.norms()).enumerate() {
        out.push_str(&num(tr.grid().time(i)));
        for x in p {
            out.push(',');
            out.push_str(&num(*x));
        }
        out.push(',');
        out.push_str(&num(*norm));
        out.push('\n');
    }
    out
}

pub fn fields_csv(fields: &[ControlField]) -> String {
    let grid = *fields[0].grid();
    let mut out = String::from("t_fs");
    for f in fields {
        let _ = write!(out, ",{}", f.label().name());
    }
    out.push('\n');
    for i in 0..grid.n_points() {
        out.push_str(&num(grid.time(i)));
        for f in fields {
            out.push(',');
            out.push_str(&num(f.samples()[i]));
        }
        out.push('\n');
    }
    out
}

pub fn convergence_csv(oct: &OctOutcome) -> String {
    let mut out = String::from("iteration,J,yield,penalty,constraint\n");
    for r in &oct.run.iterations {
        let v = r.value;
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.iteration,
            num(v.j),
            num(v.yield_),
            num(v.penalty),
            num(v.constraint)
        );
    }
    out
}

pub fn sweep_csv(s: &SweepResult) -> String {
    let mut out = String::from("param,mean_P_target,sd_P_target,n_realizations\n");
    for p in &s.points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(p.param),
            num(p.mean),
            num(p.sd),
            p.n_realizations
        );
    }
    out
}

fn pulse_json(d: &PulseDiagnostics) -> Value {
    json!({
        "channel": d.channel.name(),
        "centroid_fs": jnum(d.centroid),
        "fwhm_fs": jnum(d.fwhm),
        "peak_amplitude": jnum(d.peak_amplitude),
        "peak_time_fs": jnum(d.peak_time),
    })
}

fn ordering_json(o: &PulseOrdering) -> Value {
    json!({
        "pulses": o.pulses.iter().map(pulse_json).collect::<Vec<_>>(),
        "verdict": o.verdict.map(|v| v.as_str()),
    })
}

fn trajectory_json(tr: &Trajectory) -> Value {
    let n = tr.final_populations().len();
    let peaks: Vec<Value> = (1..n - 1)
        .map(|l| {
            let (p, t) = tr.peak(l);
            json!({ "level": l + 1, "population": jnum(p), "time_fs": jnum(t) })
        })
        .collect();
    json!({
        "final_populations": jvec(tr.final_populations()),
        "final_norm": jnum(*tr.norms().last().expect("nonempty")),
        "peak_intermediate": peaks,
    })
}

fn stirap_json(o: &StirapOutcome) -> Value {
    json!({
        "peak_amplitude": jnum(o.params.peak_amplitude),
        "width_fs": jnum(o.params.width),
        "delay_fs": jnum(o.params.delay),
        "overlap_time_fs": jnum(o.params.overlap_time()),
        "adiabaticity": jnum(adiabaticity(&o.params)),
        "field_energy": jnum(field_energy(&o.fields)),
        "trajectory": trajectory_json(&o.trajectory),
        "ordering": ordering_json(&o.ordering),
    })
}

fn oct_json(o: &OctOutcome) -> Value {
    let v = o.run.final_value();
    let (level, p, t) = peak_forbidden(o.trajectory(), &o.config.allowed);
    json!({
        "lambda_0": jnum(o.config.lambda_0),
        "lambda_b": jnum(o.config.lambda_b),
        "iterations": o.run.n_iterations(),
        "converged": o.run.converged,
        "J": jnum(v.j),
        "yield": jnum(v.yield_),
        "penalty": jnum(v.penalty),
        "constraint": jnum(v.constraint),
        "peak_forbidden": { "level": level + 1, "population": jnum(p), "time_fs": jnum(t) },
        "guess_energy": jnum(field_energy(&o.guess)),
        "field_energy": jnum(field_energy(o.fields())),
        "trajectory": trajectory_json(o.trajectory()),
        "ordering": ordering_json(&o.ordering),
    })
}

fn robustness_json(o: &RobustnessOutcome) -> Value {
    let curves: Vec<Value> = o
        .curves
        .iter()
        .map(|c| {
            let mut m = Map::new();
            m.insert("name".into(), json!(c.name));
            m.insert("field_energy".into(), jnum(c.sweep.field_energy));
            m.insert("peak_amplitude".into(), jnum(c.sweep.peak_amplitude));
            if let Some(p) = &c.stirap {
                m.insert("adiabaticity".into(), jnum(adiabaticity(p)));
                m.insert("width_fs".into(), jnum(p.width));
                m.insert("delay_fs".into(), jnum(p.delay));
            }
            m.insert(
                "param".into(),
                jvec(&c.sweep.points.iter().map(|p| p.param).collect::<Vec<_>>()),
            );
            if c.sweep.axis == "alpha" {
                let rel: Vec<f64> = c
                    .sweep
                    .points
                    .iter()
                    .map(|p| p.param / c.sweep.peak_amplitude)
                    .collect();
                m.insert("alpha_relative".into(), jvec(&rel));
            }
            m.insert("mean_P_target".into(), jvec(&c.sweep.means()));
            m.insert(
                "sd_P_target".into(),
                jvec(&c.sweep.points.iter().map(|p| p.sd).collect::<Vec<_>>()),
            );
            Value::Object(m)
        })
        .collect();
    json!({
        "axis": o.axis.name(),
        "fwhm_ratio": jnum(o.fwhm_ratio),
        "oct": oct_json(&o.oct),
        "curves": curves,
    })
}

fn calibration_csv(c: &CalibrationOutcome) -> String {
    let mut out = String::new();
    if let Some(r) = c.rows.first() {
        for (name, _) in &r.params {
            out.push_str(name);
            out.push(',');
        }
    }
    out.push_str("yield,peak_intermediate,iterations,energy,status\n");
    for r in &c.rows {
        for (_, v) in &r.params {
            out.push_str(&num(*v));
            out.push(',');
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(r.yield_),
            num(r.peak_intermediate),
            r.iterations,
            num(r.energy),
            r.status
        );
    }
    out
}

fn calibration_json(c: &CalibrationOutcome) -> Value {
    let selected = c.selected_row().map(|r| {
        let mut m = Map::new();
        for (n, v) in &r.params {
            m.insert((*n).into(), jnum(*v));
        }
        m.insert("yield".into(), jnum(r.yield_));
        m.insert("peak_intermediate".into(), jnum(r.peak_intermediate));
        m.insert("energy".into(), jnum(r.energy));
        Value::Object(m)
    });
    json!({
        "target": match c.target {
            crate::config::CalibrationTarget::Oct => "oct",
            crate::config::CalibrationTarget::Stirap => "stirap",
        },
        "grid_points": c.rows.len(),
        "passing_points": c.rows.iter().filter(|r| r.passed()).count(),
        "selected": selected,
    })
}

/// Every artifact of one experiment, in a fixed order.
pub fn render(cfg: &ExperimentConfig, outcome: &Outcome) -> Vec<Artifact> {
    let art = |name: &str, contents: String| Artifact {
        name: name.into(),
        contents,
    };
    let mut files = Vec::new();
    let details = match outcome {
        Outcome::Stirap(o) => {
            files.push(art("populations.csv", populations_csv(&o.trajectory)));
            files.push(art("fields.csv", fields_csv(&o.fields)));
            stirap_json(o)
        }
        Outcome::Oct(o) => {
            files.push(art("populations.csv", populations_csv(o.trajectory())));
            files.push(art("fields.csv", fields_csv(o.fields())));
            files.push(art("guess_fields.csv", fields_csv(&o.guess)));
            files.push(art("convergence.csv", convergence_csv(o)));
            oct_json(o)
        }
        Outcome::Robustness(o) => {
            files.push(art("populations.csv", populations_csv(o.oct.trajectory())));
            files.push(art("convergence.csv", convergence_csv(&o.oct)));
            for c in &o.curves {
                files.push(art(
                    &format!("fields_{}.csv", c.name),
                    fields_csv(&c.fields),
                ));
                files.push(art(&format!("sweep_{}.csv", c.name), sweep_csv(&c.sweep)));
            }
            robustness_json(o)
        }
        Outcome::Calibration(c) => {
            files.push(art("calibration.csv", calibration_csv(c)));
            calibration_json(c)
        }
    };
    let summary = json!({
        "kind": cfg.kind.as_str(),
        "title": cfg.title,
        "levels": cfg.system.levels,
        "total_time_fs": jnum(cfg.system.total_time),
        "n_steps": cfg.system.n_steps,
        "result": details,
    });
    let mut text = serde_json::to_string_pretty(&summary).expect("json values serialize");
    text.push('\n');
    files.push(art("summary.json", text));
    files
}

/// Writes each artifact to a temporary file in `dir` and renames it into
/// place.
pub fn write_atomic(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    for a in artifacts {
        let tmp = dir.join(format!(".{}.tmp", a.name));
        fs::write(&tmp, &a.contents)?;
        fs::rename(&tmp, dir.join(&a.name))?;
    }
    Ok(())
}
