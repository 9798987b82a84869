//! Robustness of a transfer solution against additive pulse noise and a
//! decay width on the intermediate level.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::krotov::diagnose;
use crate::propagator::propagate_forward;
use crate::stirap::{make_stirap_fields, StirapParams};
use crate::system::{Channel, ControlField, LevelSystem, StateVector, TimeGrid};

/// Additive white noise `alpha * zeta(t)` with `zeta` uniform in `[-1, 1]`,
/// redrawn at every grid point and independently for every channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    /// Noise amplitude (rad/fs).
    pub alpha: f64,
    pub seed: u64,
}

/// The `zeta(t)` draws for one channel. Each channel reads its own ChaCha
/// stream of the seed, so adding a channel never shifts another's noise.
pub fn noise_samples(seed: u64, channel: Channel, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(channel.index());
    (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

pub fn perturb_fields(fields: &[ControlField], spec: &NoiseSpec) -> Vec<ControlField> {
    if spec.alpha == 0.0 {
        return fields.to_vec();
    }
    fields
        .iter()
        .map(|f| {
            let zeta = noise_samples(spec.seed, f.label(), f.samples().len());
            f.map(|i, e| e + spec.alpha * zeta[i])
        })
        .collect()
}

/// Decay width `beta * gamma` on one level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecaySpec {
    pub beta: f64,
    /// Reference rate (1/fs), conventionally `1/T`.
    pub gamma: f64,
    /// 0-based level index; level `|2>` is 1.
    pub level: usize,
}

impl DecaySpec {
    /// Decay on `|2>` with `gamma = 1 / total_time`.
    pub fn intermediate(beta: f64, total_time: f64) -> Self {
        Self {
            beta,
            gamma: 1.0 / total_time,
            level: 1,
        }
    }

    pub fn rate(&self) -> f64 {
        self.beta * self.gamma
    }

    pub fn apply(&self, system: &LevelSystem) -> Result<LevelSystem> {
        if !(self.beta >= 0.0 && self.gamma >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "decay needs beta, gamma >= 0 (got {}, {})",
                self.beta, self.gamma
            )));
        }
        system.with_decay(self.level, self.rate())
    }
}

/// `sum_channels int E(t)^2 dt` by the trapezoid rule.
pub fn field_energy(fields: &[ControlField]) -> f64 {
    fields
        .iter()
        .map(|f| {
            let sq: Vec<f64> = f.samples().iter().map(|e| e * e).collect();
            f.grid().integrate(&sq)
        })
        .sum()
}

/// Rescales the STIRAP peak amplitude so the sampled pair carries
/// `target_energy`.
pub fn match_energy(
    params: &StirapParams,
    grid: TimeGrid,
    target_energy: f64,
) -> Result<StirapParams> {
    if !(target_energy.is_finite() && target_energy > 0.0) {
        return Err(Error::InvalidParams(format!(
            "target energy must be > 0, got {target_energy}"
        )));
    }
    let (p, s) = make_stirap_fields(params, grid)?;
    let current = field_energy(&[p, s]);
    params.with_peak_amplitude(params.peak_amplitude * (target_energy / current).sqrt())
}

/// Mean channel FWHM of the STIRAP set over that of the optimized set.
pub fn fwhm_ratio(oct_fields: &[ControlField], stirap_fields: &[ControlField]) -> Result<f64> {
    let mean_fwhm = |fields: &[ControlField]| -> Result<f64> {
        if fields.is_empty() {
            return Err(Error::DegenerateField("empty field set".into()));
        }
        let total = fields
            .iter()
            .map(|f| diagnose(f).map(|d| d.fwhm))
            .sum::<Result<f64>>()?;
        Ok(total / fields.len() as f64)
    };
    Ok(mean_fwhm(stirap_fields)? / mean_fwhm(oct_fields)?)
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepAxis {
    /// Noise amplitudes; every value averaged over the realizations.
    Alpha(Vec<f64>),
    /// Decay factors; deterministic.
    Beta(Vec<f64>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Alpha(_) => "alpha",
            SweepAxis::Beta(_) => "beta",
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            SweepAxis::Alpha(v) | SweepAxis::Beta(v) => v,
        }
    }
}

/// What is being perturbed: a decay-free system, its fields and the transfer
/// endpoints.
#[derive(Clone, Debug)]
pub struct SweepSetup {
    pub system: LevelSystem,
    pub fields: Vec<ControlField>,
    pub initial_level: usize,
    pub target_level: usize,
    /// Level receiving the decay width on the beta axis.
    pub decay_level: usize,
    /// Reference decay rate (1/fs).
    pub gamma: f64,
    pub n_realizations: usize,
    /// Realization `r` uses seed `seed + r`, at every alpha.
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub param: f64,
    pub mean: f64,
    /// Sample standard deviation over realizations (0 for one realization).
    pub sd: f64,
    pub n_realizations: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub axis: &'static str,
    pub points: Vec<SweepPoint>,
    /// Energy of the unperturbed fields.
    pub field_energy: f64,
    /// Largest unperturbed `|E|` over channels, to put alpha in relative units.
    pub peak_amplitude: f64,
}

impl SweepResult {
    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn sweep(setup: &SweepSetup, axis: &SweepAxis) -> Result<SweepResult> {
    let ladder = axis.values();
    if ladder.is_empty() {
        return Err(Error::InvalidParams("empty sweep ladder".into()));
    }
    if ladder.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidParams(
            "sweep values must be finite and >= 0".into(),
        ));
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams(
            "sweep ladder must be strictly increasing".into(),
        ));
    }
    setup.system.check_fields(&setup.fields)?;
    let n = setup.system.n_levels();
    let initial = StateVector::basis(n, setup.initial_level)?;
    if setup.target_level >= n {
        return Err(Error::IndexOutOfRange {
            index: setup.target_level,
            limit: n,
        });
    }

    let realizations = match axis {
        SweepAxis::Alpha(_) => setup.n_realizations.max(1),
        SweepAxis::Beta(_) => 1,
    };
    let jobs: Vec<(usize, usize)> = (0..ladder.len())
        .flat_map(|i| (0..realizations).map(move |r| (i, r)))
        .collect();

    let finals = jobs
        .par_iter()
        .map(|&(i, r)| -> Result<f64> {
            let (system, fields) = match axis {
                SweepAxis::Alpha(a) => {
                    let spec = NoiseSpec {
                        alpha: a[i],
                        seed: setup.seed.wrapping_add(r as u64),
                    };
                    (setup.system.clone(), perturb_fields(&setup.fields, &spec))
                }
                SweepAxis::Beta(b) => {
                    let decay = DecaySpec {
                        beta: b[i],
                        gamma: setup.gamma,
                        level: setup.decay_level,
                    };
                    (decay.apply(&setup.system)?, setup.fields.clone())
                }
            };
            let tr = propagate_forward(&system, &fields, &initial)?;
            Ok(tr.final_populations()[setup.target_level])
        })
        .collect::<Result<Vec<f64>>>()?;

    let points = ladder
        .iter()
        .enumerate()
        .map(|(i, &param)| {
            let values = finals[i * realizations..(i + 1) * realizations].to_vec();
            let (mean, sd) = mean_sd(&values);
            SweepPoint {
                param,
                mean,
                sd,
                n_realizations: realizations,
                values,
            }
        })
        .collect();

    let peak_amplitude = setup
        .fields
        .iter()
        .flat_map(|f| f.samples().iter().map(|e| e.abs()))
        .fold(0.0, f64::max);
    Ok(SweepResult {
        axis: axis.name(),
        points,
        field_energy: field_energy(&setup.fields),
        peak_amplitude,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TimeGrid {
        TimeGrid::new(100.0, 1000).unwrap()
    }

    fn stirap() -> (StirapParams, Vec<ControlField>) {
        let p = StirapParams::new(0.6, 12.0, 24.0, 100.0).unwrap();
        let (a, b) = make_stirap_fields(&p, grid()).unwrap();
        (p, vec![a, b])
    }

    #[test]
    fn zero_alpha_is_bit_exact() {
        let (_, f) = stirap();
        let out = perturb_fields(
            &f,
            &NoiseSpec {
                alpha: 0.0,
                seed: 7,
            },
        );
        assert_eq!(out, f);
    }

    #[test]
    fn noise_is_seeded_and_bounded() {
        let (_, f) = stirap();
        let spec = NoiseSpec {
            alpha: 0.06,
            seed: 42,
        };
        assert_eq!(perturb_fields(&f, &spec), perturb_fields(&f, &spec));
        let z = noise_samples(42, Channel::Pump, 5000);
        assert!(z.iter().all(|x| x.abs() <= 1.0));
        assert_ne!(z, noise_samples(42, Channel::Stokes, 5000));
        assert_ne!(z, noise_samples(43, Channel::Pump, 5000));
        let mean = z.iter().sum::<f64>() / z.len() as f64;
        assert!(mean.abs() < 0.05);
    }

    #[test]
    fn energy_of_simple_fields() {
        let g = grid();
        assert_eq!(field_energy(&[ControlField::zeros(g, Channel::Pump)]), 0.0);
        let c = ControlField::from_fn(g, Channel::Pump, |_| 0.3).unwrap();
        assert!((field_energy(std::slice::from_ref(&c)) - 0.09 * 100.0).abs() < 1e-12);
        let (_, f) = stirap();
        let e1 = field_energy(&f);
        let scaled: Vec<_> = f.iter().map(|x| x.map(|_, v| 3.0 * v)).collect();
        assert!((field_energy(&scaled) - 9.0 * e1).abs() < 1e-12 * e1);
    }

    #[test]
    fn matching_energy() {
        let (p, f) = stirap();
        let e = field_energy(&f);
        let same = match_energy(&p, grid(), e).unwrap();
        assert!((same.peak_amplitude - p.peak_amplitude).abs() < 1e-14);
        let quad = match_energy(&p, grid(), 4.0 * e).unwrap();
        assert!((quad.peak_amplitude - 2.0 * p.peak_amplitude).abs() < 1e-12);
        let (a, b) = make_stirap_fields(&quad, grid()).unwrap();
        assert!((field_energy(&[a, b]) / (4.0 * e) - 1.0).abs() < 1e-6);
        assert!(match_energy(&p, grid(), 0.0).is_err());
    }

    #[test]
    fn fwhm_ratio_scales_with_width() {
        let (p, f) = stirap();
        assert!((fwhm_ratio(&f, &f).unwrap() - 1.0).abs() < 1e-15);
        let wide = StirapParams {
            width: 2.0 * p.width,
            ..p
        };
        let (a, b) = make_stirap_fields(&wide, grid()).unwrap();
        let r = fwhm_ratio(&f, &[a, b]).unwrap();
        assert!((r - 2.0).abs() < 1e-3, "{r}");
    }

    #[test]
    fn sweep_validation_and_flat_zero_ladder() {
        let (_, f) = stirap();
        let setup = SweepSetup {
            system: LevelSystem::lambda(0.0),
            fields: f,
            initial_level: 0,
            target_level: 2,
            decay_level: 1,
            gamma: 0.01,
            n_realizations: 3,
            seed: 1,
        };
        assert!(sweep(&setup, &SweepAxis::Alpha(vec![0.1, 0.05])).is_err());
        assert!(sweep(&setup, &SweepAxis::Beta(vec![])).is_err());
        let r = sweep(&setup, &SweepAxis::Alpha(vec![0.0])).unwrap();
        assert_eq!(r.points[0].sd, 0.0);
        assert_eq!(r.points[0].n_realizations, 3);
        let b = sweep(&setup, &SweepAxis::Beta(vec![0.0])).unwrap();
        assert_eq!(b.points[0].n_realizations, 1);
        assert_eq!(b.points[0].mean, r.points[0].mean);
    }
}
