//! Reference integrators and random instances shared by the integration
//! tests. Nothing here calls into the library's stepping code.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stirap_oct::{Channel, Complex64 as C64, ControlField, LevelSystem, TimeGrid};

/// Classical RK4 for `dy/dt = f(t, y)` from `t0` with `n` steps of size `h`
/// (`h` may be negative).
pub fn rk4(
    f: impl Fn(f64, &DVector<C64>) -> DVector<C64>,
    t0: f64,
    h: f64,
    n: usize,
    y0: &DVector<C64>,
) -> DVector<C64> {
    let mut y = y0.clone();
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &(&y + &k1 * C64::new(0.5 * h, 0.0)));
        let k3 = f(t + 0.5 * h, &(&y + &k2 * C64::new(0.5 * h, 0.0)));
        let k4 = f(t + h, &(&y + &k3 * C64::new(h, 0.0)));
        y += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
    }
    y
}

/// Step Hamiltonian built by hand: diagonal `Delta - i gamma`, the midpoint
/// field average on the chain off-diagonals.
pub fn step_hamiltonian(
    system: &LevelSystem,
    fields: &[ControlField],
    step: usize,
) -> DMatrix<C64> {
    let n = system.n_levels();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(system.detunings()[i], -system.decay_rates()[i]);
    }
    for (i, f) in fields.iter().enumerate() {
        let s = f.samples();
        let e = 0.5 * (s[step] + s[step + 1]);
        h[(i, i + 1)] = C64::new(e, 0.0);
        h[(i + 1, i)] = C64::new(e, 0.0);
    }
    h
}

const MINUS_I: C64 = C64 { re: 0.0, im: -1.0 };

/// Forward states on the coarse grid, each coarse step integrated with
/// `substeps` RK4 steps of the same piecewise-constant Hamiltonian.
pub fn oracle_forward(
    system: &LevelSystem,
    fields: &[ControlField],
    initial: &DVector<C64>,
    substeps: usize,
) -> Vec<DVector<C64>> {
    let grid = *fields[0].grid();
    let h = grid.dt() / substeps as f64;
    let mut out = vec![initial.clone()];
    for k in 0..grid.n_steps() {
        let hk = step_hamiltonian(system, fields, k);
        let y = rk4(
            |_, y| &hk * y * MINUS_I,
            grid.time(k),
            h,
            substeps,
            out.last().unwrap(),
        );
        out.push(y);
    }
    out
}

/// Backward states for `d chi/dt = -i H^dagger chi + s(t)` with `s` linear
/// between grid samples. `source = None` gives the homogeneous equation.
pub fn oracle_backward(
    system: &LevelSystem,
    fields: &[ControlField],
    final_state: &DVector<C64>,
    source: Option<&[DVector<C64>]>,
    substeps: usize,
) -> Vec<DVector<C64>> {
    let grid = *fields[0].grid();
    let n = grid.n_steps();
    let h = grid.dt() / substeps as f64;
    let mut out = vec![DVector::zeros(0); n + 1];
    out[n] = final_state.clone();
    for k in (0..n).rev() {
        let hk = step_hamiltonian(system, fields, k).adjoint();
        let (t0, t1) = (grid.time(k), grid.time(k + 1));
        let rhs = |t: f64, y: &DVector<C64>| {
            let mut d = &hk * y * MINUS_I;
            if let Some(s) = source {
                let w = (t - t0) / (t1 - t0);
                d += &s[k] * C64::new(1.0 - w, 0.0) + &s[k + 1] * C64::new(w, 0.0);
            }
            d
        };
        out[k] = rk4(rhs, t1, -h, substeps, &out[k + 1]);
    }
    out
}

/// Sum of a few Gaussian bumps, each `(amplitude, center, width)`.
#[derive(Clone, Debug)]
pub struct SmoothPulse(pub Vec<(f64, f64, f64)>);

impl SmoothPulse {
    pub fn random(rng: &mut ChaCha8Rng, t_end: f64, max_amp: f64) -> Self {
        Self(
            (0..3)
                .map(|_| {
                    (
                        rng.random_range(-max_amp..max_amp),
                        rng.random_range(0.1 * t_end..0.9 * t_end),
                        rng.random_range(0.05 * t_end..0.3 * t_end),
                    )
                })
                .collect(),
        )
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0
            .iter()
            .map(|(a, c, w)| a * (-(t - c).powi(2) / (2.0 * w * w)).exp())
            .sum()
    }

    pub fn sample(&self, grid: TimeGrid, channel: Channel) -> ControlField {
        ControlField::from_fn(grid, channel, |t| self.eval(t)).unwrap()
    }
}

/// A random 3- or 4-level chain with random detunings, optional decay, and
/// random smooth pulses on every coupling.
pub struct Instance {
    pub system: LevelSystem,
    pub pulses: Vec<SmoothPulse>,
    pub fields: Vec<ControlField>,
}

pub fn channels(n_levels: usize) -> Vec<Channel> {
    match n_levels {
        3 => vec![Channel::Pump, Channel::Stokes],
        4 => vec![Channel::Pump, Channel::Intermediate, Channel::Stokes],
        _ => panic!("only 3- and 4-level chains"),
    }
}

pub fn random_instance(seed: u64, n_levels: usize, lossy: bool, grid: TimeGrid) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let detunings = (0..n_levels)
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                rng.random_range(-0.5..0.5)
            }
        })
        .collect();
    let decay = (0..n_levels)
        .map(|i| {
            if lossy && i > 0 {
                rng.random_range(0.0..0.05)
            } else {
                0.0
            }
        })
        .collect();
    let ch = channels(n_levels);
    let system = LevelSystem::new(detunings, decay, &ch).unwrap();
    let pulses: Vec<SmoothPulse> = ch
        .iter()
        .map(|_| SmoothPulse::random(&mut rng, grid.t_end(), 1.0))
        .collect();
    let fields = pulses
        .iter()
        .zip(&ch)
        .map(|(p, &c)| p.sample(grid, c))
        .collect();
    Instance {
        system,
        pulses,
        fields,
    }
}

pub fn random_state(seed: u64, n: usize) -> DVector<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = DVector::from_fn(n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

pub fn max_abs_diff(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
