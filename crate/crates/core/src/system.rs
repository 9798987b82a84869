//! Level systems in the rotating frame, sampled control fields and state
//! vectors.
//!
//! Units throughout: ħ = 1, time in fs, Rabi frequencies, detunings and decay
//! widths in rad/fs.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Uniform grid on `[0, t_end]` with `n_steps` intervals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "t_end must be positive, got {t_end}"
            )));
        }
        if n_steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "n_steps must be >= 2, got {n_steps}"
            )));
        }
        Ok(Self { t_end, n_steps })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_points(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    pub fn time(&self, index: usize) -> f64 {
        if index == self.n_steps {
            self.t_end
        } else {
            index as f64 * self.dt()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points()).map(move |i| self.time(i))
    }

    /// Trapezoid-rule integral of samples taken on this grid.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.n_points());
        let inner: f64 = samples[1..samples.len() - 1].iter().sum();
        self.dt() * (inner + 0.5 * (samples[0] + samples[samples.len() - 1]))
    }
}

/// Control channel a field drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    Pump,
    Stokes,
    Intermediate,
}

impl Channel {
    pub fn name(&self) -> &'static str {
        match self {
            Channel::Pump => "pump",
            Channel::Stokes => "stokes",
            Channel::Intermediate => "intermediate",
        }
    }

    /// Stable small integer, used to derive per-channel random streams.
    pub fn index(&self) -> u64 {
        match self {
            Channel::Pump => 0,
            Channel::Stokes => 1,
            Channel::Intermediate => 2,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A real Rabi-frequency envelope sampled on every point of a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ControlField {
    grid: TimeGrid,
    samples: Vec<f64>,
    label: Channel,
}

impl ControlField {
    pub fn new(grid: TimeGrid, samples: Vec<f64>, label: Channel) -> Result<Self> {
        if samples.len() != grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "{label} field has {} samples, grid has {} points",
                samples.len(),
                grid.n_points()
            )));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFiniteField(label.to_string()));
        }
        Ok(Self {
            grid,
            samples,
            label,
        })
    }

    pub fn zeros(grid: TimeGrid, label: Channel) -> Self {
        Self {
            grid,
            samples: vec![0.0; grid.n_points()],
            label,
        }
    }

    pub fn from_fn(grid: TimeGrid, label: Channel, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.times().map(f).collect(), label)
    }

    /// `amplitude * exp(-(t - center)^2 / (2 width^2))`.
    pub fn gaussian(
        grid: TimeGrid,
        label: Channel,
        amplitude: f64,
        center: f64,
        width: f64,
    ) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidParams(format!(
                "gaussian width must be > 0, got {width}"
            )));
        }
        Self::from_fn(grid, label, |t| {
            let x = (t - center) / width;
            amplitude * (-0.5 * x * x).exp()
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn label(&self) -> Channel {
        self.label
    }

    /// Field value held over step `k` (interval `[t_k, t_{k+1}]`), sampled at
    /// the interval midpoint.
    pub fn midpoint(&self, step: usize) -> f64 {
        0.5 * (self.samples[step] + self.samples[step + 1])
    }

    pub fn map(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .enumerate()
                .map(|(i, &s)| f(i, s))
                .collect(),
            label: self.label,
        }
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }
}

/// Nearest-neighbour coupling `level <-> level + 1` driven by `channel`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coupling {
    pub lower: usize,
    pub channel: Channel,
}

/// N-level system with a strictly sequential coupling chain.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSystem {
    detunings: Vec<f64>,
    decay_rates: Vec<f64>,
    couplings: Vec<Coupling>,
}

impl LevelSystem {
    pub fn new(detunings: Vec<f64>, decay_rates: Vec<f64>, channels: &[Channel]) -> Result<Self> {
        let n = detunings.len();
        if n < 3 {
            return Err(Error::InvalidParams(format!(
                "need at least 3 levels, got {n}"
            )));
        }
        if decay_rates.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: decay_rates.len(),
            });
        }
        if channels.len() != n - 1 {
            return Err(Error::TopologyMismatch(format!(
                "{n} levels need {} couplings, got {}",
                n - 1,
                channels.len()
            )));
        }
        for (i, c) in channels.iter().enumerate() {
            if channels[..i].contains(c) {
                return Err(Error::TopologyMismatch(format!("channel {c} used twice")));
            }
        }
        if detunings.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidParams("non-finite detuning".into()));
        }
        if decay_rates.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::InvalidParams(
                "decay rates must be finite and >= 0".into(),
            ));
        }
        let couplings = channels
            .iter()
            .enumerate()
            .map(|(lower, &channel)| Coupling { lower, channel })
            .collect();
        Ok(Self {
            detunings,
            decay_rates,
            couplings,
        })
    }

    /// Λ system: pump couples 1-2, Stokes couples 2-3, `detuning` on level 2.
    pub fn lambda(detuning: f64) -> Self {
        Self::new(
            vec![0.0, detuning, 0.0],
            vec![0.0; 3],
            &[Channel::Pump, Channel::Stokes],
        )
        .expect("valid lambda system")
    }

    /// Four-level chain: pump 1-2, intermediate 2-3, Stokes 3-4, with
    /// detunings on levels 2 and 4.
    pub fn four_level_chain(detuning_2: f64, detuning_4: f64) -> Self {
        Self::new(
            vec![0.0, detuning_2, 0.0, detuning_4],
            vec![0.0; 4],
            &[Channel::Pump, Channel::Intermediate, Channel::Stokes],
        )
        .expect("valid four-level chain")
    }

    /// Same system with decay width `rate` on `level` (0-based).
    pub fn with_decay(&self, level: usize, rate: f64) -> Result<Self> {
        if level >= self.n_levels() {
            return Err(Error::IndexOutOfRange {
                index: level,
                limit: self.n_levels(),
            });
        }
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "decay rate must be >= 0, got {rate}"
            )));
        }
        let mut out = self.clone();
        out.decay_rates[level] = rate;
        Ok(out)
    }

    pub fn n_levels(&self) -> usize {
        self.detunings.len()
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn decay_rates(&self) -> &[f64] {
        &self.decay_rates
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn channels(&self) -> Vec<Channel> {
        self.couplings.iter().map(|c| c.channel).collect()
    }

    pub fn is_lossless(&self) -> bool {
        self.decay_rates.iter().all(|&g| g == 0.0)
    }

    /// Position of `channel` in the coupling chain.
    pub fn channel_position(&self, channel: Channel) -> Option<usize> {
        self.couplings.iter().position(|c| c.channel == channel)
    }

    /// Checks that `fields` holds exactly one field per coupling, in chain
    /// order, all on one grid. Returns that grid.
    pub fn check_fields(&self, fields: &[ControlField]) -> Result<TimeGrid> {
        if fields.len() != self.couplings.len() {
            return Err(Error::TopologyMismatch(format!(
                "{} couplings but {} fields",
                self.couplings.len(),
                fields.len()
            )));
        }
        for (c, f) in self.couplings.iter().zip(fields) {
            if c.channel != f.label() {
                return Err(Error::TopologyMismatch(format!(
                    "coupling {}-{} expects a {} field, got {}",
                    c.lower + 1,
                    c.lower + 2,
                    c.channel,
                    f.label()
                )));
            }
        }
        let grid = *fields[0].grid();
        if fields.iter().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch(
                "fields are sampled on different grids".into(),
            ));
        }
        Ok(grid)
    }

    /// RWA Hamiltonian for the given instantaneous coupling amplitudes, one
    /// per coupling in chain order.
    pub fn hamiltonian(&self, amplitudes: &[f64]) -> DMatrix<C64> {
        let n = self.n_levels();
        let mut h = DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            self.detunings
                .iter()
                .zip(&self.decay_rates)
                .map(|(&d, &g)| C64::new(d, -g)),
        ));
        for (c, &a) in self.couplings.iter().zip(amplitudes) {
            h[(c.lower, c.lower + 1)] = C64::new(a, 0.0);
            h[(c.lower + 1, c.lower)] = C64::new(a, 0.0);
        }
        h
    }

    /// Coupling operator of the `position`-th coupling in the chain.
    pub fn coupling_operator(&self, position: usize) -> CouplingOperator {
        CouplingOperator {
            n_levels: self.n_levels(),
            lower: self.couplings[position].lower,
        }
    }
}

/// Hamiltonian at grid point `step_index`.
pub fn build_hamiltonian(
    system: &LevelSystem,
    fields: &[ControlField],
    step_index: usize,
) -> Result<DMatrix<C64>> {
    let grid = system.check_fields(fields)?;
    if step_index >= grid.n_points() {
        return Err(Error::IndexOutOfRange {
            index: step_index,
            limit: grid.n_points(),
        });
    }
    let amps: Vec<f64> = fields.iter().map(|f| f.samples()[step_index]).collect();
    Ok(system.hamiltonian(&amps))
}

/// Unit coupling `|i><i+1| + |i+1><i|`, the derivative of the Hamiltonian
/// with respect to one control channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CouplingOperator {
    n_levels: usize,
    lower: usize,
}

impl CouplingOperator {
    pub fn new(n_levels: usize, lower: usize) -> Result<Self> {
        if lower + 1 >= n_levels {
            return Err(Error::IndexOutOfRange {
                index: lower + 1,
                limit: n_levels,
            });
        }
        Ok(Self { n_levels, lower })
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_levels, self.n_levels);
        m[(self.lower, self.lower + 1)] = 1.0;
        m[(self.lower + 1, self.lower)] = 1.0;
        m
    }

    /// `<bra| mu |ket>` without building the matrix.
    pub fn matrix_element(&self, bra: &DVector<C64>, ket: &DVector<C64>) -> C64 {
        let (i, j) = (self.lower, self.lower + 1);
        bra[i].conj() * ket[j] + bra[j].conj() * ket[i]
    }
}

/// Complex amplitudes of the N levels.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self {
            amplitudes: DVector::from_vec(amplitudes),
        }
    }

    pub fn from_dvector(amplitudes: DVector<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn basis(n_levels: usize, level: usize) -> Result<Self> {
        if level >= n_levels {
            return Err(Error::IndexOutOfRange {
                index: level,
                limit: n_levels,
            });
        }
        let mut a = DVector::zeros(n_levels);
        a[level] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: a })
    }

    pub fn zeros(n_levels: usize) -> Self {
        Self {
            amplitudes: DVector::zeros(n_levels),
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_inner(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// Level populations `|a_i|^2`.
pub fn populations(state: &StateVector) -> Vec<f64> {
    state.amplitudes.iter().map(|a| a.norm_sqr()).collect()
}
