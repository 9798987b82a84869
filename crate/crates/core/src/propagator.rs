//! Forward, backward and inhomogeneous-backward propagation of the
//! Schrödinger equation `i da/dt = H(t) a` on a uniform grid.
//!
//! Over step `k` the Hamiltonian is held constant at its interval-midpoint
//! value (mean of the two bounding field samples) and the step is applied as
//! an exact exponential, so decay-free propagation is unitary to rounding.
//! Backward propagation uses the adjoint generator `H^dagger`, which keeps
//! `<chi(t)|psi(t)>` constant along matched trajectories even with decay.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::StepKernel;
use crate::system::{populations, ControlField, LevelSystem, StateVector, TimeGrid};

/// Maximum deviation of an input state's norm from 1 accepted by the checked
/// entry points.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Sampled solution on every grid point, in increasing time order regardless
/// of propagation direction.
#[derive(Clone, Debug)]
pub struct Trajectory {
    grid: TimeGrid,
    states: Vec<StateVector>,
    populations: Vec<Vec<f64>>,
    norms: Vec<f64>,
}

impl Trajectory {
    pub(crate) fn from_states_checked(grid: TimeGrid, states: Vec<StateVector>) -> Result<Self> {
        let populations: Vec<Vec<f64>> = states.iter().map(populations).collect();
        let norms: Vec<f64> = populations
            .iter()
            .map(|p| p.iter().sum::<f64>().sqrt())
            .collect();
        if norms.iter().any(|n| !n.is_finite()) {
            return Err(Error::Propagation("non-finite amplitude".into()));
        }
        Ok(Self {
            grid,
            states,
            populations,
            norms,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &StateVector {
        &self.states[index]
    }

    pub fn initial(&self) -> &StateVector {
        &self.states[0]
    }

    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory is never empty")
    }

    /// Populations per grid point.
    pub fn populations(&self) -> &[Vec<f64>] {
        &self.populations
    }

    /// Euclidean norm per grid point.
    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Population of `level` across the grid.
    pub fn level_history(&self, level: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[level]).collect()
    }

    pub fn final_populations(&self) -> &[f64] {
        self.populations.last().expect("trajectory is never empty")
    }

    /// Peak population of `level` and the time it occurs.
    pub fn peak(&self, level: usize) -> (f64, f64) {
        let (i, p) = self.populations.iter().map(|p| p[level]).enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, p)| if p > acc.1 { (i, p) } else { acc },
        );
        (p, self.grid.time(i))
    }
}

/// Source term `s(t)` of the inhomogeneous backward equation, one vector per
/// grid point. Linearly interpolated within each step.
#[derive(Clone, Debug)]
pub struct InhomogeneousSource {
    grid: TimeGrid,
    vectors: Vec<DVector<C64>>,
}

impl InhomogeneousSource {
    pub fn new(grid: TimeGrid, vectors: Vec<DVector<C64>>) -> Result<Self> {
        if vectors.len() != grid.n_points() {
            return Err(Error::GridMismatch(format!(
                "source has {} vectors, grid has {} points",
                vectors.len(),
                grid.n_points()
            )));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != vectors[0].len()) {
            return Err(Error::DimensionMismatch {
                expected: vectors[0].len(),
                got: v.len(),
            });
        }
        Ok(Self { grid, vectors })
    }

    pub fn zeros(grid: TimeGrid, n_levels: usize) -> Self {
        Self {
            grid,
            vectors: vec![DVector::zeros(n_levels); grid.n_points()],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn vectors(&self) -> &[DVector<C64>] {
        &self.vectors
    }
}

/// Step-by-step propagation engine for one system and one set of fields.
///
/// Unlike the free functions it does not insist on normalized boundary
/// states, which costate propagation needs.
pub struct Propagator<'a> {
    system: &'a LevelSystem,
    fields: &'a [ControlField],
    grid: TimeGrid,
    hermitian: bool,
}

impl<'a> Propagator<'a> {
    pub fn new(system: &'a LevelSystem, fields: &'a [ControlField]) -> Result<Self> {
        let grid = system.check_fields(fields)?;
        Ok(Self {
            system,
            fields,
            grid,
            hermitian: system.is_lossless(),
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub(crate) fn kernel(&self, step: usize) -> StepKernel {
        let amps: Vec<f64> = self.fields.iter().map(|f| f.midpoint(step)).collect();
        StepKernel::new(
            self.system.hamiltonian(&amps),
            self.grid.dt(),
            self.hermitian,
        )
    }

    fn check_dim(&self, state: &StateVector) -> Result<()> {
        if state.dim() != self.system.n_levels() {
            return Err(Error::DimensionMismatch {
                expected: self.system.n_levels(),
                got: state.dim(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, initial: &StateVector) -> Result<Trajectory> {
        self.check_dim(initial)?;
        let mut states = Vec::with_capacity(self.grid.n_points());
        let mut psi = initial.amplitudes().clone();
        states.push(initial.clone());
        for k in 0..self.grid.n_steps() {
            psi = self.kernel(k).forward(&psi);
            states.push(StateVector::from_dvector(psi.clone()));
        }
        Trajectory::from_states_checked(self.grid, states)
    }

    pub fn backward(&self, final_state: &StateVector) -> Result<Trajectory> {
        self.check_dim(final_state)?;
        let n = self.grid.n_steps();
        let mut rev = Vec::with_capacity(n + 1);
        let mut chi = final_state.amplitudes().clone();
        rev.push(final_state.clone());
        for k in (0..n).rev() {
            chi = self.kernel(k).backward(&chi);
            rev.push(StateVector::from_dvector(chi.clone()));
        }
        rev.reverse();
        Trajectory::from_states_checked(self.grid, rev)
    }

    pub fn backward_inhomogeneous(
        &self,
        final_state: &StateVector,
        source: &InhomogeneousSource,
    ) -> Result<Trajectory> {
        self.check_dim(final_state)?;
        if *source.grid() != self.grid {
            return Err(Error::GridMismatch(
                "source grid differs from field grid".into(),
            ));
        }
        if source.vectors()[0].len() != self.system.n_levels() {
            return Err(Error::DimensionMismatch {
                expected: self.system.n_levels(),
                got: source.vectors()[0].len(),
            });
        }
        let n = self.grid.n_steps();
        let s = source.vectors();
        let mut rev = Vec::with_capacity(n + 1);
        let mut chi = final_state.amplitudes().clone();
        rev.push(final_state.clone());
        for k in (0..n).rev() {
            chi = self
                .kernel(k)
                .backward_inhomogeneous(&chi, &s[k], &s[k + 1]);
            rev.push(StateVector::from_dvector(chi.clone()));
        }
        rev.reverse();
        Trajectory::from_states_checked(self.grid, rev)
    }
}

fn check_normalized(state: &StateVector) -> Result<()> {
    let norm = state.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized(norm));
    }
    Ok(())
}

/// Integrates from `t = 0` to `t = T` starting at a normalized `initial`.
pub fn propagate_forward(
    system: &LevelSystem,
    fields: &[ControlField],
    initial: &StateVector,
) -> Result<Trajectory> {
    check_normalized(initial)?;
    Propagator::new(system, fields)?.forward(initial)
}

/// Integrates from `t = T` down to `t = 0` with the adjoint generator.
pub fn propagate_backward(
    system: &LevelSystem,
    fields: &[ControlField],
    final_state: &StateVector,
) -> Result<Trajectory> {
    check_normalized(final_state)?;
    Propagator::new(system, fields)?.backward(final_state)
}

/// Integrates `d chi/dt = -i H^dagger chi + s(t)` from `t = T` down to
/// `t = 0`. The source is used as given (any weight must already be folded
/// in).
pub fn propagate_backward_inhomogeneous(
    system: &LevelSystem,
    fields: &[ControlField],
    final_state: &StateVector,
    source: &InhomogeneousSource,
) -> Result<Trajectory> {
    check_normalized(final_state)?;
    Propagator::new(system, fields)?.backward_inhomogeneous(final_state, source)
}
