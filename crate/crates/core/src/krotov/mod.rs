//! First-order Krotov optimization of state-to-state transfer.
//!
//! The functional maximized is
//!
//! ```text
//! J = |<phi_f|psi(T)>|^2
//!     - sum_channels int (lambda_0 / S(t)) (E(t) - E_ref(t))^2 dt
//!     + lambda_b int <psi(t)|D|psi(t)> dt
//! ```
//!
//! with `S(t) = sin^2(pi t / T)` and `E_ref` the field of the previous
//! iteration. Each iteration propagates the costate backward under the old
//! fields from `chi(T) = <phi_f|psi(T)> phi_f`; when `lambda_b > 0` the
//! backward equation carries the source `-lambda_b D psi_old(t)`. The forward
//! sweep then updates every channel sample in turn,
//!
//! ```text
//! E(t) = E_ref(t) + (S(t) / lambda_0) Im <chi(t)|mu|psi(t)>,
//! ```
//!
//! using the freshly propagated state. Both the final-time and running terms
//! are convex in the state, so the first-order update is monotone.

mod ordering;

pub use ordering::{diagnose, pulse_ordering, Ordering, PulseDiagnostics, PulseOrdering};

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::StepKernel;
use crate::propagator::{Propagator, Trajectory};
use crate::system::{ControlField, CouplingOperator, LevelSystem, StateVector, TimeGrid};

/// Update shape `S(t) = sin^2(pi t / T)`; zero at both ends.
pub fn update_shape(t: f64, t_end: f64) -> f64 {
    (PI * t / t_end).sin().powi(2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OctConfig {
    /// Field-penalty weight, `lambda_a(t) = lambda_0 / S(t)`.
    pub lambda_0: f64,
    /// Weight of the allowed-subspace reward; 0 gives the standard functional.
    pub lambda_b: f64,
    pub max_iterations: usize,
    /// Converged once `J_k - J_{k-1} < convergence_tol` for
    /// `convergence_window` consecutive iterations.
    pub convergence_tol: f64,
    pub convergence_window: usize,
    /// Largest tolerated decrease of `J` between iterations.
    pub monotonic_slack: f64,
    pub initial_level: usize,
    pub target_level: usize,
    /// Diagonal of the allowed-subspace projector `D`.
    pub allowed: Vec<bool>,
    /// Keep a field snapshot every this many iterations (0: none). The guess
    /// and the last two iterations are always kept.
    pub snapshot_interval: usize,
}

impl OctConfig {
    /// Λ system, `|1> -> |3>`, allowed subspace `{|1>, |3>}`.
    pub fn lambda_system(lambda_0: f64, lambda_b: f64) -> Self {
        Self::transfer(3, lambda_0, lambda_b)
    }

    /// `|1> -> |n>` in an `n`-level chain with only the end levels allowed.
    pub fn transfer(n_levels: usize, lambda_0: f64, lambda_b: f64) -> Self {
        let mut allowed = vec![false; n_levels];
        allowed[0] = true;
        allowed[n_levels - 1] = true;
        Self {
            lambda_0,
            lambda_b,
            max_iterations: 1000,
            convergence_tol: 1e-7,
            convergence_window: 5,
            monotonic_slack: 1e-9,
            initial_level: 0,
            target_level: n_levels - 1,
            allowed,
            snapshot_interval: 0,
        }
    }

    pub fn validate(&self, n_levels: usize) -> Result<()> {
        if !(self.lambda_0.is_finite() && self.lambda_0 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda_0 must be > 0, got {}",
                self.lambda_0
            )));
        }
        if !(self.lambda_b.is_finite() && self.lambda_b >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "lambda_b must be >= 0, got {}",
                self.lambda_b
            )));
        }
        if self.allowed.len() != n_levels {
            return Err(Error::DimensionMismatch {
                expected: n_levels,
                got: self.allowed.len(),
            });
        }
        for level in [self.initial_level, self.target_level] {
            if level >= n_levels {
                return Err(Error::IndexOutOfRange {
                    index: level,
                    limit: n_levels,
                });
            }
        }
        if self.convergence_window == 0 {
            return Err(Error::InvalidParams(
                "convergence window must be >= 1".into(),
            ));
        }
        Ok(())
    }

    fn project_allowed(&self, psi: &DVector<C64>) -> DVector<C64> {
        DVector::from_iterator(
            psi.len(),
            psi.iter()
                .zip(&self.allowed)
                .map(|(a, &keep)| if keep { *a } else { C64::new(0.0, 0.0) }),
        )
    }
}

/// Terms of the functional for one trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalValue {
    pub j: f64,
    /// `|<phi_f|psi(T)>|^2`.
    pub yield_: f64,
    /// Field penalty (enters `j` with a minus sign).
    pub penalty: f64,
    /// `lambda_b int <D> dt` (enters `j` with a plus sign).
    pub constraint: f64,
}

pub fn evaluate_functional(
    config: &OctConfig,
    trajectory: &Trajectory,
    fields: &[ControlField],
    reference_fields: &[ControlField],
) -> Result<FunctionalValue> {
    let grid = *trajectory.grid();
    if fields.len() != reference_fields.len() {
        return Err(Error::TopologyMismatch(format!(
            "{} fields but {} reference fields",
            fields.len(),
            reference_fields.len()
        )));
    }
    for f in fields.iter().chain(reference_fields) {
        if *f.grid() != grid {
            return Err(Error::GridMismatch(
                "field grid differs from trajectory grid".into(),
            ));
        }
    }
    let n = trajectory.final_state().dim();
    config.validate(n)?;

    let yield_ = trajectory.final_populations()[config.target_level];

    let dt = grid.dt();
    let mut penalty = 0.0;
    for (f, r) in fields.iter().zip(reference_fields) {
        for j in 1..grid.n_steps() {
            let d = f.samples()[j] - r.samples()[j];
            if d != 0.0 {
                penalty += config.lambda_0 / update_shape(grid.time(j), grid.t_end()) * d * d * dt;
            }
        }
    }

    let constraint = if config.lambda_b > 0.0 {
        let allowed: Vec<f64> = trajectory
            .populations()
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&config.allowed)
                    .filter(|(_, &a)| a)
                    .map(|(x, _)| x)
                    .sum()
            })
            .collect();
        config.lambda_b * grid.integrate(&allowed)
    } else {
        0.0
    };

    Ok(FunctionalValue {
        j: yield_ - penalty + constraint,
        yield_,
        penalty,
        constraint,
    })
}

#[derive(Clone, Debug)]
pub struct IterationRecord {
    /// 0 is the initial guess.
    pub iteration: usize,
    pub value: FunctionalValue,
    pub fields: Option<Vec<ControlField>>,
}

#[derive(Clone, Debug)]
pub struct KrotovRun {
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub final_fields: Vec<ControlField>,
    /// Fields of the second-to-last iteration: the penalty reference of the
    /// final functional value.
    pub final_reference: Vec<ControlField>,
    pub final_trajectory: Trajectory,
}

impl KrotovRun {
    pub fn final_value(&self) -> FunctionalValue {
        self.iterations
            .last()
            .expect("at least the guess is recorded")
            .value
    }

    pub fn n_iterations(&self) -> usize {
        self.iterations.len() - 1
    }
}

/// Forward propagation that also returns the per-step kernels.
fn forward_with_kernels(
    system: &LevelSystem,
    fields: &[ControlField],
    initial: &StateVector,
) -> Result<(Trajectory, Vec<StepKernel>)> {
    let prop = Propagator::new(system, fields)?;
    let kernels: Vec<StepKernel> = (0..prop.grid().n_steps()).map(|k| prop.kernel(k)).collect();
    let mut states = Vec::with_capacity(kernels.len() + 1);
    let mut psi = initial.amplitudes().clone();
    states.push(initial.clone());
    for k in &kernels {
        psi = k.forward(&psi);
        states.push(StateVector::from_dvector(psi.clone()));
    }
    Ok((
        Trajectory::from_states_checked(*prop.grid(), states)?,
        kernels,
    ))
}

fn backward_costate(
    config: &OctConfig,
    kernels: &[StepKernel],
    forward: &Trajectory,
) -> Vec<DVector<C64>> {
    let n = kernels.len();
    let phi_f = StateVector::basis(forward.final_state().dim(), config.target_level)
        .expect("validated target level");
    let tau = phi_f.inner(forward.final_state());
    let mut chi = phi_f.into_inner() * tau;
    let mut out = vec![DVector::zeros(0); n + 1];
    out[n] = chi.clone();
    if config.lambda_b > 0.0 {
        let src: Vec<DVector<C64>> = forward
            .states()
            .iter()
            .map(|s| config.project_allowed(s.amplitudes()) * C64::new(-config.lambda_b, 0.0))
            .collect();
        for k in (0..n).rev() {
            chi = kernels[k].backward_inhomogeneous(&chi, &src[k], &src[k + 1]);
            out[k] = chi.clone();
        }
    } else {
        for k in (0..n).rev() {
            chi = kernels[k].backward(&chi);
            out[k] = chi.clone();
        }
    }
    out
}

struct Sweep {
    fields: Vec<ControlField>,
    trajectory: Trajectory,
    kernels: Vec<StepKernel>,
}

fn forward_sweep(
    system: &LevelSystem,
    config: &OctConfig,
    reference: &[ControlField],
    chi: &[DVector<C64>],
    grid: TimeGrid,
) -> Result<Sweep> {
    let n = grid.n_steps();
    let ops: Vec<CouplingOperator> = (0..reference.len())
        .map(|c| system.coupling_operator(c))
        .collect();
    let shape: Vec<f64> = grid
        .times()
        .map(|t| update_shape(t, grid.t_end()) / config.lambda_0)
        .collect();
    let hermitian = system.is_lossless();
    let dt = grid.dt();

    let mut new: Vec<ControlField> = reference.to_vec();
    let mut kernels = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n + 1);
    let initial = StateVector::basis(system.n_levels(), config.initial_level)?;
    let mut psi = initial.amplitudes().clone();
    states.push(initial);
    let mut amps = vec![0.0; new.len()];

    for k in 0..n {
        // predictor: old sample at t_{k+1}
        for (a, (f, r)) in amps.iter_mut().zip(new.iter().zip(reference)) {
            *a = 0.5 * (f.samples()[k] + r.samples()[k + 1]);
        }
        let weight = shape[k + 1];
        let kernel = if weight == 0.0 {
            StepKernel::new(system.hamiltonian(&amps), dt, hermitian)
        } else {
            let psi_pred = StepKernel::new(system.hamiltonian(&amps), dt, hermitian).forward(&psi);
            for ((f, r), op) in new.iter_mut().zip(reference).zip(&ops) {
                let grad = op.matrix_element(&chi[k + 1], &psi_pred).im;
                f.samples_mut()[k + 1] = r.samples()[k + 1] + weight * grad;
            }
            for (a, f) in amps.iter_mut().zip(&new) {
                *a = f.midpoint(k);
            }
            StepKernel::new(system.hamiltonian(&amps), dt, hermitian)
        };
        psi = kernel.forward(&psi);
        kernels.push(kernel);
        states.push(StateVector::from_dvector(psi.clone()));
    }
    for f in &new {
        if f.samples().iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFiniteField(f.label().to_string()));
        }
    }
    let trajectory = Trajectory::from_states_checked(grid, states)?;
    Ok(Sweep {
        fields: new,
        trajectory,
        kernels,
    })
}

/// Runs Krotov iterations from `initial_fields` (one field per coupling, in
/// chain order) until convergence or `max_iterations`.
pub fn krotov_iterate(
    system: &LevelSystem,
    config: &OctConfig,
    initial_fields: &[ControlField],
) -> Result<KrotovRun> {
    config.validate(system.n_levels())?;
    let grid = system.check_fields(initial_fields)?;
    if initial_fields
        .iter()
        .all(|f| f.samples().iter().all(|&s| s == 0.0))
    {
        return Err(Error::DegenerateField(
            "all-zero initial guess is a stationary point of the update".into(),
        ));
    }

    let initial = StateVector::basis(system.n_levels(), config.initial_level)?;
    let (mut trajectory, mut kernels) = forward_with_kernels(system, initial_fields, &initial)?;
    let mut fields = initial_fields.to_vec();
    let mut reference = initial_fields.to_vec();
    let value = evaluate_functional(config, &trajectory, &fields, &fields)?;
    let mut iterations = vec![IterationRecord {
        iteration: 0,
        value,
        fields: Some(fields.clone()),
    }];

    let mut small_steps = 0;
    let mut converged = false;
    for it in 1..=config.max_iterations {
        let chi = backward_costate(config, &kernels, &trajectory);
        let sweep = forward_sweep(system, config, &fields, &chi, grid)?;
        let value = evaluate_functional(config, &sweep.trajectory, &sweep.fields, &fields)?;
        let previous = iterations.last().expect("nonempty").value.j;
        if value.j < previous - config.monotonic_slack {
            return Err(Error::NonMonotonic {
                iteration: it,
                previous,
                current: value.j,
            });
        }

        // the previous record only keeps its snapshot if it is on the interval
        if let Some(last) = iterations.last_mut() {
            let keep = last.iteration == 0
                || (config.snapshot_interval > 0 && last.iteration % config.snapshot_interval == 0);
            if !keep {
                last.fields = None;
            }
        }
        reference = std::mem::replace(&mut fields, sweep.fields);
        trajectory = sweep.trajectory;
        kernels = sweep.kernels;
        iterations.push(IterationRecord {
            iteration: it,
            value,
            fields: Some(fields.clone()),
        });

        if value.j - previous < config.convergence_tol {
            small_steps += 1;
            if small_steps >= config.convergence_window {
                converged = true;
                break;
            }
        } else {
            small_steps = 0;
        }
    }

    Ok(KrotovRun {
        iterations,
        converged,
        final_fields: fields,
        final_reference: reference,
        final_trajectory: trajectory,
    })
}
