//! Coherent population transfer in few-level quantum systems.
//!
//! * [`system`]: level systems, sampled control fields, RWA Hamiltonians.
//! * [`propagator`]: exact-exponential forward/backward propagation,
//!   including the inhomogeneous backward equation.
//! * [`stirap`]: analytic counterintuitive Gaussian pulse pairs.
//! * [`krotov`]: monotonic Krotov optimization with an optional
//!   state-dependent constraint, and pulse-ordering diagnostics.
//! * [`robustness`]: pulse-noise and decay sweeps.

pub mod error;
pub mod krotov;
mod linalg;
pub mod propagator;
pub mod robustness;
pub mod stirap;
pub mod system;

pub use error::{Error, Result};
pub use krotov::{
    evaluate_functional, krotov_iterate, pulse_ordering, FunctionalValue, KrotovRun, OctConfig,
    Ordering, PulseOrdering,
};
pub use propagator::{
    propagate_backward, propagate_backward_inhomogeneous, propagate_forward, InhomogeneousSource,
    Propagator, Trajectory,
};
pub use robustness::{
    field_energy, fwhm_ratio, match_energy, perturb_fields, sweep, DecaySpec, NoiseSpec, SweepAxis,
    SweepResult, SweepSetup,
};
pub use stirap::{adiabaticity, make_stirap_fields, StirapParams};
pub use system::{
    build_hamiltonian, populations, Channel, ControlField, CouplingOperator, LevelSystem,
    StateVector, TimeGrid,
};

pub use num_complex::Complex64;
