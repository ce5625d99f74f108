//! Simulation core for a biologically-inspired photocell built from a pair of
//! excitonically coupled donor molecules feeding an acceptor through a
//! five-level work cycle.
//!
//! The crate models two variants of the cycle: independent (uncoupled) donors,
//! and donors hybridised by a dipole-dipole coupling into bright/dark exciton
//! states. Both evolve under Pauli master equations whose up/down rates obey
//! local detailed balance. From the steady state we derive the photovoltaic
//! observables (current, load voltage, power) and the current/power
//! enhancement of the coupled cycle over the uncoupled one.
//!
//! Units: energies and rates are in eV with hbar = 1, so the implied time unit
//! is hbar/eV ~= 0.6582 fs. Temperatures are in kelvin. Voltages are in volts,
//! numerically equal to the eV expression divided by the unit charge.
//!
//! Module map:
//! - [`params`]: model parameters and their defaults
//! - [`dimer`]: two-level-system pair eigensystem and interference-doubled rates
//! - [`thermal`]: Planck occupations and derived occupation sets
//! - [`kinetics`]: rate generators, time evolution, steady states
//! - [`observables`]: current, voltage, power, enhancement, analytic currents
//! - [`experiments`]: sweep drivers reproducing the published figures
//! - [`positivity`]: generic density-matrix evolution and positivity auditing

// Validation comparisons are written `!(x > 0.0)` so NaN inputs fail too;
// parameter tweaks use mutate-after-default throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::field_reassign_with_default)]

pub mod constants;
pub mod dimer;
pub mod error;
pub mod experiments;
pub mod kinetics;
pub mod observables;
pub mod ode;
pub mod params;
pub mod positivity;
pub mod thermal;

pub use constants::BOLTZMANN_EV_PER_K;
pub use dimer::{dimer_eigensystem, interference_rates, DimerEigensystem};
pub use error::Error;
pub use experiments::{
    enhancement_cell, iv_curve, sweep_rate_grid, sweep_temperature, transient_demo,
    uncoupled_reference, IvCurve, SweepGrid, TemperaturePoint,
};
pub use kinetics::{
    build_generator_coupled, build_generator_uncoupled, evolve, steady_state, LevelSet,
    PopulationState, RateGenerator,
};
pub use observables::{
    analytic_current_coupled, analytic_current_uncoupled, current, enhancement,
    relative_efficiency, sun_power, voltage, EnhancementRecord, PhotovoltaicPoint,
};
pub use params::ModelParams;
pub use positivity::{
    audit_positivity, evolve_density_matrix, non_secular_toy, DensitySample, PositivityReport,
    Superoperator,
};
pub use thermal::{
    build_occupations, effective_photon_temperature, planck_occupation, OccupationSet,
};

/// Library result type.
pub type Result<T> = std::result::Result<T, Error>;
