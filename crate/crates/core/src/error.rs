//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A model parameter violated its invariant (negative rate, bad ordering, ...).
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    /// A rate argument was negative.
    #[error("negative rate {name} = {value}")]
    NegativeRate { name: &'static str, value: f64 },

    /// Planck occupation is undefined for a non-positive energy gap.
    #[error("thermal occupation undefined for energy gap {0} <= 0 eV")]
    NonPositiveGap(f64),

    /// Temperatures must be positive.
    #[error("temperature {0} K is not positive")]
    NonPositiveTemperature(f64),

    /// Inverting the Planck law needs a positive occupation.
    #[error("photon occupation {0} is not positive")]
    NonPositiveOccupation(f64),

    /// The rate matrix has a null space of dimension > 1, so no unique steady
    /// state exists.
    #[error("disconnected kinetics: no unique steady state")]
    DisconnectedKinetics,

    /// A steady-state population came out below the positivity floor.
    #[error("unphysical steady state: population {index} = {value}")]
    UnphysicalSteadyState { index: usize, value: f64 },

    /// A propagated population dropped below the positivity floor.
    #[error("negative population {value} at level {index}, t = {time}")]
    NegativePopulation { time: f64, index: usize, value: f64 },

    /// The integrator failed; `last_state` holds the last accepted state.
    #[error("integration failed at t = {time}: {reason}")]
    Integration {
        time: f64,
        reason: &'static str,
        last_state: Vec<f64>,
    },

    /// Load voltage is undefined when either acceptor population vanishes.
    #[error("voltage undefined: rho_alpha = {rho_alpha}, rho_beta = {rho_beta}")]
    UndefinedVoltage { rho_alpha: f64, rho_beta: f64 },

    /// A closed-form current expression had a vanishing denominator.
    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    /// Enhancement-style ratios need a positive reference value.
    #[error("non-positive reference value {0} for a relative measure")]
    NonPositiveReference(f64),

    /// Sweep ranges must be positive and ordered.
    #[error("invalid sweep range: {0}")]
    InvalidRange(String),

    /// A superoperator text table failed to parse.
    #[error("superoperator table, line {line}: {message}")]
    SuperoperatorFormat { line: usize, message: String },

    /// An initial density matrix was not Hermitian within tolerance.
    #[error("density matrix not Hermitian: defect {0}")]
    NotHermitian(f64),

    /// An initial density matrix did not have unit trace.
    #[error("density matrix trace {0} != 1")]
    TraceNotOne(f64),
}
