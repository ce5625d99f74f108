//! Photovoltaic observables derived from steady-state populations, plus the
//! closed-form weak-ambient-pump currents used as analytic oracles.

use crate::constants::BOLTZMANN_EV_PER_K;
use crate::error::Error;
use crate::params::ModelParams;
use crate::thermal::OccupationSet;
use crate::Result;

/// One operating point of the cell under a given load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotovoltaicPoint {
    /// Extraction rate at which the point was computed (eV).
    pub gamma_load: f64,
    /// Current per unit charge, `j/e = Gamma * rho_alpha` (eV).
    pub current_over_e: f64,
    /// Load voltage (V).
    pub voltage: f64,
    /// Normalised output power, `(j/e) * V`.
    pub power: f64,
}

impl PhotovoltaicPoint {
    pub fn new(gamma_load: f64, current_over_e: f64, voltage: f64) -> Self {
        Self {
            gamma_load,
            current_over_e,
            voltage,
            power: current_over_e * voltage,
        }
    }
}

/// Paired currents of the coupled and uncoupled cycle at one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnhancementRecord {
    /// Steady-state current of the coupled cycle (eV).
    pub coupled_current: f64,
    /// Steady-state current of the uncoupled reference (eV).
    pub uncoupled_current: f64,
    /// `(j - j_ref) / j_ref`.
    pub relative_enhancement: f64,
}

/// Current per unit charge, `j/e = Gamma * rho_alpha`.
pub fn current(rho_alpha: f64, gamma_load: f64) -> f64 {
    debug_assert!((-1e-12..=1.0 + 1e-10).contains(&rho_alpha));
    gamma_load * rho_alpha
}

/// Load voltage `V = (E_alpha - E_beta + k T ln(rho_alpha / rho_beta)) / e`.
///
/// Undefined when either population vanishes.
pub fn voltage(params: &ModelParams, rho_alpha: f64, rho_beta: f64) -> Result<f64> {
    if !(rho_alpha > 0.0 && rho_beta > 0.0) {
        return Err(Error::UndefinedVoltage {
            rho_alpha,
            rho_beta,
        });
    }
    Ok(params.e_alpha - params.e_beta
        + BOLTZMANN_EV_PER_K * params.temperature * (rho_alpha / rho_beta).ln())
}

/// Closed-form steady-state current of the uncoupled cycle in the
/// weak-ambient-pump regime (`n_1c, n_2c, n_cycle << 1`).
///
/// Assumes identical donors (`gamma_1h = gamma_2h`, `gamma_1c = gamma_2c`)
/// and a shared photon occupation.
pub fn analytic_current_uncoupled(params: &ModelParams, occ: &OccupationSet) -> Result<f64> {
    let gc = params.gamma_c();
    let gh = params.gamma_h();
    let g_cycle = params.gamma_cycle;
    let n_h = occ.n_h;
    if params.gamma_load == 0.0 {
        return Err(Error::ZeroDenominator("uncoupled closed-form current"));
    }
    let numerator = gc * g_cycle * gh * n_h;
    let denominator = gc * g_cycle
        + (gc + 3.0 * g_cycle) * gh * n_h
        + g_cycle * gh
        + n_h * gc * gh * g_cycle / params.gamma_load;
    if denominator == 0.0 {
        return Err(Error::ZeroDenominator("uncoupled closed-form current"));
    }
    Ok(numerator / denominator)
}

/// Closed-form steady-state current of the coupled cycle in the
/// weak-ambient-pump regime; the bright-dark occupation `n_x` is kept.
pub fn analytic_current_coupled(params: &ModelParams, occ: &OccupationSet) -> Result<f64> {
    let gc = params.gamma_c();
    let gh = params.gamma_h();
    let gx = params.gamma_x;
    let g_cycle = params.gamma_cycle;
    let n_h = occ.n_h;
    let n_x = occ.n_x;
    if params.gamma_load == 0.0 {
        return Err(Error::ZeroDenominator("coupled closed-form current"));
    }
    let numerator = n_h * (1.0 + n_x) * gc * g_cycle * gh * gx;
    let denominator = (n_h * (1.0 + 3.0 * n_x) + n_x) * g_cycle * gh * gx
        + gc * ((1.0 + 2.0 * n_h) * g_cycle * gh + (1.0 + n_x) * (g_cycle + n_h * gh) * gx)
        + numerator / params.gamma_load;
    if denominator == 0.0 {
        return Err(Error::ZeroDenominator("coupled closed-form current"));
    }
    Ok(numerator / denominator)
}

/// Relative current enhancement `(j - j_ref) / j_ref`.
pub fn enhancement(j: f64, j_ref: f64) -> Result<f64> {
    if !(j_ref > 0.0) {
        return Err(Error::NonPositiveReference(j_ref));
    }
    Ok((j - j_ref) / j_ref)
}

/// Relative peak-power gain `(P_max - P_ref_max) / P_ref_max`.
pub fn relative_efficiency(p_max: f64, p_ref_max: f64) -> Result<f64> {
    if !(p_ref_max > 0.0) {
        return Err(Error::NonPositiveReference(p_ref_max));
    }
    Ok((p_max - p_ref_max) / p_ref_max)
}

/// Power drawn from the photon field, `j * gap`, where `gap` is the optical
/// transition energy above ground of the absorbing state.
pub fn sun_power(j: f64, gap: f64) -> f64 {
    debug_assert!(gap > 0.0);
    j * gap
}
