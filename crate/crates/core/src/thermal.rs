//! Thermal occupation numbers of the photon and phonon reservoirs.

use crate::constants::BOLTZMANN_EV_PER_K;
use crate::dimer::dimer_eigensystem;
use crate::error::Error;
use crate::params::ModelParams;
use crate::Result;

/// Mean bosonic occupation `1 / (exp(dE / kT) - 1)` of a mode with energy
/// `delta_e` (eV) at temperature `temperature` (K).
///
/// Both arguments must be positive; the occupation diverges at zero gap.
pub fn planck_occupation(delta_e: f64, temperature: f64) -> Result<f64> {
    if !(delta_e > 0.0) {
        return Err(Error::NonPositiveGap(delta_e));
    }
    if !(temperature > 0.0) {
        return Err(Error::NonPositiveTemperature(temperature));
    }
    // exp_m1 keeps precision in the large-occupation (small-gap) regime.
    Ok(1.0 / (delta_e / (BOLTZMANN_EV_PER_K * temperature)).exp_m1())
}

/// Invert the Planck law: the temperature at which a mode of energy `delta_e`
/// (eV) has mean occupation `occupation`.
///
/// Used to express the open-circuit voltage through the effective temperature
/// of the concentrated photon field.
pub fn effective_photon_temperature(occupation: f64, delta_e: f64) -> Result<f64> {
    if !(occupation > 0.0) {
        return Err(Error::NonPositiveOccupation(occupation));
    }
    if !(delta_e > 0.0) {
        return Err(Error::NonPositiveGap(delta_e));
    }
    Ok(delta_e / (BOLTZMANN_EV_PER_K * (1.0 / occupation).ln_1p()))
}

/// Reservoir occupations feeding the rate equations of one cycle variant.
///
/// `n_1h`, `n_2h` drive the uncoupled optical transitions and `n_h` the bright
/// one; `n_1c`, `n_2c` are phonon occupations at the charge-transfer gaps
/// (donor or exciton energies minus `E_alpha` as appropriate); `n_x` sits at
/// the bright-dark splitting and `n_cycle` at the `E_beta - E_b` gap of the
/// cycle-closing decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupationSet {
    pub n_h: f64,
    pub n_1h: f64,
    pub n_2h: f64,
    pub n_1c: f64,
    pub n_2c: f64,
    pub n_x: f64,
    pub n_cycle: f64,
}

/// Evaluate all reservoir occupations for the coupled (`coupled = true`) or
/// uncoupled level scheme.
///
/// Photon occupations come from `params.photon_occupation` when set
/// (concentrated sunlight); otherwise from the Planck law at the ambient
/// temperature, which puts every reservoir at the same temperature. Phonon
/// occupations always follow the Planck law at the ambient temperature, with
/// the transfer gaps measured from the donor levels (uncoupled) or from the
/// exciton levels (coupled). `n_x` is meaningful only for the coupled scheme
/// and is set to 0 for the uncoupled one, where no bright-dark transition
/// exists.
pub fn build_occupations(params: &ModelParams, coupled: bool) -> Result<OccupationSet> {
    let t = params.temperature;
    let n_cycle = planck_occupation(params.e_beta, t)?;
    if coupled {
        let eig = dimer_eigensystem(params.e1, params.e2, params.j12);
        let n_h = match params.photon_occupation {
            Some(n) => n,
            None => planck_occupation(eig.e_bright, t)?,
        };
        Ok(OccupationSet {
            n_h,
            n_1h: n_h,
            n_2h: n_h,
            n_1c: planck_occupation(eig.e_bright - params.e_alpha, t)?,
            n_2c: planck_occupation(eig.e_dark - params.e_alpha, t)?,
            n_x: planck_occupation(eig.splitting, t)?,
            n_cycle,
        })
    } else {
        let (n_h, n_1h, n_2h) = match params.photon_occupation {
            Some(n) => (n, n, n),
            None => (
                planck_occupation(params.e1.max(params.e2), t)?,
                planck_occupation(params.e1, t)?,
                planck_occupation(params.e2, t)?,
            ),
        };
        Ok(OccupationSet {
            n_h,
            n_1h,
            n_2h,
            n_1c: planck_occupation(params.e1 - params.e_alpha, t)?,
            n_2c: planck_occupation(params.e2 - params.e_alpha, t)?,
            n_x: 0.0,
            n_cycle,
        })
    }
}
