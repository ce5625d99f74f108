//! Model parameters for the five-level photocell cycle.

use crate::error::Error;
use crate::Result;

/// Full parameter set for both the uncoupled and the coupled cycle.
///
/// Energies are measured from the ground state `b`, which sits at 0 eV by
/// convention; only gaps ever enter the dynamics. Rates are in eV (hbar = 1).
///
/// The default value reproduces the published operating point: degenerate
/// 1.8 eV donors, 0.2 eV transfer and cycling gaps, J12 = 15 meV, per-donor
/// optical rate 0.62e-6 eV, extraction rate 0.124 eV, cycle-closing rate
/// 0.0248 eV, 300 K, and 60000 concentrated solar photons per mode. The two
/// swept rates default to the j-V figure's values gamma_c = 12 meV
/// (6 meV per donor) and gamma_x = 25 meV.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// First donor excited-state energy above ground (eV).
    pub e1: f64,
    /// Second donor excited-state energy above ground (eV).
    pub e2: f64,
    /// Charge-separated acceptor level energy above ground (eV).
    pub e_alpha: f64,
    /// Cycling (positively charged) level energy above ground (eV).
    pub e_beta: f64,
    /// Excitonic donor-donor coupling (eV).
    pub j12: f64,
    /// Per-donor photon absorption/emission rates (eV).
    pub gamma_1h: f64,
    pub gamma_2h: f64,
    /// Per-donor charge-transfer rates into the acceptor (eV).
    pub gamma_1c: f64,
    pub gamma_2c: f64,
    /// Bright-to-dark phonon relaxation rate (eV).
    pub gamma_x: f64,
    /// Work extraction (load) rate from the charge-separated state (eV).
    pub gamma_load: f64,
    /// Cycle-closing decay rate of the charged state back to ground (eV).
    pub gamma_cycle: f64,
    /// Ambient temperature (K).
    pub temperature: f64,
    /// Photon occupation of the optical transitions. `Some(n)` models
    /// concentrated sunlight with a fixed mean photon number; `None` puts the
    /// photon modes in thermal equilibrium at `temperature`, which is the
    /// configuration that must relax to a Boltzmann steady state.
    pub photon_occupation: Option<f64>,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            e1: 1.8,
            e2: 1.8,
            e_alpha: 1.6,
            e_beta: 0.2,
            j12: 0.015,
            gamma_1h: 0.62e-6,
            gamma_2h: 0.62e-6,
            gamma_1c: 6e-3,
            gamma_2c: 6e-3,
            gamma_x: 25e-3,
            gamma_load: 0.124,
            gamma_cycle: 0.0248,
            temperature: 300.0,
            photon_occupation: Some(60000.0),
        }
    }
}

impl ModelParams {
    /// Check the parameter invariants: level ordering `E1 > E_alpha > 0` (and
    /// the same for the second donor), `E_beta > 0`, non-negative rates and
    /// coupling, positive temperature.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.e_alpha > 0.0) {
            return fail(format!("E_alpha = {} must be > E_b = 0", self.e_alpha));
        }
        if !(self.e1 > self.e_alpha) {
            return fail(format!(
                "E1 = {} must lie above E_alpha = {}",
                self.e1, self.e_alpha
            ));
        }
        if !(self.e2 > self.e_alpha) {
            return fail(format!(
                "E2 = {} must lie above E_alpha = {}",
                self.e2, self.e_alpha
            ));
        }
        if !(self.e_beta > 0.0) {
            return fail(format!("E_beta = {} must be > E_b = 0", self.e_beta));
        }
        for (name, value) in [
            ("gamma_1h", self.gamma_1h),
            ("gamma_2h", self.gamma_2h),
            ("gamma_1c", self.gamma_1c),
            ("gamma_2c", self.gamma_2c),
            ("gamma_x", self.gamma_x),
            ("Gamma", self.gamma_load),
            ("Gamma_c", self.gamma_cycle),
            ("J12", self.j12),
        ] {
            if !(value >= 0.0) {
                return fail(format!("{name} = {value} must be >= 0"));
            }
        }
        if !(self.temperature > 0.0) {
            return Err(Error::NonPositiveTemperature(self.temperature));
        }
        if let Some(n) = self.photon_occupation {
            if !(n >= 0.0) {
                return fail(format!("n_h = {n} must be >= 0"));
            }
        }
        Ok(())
    }

    /// Total optical rate of the bright state, `gamma_1h + gamma_2h`.
    pub fn gamma_h(&self) -> f64 {
        self.gamma_1h + self.gamma_2h
    }

    /// Total charge-transfer rate of the dark state, `gamma_1c + gamma_2c`.
    pub fn gamma_c(&self) -> f64 {
        self.gamma_1c + self.gamma_2c
    }
}
