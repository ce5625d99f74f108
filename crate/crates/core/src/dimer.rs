//! Eigensystem of the coupled donor pair and the interference-doubled rates.
//!
//! Two degenerate donors with parallel dipoles hybridise into a symmetric
//! (bright) and an antisymmetric (dark) superposition split by twice the
//! dipolar coupling. Constructive interference doubles the bright state's
//! optical rate and, for an acceptor orbital with a pi phase shift between its
//! lobes, doubles the dark state's charge-transfer rate.

use std::f64::consts::FRAC_PI_4;

use crate::error::Error;
use crate::Result;

/// Eigensystem of the two coupled two-level donors (single-excitation sector).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimerEigensystem {
    /// Bright (symmetric) state energy (eV).
    pub e_bright: f64,
    /// Dark (antisymmetric) state energy (eV).
    pub e_dark: f64,
    /// Mixing angle of the donor basis (rad); pi/4 for degenerate donors.
    pub mixing_angle: f64,
    /// Bright-dark energy splitting `2 * sqrt((E1-E2)^2/4 + J12^2)`; exactly
    /// `2 * J12` for degenerate donors.
    pub splitting: f64,
}

/// Diagonalise the coupled donor pair.
///
/// Returns the bright/dark energies `(E1+E2)/2 +/- sqrt((E1-E2)^2/4 + J12^2)`
/// and the mixing angle from `tan(2 theta) = 2 J12 / (E1 - E2)`. Degenerate
/// donors get `theta = pi/4` by convention, the limit for any `j12 > 0`.
pub fn dimer_eigensystem(e1: f64, e2: f64, j12: f64) -> DimerEigensystem {
    debug_assert!(j12 >= 0.0, "coupling must be non-negative");
    let mean = 0.5 * (e1 + e2);
    let half_detuning = 0.5 * (e1 - e2);
    let shift = if e1 == e2 {
        j12
    } else {
        (half_detuning * half_detuning + j12 * j12).sqrt()
    };
    let mixing_angle = if e1 == e2 {
        FRAC_PI_4
    } else {
        0.5 * (2.0 * j12 / (e1 - e2)).atan()
    };
    DimerEigensystem {
        e_bright: mean + shift,
        e_dark: mean - shift,
        mixing_angle,
        splitting: 2.0 * shift,
    }
}

/// Combine per-donor rates into the bright-state optical rate and the
/// dark-state transfer rate.
///
/// Constructive interference of the transition dipoles gives
/// `gamma_h = gamma_1h + gamma_2h`; constructive interference of the transfer
/// matrix elements gives `gamma_c = gamma_1c + gamma_2c`. Negative inputs are
/// rejected.
pub fn interference_rates(
    gamma_1h: f64,
    gamma_2h: f64,
    gamma_1c: f64,
    gamma_2c: f64,
) -> Result<(f64, f64)> {
    for (name, value) in [
        ("gamma_1h", gamma_1h),
        ("gamma_2h", gamma_2h),
        ("gamma_1c", gamma_1c),
        ("gamma_2c", gamma_2c),
    ] {
        if !(value >= 0.0) {
            return Err(Error::NegativeRate { name, value });
        }
    }
    Ok((gamma_1h + gamma_2h, gamma_1c + gamma_2c))
}
