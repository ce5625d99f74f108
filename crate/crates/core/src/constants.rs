//! Physical constants.

/// Boltzmann constant in eV/K, fixed to 7 significant figures so that results
/// are reproducible across builds.
pub const BOLTZMANN_EV_PER_K: f64 = 8.617333e-5;

/// Time unit implied by measuring rates in eV with hbar = 1, in femtoseconds.
/// Informational only; nothing in the crate converts to SI time.
pub const TIME_UNIT_FS: f64 = 0.6582;
