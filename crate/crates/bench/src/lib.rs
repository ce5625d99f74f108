//! Shared setup for the criterion benchmarks.

use photocell_core::{build_generator_coupled, build_occupations, ModelParams, RateGenerator};

/// Published operating point: gamma_c = 12 meV, gamma_x = 25 meV, 300 K.
pub fn operating_point() -> ModelParams {
    ModelParams::default()
}

/// Coupled-cycle generator at the operating point.
pub fn coupled_generator() -> RateGenerator {
    let p = operating_point();
    let occ = build_occupations(&p, true).expect("valid defaults");
    build_generator_coupled(&p, &occ)
}
