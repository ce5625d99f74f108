//! Pauli master equations of the five-level work cycle.
//!
//! Both cycle variants share the same topology: ground state `b`, two upper
//! levels (donor states `a1`, `a2` or exciton states `x1`, `x2`), the
//! charge-separated state `alpha` and the charged cycling state `beta`. Each
//! thermal transition enters with an uphill rate `gamma * n` and a downhill
//! rate `gamma * (1 + n)`, so detailed balance holds link by link; the load
//! `Gamma` and nothing else breaks it.
//!
//! Generator convention: columns are source states, so populations evolve as
//! `d rho / dt = M rho` with `rho` a column vector. Every column of `M` sums
//! to zero and off-diagonal entries are non-negative, which is what makes the
//! dynamics a stochastic semigroup and keeps populations non-negative.

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::ode::{integrate, OdeOptions};
use crate::params::ModelParams;
use crate::thermal::OccupationSet;
use crate::Result;

/// Number of levels in the cycle.
pub const N_LEVELS: usize = 5;
/// Index of the ground state `b`.
pub const GROUND: usize = 0;
/// Index of the first upper level (`a1` or `x1`).
pub const UPPER_1: usize = 1;
/// Index of the second upper level (`a2` or `x2`).
pub const UPPER_2: usize = 2;
/// Index of the charge-separated state `alpha`.
pub const ALPHA: usize = 3;
/// Index of the charged cycling state `beta`.
pub const BETA: usize = 4;

/// Which five-level scheme a generator belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSet {
    /// Independent donors: `[b, a1, a2, alpha, beta]`.
    Uncoupled,
    /// Hybridised donors: `[b, x1, x2, alpha, beta]`.
    Coupled,
}

impl LevelSet {
    /// Level labels in index order.
    pub fn labels(&self) -> [&'static str; N_LEVELS] {
        match self {
            LevelSet::Uncoupled => ["b", "a1", "a2", "alpha", "beta"],
            LevelSet::Coupled => ["b", "x1", "x2", "alpha", "beta"],
        }
    }
}

/// Generator of the linear population dynamics `d rho / dt = M rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateGenerator {
    /// 5x5 generator matrix (eV); columns are source states.
    pub matrix: DMatrix<f64>,
    /// Level scheme the rows/columns refer to.
    pub levels: LevelSet,
}

impl RateGenerator {
    /// Largest absolute column sum; zero up to rounding by construction.
    pub fn column_sum_defect(&self) -> f64 {
        (0..N_LEVELS)
            .map(|j| {
                (0..N_LEVELS)
                    .map(|i| self.matrix[(i, j)])
                    .sum::<f64>()
                    .abs()
            })
            .fold(0.0, f64::max)
    }

    /// Right-hand side `M rho`.
    pub fn apply(&self, rho: &DVector<f64>) -> DVector<f64> {
        &self.matrix * rho
    }
}

/// Populations of the five levels at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState {
    /// Level populations in the order of [`LevelSet::labels`].
    pub rho: DVector<f64>,
    /// Time in hbar/eV units; infinite for a steady state.
    pub time: f64,
}

impl PopulationState {
    /// Fully populated ground state, the cycle's initial condition.
    pub fn ground_start() -> Self {
        let mut rho = DVector::zeros(N_LEVELS);
        rho[GROUND] = 1.0;
        Self { rho, time: 0.0 }
    }

    /// Check normalisation (within 1e-10) and positivity (entries above
    /// -1e-12, below 1 + 1e-10).
    pub fn validate(&self) -> Result<()> {
        for (i, &p) in self.rho.iter().enumerate() {
            if !(-1e-12..=1.0 + 1e-10).contains(&p) {
                return Err(Error::NegativePopulation {
                    time: self.time,
                    index: i,
                    value: p,
                });
            }
        }
        let sum: f64 = self.rho.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParams(format!(
                "populations sum to {sum}, not 1"
            )));
        }
        Ok(())
    }

    pub fn rho_alpha(&self) -> f64 {
        self.rho[ALPHA]
    }

    pub fn rho_beta(&self) -> f64 {
        self.rho[BETA]
    }
}

/// Accumulate one directed transition; keeps column sums at zero exactly.
fn add_transition(m: &mut DMatrix<f64>, from: usize, to: usize, rate: f64) {
    m[(to, from)] += rate;
    m[(from, from)] -= rate;
}

/// Generator of the uncoupled cycle.
///
/// Photon exchange on both `b <-> a1` and `b <-> a2`, phonon-assisted charge
/// transfer from each donor into `alpha`, extraction `alpha -> beta` at the
/// load rate, and the thermal cycle-closing pair `beta <-> b`.
pub fn build_generator_uncoupled(params: &ModelParams, occ: &OccupationSet) -> RateGenerator {
    let mut m = DMatrix::zeros(N_LEVELS, N_LEVELS);

    add_transition(&mut m, GROUND, UPPER_1, params.gamma_1h * occ.n_1h);
    add_transition(&mut m, UPPER_1, GROUND, params.gamma_1h * (1.0 + occ.n_1h));
    add_transition(&mut m, GROUND, UPPER_2, params.gamma_2h * occ.n_2h);
    add_transition(&mut m, UPPER_2, GROUND, params.gamma_2h * (1.0 + occ.n_2h));

    add_transition(&mut m, UPPER_1, ALPHA, params.gamma_1c * (1.0 + occ.n_1c));
    add_transition(&mut m, ALPHA, UPPER_1, params.gamma_1c * occ.n_1c);
    add_transition(&mut m, UPPER_2, ALPHA, params.gamma_2c * (1.0 + occ.n_2c));
    add_transition(&mut m, ALPHA, UPPER_2, params.gamma_2c * occ.n_2c);

    add_transition(&mut m, ALPHA, BETA, params.gamma_load);

    add_transition(
        &mut m,
        BETA,
        GROUND,
        params.gamma_cycle * (1.0 + occ.n_cycle),
    );
    add_transition(&mut m, GROUND, BETA, params.gamma_cycle * occ.n_cycle);

    RateGenerator {
        matrix: m,
        levels: LevelSet::Uncoupled,
    }
}

/// Generator of the coupled cycle.
///
/// Photon exchange only on `b <-> x1` at the interference-doubled rate
/// `gamma_h`, phonon relaxation `x1 <-> x2` across the exciton splitting,
/// charge transfer only out of the dark state `x2` at the doubled rate
/// `gamma_c` (phonon occupation at the `E_x2 - E_alpha` gap), then the same
/// extraction and cycle-closing stages as the uncoupled scheme.
pub fn build_generator_coupled(params: &ModelParams, occ: &OccupationSet) -> RateGenerator {
    let gamma_h = params.gamma_h();
    let gamma_c = params.gamma_c();
    let mut m = DMatrix::zeros(N_LEVELS, N_LEVELS);

    add_transition(&mut m, GROUND, UPPER_1, gamma_h * occ.n_h);
    add_transition(&mut m, UPPER_1, GROUND, gamma_h * (1.0 + occ.n_h));

    add_transition(&mut m, UPPER_1, UPPER_2, params.gamma_x * (1.0 + occ.n_x));
    add_transition(&mut m, UPPER_2, UPPER_1, params.gamma_x * occ.n_x);

    add_transition(&mut m, UPPER_2, ALPHA, gamma_c * (1.0 + occ.n_2c));
    add_transition(&mut m, ALPHA, UPPER_2, gamma_c * occ.n_2c);

    add_transition(&mut m, ALPHA, BETA, params.gamma_load);

    add_transition(
        &mut m,
        BETA,
        GROUND,
        params.gamma_cycle * (1.0 + occ.n_cycle),
    );
    add_transition(&mut m, GROUND, BETA, params.gamma_cycle * occ.n_cycle);

    RateGenerator {
        matrix: m,
        levels: LevelSet::Coupled,
    }
}

/// Solve `M rho = 0` with `sum(rho) = 1`.
///
/// One row of the generator is redundant (columns sum to zero), so the ground
/// row is replaced by the normalisation constraint and the system solved by
/// LU with one step of iterative refinement. Fails with
/// [`Error::DisconnectedKinetics`] when the null space has more than one
/// dimension, i.e. the transition graph does not connect all levels.
pub fn steady_state(gen: &RateGenerator) -> Result<PopulationState> {
    let mut a = gen.matrix.clone();
    for j in 0..N_LEVELS {
        a[(GROUND, j)] = 1.0;
    }
    let mut b = DVector::zeros(N_LEVELS);
    b[GROUND] = 1.0;

    let lu = a.clone().lu();
    let mut rho = lu.solve(&b).ok_or(Error::DisconnectedKinetics)?;
    // One refinement pass tightens both the residual and the normalisation.
    let residual = &b - &a * &rho;
    if let Some(correction) = lu.solve(&residual) {
        rho += correction;
    }

    if rho.iter().any(|p| !p.is_finite()) {
        return Err(Error::DisconnectedKinetics);
    }
    for (i, &p) in rho.iter().enumerate() {
        if p < -1e-12 {
            return Err(Error::UnphysicalSteadyState { index: i, value: p });
        }
    }
    Ok(PopulationState {
        rho,
        time: f64::INFINITY,
    })
}

/// Integrate the populations from `rho0` to `t_end`, sampling every `dt_out`.
///
/// Adaptive Dormand-Prince with absolute tolerance 1e-12. Every sample is
/// checked against the positivity floor -1e-12 and the 1e-10 normalisation
/// drift bound; a violation aborts with a diagnostic rather than being
/// clamped.
pub fn evolve(
    gen: &RateGenerator,
    rho0: &PopulationState,
    t_end: f64,
    dt_out: f64,
) -> Result<Vec<PopulationState>> {
    rho0.validate()?;
    let raw = integrate(
        |_, y| gen.apply(y),
        rho0.rho.clone(),
        rho0.time,
        t_end,
        dt_out,
        OdeOptions::default(),
    )?;

    let mut trajectory = Vec::with_capacity(raw.len());
    for (time, rho) in raw {
        for (i, &p) in rho.iter().enumerate() {
            if p < -1e-12 {
                return Err(Error::NegativePopulation {
                    time,
                    index: i,
                    value: p,
                });
            }
        }
        let sum: f64 = rho.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::Integration {
                time,
                reason: "normalisation drift beyond 1e-10",
                last_state: rho.iter().copied().collect(),
            });
        }
        trajectory.push(PopulationState { rho, time });
    }
    Ok(trajectory)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::BOLTZMANN_EV_PER_K;
    use crate::thermal::build_occupations;
    use approx::assert_relative_eq;

    fn table_defaults() -> (ModelParams, OccupationSet, OccupationSet) {
        let p = ModelParams::default();
        let occ_u = build_occupations(&p, false).unwrap();
        let occ_c = build_occupations(&p, true).unwrap();
        (p, occ_u, occ_c)
    }

    #[test]
    fn columns_sum_to_zero_for_published_parameters() {
        let (p, occ_u, occ_c) = table_defaults();
        assert!(build_generator_uncoupled(&p, &occ_u).column_sum_defect() < 1e-15);
        assert!(build_generator_coupled(&p, &occ_c).column_sum_defect() < 1e-15);
    }

    #[test]
    fn off_diagonals_are_nonnegative() {
        let (p, occ_u, occ_c) = table_defaults();
        for gen in [
            build_generator_uncoupled(&p, &occ_u),
            build_generator_coupled(&p, &occ_c),
        ] {
            for i in 0..N_LEVELS {
                for j in 0..N_LEVELS {
                    if i != j {
                        assert!(gen.matrix[(i, j)] >= 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_rates_give_the_zero_matrix() {
        let mut p = ModelParams::default();
        p.gamma_1h = 0.0;
        p.gamma_2h = 0.0;
        p.gamma_1c = 0.0;
        p.gamma_2c = 0.0;
        p.gamma_x = 0.0;
        p.gamma_load = 0.0;
        p.gamma_cycle = 0.0;
        let occ = build_occupations(&p, false).unwrap();
        let gen = build_generator_uncoupled(&p, &occ);
        assert!(gen.matrix.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn transfer_entries_obey_detailed_balance() {
        let (p, occ_u, _) = table_defaults();
        let gen = build_generator_uncoupled(&p, &occ_u);
        // a1 -> alpha downhill vs alpha -> a1 uphill.
        let down = gen.matrix[(ALPHA, UPPER_1)];
        let up = gen.matrix[(UPPER_1, ALPHA)];
        assert_relative_eq!(down, p.gamma_1c * (1.0 + occ_u.n_1c), max_relative = 1e-15);
        assert_relative_eq!(up, p.gamma_1c * occ_u.n_1c, max_relative = 1e-15);
        let boltzmann = (-(p.e1 - p.e_alpha) / (BOLTZMANN_EV_PER_K * p.temperature)).exp();
        assert_relative_eq!(up / down, boltzmann, max_relative = 1e-12);
    }

    #[test]
    fn bright_state_structure_of_the_coupled_generator() {
        let (p, _, occ_c) = table_defaults();
        let gen = build_generator_coupled(&p, &occ_c);
        // Optical loss from the bright state back to ground.
        assert_relative_eq!(
            gen.matrix[(GROUND, UPPER_1)],
            1.24e-6 * 60001.0,
            max_relative = 1e-12
        );
        // Absorption pumps x1 only; x2 is optically dark.
        assert!(gen.matrix[(UPPER_2, GROUND)] == 0.0);
        // Transfer leaves from x2 only.
        assert!(gen.matrix[(ALPHA, UPPER_1)] == 0.0);
        assert!(gen.matrix[(ALPHA, UPPER_2)] > 0.0);
    }

    #[test]
    fn zero_relaxation_cuts_the_dark_channel() {
        let mut p = ModelParams::default();
        p.gamma_x = 0.0;
        let occ = build_occupations(&p, true).unwrap();
        let gen = build_generator_coupled(&p, &occ);
        assert_eq!(gen.matrix[(UPPER_2, UPPER_1)], 0.0);
        let ss = steady_state(&gen).unwrap();
        assert!(ss.rho_alpha().abs() < 1e-15);
    }

    #[test]
    fn fully_disconnected_kinetics_is_an_error() {
        let gen = RateGenerator {
            matrix: DMatrix::zeros(N_LEVELS, N_LEVELS),
            levels: LevelSet::Uncoupled,
        };
        assert!(matches!(
            steady_state(&gen),
            Err(Error::DisconnectedKinetics)
        ));
    }

    #[test]
    fn steady_state_is_a_fixed_point() {
        let (p, occ_u, occ_c) = table_defaults();
        for gen in [
            build_generator_uncoupled(&p, &occ_u),
            build_generator_coupled(&p, &occ_c),
        ] {
            let ss = steady_state(&gen).unwrap();
            assert!((ss.rho.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(gen.apply(&ss.rho).amax() <= 1e-12, "residual too large");
            ss.validate().unwrap();
        }
    }

    #[test]
    fn evolve_keeps_a_constant_state_constant() {
        let gen = RateGenerator {
            matrix: DMatrix::zeros(N_LEVELS, N_LEVELS),
            levels: LevelSet::Coupled,
        };
        let rho0 = PopulationState::ground_start();
        let traj = evolve(&gen, &rho0, 5.0, 1.0).unwrap();
        assert_eq!(traj.len(), 6);
        for s in &traj {
            assert_eq!(s.rho, rho0.rho);
        }
    }

    #[test]
    fn single_optical_link_matches_the_closed_form() {
        // Keep only b <-> a1: a two-level exchange with known solution.
        let mut p = ModelParams::default();
        p.gamma_2h = 0.0;
        p.gamma_1c = 0.0;
        p.gamma_2c = 0.0;
        p.gamma_load = 0.0;
        p.gamma_cycle = 0.0;
        p.gamma_1h = 0.05;
        p.photon_occupation = Some(0.8);
        let occ = build_occupations(&p, false).unwrap();
        let gen = build_generator_uncoupled(&p, &occ);

        let up = p.gamma_1h * 0.8;
        let down = p.gamma_1h * 1.8;
        let total = up + down;
        let rho_inf = up / total;

        let traj = evolve(&gen, &PopulationState::ground_start(), 120.0, 5.0).unwrap();
        for s in &traj {
            let exact = rho_inf + (0.0 - rho_inf) * (-total * s.time).exp();
            assert!(
                (s.rho[UPPER_1] - exact).abs() < 1e-8,
                "t = {}: {} vs {exact}",
                s.time,
                s.rho[UPPER_1]
            );
        }
    }

    #[test]
    fn trajectory_conserves_trace_and_positivity() {
        let (p, _, occ_c) = table_defaults();
        let gen = build_generator_coupled(&p, &occ_c);
        let traj = evolve(&gen, &PopulationState::ground_start(), 400.0, 4.0).unwrap();
        for s in &traj {
            s.validate().unwrap();
            assert!((s.rho.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
            assert!(s.rho.iter().all(|&x| x >= -1e-12));
        }
        // The trajectory must actually move.
        assert!(traj.last().unwrap().rho[GROUND] < 0.9);
    }
}
