//! The validation suite: every published quantitative claim the simulation
//! must reproduce, with pinned tolerances and runtime budgets.
//!
//! Each check is standalone so the test harness can run them individually;
//! `validate` runs the lot and reports one line per check.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use photocell_core::experiments::{DEFAULT_GAMMA_SWEEP, DEFAULT_GRID_RANGE, DEFAULT_SWEEP_POINTS};
use photocell_core::{
    analytic_current_coupled, analytic_current_uncoupled, audit_positivity,
    build_generator_coupled, build_generator_uncoupled, build_occupations, current,
    dimer_eigensystem, enhancement_cell, evolve, evolve_density_matrix, iv_curve, non_secular_toy,
    planck_occupation, steady_state, sweep_rate_grid, ModelParams, OccupationSet, PopulationState,
    RateGenerator, Superoperator, BOLTZMANN_EV_PER_K,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Tolerances, pinned once.

/// Peak enhancement 24% with 3 percentage points of figure read-off slack.
const PEAK_ENHANCEMENT: (f64, f64) = (0.24, 0.03);
/// Equal-rate diagonal: coupled and uncoupled currents agree to 1%.
const DIAGONAL_NULL: f64 = 0.01;
/// Stability-capped enhancement 30% +/- 5 pp at the operating transfer rate.
const STABILITY_CAP: (f64, f64) = (0.30, 0.05);
/// Peak-power gain vs temperature, each +/- 3 pp.
const EFFICIENCY_VS_T: [(f64, f64); 4] =
    [(300.0, 0.24), (200.0, 0.30), (100.0, 0.38), (50.0, 0.40)];
const EFFICIENCY_TOL: f64 = 0.03;
/// Open-circuit voltage within 1% of the bright-state gap.
const OPEN_CIRCUIT: (f64, f64) = (1.815, 0.01);
/// Closed forms vs the null-space solver, relative.
const ORACLE_REL: f64 = 1e-9;
/// Common-temperature steady state vs Boltzmann, relative.
const BOLTZMANN_REL: f64 = 1e-8;
/// Positivity floor and normalisation drift for trajectories.
const POSITIVITY_FLOOR: f64 = -1e-12;
const TRACE_DRIFT: f64 = 1e-10;
/// Bright-dark occupation at room temperature.
const SPLITTING_OCCUPATION: (f64, f64) = (0.46, 0.01);

/// Outcome of one validation check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "{} {} ({:.2?}): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed,
            self.detail
        )
    }
}

fn finish(
    name: &'static str,
    started: Instant,
    budget: Duration,
    passed: bool,
    detail: String,
) -> CheckResult {
    let elapsed = started.elapsed();
    let in_budget = elapsed <= budget;
    CheckResult {
        name,
        passed: passed && in_budget,
        detail: if in_budget {
            detail
        } else {
            format!("{detail}; over budget {budget:.2?}")
        },
        elapsed,
    }
}

/// Current enhancement at the published operating point (gamma_x = 25 meV,
/// gamma_c = 12 meV, 300 K).
pub fn check_peak_enhancement() -> CheckResult {
    let t0 = Instant::now();
    let r = enhancement_cell(&ModelParams::default(), 25e-3, 12e-3);
    let (target, tol) = PEAK_ENHANCEMENT;
    match r {
        Ok(r) => finish(
            "peak current enhancement",
            t0,
            Duration::from_secs(1),
            (r.relative_enhancement - target).abs() <= tol,
            format!(
                "(j - j~)/j~ = {:.4} vs {target} +/- {tol}",
                r.relative_enhancement
            ),
        ),
        Err(e) => finish(
            "peak current enhancement",
            t0,
            Duration::from_secs(1),
            false,
            e.to_string(),
        ),
    }
}

/// Along gamma_x = gamma_c both cycles carry the same current.
pub fn check_diagonal_null() -> CheckResult {
    let t0 = Instant::now();
    let p = ModelParams::default();
    let mut worst = 0.0f64;
    for k in 0..20 {
        let g = 1e-3 + k as f64 * 49e-3 / 19.0;
        match enhancement_cell(&p, g, g) {
            Ok(r) => worst = worst.max(r.relative_enhancement.abs()),
            Err(e) => {
                return finish(
                    "equal-rate diagonal null line",
                    t0,
                    Duration::from_secs(5),
                    false,
                    e.to_string(),
                )
            }
        }
    }
    finish(
        "equal-rate diagonal null line",
        t0,
        Duration::from_secs(5),
        worst < DIAGONAL_NULL,
        format!("max |enhancement| = {worst:.2e} over 20 diagonal points"),
    )
}

/// At the stability edge gamma_x = 2 J12 = 30 meV (transfer at the operating
/// 12 meV) the enhancement is capped near 30%.
pub fn check_stability_cap() -> CheckResult {
    let t0 = Instant::now();
    let r = enhancement_cell(&ModelParams::default(), 30e-3, 12e-3);
    let (target, tol) = STABILITY_CAP;
    match r {
        Ok(r) => finish(
            "stability-capped enhancement",
            t0,
            Duration::from_secs(5),
            (r.relative_enhancement - target).abs() <= tol,
            format!(
                "(j - j~)/j~ = {:.4} at gamma_x = 2 J12 vs {target} +/- {tol}",
                r.relative_enhancement
            ),
        ),
        Err(e) => finish(
            "stability-capped enhancement",
            t0,
            Duration::from_secs(5),
            false,
            e.to_string(),
        ),
    }
}

/// Peak-power gain at 300/200/100/50 K from the j-V sweeps.
pub fn check_relative_efficiency() -> CheckResult {
    let t0 = Instant::now();
    let budget = Duration::from_secs(30);
    let mut details = Vec::new();
    let mut ok = true;
    for (temperature, target) in EFFICIENCY_VS_T {
        let mut p = ModelParams::default();
        p.temperature = temperature;
        let eta = (|| -> photocell_core::Result<f64> {
            let (lo, hi) = DEFAULT_GAMMA_SWEEP;
            let c = iv_curve(&p, lo, hi, DEFAULT_SWEEP_POINTS, true, true)?;
            let u = iv_curve(&p, lo, hi, DEFAULT_SWEEP_POINTS, true, false)?;
            let pc = c.peak_power().expect("nonempty curve").power;
            let pu = u.peak_power().expect("nonempty curve").power;
            photocell_core::relative_efficiency(pc, pu)
        })();
        match eta {
            Ok(eta) => {
                if (eta - target).abs() > EFFICIENCY_TOL {
                    ok = false;
                }
                details.push(format!("{temperature} K: {eta:.3} vs {target}"));
            }
            Err(e) => {
                ok = false;
                details.push(format!("{temperature} K: {e}"));
            }
        }
    }
    finish(
        "relative efficiency vs temperature",
        t0,
        budget,
        ok,
        details.join("; "),
    )
}

/// Open-circuit voltage at the vanishing-extraction end of the default sweep.
pub fn check_open_circuit_voltage() -> CheckResult {
    let t0 = Instant::now();
    let p = ModelParams::default();
    let (target, rel_tol) = OPEN_CIRCUIT;
    let result = iv_curve(&p, DEFAULT_GAMMA_SWEEP.0, 1e-9, 4, true, true);
    match result {
        Ok(curve) => {
            let v = curve
                .points
                .first()
                .map(|pt| pt.voltage)
                .unwrap_or(f64::NAN);
            finish(
                "open-circuit voltage",
                t0,
                Duration::from_secs(1),
                (v - target).abs() / target <= rel_tol,
                format!(
                    "V = {v:.6} V at Gamma = {:.0e} eV vs {target} V +/- {:.0}%",
                    DEFAULT_GAMMA_SWEEP.0,
                    rel_tol * 100.0
                ),
            )
        }
        Err(e) => finish(
            "open-circuit voltage",
            t0,
            Duration::from_secs(1),
            false,
            e.to_string(),
        ),
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Closed-form currents against the null-space solver over 100 random draws
/// with the ambient phonons off.
pub fn check_analytic_oracles() -> CheckResult {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut p = ModelParams::default();
        p.gamma_1h = log_uniform(&mut rng, 1e-6, 1e-1) / 2.0;
        p.gamma_2h = p.gamma_1h;
        p.gamma_1c = log_uniform(&mut rng, 1e-6, 1e-1) / 2.0;
        p.gamma_2c = p.gamma_1c;
        p.gamma_x = log_uniform(&mut rng, 1e-6, 1e-1);
        p.gamma_load = log_uniform(&mut rng, 1e-6, 1e-1);
        p.gamma_cycle = log_uniform(&mut rng, 1e-6, 1e-1);
        let n_h = log_uniform(&mut rng, 1.0, 1e5);
        let n_x = rng.random_range(0.0..1.0);
        let occ = OccupationSet {
            n_h,
            n_1h: n_h,
            n_2h: n_h,
            n_1c: 0.0,
            n_2c: 0.0,
            n_x,
            n_cycle: 0.0,
        };

        let checks = [
            (
                steady_state(&build_generator_uncoupled(&p, &occ)),
                analytic_current_uncoupled(&p, &occ),
            ),
            (
                steady_state(&build_generator_coupled(&p, &occ)),
                analytic_current_coupled(&p, &occ),
            ),
        ];
        for (ss, formula) in checks {
            match (ss, formula) {
                (Ok(ss), Ok(j_formula)) => {
                    let j_solver = current(ss.rho_alpha(), p.gamma_load);
                    worst = worst.max((j_solver - j_formula).abs() / j_formula);
                }
                (Err(e), _) | (_, Err(e)) => {
                    return finish(
                        "analytic oracle equivalence",
                        t0,
                        Duration::from_secs(10),
                        false,
                        e.to_string(),
                    )
                }
            }
        }
    }
    finish(
        "analytic oracle equivalence",
        t0,
        Duration::from_secs(10),
        worst <= ORACLE_REL,
        format!("worst relative deviation {worst:.2e} over 100 draws"),
    )
}

/// With one common bath temperature and no extraction, both cycles must
/// settle into the Boltzmann distribution over the level energies.
pub fn check_thermal_fixed_point() -> CheckResult {
    let t0 = Instant::now();
    let temperature = 5000.0;
    let mut p = ModelParams::default();
    p.gamma_load = 0.0;
    p.temperature = temperature;
    p.photon_occupation = None;
    let kt = BOLTZMANN_EV_PER_K * temperature;
    let eig = dimer_eigensystem(p.e1, p.e2, p.j12);

    let mut worst = 0.0f64;
    for (coupled, upper) in [(true, (eig.e_bright, eig.e_dark)), (false, (p.e1, p.e2))] {
        let result = build_occupations(&p, coupled).and_then(|occ| {
            steady_state(&if coupled {
                build_generator_coupled(&p, &occ)
            } else {
                build_generator_uncoupled(&p, &occ)
            })
        });
        let ss = match result {
            Ok(ss) => ss,
            Err(e) => {
                return finish(
                    "thermal Boltzmann fixed point",
                    t0,
                    Duration::from_secs(1),
                    false,
                    e.to_string(),
                )
            }
        };
        let energies = [0.0, upper.0, upper.1, p.e_alpha, p.e_beta];
        let weights: Vec<f64> = energies.iter().map(|e| (-e / kt).exp()).collect();
        let z: f64 = weights.iter().sum();
        for (rho_i, w) in ss.rho.iter().zip(&weights) {
            let boltzmann = w / z;
            worst = worst.max((rho_i - boltzmann).abs() / boltzmann);
        }
    }
    finish(
        "thermal Boltzmann fixed point",
        t0,
        Duration::from_secs(1),
        worst <= BOLTZMANN_REL,
        format!("worst relative deviation {worst:.2e} at {temperature} K"),
    )
}

/// Trajectory positivity and normalisation over random draws, a clean audit
/// of the embedded population generators, and a detected violation for the
/// non-secular counterexample.
pub fn check_positivity_suite() -> CheckResult {
    let t0 = Instant::now();
    let budget = Duration::from_secs(60);
    let name = "positivity property suite";
    let mut rng = ChaCha8Rng::seed_from_u64(0x90517);

    let horizon = |gen: &RateGenerator| {
        let eigs = gen.matrix.clone().complex_eigenvalues();
        let fastest = eigs.iter().map(|l| l.re.abs()).fold(0.0, f64::max);
        let slowest = eigs
            .iter()
            .map(|l| l.re.abs())
            .filter(|r| *r > fastest * 1e-12)
            .fold(f64::INFINITY, f64::min);
        (25.0 / slowest).min(2000.0 / fastest)
    };

    let mut ground5 = DMatrix::from_element(5, 5, Complex64::new(0.0, 0.0));
    ground5[(0, 0)] = Complex64::new(1.0, 0.0);
    let mut worst_floor = 0.0f64;
    let mut worst_drift = 0.0f64;

    for draw in 0..100 {
        let mut p = ModelParams::default();
        p.gamma_1h = log_uniform(&mut rng, 1e-3, 1e-1) / 2.0;
        p.gamma_2h = p.gamma_1h;
        p.gamma_1c = log_uniform(&mut rng, 1e-3, 1e-1) / 2.0;
        p.gamma_2c = p.gamma_1c;
        p.gamma_x = log_uniform(&mut rng, 1e-3, 1e-1);
        p.gamma_load = log_uniform(&mut rng, 1e-3, 1e-1);
        p.gamma_cycle = log_uniform(&mut rng, 1e-3, 1e-1);
        p.temperature = rng.random_range(100.0..400.0);
        p.photon_occupation = Some(log_uniform(&mut rng, 1.0, 1e2));
        let coupled = draw % 2 == 0;

        let occ = match build_occupations(&p, coupled) {
            Ok(o) => o,
            Err(e) => return finish(name, t0, budget, false, e.to_string()),
        };
        let gen = if coupled {
            build_generator_coupled(&p, &occ)
        } else {
            build_generator_uncoupled(&p, &occ)
        };
        let t_end = horizon(&gen);

        match evolve(&gen, &PopulationState::ground_start(), t_end, t_end / 100.0) {
            Ok(traj) => {
                for s in &traj {
                    let min = s.rho.min();
                    let drift = (s.rho.iter().sum::<f64>() - 1.0).abs();
                    worst_floor = worst_floor.min(min);
                    worst_drift = worst_drift.max(drift);
                    if min < POSITIVITY_FLOOR || drift > TRACE_DRIFT {
                        return finish(
                            name,
                            t0,
                            budget,
                            false,
                            format!(
                                "draw {draw}: min {min:e}, drift {drift:e} at t = {}",
                                s.time
                            ),
                        );
                    }
                }
            }
            Err(e) => return finish(name, t0, budget, false, format!("draw {draw}: {e}")),
        }

        // A quarter of the draws also go through the generic auditor.
        if draw % 4 == 0 {
            let op = Superoperator::from_rate_generator(&gen);
            let report = evolve_density_matrix(&op, &ground5, t_end, t_end / 25.0)
                .map(|samples| audit_positivity(&samples, 1e-9));
            match report {
                Ok(report) => {
                    if report.first_negative_time.is_some() || report.diverged {
                        return finish(
                            name,
                            t0,
                            budget,
                            false,
                            format!("draw {draw}: embedded generator audited negative"),
                        );
                    }
                }
                Err(e) => return finish(name, t0, budget, false, format!("draw {draw}: {e}")),
            }
        }
    }

    // The counterexample must be caught.
    let mut ground2 = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
    ground2[(0, 0)] = Complex64::new(1.0, 0.0);
    let toy = non_secular_toy(0.5, 0.05);
    let caught = evolve_density_matrix(&toy, &ground2, 20.0, 0.2)
        .map(|samples| audit_positivity(&samples, 1e-9))
        .map(|r| r.first_negative_time.is_some())
        .unwrap_or(false);

    finish(
        name,
        t0,
        budget,
        caught,
        format!(
            "100 draws clean (min population {worst_floor:e}, max drift {worst_drift:e}); \
             counterexample negativity {}",
            if caught { "detected" } else { "MISSED" }
        ),
    )
}

/// Thermal occupation at the 30 meV bright-dark splitting, room temperature.
pub fn check_splitting_occupation() -> CheckResult {
    let t0 = Instant::now();
    let (target, tol) = SPLITTING_OCCUPATION;
    match planck_occupation(0.030, 300.0) {
        Ok(n) => finish(
            "bright-dark thermal occupation",
            t0,
            Duration::from_secs(1),
            (n - target).abs() <= tol,
            format!("n_x = {n:.4} vs {target} +/- {tol}"),
        ),
        Err(e) => finish(
            "bright-dark thermal occupation",
            t0,
            Duration::from_secs(1),
            false,
            e.to_string(),
        ),
    }
}

/// The full default-resolution rate grid: finishes inside the budget and is
/// bit-for-bit deterministic across runs.
pub fn check_grid_performance() -> CheckResult {
    let t0 = Instant::now();
    let budget = Duration::from_secs(60);
    let p = ModelParams::default();
    let run = || sweep_rate_grid(&p, DEFAULT_GRID_RANGE, DEFAULT_GRID_RANGE, 100, 100);
    let (first, second) = match (run(), run()) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            return finish(
                "full-grid runtime and determinism",
                t0,
                budget,
                false,
                e.to_string(),
            )
        }
    };
    let identical = first
        .enhancement
        .iter()
        .zip(&second.enhancement)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    let clean = first.failed.is_empty();
    finish(
        "full-grid runtime and determinism",
        t0,
        budget,
        identical && clean,
        format!(
            "two 100x100 sweeps in {:.2?}, {} failed cells, bitwise identical: {identical}",
            t0.elapsed(),
            first.failed.len()
        ),
    )
}

/// Every check, in the order of the published claims.
pub fn run_all_checks() -> Vec<CheckResult> {
    vec![
        check_peak_enhancement(),
        check_diagonal_null(),
        check_stability_cap(),
        check_relative_efficiency(),
        check_open_circuit_voltage(),
        check_analytic_oracles(),
        check_thermal_fixed_point(),
        check_positivity_suite(),
        check_splitting_occupation(),
        check_grid_performance(),
    ]
}
