//! Generic density-matrix evolution and complete-positivity auditing.
//!
//! Master equations that couple populations to coherences (non-secular
//! Bloch-Redfield and relatives) can drive a density matrix to negative
//! eigenvalues even though its trace stays one. This module evolves an
//! arbitrary linear superoperator acting on vectorised density matrices and
//! monitors the minimum eigenvalue along the trajectory, so such violations
//! show up as data rather than as silently wrong populations.
//!
//! Vectorisation is column-stacking throughout: entry `rho[(i, j)]` of a
//! `d x d` matrix lives at position `j * d + i` of the length-`d^2` vector.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::Error;
use crate::kinetics::{RateGenerator, N_LEVELS};
use crate::ode::{integrate, OdeOptions};
use crate::Result;

/// Default eigenvalue tolerance separating integrator noise from a genuine
/// positivity violation.
pub const DEFAULT_NEGATIVITY_TOL: f64 = 1e-9;
/// Any matrix entry beyond this magnitude marks the trajectory as divergent.
pub const DIVERGENCE_BOUND: f64 = 1e3;
/// Hermiticity drift (before re-symmetrisation) worth flagging.
pub const HERMITICITY_FLAG: f64 = 1e-6;

/// Linear generator acting on column-vectorised `d x d` density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    /// `d^2 x d^2` complex generator matrix.
    pub matrix: DMatrix<Complex64>,
    /// Density-matrix dimension `d`.
    pub dim: usize,
}

impl Superoperator {
    /// Wrap a matrix, checking it is `d^2 x d^2`.
    pub fn new(matrix: DMatrix<Complex64>, dim: usize) -> Result<Self> {
        let d2 = dim * dim;
        if matrix.nrows() != d2 || matrix.ncols() != d2 {
            return Err(Error::SuperoperatorFormat {
                line: 0,
                message: format!(
                    "matrix is {}x{}, expected {d2}x{d2} for d = {dim}",
                    matrix.nrows(),
                    matrix.ncols()
                ),
            });
        }
        Ok(Self { matrix, dim })
    }

    /// How far the generator is from trace preservation: the largest absolute
    /// entry of `vec(I)^T L`. Zero (up to rounding) for any physical
    /// generator; a violation is a property of the input worth reporting, not
    /// an error.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for col in 0..d * d {
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..d {
                s += self.matrix[(j * d + j, col)];
            }
            worst = worst.max(s.norm());
        }
        worst
    }

    /// Parse the text-table format: a header `d=<int>`, then `d^2` lines of
    /// `d^2` comma-separated complex entries `a+bi`. Blank lines and `#`
    /// comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dim: Option<usize> = None;
        let mut rows: Vec<Vec<Complex64>> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match dim {
                None => {
                    let rest = line
                        .strip_prefix("d=")
                        .or_else(|| line.strip_prefix("d ="))
                        .ok_or(Error::SuperoperatorFormat {
                            line: line_no,
                            message: format!("expected header `d=<int>`, got `{line}`"),
                        })?;
                    let d: usize = rest
                        .trim()
                        .parse()
                        .map_err(|_| Error::SuperoperatorFormat {
                            line: line_no,
                            message: format!("bad dimension `{rest}`"),
                        })?;
                    if d == 0 {
                        return Err(Error::SuperoperatorFormat {
                            line: line_no,
                            message: "dimension must be positive".into(),
                        });
                    }
                    dim = Some(d);
                }
                Some(d) => {
                    let entries: Vec<&str> = line.split(',').collect();
                    if entries.len() != d * d {
                        return Err(Error::SuperoperatorFormat {
                            line: line_no,
                            message: format!(
                                "row has {} entries, expected {}",
                                entries.len(),
                                d * d
                            ),
                        });
                    }
                    let mut row = Vec::with_capacity(d * d);
                    for e in entries {
                        row.push(parse_complex(e).map_err(|message| {
                            Error::SuperoperatorFormat {
                                line: line_no,
                                message,
                            }
                        })?);
                    }
                    if rows.len() == d * d {
                        return Err(Error::SuperoperatorFormat {
                            line: line_no,
                            message: format!("more than {} data rows", d * d),
                        });
                    }
                    rows.push(row);
                }
            }
        }

        let d = dim.ok_or(Error::SuperoperatorFormat {
            line: 0,
            message: "missing `d=<int>` header".into(),
        })?;
        if rows.len() != d * d {
            return Err(Error::SuperoperatorFormat {
                line: 0,
                message: format!("found {} data rows, expected {}", rows.len(), d * d),
            });
        }
        let matrix = DMatrix::from_fn(d * d, d * d, |i, j| rows[i][j]);
        Self::new(matrix, d)
    }

    /// Serialise to the text-table format parsed by [`Superoperator::parse`].
    pub fn to_table(&self) -> String {
        let d2 = self.dim * self.dim;
        let mut out = format!("d={}\n", self.dim);
        for i in 0..d2 {
            let row: Vec<String> = (0..d2)
                .map(|j| {
                    let z = self.matrix[(i, j)];
                    format!("{:e}{:+e}i", z.re, z.im)
                })
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Embed a five-level population generator as a superoperator: the
    /// population block follows the rate matrix and every coherence decays at
    /// the mean of its two levels' total outflow rates. This is the secular
    /// completion of the population dynamics; it cannot create negativity.
    pub fn from_rate_generator(gen: &RateGenerator) -> Self {
        let d = N_LEVELS;
        let mut l = DMatrix::from_element(d * d, d * d, Complex64::new(0.0, 0.0));
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    for k in 0..d {
                        l[(i * d + i, k * d + k)] = Complex64::new(gen.matrix[(i, k)], 0.0);
                    }
                } else {
                    let decay = 0.5 * (gen.matrix[(i, i)] + gen.matrix[(j, j)]);
                    l[(j * d + i, j * d + i)] = Complex64::new(decay, 0.0);
                }
            }
        }
        Self { matrix: l, dim: d }
    }
}

/// Parse one complex entry of the form `a`, `bi`, or `a+bi` (signs and
/// scientific notation allowed on both parts).
fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty entry".into());
    }
    let bad = |s: &str| format!("bad complex entry `{s}`");

    let (real_part, imag_part) = match s.strip_suffix(['i', 'I']) {
        None => (s, None),
        Some(body) => {
            // Split at the last +/- that is neither leading nor an exponent
            // sign; everything after it is the imaginary magnitude.
            let bytes = body.as_bytes();
            let mut split = None;
            for k in (1..bytes.len()).rev() {
                let c = bytes[k] as char;
                if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                    split = Some(k);
                    break;
                }
            }
            match split {
                Some(k) => (&body[..k], Some(&body[k..])),
                None => ("", Some(body)),
            }
        }
    };

    let re = if real_part.is_empty() {
        0.0
    } else {
        real_part.parse::<f64>().map_err(|_| bad(s))?
    };
    let im = match imag_part {
        None => 0.0,
        Some("") | Some("+") => 1.0,
        Some("-") => -1.0,
        Some(text) => text.parse::<f64>().map_err(|_| bad(s))?,
    };
    Ok(Complex64::new(re, im))
}

/// A two-level generator with population-to-coherence driving, the minimal
/// non-secular counterexample: it preserves trace and Hermiticity yet pushes
/// any ground-state-seeded density matrix to a negative eigenvalue at finite
/// time. `drive` feeds the coherence from the ground population, `decay`
/// damps it.
pub fn non_secular_toy(drive: f64, decay: f64) -> Superoperator {
    let mut l = DMatrix::from_element(4, 4, Complex64::new(0.0, 0.0));
    // vec order for d = 2: [rho_00, rho_10, rho_01, rho_11].
    l[(1, 0)] = Complex64::new(drive, 0.0);
    l[(1, 1)] = Complex64::new(-decay, 0.0);
    l[(2, 0)] = Complex64::new(drive, 0.0);
    l[(2, 2)] = Complex64::new(-decay, 0.0);
    Superoperator { matrix: l, dim: 2 }
}

/// One sample of an evolved density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySample {
    /// Time in hbar/eV units.
    pub time: f64,
    /// Re-Hermitised density matrix.
    pub rho: DMatrix<Complex64>,
    /// Largest antihermitian entry magnitude before re-symmetrisation.
    pub hermiticity_defect: f64,
}

/// Integrate `d vec(rho) / dt = L vec(rho)` from a Hermitian, unit-trace
/// initial matrix; samples are re-Hermitised by averaging with the conjugate
/// transpose and the pre-symmetrisation defect is recorded per sample.
pub fn evolve_density_matrix(
    op: &Superoperator,
    rho0: &DMatrix<Complex64>,
    t_end: f64,
    dt_out: f64,
) -> Result<Vec<DensitySample>> {
    let d = op.dim;
    if rho0.nrows() != d || rho0.ncols() != d {
        return Err(Error::SuperoperatorFormat {
            line: 0,
            message: format!(
                "initial state is {}x{}, expected {d}x{d}",
                rho0.nrows(),
                rho0.ncols()
            ),
        });
    }
    let herm_defect = hermiticity_defect(rho0);
    if herm_defect > 1e-9 {
        return Err(Error::NotHermitian(herm_defect));
    }
    let trace: Complex64 = rho0.diagonal().iter().sum();
    if (trace - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::TraceNotOne(trace.re));
    }

    // Real embedding: y = [Re vec(rho); Im vec(rho)].
    let d2 = d * d;
    let re_l = op.matrix.map(|z| z.re);
    let im_l = op.matrix.map(|z| z.im);
    let mut y0 = DVector::zeros(2 * d2);
    for j in 0..d {
        for i in 0..d {
            y0[j * d + i] = rho0[(i, j)].re;
            y0[d2 + j * d + i] = rho0[(i, j)].im;
        }
    }

    let rhs = move |_t: f64, y: &DVector<f64>| {
        let re = y.rows(0, d2);
        let im = y.rows(d2, d2);
        let mut dy = DVector::zeros(2 * d2);
        dy.rows_mut(0, d2).copy_from(&(&re_l * re - &im_l * im));
        dy.rows_mut(d2, d2).copy_from(&(&im_l * re + &re_l * im));
        dy
    };

    let opts = OdeOptions {
        atol: 1e-12,
        rtol: 1e-9,
        ..OdeOptions::default()
    };
    let raw = integrate(rhs, y0, 0.0, t_end, dt_out, opts)?;

    let samples = raw
        .into_iter()
        .map(|(time, y)| {
            let raw_rho =
                DMatrix::from_fn(d, d, |i, j| Complex64::new(y[j * d + i], y[d2 + j * d + i]));
            let defect = hermiticity_defect(&raw_rho);
            let rho = (&raw_rho + raw_rho.adjoint()) * Complex64::new(0.5, 0.0);
            DensitySample {
                time,
                rho,
                hermiticity_defect: defect,
            }
        })
        .collect();
    Ok(samples)
}

fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let anti = (m - m.adjoint()) * Complex64::new(0.5, 0.0);
    anti.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Positivity findings over one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    /// Sample times.
    pub times: Vec<f64>,
    /// Minimum eigenvalue of the density matrix at each sample.
    pub min_eigenvalues: Vec<f64>,
    /// Earliest sample time whose minimum eigenvalue fell below `-tolerance`.
    pub first_negative_time: Option<f64>,
    /// Minimum eigenvalue at the final sample.
    pub steady_state_min_eigenvalue: f64,
    /// Whether any matrix entry exceeded [`DIVERGENCE_BOUND`] in magnitude.
    pub diverged: bool,
    /// Largest pre-symmetrisation Hermiticity defect seen along the way;
    /// values beyond [`HERMITICITY_FLAG`] deserve suspicion.
    pub max_hermiticity_defect: f64,
}

/// Scan a trajectory for positivity violations and divergence.
pub fn audit_positivity(samples: &[DensitySample], tolerance: f64) -> PositivityReport {
    assert!(!samples.is_empty(), "cannot audit an empty trajectory");
    let mut times = Vec::with_capacity(samples.len());
    let mut min_eigenvalues = Vec::with_capacity(samples.len());
    let mut first_negative_time = None;
    let mut diverged = false;
    let mut max_defect = 0.0f64;

    for s in samples {
        let min_eig = s
            .rho
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        times.push(s.time);
        min_eigenvalues.push(min_eig);
        if first_negative_time.is_none() && min_eig < -tolerance {
            first_negative_time = Some(s.time);
        }
        if s.rho.iter().any(|z| z.norm() > DIVERGENCE_BOUND) {
            diverged = true;
        }
        max_defect = max_defect.max(s.hermiticity_defect);
    }

    PositivityReport {
        steady_state_min_eigenvalue: *min_eigenvalues.last().unwrap(),
        times,
        min_eigenvalues,
        first_negative_time,
        diverged,
        max_hermiticity_defect: max_defect,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::{build_generator_coupled, evolve, PopulationState};
    use crate::params::ModelParams;
    use crate::thermal::build_occupations;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ground(d: usize) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(d, d, c(0.0, 0.0));
        m[(0, 0)] = c(1.0, 0.0);
        m
    }

    #[test]
    fn complex_entries_parse() {
        assert_eq!(parse_complex("1.5").unwrap(), c(1.5, 0.0));
        assert_eq!(parse_complex("-2e-3").unwrap(), c(-2e-3, 0.0));
        assert_eq!(parse_complex("2i").unwrap(), c(0.0, 2.0));
        assert_eq!(parse_complex("-0.5i").unwrap(), c(0.0, -0.5));
        assert_eq!(parse_complex("1+2i").unwrap(), c(1.0, 2.0));
        assert_eq!(parse_complex("1.5e0-2.5e-1i").unwrap(), c(1.5, -0.25));
        assert_eq!(parse_complex("-1e-2+3e+4i").unwrap(), c(-0.01, 3e4));
        assert!(parse_complex("fish").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn table_round_trips() {
        let toy = non_secular_toy(0.3, 0.05);
        let parsed = Superoperator::parse(&toy.to_table()).unwrap();
        assert_eq!(parsed.dim, 2);
        assert_eq!(parsed.matrix, toy.matrix);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        // d = 2 but a row with 3 entries.
        let text = "d=2\n0,0,0,0\n0,0,0\n0,0,0,0\n0,0,0,0\n";
        assert!(matches!(
            Superoperator::parse(text),
            Err(Error::SuperoperatorFormat { line: 3, .. })
        ));
        // Too few rows.
        let text = "d=2\n0,0,0,0\n";
        assert!(Superoperator::parse(text).is_err());
        // Missing header.
        assert!(Superoperator::parse("0,0,0,0\n").is_err());
    }

    #[test]
    fn pure_dephasing_table_loads_and_preserves_trace() {
        // Coherences decay, populations frozen.
        let text = "\
# two-level pure dephasing
d=2
0,0,0,0
0,-0.2,0,0
0,0,-0.2,0
0,0,0,0
";
        let op = Superoperator::parse(text).unwrap();
        assert!(op.trace_defect() < 1e-10);

        let mut rho0 = DMatrix::from_element(2, 2, c(0.5, 0.0));
        rho0[(0, 1)] = c(0.5, 0.0);
        rho0[(1, 0)] = c(0.5, 0.0);
        let samples = evolve_density_matrix(&op, &rho0, 20.0, 1.0).unwrap();
        let report = audit_positivity(&samples, DEFAULT_NEGATIVITY_TOL);
        assert_eq!(report.first_negative_time, None);
        assert!(!report.diverged);
        assert!(report.min_eigenvalues.iter().all(|&l| l >= -1e-12));
        for s in &samples {
            let trace: Complex64 = s.rho.diagonal().iter().sum();
            assert!((trace.re - 1.0).abs() < 1e-10);
            assert!((s.rho[(0, 1)].re - 0.5 * (-0.2 * s.time).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_generator_keeps_the_state() {
        let op = Superoperator::new(DMatrix::from_element(4, 4, c(0.0, 0.0)), 2).unwrap();
        let samples = evolve_density_matrix(&op, &ground(2), 5.0, 1.0).unwrap();
        for s in &samples {
            assert_eq!(s.rho, ground(2));
        }
    }

    #[test]
    fn amplitude_damping_matches_the_closed_form() {
        // Lindblad dissipator of L = sigma_minus, assembled independently via
        // Kronecker products: gamma (conj(L) (x) L - 1/2 I (x) L'L
        // - 1/2 (L'L)^T (x) I) under column stacking.
        let gamma = 0.35;
        let mut sm = DMatrix::from_element(2, 2, c(0.0, 0.0));
        sm[(0, 1)] = c(1.0, 0.0); // basis order (ground, excited)
        let sp = sm.adjoint();
        let n_op = &sp * &sm;
        let eye = DMatrix::<Complex64>::identity(2, 2);
        let l = (sm.map(|z| z.conj()).kronecker(&sm)
            - eye.kronecker(&n_op) * c(0.5, 0.0)
            - n_op.transpose().kronecker(&eye) * c(0.5, 0.0))
            * c(gamma, 0.0);
        let op = Superoperator::new(l, 2).unwrap();
        assert!(op.trace_defect() < 1e-12);

        let mut excited = DMatrix::from_element(2, 2, c(0.0, 0.0));
        excited[(1, 1)] = c(1.0, 0.0);
        let samples = evolve_density_matrix(&op, &excited, 25.0, 0.5).unwrap();
        for s in &samples {
            let expect = (-gamma * s.time).exp();
            assert!(
                (s.rho[(1, 1)].re - expect).abs() < 1e-8,
                "t = {}: {} vs {expect}",
                s.time,
                s.rho[(1, 1)].re
            );
            assert!(s.hermiticity_defect < 1e-6);
        }
        let report = audit_positivity(&samples, DEFAULT_NEGATIVITY_TOL);
        assert_eq!(report.first_negative_time, None);
        assert!(report.steady_state_min_eigenvalue >= -1e-12);
    }

    #[test]
    fn toy_counterexample_goes_negative() {
        let (drive, decay) = (0.5, 0.05);
        let toy = non_secular_toy(drive, decay);
        assert!(toy.trace_defect() < 1e-12);

        let samples = evolve_density_matrix(&toy, &ground(2), 10.0, 0.25).unwrap();
        let report = audit_positivity(&samples, DEFAULT_NEGATIVITY_TOL);
        assert!(report.first_negative_time.is_some());
        assert!(report.steady_state_min_eigenvalue < -1e-3);

        // Direct diagonalisation oracle: coherence c(t) = (g/k)(1 - e^{-kt}),
        // eigenvalues (1 +/- sqrt(1 + 4 c^2)) / 2.
        for (s, &min_eig) in samples.iter().zip(&report.min_eigenvalues) {
            let coh = drive / decay * (1.0 - (-decay * s.time).exp());
            let expect = 0.5 * (1.0 - (1.0 + 4.0 * coh * coh).sqrt());
            assert!(
                (min_eig - expect).abs() < 1e-8,
                "t = {}: {min_eig} vs {expect}",
                s.time
            );
        }
    }

    #[test]
    fn embedded_population_generator_matches_the_kinetics_module() {
        let p = ModelParams::default();
        let occ = build_occupations(&p, true).unwrap();
        let gen = build_generator_coupled(&p, &occ);
        let op = Superoperator::from_rate_generator(&gen);
        assert!(op.trace_defect() < 1e-12);

        let samples = evolve_density_matrix(&op, &ground(5), 200.0, 10.0).unwrap();
        let populations = evolve(&gen, &PopulationState::ground_start(), 200.0, 10.0).unwrap();
        assert_eq!(samples.len(), populations.len());
        for (s, pop) in samples.iter().zip(&populations) {
            for k in 0..5 {
                assert_relative_eq!(s.rho[(k, k)].re, pop.rho[k], epsilon = 1e-8);
            }
            // Coherences stay exactly zero from a diagonal start.
            assert!(s.rho[(0, 1)].norm() < 1e-14);
        }
        let report = audit_positivity(&samples, DEFAULT_NEGATIVITY_TOL);
        assert_eq!(report.first_negative_time, None);
    }

    #[test]
    fn non_hermitian_or_traceless_starts_are_rejected() {
        let op = non_secular_toy(0.1, 0.1);
        let mut bad = ground(2);
        bad[(0, 1)] = c(0.3, 0.0); // not matched at (1, 0)
        assert!(matches!(
            evolve_density_matrix(&op, &bad, 1.0, 0.5),
            Err(Error::NotHermitian(_))
        ));
        let bad = ground(2) * c(2.0, 0.0);
        assert!(matches!(
            evolve_density_matrix(&op, &bad, 1.0, 0.5),
            Err(Error::TraceNotOne(_))
        ));
    }
}
