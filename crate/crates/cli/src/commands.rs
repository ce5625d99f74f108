//! Command dispatch: run one operation, print a summary, optionally emit CSV.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use photocell_core::positivity::{DEFAULT_NEGATIVITY_TOL, HERMITICITY_FLAG};
use photocell_core::{
    audit_positivity, build_generator_coupled, build_generator_uncoupled, build_occupations,
    current, evolve_density_matrix, iv_curve, non_secular_toy, steady_state, sweep_rate_grid,
    sweep_temperature, transient_demo, voltage, PositivityReport, Superoperator,
};

use crate::checks::run_all_checks;
use crate::config::RunConfig;
use crate::table::ResultTable;

/// Everything `audit` needs beyond the common configuration.
#[derive(Debug, Clone, Default)]
pub struct AuditOptions {
    /// Superoperator table to audit; the built-in demonstration runs when
    /// absent.
    pub superop: Option<PathBuf>,
    /// Evolution horizon (hbar/eV).
    pub t_end: Option<f64>,
    /// Basis state to seed the density matrix with.
    pub rho0: usize,
    /// Number of output samples.
    pub points: Option<usize>,
}

/// One CLI command, resolved.
#[derive(Debug, Clone)]
pub enum Command {
    Steady,
    Evolve,
    SweepRates,
    SweepTemp,
    Iv,
    Audit(AuditOptions),
    Validate,
}

/// Run a command; returns the process exit code.
pub fn dispatch(command: &Command, cfg: &RunConfig) -> Result<i32> {
    match command {
        Command::Steady => steady(cfg),
        Command::Evolve => evolve_cmd(cfg),
        Command::SweepRates => sweep_rates(cfg),
        Command::SweepTemp => sweep_temp(cfg),
        Command::Iv => iv(cfg),
        Command::Audit(opts) => audit(cfg, opts),
        Command::Validate => validate(),
    }
}

fn maybe_save(table: &ResultTable, out: Option<&Path>) -> Result<()> {
    if let Some(path) = out {
        table.save(path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn steady(cfg: &RunConfig) -> Result<i32> {
    let p = &cfg.params;
    let occ = build_occupations(p, cfg.coupled)?;
    let gen = if cfg.coupled {
        build_generator_coupled(p, &occ)
    } else {
        build_generator_uncoupled(p, &occ)
    };
    let ss = steady_state(&gen)?;
    let labels = gen.levels.labels();

    println!(
        "steady state ({}):",
        if cfg.coupled { "coupled" } else { "uncoupled" }
    );
    for (label, value) in labels.iter().zip(ss.rho.iter()) {
        println!("  rho_{label:<6} = {value:.9e}");
    }
    println!("  sum        = {:.12}", ss.rho.iter().sum::<f64>());
    let j = current(ss.rho_alpha(), p.gamma_load);
    println!("  j/e        = {j:.9e} eV");
    let mut row = ss.rho.iter().copied().collect::<Vec<f64>>();
    let mut columns: Vec<String> = labels.iter().map(|l| format!("rho_{l}")).collect();
    columns.push("j_over_e".into());
    row.push(j);
    match voltage(p, ss.rho_alpha(), ss.rho_beta()) {
        Ok(v) => {
            println!("  V          = {v:.9e} V");
            columns.push("V".into());
            row.push(v);
        }
        Err(e) => println!("  V          undefined ({e})"),
    }

    let mut table = ResultTable::new(columns);
    table.describe_run("steady", cfg);
    table.push_row(row);
    maybe_save(&table, cfg.out.as_deref())?;
    Ok(0)
}

fn evolve_cmd(cfg: &RunConfig) -> Result<i32> {
    let traj = transient_demo(&cfg.params, cfg.coupled)?;
    let occ = build_occupations(&cfg.params, cfg.coupled)?;
    let gen = if cfg.coupled {
        build_generator_coupled(&cfg.params, &occ)
    } else {
        build_generator_uncoupled(&cfg.params, &occ)
    };
    let labels = gen.levels.labels();
    let ss = steady_state(&gen)?;
    let last = traj.last().expect("nonempty trajectory");
    let gap = (&last.rho - &ss.rho).amax();

    println!(
        "relaxation from the ground state ({} samples to t = {:.3e}):",
        traj.len(),
        last.time
    );
    println!("  final distance to steady state: {gap:.3e}");

    let mut columns = vec!["t".to_string()];
    columns.extend(labels.iter().map(|l| format!("rho_{l}")));
    let mut table = ResultTable::new(columns);
    table.describe_run("evolve", cfg);
    for s in &traj {
        let mut row = vec![s.time];
        row.extend(s.rho.iter().copied());
        table.push_row(row);
    }
    maybe_save(&table, cfg.out.as_deref())?;
    Ok(0)
}

fn sweep_rates(cfg: &RunConfig) -> Result<i32> {
    let grid = sweep_rate_grid(
        &cfg.params,
        cfg.gamma_x_range,
        cfg.gamma_c_range,
        cfg.grid_n,
        cfg.grid_n,
    )?;

    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    for ix in 0..grid.gamma_x.len() {
        for ic in 0..grid.gamma_c.len() {
            let e = grid.cell(ix, ic);
            if grid.is_stable(ix, ic) && e > best.2 {
                best = (ix, ic, e);
            }
        }
    }
    println!(
        "{}x{} enhancement grid; {} failed cells",
        grid.gamma_x.len(),
        grid.gamma_c.len(),
        grid.failed.len()
    );
    println!(
        "best stable cell: gamma_x = {:.4e}, gamma_c = {:.4e}, enhancement = {:.4}",
        grid.gamma_x[best.0], grid.gamma_c[best.1], best.2
    );

    let mut table = ResultTable::new(vec!["gamma_x", "gamma_c", "enhancement", "stable"]);
    table.describe_run("sweep-rates", cfg);
    for ix in 0..grid.gamma_x.len() {
        for ic in 0..grid.gamma_c.len() {
            table.push_row(vec![
                grid.gamma_x[ix],
                grid.gamma_c[ic],
                grid.cell(ix, ic),
                if grid.is_stable(ix, ic) { 1.0 } else { 0.0 },
            ]);
        }
    }
    maybe_save(&table, cfg.out.as_deref())?;
    Ok(0)
}

fn sweep_temp(cfg: &RunConfig) -> Result<i32> {
    let points = sweep_temperature(&cfg.params, cfg.t_range, cfg.t_points)?;
    println!("temperature sweep ({} points):", points.len());
    for pt in points.iter().step_by((points.len() / 6).max(1)) {
        println!(
            "  T = {:6.1} K: enhancement = {:.4}, n_x = {:.4}",
            pt.temperature, pt.enhancement, pt.n_x
        );
    }

    let mut table = ResultTable::new(vec!["T", "enhancement", "n_x"]);
    table.describe_run("sweep-temp", cfg);
    for pt in &points {
        table.push_row(vec![pt.temperature, pt.enhancement, pt.n_x]);
    }
    maybe_save(&table, cfg.out.as_deref())?;
    Ok(0)
}

fn iv(cfg: &RunConfig) -> Result<i32> {
    let curve = iv_curve(
        &cfg.params,
        cfg.gamma_range.0,
        cfg.gamma_range.1,
        cfg.points,
        true,
        cfg.coupled,
    )?;
    let peak = curve
        .peak_power()
        .ok_or_else(|| anyhow!("empty j-V curve"))?;
    println!(
        "j-V sweep ({}, {} points, {} dropped):",
        if curve.coupled {
            "coupled"
        } else {
            "uncoupled"
        },
        curve.points.len(),
        curve.dropped
    );
    println!(
        "  open-circuit end: V = {:.6} V at Gamma = {:.3e} eV",
        curve.points.first().unwrap().voltage,
        curve.points.first().unwrap().gamma_load
    );
    println!(
        "  peak power {:.6e} at V = {:.6} V (Gamma = {:.3e} eV)",
        peak.power, peak.voltage, peak.gamma_load
    );

    let mut table = ResultTable::new(vec!["V", "j_over_e", "P", "Gamma"]);
    table.describe_run("iv", cfg);
    for pt in &curve.points {
        table.push_row(vec![pt.voltage, pt.current_over_e, pt.power, pt.gamma_load]);
    }
    maybe_save(&table, cfg.out.as_deref())?;
    Ok(0)
}

fn print_report(label: &str, op: &Superoperator, report: &PositivityReport) {
    println!("audit: {label}");
    let defect = op.trace_defect();
    if defect > 1e-10 {
        println!("  warning: trace-preservation defect {defect:.3e}");
    }
    if report.max_hermiticity_defect > HERMITICITY_FLAG {
        println!(
            "  warning: hermiticity drift {:.3e}",
            report.max_hermiticity_defect
        );
    }
    match report.first_negative_time {
        Some(t) => println!(
            "  NEGATIVITY at t = {t:.6e}; steady-state min eigenvalue {:.6e}",
            report.steady_state_min_eigenvalue
        ),
        None => println!(
            "  positive throughout; steady-state min eigenvalue {:.6e}",
            report.steady_state_min_eigenvalue
        ),
    }
    if report.diverged {
        println!("  DIVERGED: an entry left the +/-1e3 range");
    }
}

fn basis_state(dim: usize, index: usize) -> Result<DMatrix<Complex64>> {
    if index >= dim {
        return Err(anyhow!("rho0 index {index} out of range for d = {dim}"));
    }
    let mut rho = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    rho[(index, index)] = Complex64::new(1.0, 0.0);
    Ok(rho)
}

fn audit(cfg: &RunConfig, opts: &AuditOptions) -> Result<i32> {
    match &opts.superop {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let op = Superoperator::parse(&text)?;
            let t_end = opts.t_end.unwrap_or(100.0);
            let points = opts.points.unwrap_or(200) as f64;
            let rho0 = basis_state(op.dim, opts.rho0)?;
            let samples = evolve_density_matrix(&op, &rho0, t_end, t_end / points)?;
            let report = audit_positivity(&samples, DEFAULT_NEGATIVITY_TOL);
            print_report(&path.display().to_string(), &op, &report);

            let mut table = ResultTable::new(vec!["t", "min_eigenvalue"]);
            table.describe_run("audit", cfg);
            table.meta("superop", path.display().to_string());
            for (t, l) in report.times.iter().zip(&report.min_eigenvalues) {
                table.push_row(vec![*t, *l]);
            }
            maybe_save(&table, cfg.out.as_deref())?;
            Ok(0)
        }
        None => {
            // Built-in demonstration: the two population generators audit
            // clean, the non-secular toy does not.
            let mut toy_table = ResultTable::new(vec!["t", "min_eigenvalue"]);
            toy_table.describe_run("audit", cfg);

            for coupled in [false, true] {
                let occ = build_occupations(&cfg.params, coupled)?;
                let gen = if coupled {
                    build_generator_coupled(&cfg.params, &occ)
                } else {
                    build_generator_uncoupled(&cfg.params, &occ)
                };
                let op = Superoperator::from_rate_generator(&gen);
                let rho0 = basis_state(5, 0)?;
                let t_end = opts.t_end.unwrap_or(1000.0);
                let samples = evolve_density_matrix(&op, &rho0, t_end, t_end / 100.0)?;
                let report = audit_positivity(&samples, DEFAULT_NEGATIVITY_TOL);
                print_report(
                    if coupled {
                        "embedded coupled cycle"
                    } else {
                        "embedded uncoupled cycle"
                    },
                    &op,
                    &report,
                );
            }

            let toy = non_secular_toy(0.5, 0.05);
            let rho0 = basis_state(2, 0)?;
            let samples = evolve_density_matrix(&toy, &rho0, 20.0, 0.1)?;
            let report = audit_positivity(&samples, DEFAULT_NEGATIVITY_TOL);
            print_report("non-secular toy counterexample", &toy, &report);
            for (t, l) in report.times.iter().zip(&report.min_eigenvalues) {
                toy_table.push_row(vec![*t, *l]);
            }
            toy_table.meta("superop", "builtin non-secular toy");
            maybe_save(&toy_table, cfg.out.as_deref())?;
            Ok(0)
        }
    }
}

fn validate() -> Result<i32> {
    let results = run_all_checks();
    let mut failures = 0;
    for r in &results {
        println!("{}", r.line());
        if !r.passed {
            failures += 1;
        }
    }
    println!(
        "{} of {} checks passed",
        results.len() - failures,
        results.len()
    );
    Ok(if failures == 0 { 0 } else { 1 })
}
