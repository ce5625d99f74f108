use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use photocell_cli::commands::{dispatch, AuditOptions, Command};
use photocell_cli::config::RunConfig;

/// Photocell simulator: coupled-donor quantum-heat-engine kinetics,
/// photovoltaic characteristics, and density-matrix positivity audits.
#[derive(Parser)]
#[command(name = "photocell", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Configuration file (key = value); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the coupled-donor cycle (the default).
    #[arg(long, conflicts_with = "uncoupled")]
    coupled: bool,
    /// Use the uncoupled-donor cycle.
    #[arg(long)]
    uncoupled: bool,
    /// Points per axis of the rate grid.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Temperature sweep lower bound (K).
    #[arg(long)]
    t_min: Option<f64>,
    /// Temperature sweep upper bound (K).
    #[arg(long)]
    t_max: Option<f64>,
    /// Extraction-rate sweep lower bound (eV).
    #[arg(long)]
    gamma_min: Option<f64>,
    /// Extraction-rate sweep upper bound (eV).
    #[arg(long)]
    gamma_max: Option<f64>,
    /// Number of sweep points.
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the steady state and print the populations, current and voltage.
    Steady(CommonArgs),
    /// Relax the cycle from the ground state and emit the trajectory.
    Evolve(CommonArgs),
    /// Enhancement over the (gamma_x, gamma_c) plane with the stability mask.
    SweepRates(CommonArgs),
    /// Enhancement and n_x as a function of ambient temperature.
    SweepTemp(CommonArgs),
    /// j-V and P-V characteristic over an extraction-rate sweep.
    Iv(CommonArgs),
    /// Positivity-audit a superoperator table (or the built-in demo set).
    Audit {
        #[command(flatten)]
        common: CommonArgs,
        /// Superoperator table file (`d=<n>` header, then d^2 rows of d^2
        /// comma-separated complex entries a+bi).
        #[arg(long)]
        superop: Option<PathBuf>,
        /// Evolution horizon in hbar/eV units.
        #[arg(long)]
        t_end: Option<f64>,
        /// Index of the basis state used as the initial density matrix.
        #[arg(long, default_value_t = 0)]
        rho0: usize,
    },
    /// Run the full validation suite; nonzero exit on any failure.
    Validate,
}

fn resolve(common: &CommonArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    if common.coupled {
        cfg.coupled = true;
    }
    if common.uncoupled {
        cfg.coupled = false;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    if let Some(n) = common.grid_n {
        cfg.grid_n = n;
    }
    if let Some(t) = common.t_min {
        cfg.t_range.0 = t;
    }
    if let Some(t) = common.t_max {
        cfg.t_range.1 = t;
    }
    if let Some(g) = common.gamma_min {
        cfg.gamma_range.0 = g;
    }
    if let Some(g) = common.gamma_max {
        cfg.gamma_range.1 = g;
    }
    if let Some(n) = common.points {
        cfg.points = n;
        cfg.t_points = n;
    }
    Ok(cfg)
}

fn run() -> anyhow::Result<i32> {
    // PHOTOCELL_THREADS caps sweep parallelism; unset means all cores.
    if let Ok(raw) = std::env::var("PHOTOCELL_THREADS") {
        let n: usize = raw
            .parse()
            .map_err(|_| anyhow::anyhow!("PHOTOCELL_THREADS must be an integer, got `{raw}`"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }

    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Steady(c) => (Command::Steady, c),
        Cmd::Evolve(c) => (Command::Evolve, c),
        Cmd::SweepRates(c) => (Command::SweepRates, c),
        Cmd::SweepTemp(c) => (Command::SweepTemp, c),
        Cmd::Iv(c) => (Command::Iv, c),
        Cmd::Audit {
            common,
            superop,
            t_end,
            rho0,
        } => {
            let points = common.points;
            (
                Command::Audit(AuditOptions {
                    superop,
                    t_end,
                    rho0,
                    points,
                }),
                common,
            )
        }
        Cmd::Validate => (Command::Validate, CommonArgs::default()),
    };
    let cfg = resolve(&common)?;
    dispatch(&command, &cfg)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
