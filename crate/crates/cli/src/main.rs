use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gasdr::ocp::ObjectiveKind;
use gasdr::report::{generate_fleet, write_ambient, write_fleet, AmbientProfile};
use gasdr_cli::{run, CliError, Mode, RunConfig, DEFAULT_GAMMAS, DEFAULT_LAMBDAS};

#[derive(Parser)]
#[command(name = "gasdr", version, about = "Natural-gas demand-response scenarios for residential heating")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Baseline,
    Decentralized,
    Centralized,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Mean,
    Max,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    TypicalDay,
    PolarVortex,
}

#[derive(Subcommand)]
enum Command {
    /// Run the baseline and a sweep of demand-response scenarios.
    Run {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// houses.csv
        #[arg(long)]
        houses: PathBuf,
        /// ambient.csv
        #[arg(long)]
        ambient: PathBuf,
        #[arg(long, default_value_t = 24.0)]
        horizon_hours: f64,
        #[arg(long, default_value_t = 1.0)]
        dt_state_min: f64,
        #[arg(long, default_value_t = 3.0)]
        dt_control_min: f64,
        #[arg(long, default_value_t = 3.0)]
        t_rh_hours: f64,
        /// Repeatable; defaults to 0.65, 0.7, ..., 1.
        #[arg(long)]
        lambda: Vec<f64>,
        /// Repeatable; defaults to 0.85, 0.9, 0.95.
        #[arg(long)]
        gamma: Vec<f64>,
        #[arg(long, value_enum, default_value = "max")]
        objective: ObjectiveArg,
        /// Per MILP solve.
        #[arg(long, default_value_t = 5400.0)]
        time_limit_s: f64,
        /// Per MILP solve; makes runs that stop early reproducible.
        #[arg(long)]
        node_limit: Option<usize>,
        #[arg(long, default_value_t = 1e-6)]
        gap_tol: f64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Peak mass flow D in kg/s instead of the baseline peak.
        #[arg(long)]
        peak_override: Option<f64>,
        /// Write zero computation times.
        #[arg(long)]
        omit_timing: bool,
    },
    /// Write a synthetic houses.csv.
    GenerateFleet {
        #[arg(long, default_value_t = 140)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write an hourly ambient.csv.
    GenerateAmbient {
        #[arg(long, value_enum)]
        profile: ProfileArg,
        #[arg(long, default_value_t = 24)]
        hours: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            mode,
            houses,
            ambient,
            horizon_hours,
            dt_state_min,
            dt_control_min,
            t_rh_hours,
            lambda,
            gamma,
            objective,
            time_limit_s,
            node_limit,
            gap_tol,
            out_dir,
            peak_override,
            omit_timing,
        } => {
            let mode = match mode {
                ModeArg::Baseline => Mode::Baseline,
                ModeArg::Decentralized => Mode::Decentralized,
                ModeArg::Centralized => Mode::Centralized,
            };
            let mut cfg = RunConfig::new(mode, houses, ambient, out_dir);
            cfg.horizon_hours = horizon_hours;
            cfg.dt_state_min = dt_state_min;
            cfg.dt_control_min = dt_control_min;
            cfg.t_rh_hours = t_rh_hours;
            cfg.lambdas = if lambda.is_empty() { DEFAULT_LAMBDAS.to_vec() } else { lambda };
            cfg.gammas = if gamma.is_empty() { DEFAULT_GAMMAS.to_vec() } else { gamma };
            cfg.objective = match objective {
                ObjectiveArg::Mean => ObjectiveKind::MeanDeviation,
                ObjectiveArg::Max => ObjectiveKind::MaxDeviation,
            };
            cfg.time_limit_s = Some(time_limit_s);
            cfg.node_limit = node_limit;
            cfg.gap_tol = gap_tol;
            cfg.peak_override = peak_override;
            cfg.omit_timing = omit_timing;
            let summary = run(&cfg)?;
            for f in &summary.files {
                println!("{}", f.display());
            }
            Ok(())
        }
        Command::GenerateFleet { count, out } => {
            if count == 0 {
                return Err(CliError {
                    code: CliError::VALIDATION,
                    kind: "validation",
                    message: "--count: must be positive".into(),
                });
            }
            write_fleet(&generate_fleet(count), &out)?;
            println!("{}", out.display());
            Ok(())
        }
        Command::GenerateAmbient { profile, hours, out } => {
            let profile = match profile {
                ProfileArg::TypicalDay => AmbientProfile::TypicalDay,
                ProfileArg::PolarVortex => AmbientProfile::PolarVortex,
            };
            write_ambient(&profile.samples(hours.max(1)), &out)?;
            println!("{}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { CliError::VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.code as u8)
        }
    }
}
