//! Scenario orchestration behind the `gasdr` binary.
//!
//! Every run starts with a baseline pass (needed for savings and for the
//! peak `D`), then sweeps the requested λ or γ values in the order given.
//! Files written to the output directory:
//!
//! * `report.csv`: baseline row, then one row per scenario
//! * `boxplot.csv`: per-house deviations for the same scenarios
//! * `demand.csv`: baseline aggregate demand
//! * `demand_<scenario>.csv`: aggregate demand of each scenario
//! * `savings.csv`: gas saved per scenario and its 10000-house projection

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use gasdr::baseline::{aggregate_demand, peak_demand, simulate_baseline};
use gasdr::milp::SolveOptions;
use gasdr::ocp::{compute_gas, compute_deviation, ObjectiveKind, ProblemKind, Type2Config};
use gasdr::report::{
    emit_boxplot_data, emit_demand_series, emit_run_report, emit_savings, load_ambient,
    load_fleet, savings_projection, RunReport, SavingsRow, Scenario, PROJECTION_TARGET,
};
use gasdr::rh::{plan_windows, run_receding_horizon};
use gasdr::thermal::{compute_thermal_coefficients, PhysicalConstants, ThermalCoefficients};
use gasdr::{Error, Grid};
use log::info;

/// Allowed excess over `γ D` when re-checking emitted schedules, kg/s.
pub const PEAK_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Baseline,
    Decentralized,
    Centralized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub houses: PathBuf,
    pub ambient: PathBuf,
    pub horizon_hours: f64,
    pub dt_state_min: f64,
    pub dt_control_min: f64,
    pub t_rh_hours: f64,
    pub lambdas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub objective: ObjectiveKind,
    /// Per MILP solve (one window, or one house-window when decentralized).
    pub time_limit_s: Option<f64>,
    pub node_limit: Option<usize>,
    pub gap_tol: f64,
    pub out_dir: PathBuf,
    pub peak_override: Option<f64>,
    /// Write `time_s = 0` so repeated runs produce identical files.
    pub omit_timing: bool,
}

pub const DEFAULT_LAMBDAS: [f64; 8] = [0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1.0];
pub const DEFAULT_GAMMAS: [f64; 3] = [0.85, 0.9, 0.95];

impl RunConfig {
    /// Default study settings for the given mode and files.
    pub fn new(mode: Mode, houses: PathBuf, ambient: PathBuf, out_dir: PathBuf) -> Self {
        Self {
            mode,
            houses,
            ambient,
            horizon_hours: 24.0,
            dt_state_min: 1.0,
            dt_control_min: 3.0,
            t_rh_hours: 3.0,
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            gammas: DEFAULT_GAMMAS.to_vec(),
            objective: ObjectiveKind::MaxDeviation,
            time_limit_s: Some(5400.0),
            node_limit: None,
            gap_tol: 1e-6,
            out_dir,
            peak_override: None,
            omit_timing: false,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |flag: &str, reason: String| Err(CliError::flag(flag, reason));
        for (flag, v) in [
            ("--horizon-hours", self.horizon_hours),
            ("--dt-state-min", self.dt_state_min),
            ("--dt-control-min", self.dt_control_min),
            ("--t-rh-hours", self.t_rh_hours),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(flag, format!("{v} is not a positive number"));
            }
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return bad("--lambda", format!("{l} is outside [0, 1]"));
        }
        if let Some(g) = self.gammas.iter().find(|g| !(**g > 0.0 && **g <= 1.0)) {
            return bad("--gamma", format!("{g} is outside (0, 1]"));
        }
        if self.mode == Mode::Decentralized && self.lambdas.is_empty() {
            return bad("--lambda", "decentralized mode needs at least one value".into());
        }
        if self.mode == Mode::Centralized && self.gammas.is_empty() {
            return bad("--gamma", "centralized mode needs at least one value".into());
        }
        if let Some(t) = self.time_limit_s {
            if !(t.is_finite() && t > 0.0) {
                return bad("--time-limit-s", format!("{t} is not a positive number"));
            }
        }
        if !(self.gap_tol.is_finite() && self.gap_tol >= 0.0) {
            return bad("--gap-tol", format!("{} is not a non-negative number", self.gap_tol));
        }
        if let Some(p) = self.peak_override {
            if !(p.is_finite() && p > 0.0) {
                return bad("--peak-override", format!("{p} is not a positive number"));
            }
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let g = Grid::new(
            self.dt_state_min * 60.0,
            self.dt_control_min * 60.0,
            self.horizon_hours * 3600.0,
        )
        .map_err(|e| CliError::flag("--dt-state-min/--dt-control-min/--horizon-hours", e.to_string()))?;
        plan_windows(g.horizon(), self.t_rh_hours * 3600.0, &g)
            .map_err(|e| CliError::flag("--t-rh-hours", e.to_string()))?;
        Ok(g)
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            gap_tol: self.gap_tol,
            time_limit: self.time_limit_s.map(Duration::from_secs_f64),
            node_limit: self.node_limit,
        }
    }
}

/// Error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub const VALIDATION: i32 = 2;
    pub const IO: i32 = 3;
    pub const CONSISTENCY: i32 = 4;

    fn flag(flag: &str, reason: String) -> Self {
        Self {
            code: Self::VALIDATION,
            kind: "validation",
            message: format!("{flag}: {reason}"),
        }
    }

    fn consistency(message: String) -> Self {
        Self {
            code: Self::CONSISTENCY,
            kind: "consistency",
            message,
        }
    }

    /// One `key=value` line for stderr.
    pub fn machine_line(&self) -> String {
        format!("error code={} kind={} message={:?}", self.code, self.kind, self.message)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Io { .. } => (Self::IO, "io"),
            Error::Load { .. } => (Self::VALIDATION, "load"),
            Error::Validation { .. } | Error::OutOfRange { .. } | Error::Config(_) | Error::Shape(_) => {
                (Self::VALIDATION, "validation")
            }
            Error::Solver(_) => (Self::CONSISTENCY, "solver"),
            Error::Consistency(_) => (Self::CONSISTENCY, "consistency"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub reports: Vec<RunReport>,
    /// Baseline peak, or the override when given.
    pub peak: f64,
    pub files: Vec<PathBuf>,
}

fn elapsed(cfg: &RunConfig, t: Instant) -> f64 {
    if cfg.omit_timing {
        0.0
    } else {
        t.elapsed().as_secs_f64()
    }
}

fn file_safe(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let fleet = load_fleet(&cfg.houses)?;
    let ambient = load_ambient(&cfg.ambient)?;
    let constants = PhysicalConstants::default();
    let coeffs = fleet
        .iter()
        .map(|h| {
            let c = compute_thermal_coefficients(&constants, h)?;
            c.check_stability(grid.dt_state())?;
            Ok(c)
        })
        .collect::<gasdr::Result<Vec<ThermalCoefficients>>>()?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|source| {
        CliError::from(Error::Io {
            path: cfg.out_dir.clone(),
            source,
        })
    })?;
    let out = |name: &str| cfg.out_dir.join(name);
    let mut files = Vec::new();

    info!("baseline: {} houses over {} h", fleet.len(), cfg.horizon_hours);
    let t = Instant::now();
    let base = simulate_baseline(&fleet, &constants, &ambient, &grid)?;
    let base_schedules: Vec<_> = base.iter().map(|r| r.schedule.clone()).collect();
    let base_demand = aggregate_demand(&fleet, &base_schedules, &grid)?;
    let base_deltas = fleet
        .iter()
        .zip(&base)
        .map(|(h, r)| compute_deviation(&r.trajectory, h.setpoint))
        .collect::<gasdr::Result<Vec<f64>>>()?;
    let base_gas = fleet
        .iter()
        .zip(&base_schedules)
        .map(|(h, s)| compute_gas(s, h.burn_rate, &grid))
        .collect::<gasdr::Result<Vec<f64>>>()?;
    let base_label = Scenario::Baseline.to_string();
    let base_report = RunReport::new(&base_label, &base_deltas, &base_gas, elapsed(cfg, t), 0.0)?;
    let baseline_total = base_report.total_gas;
    let peak = match cfg.peak_override {
        Some(p) => p,
        None => peak_demand(&base_demand)?,
    };
    emit(&mut files, out("demand.csv"), |p| emit_demand_series(&base_demand, p))?;

    let ids: Vec<String> = fleet.iter().map(|h| h.id.clone()).collect();
    let with_ids = |deltas: &[f64]| -> Vec<(String, f64)> {
        ids.iter().cloned().zip(deltas.iter().copied()).collect()
    };
    let mut reports = vec![base_report];
    let mut boxplot = vec![(base_label, with_ids(&base_deltas))];
    let mut savings = Vec::new();

    let scenarios: Vec<(Scenario, ProblemKind)> = match cfg.mode {
        Mode::Baseline => Vec::new(),
        Mode::Decentralized => cfg
            .lambdas
            .iter()
            .map(|&lambda| {
                (
                    Scenario::Decentralized {
                        lambda,
                        t_rh_hours: cfg.t_rh_hours,
                    },
                    ProblemKind::Decentralized { lambda },
                )
            })
            .collect(),
        Mode::Centralized => cfg
            .gammas
            .iter()
            .map(|&gamma| {
                (
                    Scenario::Centralized {
                        gamma,
                        objective: cfg.objective,
                        t_rh_hours: cfg.t_rh_hours,
                    },
                    ProblemKind::Centralized(Type2Config {
                        gamma,
                        peak,
                        objective: cfg.objective,
                    }),
                )
            })
            .collect(),
    };

    let plan = plan_windows(grid.horizon(), cfg.t_rh_hours * 3600.0, &grid)?;
    let opts = cfg.solve_options();
    for (scenario, kind) in scenarios {
        let label = scenario.to_string();
        info!("{label}: {} windows", plan.windows.len());
        let t = Instant::now();
        let rh = run_receding_horizon(&kind, &fleet, &coeffs, &ambient, &grid, &plan, &opts)?;
        let time_s = elapsed(cfg, t);
        let res = &rh.outcome;
        let demand = aggregate_demand(&fleet, &res.schedules, &grid)?;
        if let ProblemKind::Centralized(c) = &kind {
            let cap = c.cap();
            if let Some((k, v)) = demand
                .samples
                .iter()
                .enumerate()
                .find(|(_, &v)| v > cap + PEAK_CHECK_TOL)
            {
                return Err(CliError::consistency(format!(
                    "{label}: demand {v} kg/s at step {k} exceeds the cap {cap} kg/s"
                )));
            }
        }
        let report = RunReport::new(&label, &res.deltas, &res.gas, time_s, 100.0 * rh.average_gap())?;
        info!(
            "{label}: mean deviation {:.3} F, gas {:.4} kg, avg gap {:.2} %",
            report.stats.mean, report.total_gas, report.avg_gap_pct
        );
        savings.push(SavingsRow {
            scenario: label.clone(),
            baseline_gas: baseline_total,
            dr_gas: report.total_gas,
            saving_per_house: (baseline_total - report.total_gas) / fleet.len() as f64,
            projected_saving: savings_projection(
                baseline_total,
                report.total_gas,
                fleet.len(),
                PROJECTION_TARGET,
            )?,
            target_houses: PROJECTION_TARGET,
        });
        emit(&mut files, out(&format!("demand_{}.csv", file_safe(&label))), |p| {
            emit_demand_series(&demand, p)
        })?;
        boxplot.push((label, with_ids(&res.deltas)));
        reports.push(report);
    }

    emit(&mut files, out("report.csv"), |p| emit_run_report(&reports, p))?;
    emit(&mut files, out("boxplot.csv"), |p| emit_boxplot_data(&boxplot, p))?;
    if cfg.mode != Mode::Baseline {
        emit(&mut files, out("savings.csv"), |p| emit_savings(&savings, p))?;
    }
    Ok(RunSummary {
        reports,
        peak,
        files,
    })
}

fn emit(
    files: &mut Vec<PathBuf>,
    path: PathBuf,
    f: impl FnOnce(&Path) -> gasdr::Result<()>,
) -> Result<(), CliError> {
    f(&path)?;
    files.push(path);
    Ok(())
}
