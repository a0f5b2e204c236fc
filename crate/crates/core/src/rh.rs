//! Receding-horizon driver: consecutive, non-overlapping windows whose initial
//! temperatures are the final re-simulated temperatures of the previous window.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ControlSchedule, Grid};
use crate::milp::{solve_milp_with_start, SolveOptions, SolveStatus};
use crate::ocp::{
    build_centralized, build_decentralized, compute_deviation, compute_gas, extract_outcome,
    thermostat_schedules, ProblemKind, SolveOutcome, Type1Config,
};
use crate::thermal::{AmbientSeries, HouseParams, ThermalCoefficients, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct RhPlan {
    /// `(start, end)` offsets in seconds, contiguous from 0 to the horizon.
    pub windows: Vec<(f64, f64)>,
    pub t_rh: f64,
}

/// Splits `[0, horizon]` into windows of `t_rh` with a shorter final
/// remainder when the horizon is not a multiple.
pub fn plan_windows(horizon: f64, t_rh: f64, grid: &Grid) -> Result<RhPlan> {
    if !(t_rh.is_finite() && t_rh > 0.0) {
        return Err(Error::validation("t_rh", format!("{t_rh} is not positive")));
    }
    let blocks_per_window = t_rh / grid.dt_control();
    if (blocks_per_window - blocks_per_window.round()).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "t_rh = {t_rh} s is not a multiple of dt_control = {} s",
            grid.dt_control()
        )));
    }
    if (horizon - grid.horizon()).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "plan horizon {horizon} s differs from grid horizon {} s",
            grid.horizon()
        )));
    }
    let blocks_per_window = blocks_per_window.round() as usize;
    let total = grid.blocks();
    let mut windows = Vec::new();
    let mut b = 0;
    while b < total {
        let e = (b + blocks_per_window).min(total);
        windows.push((
            grid.t0() + b as f64 * grid.dt_control(),
            grid.t0() + e as f64 * grid.dt_control(),
        ));
        b = e;
    }
    Ok(RhPlan { windows, t_rh })
}

/// Solver statistics of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    pub start: f64,
    pub end: f64,
    /// One entry per MILP solved in the window (per house when decentralized).
    pub statuses: Vec<SolveStatus>,
    pub gaps: Vec<f64>,
    pub nodes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhOutcome {
    /// Full-horizon schedules and trajectories; `objective` is recomputed from
    /// the stitched metrics, `gap` is the mean window gap, `best_bound` is NaN.
    pub outcome: SolveOutcome,
    pub windows: Vec<WindowRecord>,
}

impl RhOutcome {
    pub fn average_gap(&self) -> f64 {
        let gaps: Vec<f64> = self.windows.iter().flat_map(|w| w.gaps.iter().copied()).collect();
        if gaps.is_empty() {
            0.0
        } else {
            gaps.iter().sum::<f64>() / gaps.len() as f64
        }
    }
}

struct WindowResult {
    schedules: Vec<ControlSchedule>,
    trajectories: Vec<Trajectory>,
    statuses: Vec<SolveStatus>,
    gaps: Vec<f64>,
    nodes: Vec<usize>,
}

fn check_solved(status: SolveStatus, what: &str) -> Result<()> {
    if status.has_incumbent() {
        Ok(())
    } else {
        Err(Error::Solver(format!("{what}: solver returned {status:?}")))
    }
}

fn solve_window(
    kind: &ProblemKind,
    fleet: &[HouseParams],
    coeffs: &[ThermalCoefficients],
    ambient: &AmbientSeries,
    grid: &Grid,
    opts: &SolveOptions,
) -> Result<WindowResult> {
    match kind {
        ProblemKind::Decentralized { lambda } => {
            let per_house = fleet
                .par_iter()
                .zip(coeffs)
                .map(|(h, c)| {
                    let cfg = Type1Config::for_house(*lambda, h);
                    let ocp = build_decentralized(h, c, ambient, &cfg, grid)?;
                    let one = std::slice::from_ref(h);
                    let start = thermostat_schedules(one, &[*c], ambient, grid, None)?;
                    let start = ocp.assignment(&start, one, &[*c], ambient)?;
                    let sol = solve_milp_with_start(&ocp.model, opts, Some(&start))?;
                    check_solved(sol.status, &format!("house {} window at {} s", h.id, grid.t0()))?;
                    let out = extract_outcome(&ocp, &sol, std::slice::from_ref(h), &[*c], ambient)?;
                    Ok((out, sol.nodes))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut r = WindowResult {
                schedules: Vec::new(),
                trajectories: Vec::new(),
                statuses: Vec::new(),
                gaps: Vec::new(),
                nodes: Vec::new(),
            };
            for (mut out, nodes) in per_house {
                r.schedules.push(out.schedules.pop().expect("one house"));
                r.trajectories.push(out.trajectories.pop().expect("one house"));
                r.statuses.push(out.status);
                r.gaps.push(out.gap);
                r.nodes.push(nodes);
            }
            Ok(r)
        }
        ProblemKind::Centralized(cfg) => {
            let ocp = build_centralized(fleet, coeffs, ambient, cfg, grid)?;
            let start = thermostat_schedules(fleet, coeffs, ambient, grid, Some(cfg.cap()))?;
            let start = ocp.assignment(&start, fleet, coeffs, ambient)?;
            let sol = solve_milp_with_start(&ocp.model, opts, Some(&start))?;
            check_solved(sol.status, &format!("centralized window at {} s", grid.t0()))?;
            let out = extract_outcome(&ocp, &sol, fleet, coeffs, ambient)?;
            Ok(WindowResult {
                schedules: out.schedules,
                trajectories: out.trajectories,
                statuses: vec![out.status],
                gaps: vec![out.gap],
                nodes: vec![sol.nodes],
            })
        }
    }
}

/// Solves the windows of `plan` in order and stitches the results.
pub fn run_receding_horizon(
    kind: &ProblemKind,
    fleet: &[HouseParams],
    coeffs: &[ThermalCoefficients],
    ambient: &AmbientSeries,
    grid: &Grid,
    plan: &RhPlan,
    opts: &SolveOptions,
) -> Result<RhOutcome> {
    if fleet.len() != coeffs.len() {
        return Err(Error::Shape(format!(
            "{} houses but {} coefficient sets",
            fleet.len(),
            coeffs.len()
        )));
    }
    if fleet.is_empty() {
        return Err(Error::validation("fleet", "is empty"));
    }
    let mut current: Vec<HouseParams> = fleet.to_vec();
    let mut schedules: Vec<ControlSchedule> = vec![ControlSchedule::default(); fleet.len()];
    let mut trajectories: Option<Vec<Trajectory>> = None;
    let mut records = Vec::with_capacity(plan.windows.len());

    for &(start, end) in &plan.windows {
        let wgrid = grid.window(start, end)?;
        let res = solve_window(kind, &current, coeffs, ambient, &wgrid, opts)?;
        for (i, traj) in res.trajectories.iter().enumerate() {
            schedules[i].extend(&res.schedules[i]);
            current[i].theta0 = traj.last();
        }
        match trajectories.as_mut() {
            None => trajectories = Some(res.trajectories),
            Some(all) => {
                for (acc, next) in all.iter_mut().zip(&res.trajectories) {
                    acc.append(next)?;
                }
            }
        }
        records.push(WindowRecord {
            start,
            end,
            statuses: res.statuses,
            gaps: res.gaps,
            nodes: res.nodes,
        });
    }
    let trajectories = trajectories.unwrap_or_else(|| {
        fleet
            .iter()
            .map(|h| Trajectory {
                t0: grid.t0(),
                dt_state: grid.dt_state(),
                temps: vec![h.theta0],
            })
            .collect()
    });

    let mut deltas = Vec::with_capacity(fleet.len());
    let mut gas = Vec::with_capacity(fleet.len());
    for ((h, s), t) in fleet.iter().zip(&schedules).zip(&trajectories) {
        s.check_grid(grid)?;
        deltas.push(compute_deviation(t, h.setpoint)?);
        gas.push(if s.is_empty() { 0.0 } else { compute_gas(s, h.burn_rate, grid)? });
    }
    let status = if records
        .iter()
        .flat_map(|r| &r.statuses)
        .all(|&s| s == SolveStatus::Optimal)
    {
        SolveStatus::Optimal
    } else {
        SolveStatus::FeasibleTimeLimit
    };
    let mut out = RhOutcome {
        outcome: SolveOutcome {
            objective: kind.objective(&deltas, &gas),
            schedules,
            trajectories,
            deltas,
            gas,
            best_bound: f64::NAN,
            gap: 0.0,
            status,
        },
        windows: records,
    };
    out.outcome.gap = out.average_gap();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plans() {
        let h = 3600.0;
        let g = Grid::new(60.0, 180.0, 24.0 * h).unwrap();
        let p = plan_windows(24.0 * h, 3.0 * h, &g).unwrap();
        assert_eq!(p.windows.len(), 8);
        assert!(p.windows.iter().all(|(s, e)| e - s == 3.0 * h));
        assert_eq!(plan_windows(24.0 * h, h, &g).unwrap().windows.len(), 24);

        let g = Grid::new(60.0, 180.0, 5.0 * h).unwrap();
        let p = plan_windows(5.0 * h, 3.0 * h, &g).unwrap();
        assert_eq!(p.windows, vec![(0.0, 3.0 * h), (3.0 * h, 5.0 * h)]);

        assert!(matches!(plan_windows(5.0 * h, 100.0, &g), Err(Error::Config(_))));
        assert!(plan_windows(5.0 * h, 0.0, &g).is_err());
    }

    #[test]
    fn plan_partitions_horizon() {
        let g = Grid::new(60.0, 180.0, 7.0 * 3600.0).unwrap();
        for t_rh in [180.0, 1800.0, 3600.0, 3.0 * 3600.0, 7.0 * 3600.0, 10.0 * 3600.0] {
            let p = plan_windows(g.horizon(), t_rh, &g).unwrap();
            assert_eq!(p.windows[0].0, 0.0);
            assert_eq!(p.windows.last().unwrap().1, g.horizon());
            assert!(p.windows.windows(2).all(|w| w[0].1 == w[1].0));
            let n = p.windows.len();
            assert!(p.windows[..n - 1].iter().all(|(s, e)| e - s == t_rh));
        }
    }
}
