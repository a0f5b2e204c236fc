//! Current-practice thermostat: fire whenever the house is below its
//! set-point, decided once per control block.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ControlSchedule, Grid};
use crate::thermal::{
    compute_thermal_coefficients, step_unchecked, AmbientSeries, HouseParams, PhysicalConstants,
    Trajectory,
};

/// Heaviside thermostat rule with `H(0) = 0`: on strictly below the set-point.
pub fn baseline_control(theta: f64, setpoint: f64) -> bool {
    theta < setpoint
}

/// Result of the baseline simulation of one house.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRun {
    pub schedule: ControlSchedule,
    pub trajectory: Trajectory,
}

/// Simulates every house independently under the thermostat rule.
pub fn simulate_baseline(
    fleet: &[HouseParams],
    constants: &PhysicalConstants,
    ambient: &AmbientSeries,
    grid: &Grid,
) -> Result<Vec<BaselineRun>> {
    let amb = grid.ambient_samples(ambient)?;
    fleet
        .par_iter()
        .map(|house| {
            house.validate()?;
            let coeff = compute_thermal_coefficients(constants, house)?;
            coeff.check_stability(grid.dt_state())?;
            let dt = grid.dt_state();
            let mut schedule = Vec::with_capacity(grid.blocks());
            let mut temps = Vec::with_capacity(grid.n() + 1);
            let mut theta = house.theta0;
            temps.push(theta);
            for b in 0..grid.blocks() {
                let on = baseline_control(theta, house.setpoint);
                schedule.push(on);
                let q = if on { 1.0 } else { 0.0 };
                for s in 0..grid.steps_per_block() {
                    let k = b * grid.steps_per_block() + s;
                    theta = step_unchecked(theta, amb[k], &coeff, house.burn_rate, q, dt);
                    temps.push(theta);
                }
            }
            Ok(BaselineRun {
                schedule: ControlSchedule::new(schedule),
                trajectory: Trajectory {
                    t0: grid.t0(),
                    dt_state: dt,
                    temps,
                },
            })
        })
        .collect()
}

/// Aggregate gas mass flow, one sample per state step (at its left instant).
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateDemand {
    pub t0: f64,
    pub dt_state: f64,
    pub samples: Vec<f64>,
}

impl AggregateDemand {
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt_state
    }
}

/// Σ_h Q_h q_h(t_k), with block decisions expanded onto the state grid.
pub fn aggregate_demand(
    fleet: &[HouseParams],
    schedules: &[ControlSchedule],
    grid: &Grid,
) -> Result<AggregateDemand> {
    if fleet.len() != schedules.len() {
        return Err(Error::Shape(format!(
            "{} houses but {} schedules",
            fleet.len(),
            schedules.len()
        )));
    }
    for s in schedules {
        s.check_grid(grid)?;
    }
    let per_block: Vec<f64> = (0..grid.blocks())
        .map(|b| {
            fleet
                .iter()
                .zip(schedules)
                .map(|(h, s)| h.burn_rate * s.q(b))
                .sum()
        })
        .collect();
    let samples = (0..grid.n())
        .map(|k| per_block[grid.block_of_step(k)])
        .collect();
    Ok(AggregateDemand {
        t0: grid.t0(),
        dt_state: grid.dt_state(),
        samples,
    })
}

/// Maximum sample of a demand series (the baseline peak `D`).
pub fn peak_demand(demand: &AggregateDemand) -> Result<f64> {
    demand
        .samples
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or_else(|| Error::validation("demand", "series is empty"))
}
