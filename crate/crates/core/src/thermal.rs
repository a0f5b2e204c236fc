//! Single-zone house thermodynamics.
//!
//! Each house is a first-order RC model
//!
//! ```text
//! dθ/dt = -α (θ - Θ(t)) + β Q q(t),    θ(0) = θ⁰,    q(t) ∈ {0, 1}
//! ```
//!
//! with α = κA / (C ρ V) and β = E / (C ρ V). The simulator integrates it with
//! the explicit forward-difference rule, the same linear recursion that the
//! optimal-control models use as equality constraints.

use log::warn;

use crate::error::{Error, Result};
use crate::grid::{ControlSchedule, Grid};

/// Lowest and highest indoor temperatures accepted as plausible (K).
pub const SANE_TEMP_RANGE: (f64, f64) = (230.0, 330.0);

/// Furnace burn-rate band used for generated fleets (kg/s).
pub const FLEET_BURN_RATE_RANGE: (f64, f64) = (3e-5, 12e-5);

/// Air and fuel properties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Isochoric specific heat of air, J/(kg K).
    pub ca: f64,
    /// Air density, kg/m³.
    pub rho_a: f64,
    /// Specific heating value of natural gas, J/kg.
    pub eg: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            ca: 0.718e3,
            rho_a: 1.2754,
            eg: 45938e3,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        positive("ca", self.ca)?;
        positive("rho_a", self.rho_a)?;
        positive("eg", self.eg)
    }
}

/// Wall heat-transfer coefficient shared by every house in the case studies, W/(m² K).
pub const DEFAULT_KAPPA: f64 = 0.11;

/// Physical description of one house.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseParams {
    pub id: String,
    pub category: String,
    /// m³
    pub volume: f64,
    /// Wall surface exposed to the outside, m².
    pub wall_area: f64,
    /// W/(m² K)
    pub kappa: f64,
    /// Furnace fuel flow when on, kg/s.
    pub burn_rate: f64,
    /// Initial indoor temperature, K.
    pub theta0: f64,
    /// Thermostat set-point, K.
    pub setpoint: f64,
}

impl HouseParams {
    /// Checks the hard invariants. A burn rate outside the fleet band is only
    /// logged.
    pub fn validate(&self) -> Result<()> {
        positive("volume", self.volume)?;
        positive("wall_area", self.wall_area)?;
        positive("kappa", self.kappa)?;
        positive("burn_rate", self.burn_rate)?;
        sane_temp("theta0", self.theta0)?;
        sane_temp("setpoint", self.setpoint)?;
        if !self.burn_rate_in_fleet_band() {
            warn!(
                "house {}: burn rate {} kg/s outside the fleet band [{}, {}]",
                self.id, self.burn_rate, FLEET_BURN_RATE_RANGE.0, FLEET_BURN_RATE_RANGE.1
            );
        }
        Ok(())
    }

    pub fn burn_rate_in_fleet_band(&self) -> bool {
        (FLEET_BURN_RATE_RANGE.0..=FLEET_BURN_RATE_RANGE.1).contains(&self.burn_rate)
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("{v} is not strictly positive")))
    }
}

fn sane_temp(field: &str, v: f64) -> Result<()> {
    let (lo, hi) = SANE_TEMP_RANGE;
    if (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("{v} K is outside the sanity band [{lo}, {hi}] K"),
        ))
    }
}

/// Loss and gain coefficients of one house.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalCoefficients {
    /// Loss rate to ambient, 1/s.
    pub alpha: f64,
    /// Temperature gain per kilogram of fuel, K/kg.
    pub beta: f64,
}

impl ThermalCoefficients {
    /// The forward scheme is only used when `alpha * dt < 1`.
    pub fn check_stability(&self, dt: f64) -> Result<()> {
        if self.alpha * dt < 1.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "explicit step unstable: alpha * dt = {} >= 1 (alpha = {} 1/s, dt = {} s)",
                self.alpha * dt,
                self.alpha,
                dt
            )))
        }
    }
}

pub fn compute_thermal_coefficients(
    constants: &PhysicalConstants,
    house: &HouseParams,
) -> Result<ThermalCoefficients> {
    constants.validate()?;
    positive("volume", house.volume)?;
    positive("wall_area", house.wall_area)?;
    positive("kappa", house.kappa)?;
    let capacity = constants.ca * constants.rho_a * house.volume;
    Ok(ThermalCoefficients {
        alpha: house.kappa * house.wall_area / capacity,
        beta: constants.eg / capacity,
    })
}

/// Time-stamped outside-temperature forecast, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientSeries {
    samples: Vec<(f64, f64)>,
}

impl AmbientSeries {
    /// `samples` are `(offset s, temperature K)`; offsets must start at zero
    /// and increase strictly.
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        let Some(&(first, _)) = samples.first() else {
            return Err(Error::validation("ambient", "series is empty"));
        };
        if first != 0.0 {
            return Err(Error::validation(
                "ambient",
                format!("first offset must be 0, got {first}"),
            ));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::validation(
                    "ambient",
                    format!("offsets not strictly increasing at sample {}", i + 1),
                ));
            }
        }
        if let Some((t, v)) = samples.iter().find(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::validation(
                "ambient",
                format!("non-finite sample ({t}, {v})"),
            ));
        }
        Ok(Self { samples })
    }

    /// Constant temperature over `[0, horizon]`.
    pub fn constant(temp: f64, horizon: f64) -> Self {
        let samples = if horizon > 0.0 {
            vec![(0.0, temp), (horizon, temp)]
        } else {
            vec![(0.0, temp)]
        };
        Self { samples }
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Last covered offset.
    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].0
    }

    pub fn min_temp(&self) -> f64 {
        self.samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min)
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        let end = self.end();
        if !(0.0..=end).contains(&t) {
            return Err(Error::OutOfRange { t, start: 0.0, end });
        }
        // index of the first sample strictly after t
        let idx = self.samples.partition_point(|&(ts, _)| ts <= t);
        if idx == 0 {
            return Ok(self.samples[0].1);
        }
        let (t_lo, v_lo) = self.samples[idx - 1];
        if t_lo == t || idx == self.samples.len() {
            return Ok(v_lo);
        }
        let (t_hi, v_hi) = self.samples[idx];
        let w = (t - t_lo) / (t_hi - t_lo);
        Ok(v_lo + w * (v_hi - v_lo))
    }
}

/// One forward-difference step of the heating ODE.
pub fn euler_step(
    theta: f64,
    theta_amb: f64,
    coeff: &ThermalCoefficients,
    burn_rate: f64,
    q: f64,
    dt: f64,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::validation("dt", "must be positive"));
    }
    if q != 0.0 && q != 1.0 {
        return Err(Error::validation("q", format!("{q} is not binary")));
    }
    coeff.check_stability(dt)?;
    Ok(step_unchecked(theta, theta_amb, coeff, burn_rate, q, dt))
}

#[inline]
pub(crate) fn step_unchecked(
    theta: f64,
    theta_amb: f64,
    coeff: &ThermalCoefficients,
    burn_rate: f64,
    q: f64,
    dt: f64,
) -> f64 {
    theta + dt * (-coeff.alpha * (theta - theta_amb) + coeff.beta * burn_rate * q)
}

/// Indoor temperature at every state instant of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub dt_state: f64,
    pub temps: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> f64 {
        self.temps[self.temps.len() - 1]
    }

    /// Appends a trajectory that starts where this one ends, dropping the
    /// duplicated boundary sample.
    pub fn append(&mut self, next: &Trajectory) -> Result<()> {
        if next.temps.first() != self.temps.last() {
            return Err(Error::Consistency(format!(
                "trajectory discontinuity at t = {} s: {:?} vs {:?}",
                next.t0,
                self.temps.last(),
                next.temps.first()
            )));
        }
        self.temps.extend_from_slice(&next.temps[1..]);
        Ok(())
    }
}

pub fn simulate_trajectory(
    house: &HouseParams,
    coeff: &ThermalCoefficients,
    ambient: &AmbientSeries,
    schedule: &ControlSchedule,
    grid: &Grid,
) -> Result<Trajectory> {
    simulate_from(house.theta0, house.burn_rate, coeff, ambient, schedule, grid)
}

/// Same as [`simulate_trajectory`] with an explicit initial temperature.
pub fn simulate_from(
    theta0: f64,
    burn_rate: f64,
    coeff: &ThermalCoefficients,
    ambient: &AmbientSeries,
    schedule: &ControlSchedule,
    grid: &Grid,
) -> Result<Trajectory> {
    schedule.check_grid(grid)?;
    coeff.check_stability(grid.dt_state())?;
    let amb = grid.ambient_samples(ambient)?;
    let dt = grid.dt_state();
    let mut temps = Vec::with_capacity(grid.n() + 1);
    let mut theta = theta0;
    temps.push(theta);
    for k in 0..grid.n() {
        let q = schedule.q(grid.block_of_step(k));
        theta = step_unchecked(theta, amb[k], coeff, burn_rate, q, dt);
        temps.push(theta);
    }
    Ok(Trajectory {
        t0: grid.t0(),
        dt_state: dt,
        temps,
    })
}

pub fn fahrenheit_to_kelvin(f: f64) -> f64 {
    (f - 32.0) * 5.0 / 9.0 + 273.15
}

pub fn kelvin_to_fahrenheit(k: f64) -> f64 {
    (k - 273.15) * 9.0 / 5.0 + 32.0
}

/// Converts a temperature difference from K to °F.
pub fn kelvin_dev_to_fahrenheit_dev(dk: f64) -> f64 {
    dk * 9.0 / 5.0
}
