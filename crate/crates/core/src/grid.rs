//! Time discretization shared by the simulator and the optimal-control models.

use crate::error::{Error, Result};
use crate::thermal::AmbientSeries;

const ALIGN_TOL: f64 = 1e-9;

/// Equispaced state grid with coarser control blocks.
///
/// States live at `t0 + k * dt_state` for `k = 0..=n`; a furnace decision is
/// held for `steps_per_block` consecutive state steps. `t0` is the absolute
/// offset of the grid from the start of the ambient forecast, so a
/// receding-horizon window is just a grid with a later start.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    t0: f64,
    dt_state: f64,
    dt_control: f64,
    horizon: f64,
    n: usize,
    steps_per_block: usize,
}

fn integral_ratio(num: f64, den: f64) -> Option<usize> {
    let r = num / den;
    let rounded = r.round();
    if (r - rounded).abs() <= ALIGN_TOL * rounded.max(1.0) && rounded >= 0.0 {
        Some(rounded as usize)
    } else {
        None
    }
}

impl Grid {
    /// Grid starting at offset zero. A zero horizon is allowed and yields a
    /// grid with no steps.
    pub fn new(dt_state: f64, dt_control: f64, horizon: f64) -> Result<Self> {
        if !(dt_state.is_finite() && dt_state > 0.0) {
            return Err(Error::validation("dt_state", "must be positive and finite"));
        }
        if !(dt_control.is_finite() && dt_control > 0.0) {
            return Err(Error::validation("dt_control", "must be positive and finite"));
        }
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::validation("horizon", "must be non-negative and finite"));
        }
        let steps_per_block = match integral_ratio(dt_control, dt_state) {
            Some(s) if s >= 1 => s,
            _ => {
                return Err(Error::Config(format!(
                    "dt_control = {dt_control} s is not a positive integer multiple of dt_state = {dt_state} s"
                )))
            }
        };
        let blocks = integral_ratio(horizon, dt_control).ok_or_else(|| {
            Error::Config(format!(
                "horizon = {horizon} s is not an integer multiple of dt_control = {dt_control} s"
            ))
        })?;
        Ok(Self {
            t0: 0.0,
            dt_state,
            dt_control,
            horizon,
            n: blocks * steps_per_block,
            steps_per_block,
        })
    }

    /// The sub-grid covering `[start, end]` (absolute offsets, seconds), with
    /// the same step sizes. Both ends must sit on control-block boundaries.
    pub fn window(&self, start: f64, end: f64) -> Result<Grid> {
        if !(start >= self.t0 && end <= self.end() + ALIGN_TOL && start <= end) {
            return Err(Error::Config(format!(
                "window [{start}, {end}] s is not inside grid [{}, {}] s",
                self.t0,
                self.end()
            )));
        }
        if integral_ratio(start - self.t0, self.dt_control).is_none() {
            return Err(Error::Config(format!(
                "window start {start} s is not aligned to dt_control = {} s",
                self.dt_control
            )));
        }
        let mut g = Grid::new(self.dt_state, self.dt_control, end - start)?;
        g.t0 = start;
        Ok(g)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt_state(&self) -> f64 {
        self.dt_state
    }

    pub fn dt_control(&self) -> f64 {
        self.dt_control
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.horizon
    }

    /// Number of state steps; the grid has `n + 1` state instants.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps_per_block(&self) -> usize {
        self.steps_per_block
    }

    /// Number of control blocks.
    pub fn blocks(&self) -> usize {
        self.n / self.steps_per_block
    }

    /// Absolute time of state instant `k`.
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt_state
    }

    /// Control block governing the step from instant `k` to `k + 1`.
    pub fn block_of_step(&self, k: usize) -> usize {
        k / self.steps_per_block
    }

    /// Ambient temperature at every state instant `k = 0..=n`.
    pub fn ambient_samples(&self, ambient: &AmbientSeries) -> Result<Vec<f64>> {
        (0..=self.n).map(|k| ambient.at(self.time(k))).collect()
    }
}

/// Binary furnace decisions, one per control block.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ControlSchedule {
    values: Vec<bool>,
}

impl ControlSchedule {
    pub fn new(values: Vec<bool>) -> Self {
        Self { values }
    }

    pub fn all(value: bool, blocks: usize) -> Self {
        Self {
            values: vec![value; blocks],
        }
    }

    /// Builds a schedule from 0/1 integers, rejecting anything else.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .enumerate()
            .map(|(i, &b)| match b {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(Error::validation(
                    format!("schedule[{i}]"),
                    format!("{b} is not binary"),
                )),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Furnace state of `block` as 0.0 / 1.0.
    pub fn q(&self, block: usize) -> f64 {
        if self.values[block] {
            1.0
        } else {
            0.0
        }
    }

    pub fn on_blocks(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.values.len() != grid.blocks() {
            return Err(Error::Shape(format!(
                "schedule has {} blocks but the grid has {}",
                self.values.len(),
                grid.blocks()
            )));
        }
        Ok(())
    }

    pub fn extend(&mut self, other: &ControlSchedule) {
        self.values.extend_from_slice(&other.values);
    }
}
