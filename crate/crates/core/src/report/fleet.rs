//! Synthetic fleet and ambient profiles used when no measured data is given.

use crate::thermal::{fahrenheit_to_kelvin, HouseParams, DEFAULT_KAPPA};

pub const FLEET_CATEGORIES: usize = 14;

const HEIGHT_M: f64 = 2.5;

/// `count` houses spread over 14 size categories. House `j` belongs to
/// category `j % 14` and is variant `j / 14` of it.
pub fn generate_fleet(count: usize) -> Vec<HouseParams> {
    (0..count)
        .map(|j| {
            let k = (j % FLEET_CATEGORIES) as f64;
            let i = j / FLEET_CATEGORIES;
            let last = (FLEET_CATEGORIES - 1) as f64;
            let floor = 50.0 + 250.0 * k / last;
            let s = 0.92 + 0.02 * i as f64;
            let walls = 4.0 * floor.sqrt() * HEIGHT_M + floor;
            let setpoint_f = 67.0 + (i % 4) as f64;
            let theta0_f = setpoint_f - [0.0, 0.5, 1.0, 1.5, 2.0][i % 5];
            HouseParams {
                id: format!("h{:03}", j + 1),
                category: format!("c{:02}", j % FLEET_CATEGORIES + 1),
                volume: floor * HEIGHT_M * s,
                wall_area: walls * s.powf(2.0 / 3.0),
                kappa: DEFAULT_KAPPA,
                burn_rate: 3e-5 + 9e-5 * k / last,
                theta0: fahrenheit_to_kelvin(theta0_f),
                setpoint: fahrenheit_to_kelvin(setpoint_f),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbientProfile {
    /// Mild winter day, coldest before dawn, 15 °F swing.
    TypicalDay,
    /// Deep cold snap dropping about 40 °F within a day.
    PolarVortex,
}

impl AmbientProfile {
    pub fn temp_f(self, hour: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            Self::TypicalDay => 27.5 - 7.5 * (2.0 * PI * (hour - 15.0) / 24.0).cos(),
            Self::PolarVortex => -8.0 + 20.0 * (2.0 * PI * hour / 38.0).cos(),
        }
    }

    /// Hourly `(offset minutes, °F)` samples covering `hours`.
    pub fn samples(self, hours: usize) -> Vec<(f64, f64)> {
        (0..=hours)
            .map(|h| (60.0 * h as f64, self.temp_f(h as f64)))
            .collect()
    }
}
