//! Statistics, scenario reports, and the CSV file boundary.
//!
//! Files carry °F and minutes; everything handed to the engine is K and
//! seconds.

mod fleet;
mod io;

use std::fmt;

use crate::error::{Error, Result};
use crate::ocp::ObjectiveKind;
use crate::thermal::kelvin_dev_to_fahrenheit_dev;

pub use fleet::{generate_fleet, AmbientProfile, FLEET_CATEGORIES};
pub use io::{
    ambient_from_fahrenheit, emit_boxplot_data, emit_demand_series, emit_run_report,
    emit_savings, load_ambient, load_fleet, read_boxplot, read_demand_series, read_run_reports,
    write_ambient, write_fleet, BoxplotRow, SavingsRow,
};

/// Number of houses the savings projection is scaled to by default.
pub const PROJECTION_TARGET: usize = 10_000;

/// Fleet statistics of per-house deviations, in °F.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationStats {
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    /// Population standard deviation.
    pub std_dev: f64,
}

/// Converts each Δ (K) to °F and summarizes.
pub fn deviation_stats(deltas_k: &[f64]) -> Result<DeviationStats> {
    if deltas_k.is_empty() {
        return Err(Error::validation("deltas", "no houses to summarize"));
    }
    let f: Vec<f64> = deltas_k.iter().map(|&d| kelvin_dev_to_fahrenheit_dev(d)).collect();
    let n = f.len() as f64;
    let mean = f.iter().sum::<f64>() / n;
    let max = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = f.iter().copied().fold(f64::INFINITY, f64::min);
    let std_dev = if max == min {
        0.0
    } else {
        (f.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
    };
    // keep min <= mean <= max under rounding
    Ok(DeviationStats {
        mean: mean.clamp(min, max),
        max,
        min,
        std_dev,
    })
}

/// Fleet-wide gas reduction scaled to `target_size` houses, kg. Negative when
/// the demand-response run burns more than the baseline.
pub fn savings_projection(
    baseline_total: f64,
    dr_total: f64,
    fleet_size: usize,
    target_size: usize,
) -> Result<f64> {
    if fleet_size == 0 {
        return Err(Error::validation("fleet_size", "must be positive"));
    }
    Ok((baseline_total - dr_total) / fleet_size as f64 * target_size as f64)
}

/// What a report row describes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    Baseline,
    Decentralized { lambda: f64, t_rh_hours: f64 },
    Centralized { gamma: f64, objective: ObjectiveKind, t_rh_hours: f64 },
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Baseline => write!(f, "baseline"),
            Scenario::Decentralized { lambda, t_rh_hours } => {
                write!(f, "dec_lambda={lambda}_trh={t_rh_hours}h")
            }
            Scenario::Centralized {
                gamma,
                objective,
                t_rh_hours,
            } => {
                let obj = match objective {
                    ObjectiveKind::MeanDeviation => "mean",
                    ObjectiveKind::MaxDeviation => "max",
                };
                write!(f, "cen_{obj}_gamma={gamma}_trh={t_rh_hours}h")
            }
        }
    }
}

/// One row of `report.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: String,
    pub stats: DeviationStats,
    pub total_gas: f64,
    pub gas_per_house: f64,
    pub time_s: f64,
    pub avg_gap_pct: f64,
}

impl RunReport {
    pub fn new(
        scenario: impl Into<String>,
        deltas_k: &[f64],
        gas: &[f64],
        time_s: f64,
        avg_gap_pct: f64,
    ) -> Result<Self> {
        let stats = deviation_stats(deltas_k)?;
        let total_gas: f64 = gas.iter().sum();
        Ok(Self {
            scenario: scenario.into(),
            stats,
            total_gas,
            gas_per_house: total_gas / gas.len() as f64,
            time_s,
            avg_gap_pct,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stats_examples() {
        let s = deviation_stats(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((s.mean, s.max, s.min, s.std_dev), (1.8, 1.8, 1.8, 0.0));
        let s = deviation_stats(&[0.0, 2.0]).unwrap();
        assert!((s.mean - 1.8).abs() < 1e-12);
        assert!((s.max - 3.6).abs() < 1e-12);
        assert_eq!(s.min, 0.0);
        assert!((s.std_dev - 1.8).abs() < 1e-12);
        let s = deviation_stats(&[0.7]).unwrap();
        assert_eq!(s.mean, s.max);
        assert_eq!(s.min, s.max);
        assert_eq!(s.std_dev, 0.0);
        assert!(deviation_stats(&[]).is_err());
    }

    #[test]
    fn projection_examples() {
        // 0.07 kg per house over a 140-house fleet
        let p = savings_projection(140.0 * 0.5, 140.0 * 0.5 - 140.0 * 0.07, 140, 10_000).unwrap();
        assert!((p - 700.0).abs() < 1e-9);
        assert_eq!(savings_projection(12.5, 12.5, 140, 10_000).unwrap(), 0.0);
        assert_eq!(savings_projection(30.0, 16.0, 140, 140).unwrap(), 14.0);
        assert!(savings_projection(1.0, 0.0, 0, 10).is_err());
        assert!(savings_projection(1.0, 2.0, 1, 10).unwrap() < 0.0);
    }

    #[test]
    fn scenario_labels() {
        assert_eq!(Scenario::Baseline.to_string(), "baseline");
        assert_eq!(
            Scenario::Decentralized { lambda: 0.85, t_rh_hours: 3.0 }.to_string(),
            "dec_lambda=0.85_trh=3h"
        );
        assert_eq!(
            Scenario::Centralized {
                gamma: 0.9,
                objective: ObjectiveKind::MaxDeviation,
                t_rh_hours: 1.0
            }
            .to_string(),
            "cen_max_gamma=0.9_trh=1h"
        );
    }

    proptest! {
        #[test]
        fn stats_are_ordered(deltas in proptest::collection::vec(0.0f64..20.0, 1..60)) {
            let s = deviation_stats(&deltas).unwrap();
            prop_assert!(s.min <= s.mean && s.mean <= s.max);
            prop_assert!(s.std_dev >= 0.0);
            let all_equal = deltas.iter().all(|&d| d == deltas[0]);
            prop_assert_eq!(s.std_dev == 0.0, all_equal);
        }
    }
}
