//! CSV schemas:
//!
//! | file          | header                                                                                   |
//! |---------------|------------------------------------------------------------------------------------------|
//! | houses.csv    | `id,category,volume_m3,wall_area_m2,kappa_w_m2k,burn_rate_kg_s,theta0_f,setpoint_f`      |
//! | ambient.csv   | `offset_minutes,temp_f`                                                                  |
//! | demand.csv    | `offset_minutes,mass_flow_kg_s`                                                          |
//! | boxplot.csv   | `scenario,house_id,delta_f`                                                              |
//! | report.csv    | `scenario,mean_f,max_f,min_f,std_f,total_gas_kg,gas_per_house_kg,time_s,avg_gap_pct`     |
//! | savings.csv   | `scenario,baseline_gas_kg,dr_gas_kg,saving_per_house_kg,projected_saving_kg,target_houses` |
//!
//! Numbers are written in the shortest decimal form that parses back to the
//! same `f64`.

use std::fs::File;
use std::path::Path;

use serde::Deserialize;

use super::{DeviationStats, RunReport};
use crate::baseline::AggregateDemand;
use crate::error::{Error, Result};
use crate::thermal::{
    fahrenheit_to_kelvin, kelvin_dev_to_fahrenheit_dev, kelvin_to_fahrenheit, AmbientSeries,
    HouseParams,
};

const HOUSES_HEADER: [&str; 8] = [
    "id",
    "category",
    "volume_m3",
    "wall_area_m2",
    "kappa_w_m2k",
    "burn_rate_kg_s",
    "theta0_f",
    "setpoint_f",
];
const AMBIENT_HEADER: [&str; 2] = ["offset_minutes", "temp_f"];
const DEMAND_HEADER: [&str; 2] = ["offset_minutes", "mass_flow_kg_s"];
const BOXPLOT_HEADER: [&str; 3] = ["scenario", "house_id", "delta_f"];
const REPORT_HEADER: [&str; 9] = [
    "scenario",
    "mean_f",
    "max_f",
    "min_f",
    "std_f",
    "total_gas_kg",
    "gas_per_house_kg",
    "time_s",
    "avg_gap_pct",
];
const SAVINGS_HEADER: [&str; 6] = [
    "scenario",
    "baseline_gas_kg",
    "dr_gas_kg",
    "saving_per_house_kg",
    "projected_saving_kg",
    "target_houses",
];

fn num(v: f64) -> String {
    format!("{v}")
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        kind => Error::Load {
            path: path.to_path_buf(),
            row,
            reason: format!("{kind:?}"),
        },
    }
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let f = File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(f))
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path, header: &[&str]) -> Result<Vec<(usize, T)>> {
    let f = File::open(path).map_err(io_err(path))?;
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(f);
    let found = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if found.is_empty() {
        return Err(Error::Load {
            path: path.to_path_buf(),
            row: 1,
            reason: "file is empty".into(),
        });
    }
    for col in header {
        if !found.iter().any(|h| h == *col) {
            return Err(Error::Load {
                path: path.to_path_buf(),
                row: 1,
                reason: format!("missing column `{col}`"),
            });
        }
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let v: T = rec.deserialize(Some(&found)).map_err(|e| Error::Load {
            path: path.to_path_buf(),
            row: line,
            reason: e.to_string(),
        })?;
        out.push((line, v));
    }
    Ok(out)
}

#[derive(Deserialize)]
struct HouseRecord {
    id: String,
    category: String,
    volume_m3: f64,
    wall_area_m2: f64,
    kappa_w_m2k: f64,
    burn_rate_kg_s: f64,
    theta0_f: f64,
    setpoint_f: f64,
}

/// Reads `houses.csv`, converting temperatures to kelvin and validating each
/// house.
pub fn load_fleet(path: &Path) -> Result<Vec<HouseParams>> {
    let rows: Vec<(usize, HouseRecord)> = read_rows(path, &HOUSES_HEADER)?;
    if rows.is_empty() {
        return Err(Error::Load {
            path: path.to_path_buf(),
            row: 1,
            reason: "no houses".into(),
        });
    }
    rows.into_iter()
        .map(|(line, r)| {
            let h = HouseParams {
                id: r.id,
                category: r.category,
                volume: r.volume_m3,
                wall_area: r.wall_area_m2,
                kappa: r.kappa_w_m2k,
                burn_rate: r.burn_rate_kg_s,
                theta0: fahrenheit_to_kelvin(r.theta0_f),
                setpoint: fahrenheit_to_kelvin(r.setpoint_f),
            };
            h.validate().map_err(|e| Error::Load {
                path: path.to_path_buf(),
                row: line,
                reason: e.to_string(),
            })?;
            Ok(h)
        })
        .collect()
}

/// Writes `houses.csv`. Temperatures are converted back to °F, so values
/// originally loaded from °F survive up to rounding of the conversion.
pub fn write_fleet(fleet: &[HouseParams], path: &Path) -> Result<()> {
    write_rows(
        path,
        &HOUSES_HEADER,
        fleet.iter().map(|h| {
            vec![
                h.id.clone(),
                h.category.clone(),
                num(h.volume),
                num(h.wall_area),
                num(h.kappa),
                num(h.burn_rate),
                num(kelvin_to_fahrenheit(h.theta0)),
                num(kelvin_to_fahrenheit(h.setpoint)),
            ]
        }),
    )
}

#[derive(Deserialize)]
struct AmbientRecord {
    offset_minutes: f64,
    temp_f: f64,
}

/// Builds a series from `(offset minutes, °F)` samples.
pub fn ambient_from_fahrenheit(samples: &[(f64, f64)]) -> Result<AmbientSeries> {
    AmbientSeries::new(
        samples
            .iter()
            .map(|&(m, f)| (m * 60.0, fahrenheit_to_kelvin(f)))
            .collect(),
    )
}

pub fn load_ambient(path: &Path) -> Result<AmbientSeries> {
    let rows: Vec<(usize, AmbientRecord)> = read_rows(path, &AMBIENT_HEADER)?;
    if rows.is_empty() {
        return Err(Error::Load {
            path: path.to_path_buf(),
            row: 1,
            reason: "no samples".into(),
        });
    }
    let samples: Vec<(f64, f64)> = rows.iter().map(|(_, r)| (r.offset_minutes, r.temp_f)).collect();
    ambient_from_fahrenheit(&samples).map_err(|e| Error::Load {
        path: path.to_path_buf(),
        row: 0,
        reason: e.to_string(),
    })
}

/// Writes `(offset minutes, °F)` samples as `ambient.csv`.
pub fn write_ambient(samples_f: &[(f64, f64)], path: &Path) -> Result<()> {
    write_rows(
        path,
        &AMBIENT_HEADER,
        samples_f.iter().map(|&(m, f)| vec![num(m), num(f)]),
    )
}

pub fn emit_demand_series(demand: &AggregateDemand, path: &Path) -> Result<()> {
    write_rows(
        path,
        &DEMAND_HEADER,
        demand
            .samples
            .iter()
            .enumerate()
            .map(|(k, &s)| vec![num(demand.time(k) / 60.0), num(s)]),
    )
}

#[derive(Deserialize)]
struct DemandRecord {
    offset_minutes: f64,
    mass_flow_kg_s: f64,
}

/// Reads `demand.csv` back as `(offset minutes, kg/s)` pairs.
pub fn read_demand_series(path: &Path) -> Result<Vec<(f64, f64)>> {
    let rows: Vec<(usize, DemandRecord)> = read_rows(path, &DEMAND_HEADER)?;
    Ok(rows
        .into_iter()
        .map(|(_, r)| (r.offset_minutes, r.mass_flow_kg_s))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct BoxplotRow {
    pub scenario: String,
    pub house_id: String,
    pub delta_f: f64,
}

/// Writes per-house deviations (K in, °F out), scenarios in the given order
/// and houses sorted by id within each scenario.
pub fn emit_boxplot_data(scenarios: &[(String, Vec<(String, f64)>)], path: &Path) -> Result<()> {
    let rows = scenarios.iter().flat_map(|(name, houses)| {
        let mut sorted: Vec<&(String, f64)> = houses.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        sorted
            .into_iter()
            .map(|(id, d)| vec![name.clone(), id.clone(), num(kelvin_dev_to_fahrenheit_dev(*d))])
            .collect::<Vec<_>>()
    });
    write_rows(path, &BOXPLOT_HEADER, rows)
}

pub fn read_boxplot(path: &Path) -> Result<Vec<BoxplotRow>> {
    Ok(read_rows(path, &BOXPLOT_HEADER)?.into_iter().map(|(_, r)| r).collect())
}

pub fn emit_run_report(reports: &[RunReport], path: &Path) -> Result<()> {
    write_rows(
        path,
        &REPORT_HEADER,
        reports.iter().map(|r| {
            vec![
                r.scenario.clone(),
                num(r.stats.mean),
                num(r.stats.max),
                num(r.stats.min),
                num(r.stats.std_dev),
                num(r.total_gas),
                num(r.gas_per_house),
                num(r.time_s),
                num(r.avg_gap_pct),
            ]
        }),
    )
}

#[derive(Deserialize)]
struct ReportRecord {
    scenario: String,
    mean_f: f64,
    max_f: f64,
    min_f: f64,
    std_f: f64,
    total_gas_kg: f64,
    gas_per_house_kg: f64,
    time_s: f64,
    avg_gap_pct: f64,
}

pub fn read_run_reports(path: &Path) -> Result<Vec<RunReport>> {
    let rows: Vec<(usize, ReportRecord)> = read_rows(path, &REPORT_HEADER)?;
    Ok(rows
        .into_iter()
        .map(|(_, r)| RunReport {
            scenario: r.scenario,
            stats: DeviationStats {
                mean: r.mean_f,
                max: r.max_f,
                min: r.min_f,
                std_dev: r.std_f,
            },
            total_gas: r.total_gas_kg,
            gas_per_house: r.gas_per_house_kg,
            time_s: r.time_s,
            avg_gap_pct: r.avg_gap_pct,
        })
        .collect())
}

/// One row of `savings.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SavingsRow {
    pub scenario: String,
    pub baseline_gas: f64,
    pub dr_gas: f64,
    pub saving_per_house: f64,
    pub projected_saving: f64,
    pub target_houses: usize,
}

pub fn emit_savings(rows: &[SavingsRow], path: &Path) -> Result<()> {
    write_rows(
        path,
        &SAVINGS_HEADER,
        rows.iter().map(|r| {
            vec![
                r.scenario.clone(),
                num(r.baseline_gas),
                num(r.dr_gas),
                num(r.saving_per_house),
                num(r.projected_saving),
                r.target_houses.to_string(),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn load_house_row() {
        let d = tempfile::tempdir().unwrap();
        let p = write(
            d.path(),
            "houses.csv",
            "id,category,volume_m3,wall_area_m2,kappa_w_m2k,burn_rate_kg_s,theta0_f,setpoint_f\n\
             h1,apt,500,200,0.11,6e-5,68,68\n",
        );
        let fleet = load_fleet(&p).unwrap();
        assert_eq!(fleet.len(), 1);
        assert!((fleet[0].theta0 - 293.15).abs() < 1e-12);
        assert_eq!(fleet[0].volume, 500.0);
    }

    #[test]
    fn load_errors_carry_row() {
        let d = tempfile::tempdir().unwrap();
        let empty = write(d.path(), "empty.csv", "");
        assert!(matches!(load_fleet(&empty), Err(Error::Load { .. })));

        let header_only = write(
            d.path(),
            "h.csv",
            "id,category,volume_m3,wall_area_m2,kappa_w_m2k,burn_rate_kg_s,theta0_f,setpoint_f\n",
        );
        assert!(matches!(load_fleet(&header_only), Err(Error::Load { .. })));

        let missing = write(d.path(), "m.csv", "id,category,volume_m3\nh1,a,5\n");
        match load_fleet(&missing) {
            Err(Error::Load { reason, .. }) => assert!(reason.contains("wall_area_m2")),
            other => panic!("unexpected {other:?}"),
        }

        let bad = write(
            d.path(),
            "b.csv",
            "id,category,volume_m3,wall_area_m2,kappa_w_m2k,burn_rate_kg_s,theta0_f,setpoint_f\n\
             h1,a,500,200,0.11,6e-5,68,68\n\
             h2,a,abc,200,0.11,6e-5,68,68\n",
        );
        assert!(matches!(load_fleet(&bad), Err(Error::Load { row: 3, .. })));

        let invalid = write(
            d.path(),
            "i.csv",
            "id,category,volume_m3,wall_area_m2,kappa_w_m2k,burn_rate_kg_s,theta0_f,setpoint_f\n\
             h1,a,-5,200,0.11,6e-5,68,68\n",
        );
        assert!(matches!(load_fleet(&invalid), Err(Error::Load { row: 2, .. })));
    }

    #[test]
    fn out_of_band_burn_rate_loads() {
        let d = tempfile::tempdir().unwrap();
        let p = write(
            d.path(),
            "houses.csv",
            "id,category,volume_m3,wall_area_m2,kappa_w_m2k,burn_rate_kg_s,theta0_f,setpoint_f\n\
             h1,a,500,200,0.11,2e-4,68,68\n",
        );
        let fleet = load_fleet(&p).unwrap();
        assert!(!fleet[0].burn_rate_in_fleet_band());
    }

    #[test]
    fn ambient_minutes_and_fahrenheit() {
        let d = tempfile::tempdir().unwrap();
        let p = write(d.path(), "a.csv", "offset_minutes,temp_f\n0,32\n60,50\n");
        let a = load_ambient(&p).unwrap();
        assert_eq!(a.end(), 3600.0);
        assert!((a.at(0.0).unwrap() - 273.15).abs() < 1e-12);
        assert!((a.at(3600.0).unwrap() - 283.15).abs() < 1e-12);
        let unordered = write(d.path(), "u.csv", "offset_minutes,temp_f\n0,32\n0,50\n");
        assert!(load_ambient(&unordered).is_err());
    }

    #[test]
    fn empty_boxplot_is_header_only() {
        let d = tempfile::tempdir().unwrap();
        let p = d.path().join("boxplot.csv");
        emit_boxplot_data(&[], &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "scenario,house_id,delta_f\n");
    }

    #[test]
    fn unwritable_path() {
        let p = Path::new("/nonexistent-dir/x/demand.csv");
        let d = AggregateDemand { t0: 0.0, dt_state: 60.0, samples: vec![1.0] };
        assert!(matches!(emit_demand_series(&d, p), Err(Error::Io { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn demand_round_trip(samples in proptest::collection::vec(0.0f64..1e-2, 1..50)) {
            let d = tempfile::tempdir().unwrap();
            let p = d.path().join("demand.csv");
            let demand = AggregateDemand { t0: 0.0, dt_state: 60.0, samples: samples.clone() };
            emit_demand_series(&demand, &p).unwrap();
            let back = read_demand_series(&p).unwrap();
            prop_assert_eq!(back.len(), samples.len());
            for (k, (m, v)) in back.iter().enumerate() {
                prop_assert_eq!(*m, k as f64);
                prop_assert_eq!(*v, samples[k]);
            }
        }

        #[test]
        fn report_and_boxplot_round_trip(
            deltas in proptest::collection::vec(0.0f64..10.0, 1..20),
            time in 0.0f64..1e4,
            gap in 0.0f64..100.0,
        ) {
            let d = tempfile::tempdir().unwrap();
            let gas: Vec<f64> = deltas.iter().map(|x| x * 0.1).collect();
            let r = RunReport::new("dec_lambda=0.85_trh=3h", &deltas, &gas, time, gap).unwrap();
            let p = d.path().join("report.csv");
            emit_run_report(std::slice::from_ref(&r), &p).unwrap();
            prop_assert_eq!(read_run_reports(&p).unwrap(), vec![r]);

            let houses: Vec<(String, f64)> =
                deltas.iter().enumerate().map(|(i, &x)| (format!("h{i:03}"), x)).collect();
            let p = d.path().join("boxplot.csv");
            emit_boxplot_data(&[("s".to_string(), houses.clone())], &p).unwrap();
            let back = read_boxplot(&p).unwrap();
            for (row, (id, x)) in back.iter().zip(&houses) {
                prop_assert_eq!(&row.house_id, id);
                prop_assert_eq!(row.delta_f, kelvin_dev_to_fahrenheit_dev(*x));
            }
        }
    }
}
