//! Toy instances and a brute-force schedule enumerator. The enumerator's
//! physics is written out from scratch so it does not share code with the
//! engine under test; `direct` is the engine's own full-horizon solve.

#![allow(dead_code)]

use gasdr::milp::{solve_milp_with_start, SolveOptions};
use gasdr::ocp::*;
use gasdr::thermal::{
    compute_thermal_coefficients, AmbientSeries, HouseParams, PhysicalConstants, ThermalCoefficients,
    DEFAULT_KAPPA,
};
use gasdr::Grid;
use rand::Rng;

pub const CA: f64 = 718.0;
pub const RHO_A: f64 = 1.2754;
pub const EG: f64 = 45_938e3;
pub const DT_STATE: f64 = 60.0;
pub const DT_CONTROL: f64 = 180.0;

#[derive(Debug, Clone)]
pub struct Toy {
    pub fleet: Vec<HouseParams>,
    /// Ambient at the start and end of the horizon, K; linear in between.
    pub amb: (f64, f64),
    pub blocks: usize,
}

pub fn random_house<R: Rng>(rng: &mut R, idx: usize) -> HouseParams {
    let floor: f64 = rng.gen_range(50.0..300.0);
    let setpoint = rng.gen_range(292.0..296.0);
    HouseParams {
        id: format!("t{idx:02}"),
        category: "toy".into(),
        volume: floor * 2.5,
        wall_area: 10.0 * floor.sqrt() + floor,
        kappa: DEFAULT_KAPPA,
        burn_rate: rng.gen_range(3e-5..12e-5),
        theta0: setpoint + rng.gen_range(-2.0..1.0),
        setpoint,
    }
}

pub fn random_toy<R: Rng>(rng: &mut R, houses: usize, blocks: usize) -> Toy {
    let lo = rng.gen_range(250.0..280.0);
    Toy {
        fleet: (0..houses).map(|i| random_house(rng, i)).collect(),
        amb: (lo, lo + rng.gen_range(-5.0..5.0)),
        blocks,
    }
}

impl Toy {
    pub fn horizon(&self) -> f64 {
        self.blocks as f64 * DT_CONTROL
    }

    pub fn grid(&self) -> Grid {
        Grid::new(DT_STATE, DT_CONTROL, self.horizon()).unwrap()
    }

    pub fn ambient(&self) -> AmbientSeries {
        AmbientSeries::new(vec![(0.0, self.amb.0), (self.horizon(), self.amb.1)]).unwrap()
    }

    pub fn amb_at(&self, t: f64) -> f64 {
        self.amb.0 + (self.amb.1 - self.amb.0) * t / self.horizon()
    }
}

/// Euler trajectory of house `h` under `bits` (one per block), starting at θ0.
pub fn oracle_temps(toy: &Toy, h: usize, bits: &[bool]) -> Vec<f64> {
    let house = &toy.fleet[h];
    let cap = CA * RHO_A * house.volume;
    let alpha = house.kappa * house.wall_area / cap;
    let beta = EG / cap;
    let per_block = (DT_CONTROL / DT_STATE).round() as usize;
    let mut temps = vec![house.theta0];
    let mut theta = house.theta0;
    for (b, &on) in bits.iter().enumerate() {
        for s in 0..per_block {
            let t = (b * per_block + s) as f64 * DT_STATE;
            let heat = if on { beta * house.burn_rate } else { 0.0 };
            theta += DT_STATE * (alpha * (toy.amb_at(t) - theta) + heat);
            temps.push(theta);
        }
    }
    temps
}

pub fn oracle_delta(toy: &Toy, h: usize, bits: &[bool]) -> f64 {
    let sp = toy.fleet[h].setpoint;
    oracle_temps(toy, h, bits)[1..]
        .iter()
        .map(|t| (t - sp).abs())
        .fold(0.0, f64::max)
}

pub fn oracle_gas(toy: &Toy, h: usize, bits: &[bool]) -> f64 {
    toy.fleet[h].burn_rate * DT_CONTROL * bits.iter().filter(|&&b| b).count() as f64
}

fn bits_of(mask: u32, len: usize) -> Vec<bool> {
    (0..len).map(|i| (mask >> i) & 1 == 1).collect()
}

/// min over schedules of λΔ + (1-λ)G for one house.
pub fn enumerate_decentralized(toy: &Toy, h: usize, lambda: f64) -> f64 {
    (0..1u32 << toy.blocks)
        .map(|m| {
            let bits = bits_of(m, toy.blocks);
            lambda * oracle_delta(toy, h, &bits) + (1.0 - lambda) * oracle_gas(toy, h, &bits)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Fleet optimum under the per-block cap; `None` when no schedule fits.
pub fn enumerate_centralized(toy: &Toy, cap: f64, objective: ObjectiveKind) -> Option<f64> {
    let n = toy.fleet.len();
    let b = toy.blocks;
    let per_house: Vec<Vec<f64>> = (0..n)
        .map(|h| (0..1u32 << b).map(|m| oracle_delta(toy, h, &bits_of(m, b))).collect())
        .collect();
    let mut best: Option<f64> = None;
    for mask in 0..1u64 << (n * b) {
        let masks: Vec<u32> = (0..n).map(|h| ((mask >> (h * b)) & ((1 << b) - 1)) as u32).collect();
        let fits = (0..b).all(|blk| {
            let load: f64 = (0..n)
                .filter(|&h| (masks[h] >> blk) & 1 == 1)
                .map(|h| toy.fleet[h].burn_rate)
                .sum();
            load <= cap
        });
        if !fits {
            continue;
        }
        let deltas = masks.iter().enumerate().map(|(h, &m)| per_house[h][m as usize]);
        let obj = match objective {
            ObjectiveKind::MeanDeviation => deltas.sum::<f64>() / n as f64,
            ObjectiveKind::MaxDeviation => deltas.fold(0.0, f64::max),
        };
        best = Some(best.map_or(obj, |b: f64| b.min(obj)));
    }
    best
}

/// Exact solves: prune only when the bound reaches the incumbent.
pub fn exact() -> SolveOptions {
    SolveOptions {
        gap_tol: 0.0,
        time_limit: None,
        node_limit: None,
    }
}

pub fn coeffs(toy: &Toy) -> Vec<ThermalCoefficients> {
    toy.fleet
        .iter()
        .map(|h| compute_thermal_coefficients(&PhysicalConstants::default(), h).unwrap())
        .collect()
}

/// Full-horizon exact solve, seeded with the same start the driver uses. The
/// objective is recomputed from the simulated metrics, as the driver does.
pub fn direct(kind: &ProblemKind, toy: &Toy) -> SolveOutcome {
    let c = coeffs(toy);
    let (amb, grid) = (toy.ambient(), toy.grid());
    match kind {
        ProblemKind::Decentralized { lambda } => {
            let mut all: Option<SolveOutcome> = None;
            for (h, house) in toy.fleet.iter().enumerate() {
                let ocp =
                    build_decentralized(house, &c[h], &amb, &Type1Config::for_house(*lambda, house), &grid)
                        .unwrap();
                let one = std::slice::from_ref(house);
                let start = thermostat_schedules(one, &c[h..=h], &amb, &grid, None).unwrap();
                let start = ocp.assignment(&start, one, &c[h..=h], &amb).unwrap();
                let sol = solve_milp_with_start(&ocp.model, &exact(), Some(&start)).unwrap();
                let out = extract_outcome(&ocp, &sol, one, &c[h..=h], &amb).unwrap();
                match all.as_mut() {
                    None => all = Some(out),
                    Some(a) => {
                        a.schedules.extend(out.schedules);
                        a.trajectories.extend(out.trajectories);
                        a.deltas.extend(out.deltas);
                        a.gas.extend(out.gas);
                    }
                }
            }
            let mut all = all.unwrap();
            all.objective = kind.objective(&all.deltas, &all.gas);
            all
        }
        ProblemKind::Centralized(cfg) => {
            let ocp = build_centralized(&toy.fleet, &c, &amb, cfg, &grid).unwrap();
            let start = thermostat_schedules(&toy.fleet, &c, &amb, &grid, Some(cfg.cap())).unwrap();
            let start = ocp.assignment(&start, &toy.fleet, &c, &amb).unwrap();
            let sol = solve_milp_with_start(&ocp.model, &exact(), Some(&start)).unwrap();
            let mut out = extract_outcome(&ocp, &sol, &toy.fleet, &c, &amb).unwrap();
            out.objective = kind.objective(&out.deltas, &out.gas);
            out
        }
    }
}
