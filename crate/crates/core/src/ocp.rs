//! Optimal-control problems as MILPs.
//!
//! Both builders share the per-house block: temperature states `θ_k`
//! (k = 0..=n, free), one binary per control block, and a deviation
//! variable `Δ ≥ 0`, tied together by
//!
//! ```text
//! θ_0 = θ⁰
//! θ_{k+1} - (1 - Δt α) θ_k - Δt β Q q_{b(k)} = Δt α Θ(t_k)      k = 0..n-1
//! θ_k + Δ ≥ θ̄,   θ_k - Δ ≤ θ̄                                  k = 1..n
//! ```
//!
//! The decentralized (Type 1) model adds `G = Q Δt_c Σ q` and minimizes
//! `λ Δ + (1 - λ) G`. The centralized (Type 2) model couples the fleet with
//! `Σ_h Q_h q_{h,b} ≤ γ D` per block and minimizes either the mean of the
//! `Δ_h` or an epigraph variable `Γ ≥ Δ_h`.
//!
//! Δ is in kelvin and G in kilograms; the weighted sum mixes them without
//! rescaling, so λ values are only comparable across instances of similar
//! scale.

use crate::error::{Error, Result};
use crate::grid::{ControlSchedule, Grid};
use crate::milp::{MilpModel, MilpSolution, Relation, SolveStatus, VarId, INT_TOL};
use crate::thermal::{
    simulate_trajectory, step_unchecked, AmbientSeries, HouseParams, ThermalCoefficients,
    Trajectory,
};

/// Largest allowed gap between MILP temperatures and the re-simulated
/// trajectory, K.
pub const CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Type1Config {
    /// Weight of the deviation term, in `[0, 1]`.
    pub lambda: f64,
    pub setpoint: f64,
}

impl Type1Config {
    pub fn for_house(lambda: f64, house: &HouseParams) -> Self {
        Self {
            lambda,
            setpoint: house.setpoint,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::validation("lambda", format!("{} is outside [0, 1]", self.lambda)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveKind {
    MeanDeviation,
    MaxDeviation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Type2Config {
    /// Curtailment factor in `(0, 1]`.
    pub gamma: f64,
    /// Baseline peak mass flow `D`, kg/s.
    pub peak: f64,
    pub objective: ObjectiveKind,
}

impl Type2Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::validation("gamma", format!("{} is outside (0, 1]", self.gamma)));
        }
        if !(self.peak.is_finite() && self.peak > 0.0) {
            return Err(Error::validation("peak", format!("{} is not positive", self.peak)));
        }
        Ok(())
    }

    /// Allowed aggregate flow per control block, kg/s.
    pub fn cap(&self) -> f64 {
        self.gamma * self.peak
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    Decentralized { lambda: f64 },
    Centralized(Type2Config),
}

impl ProblemKind {
    /// Objective value of a set of per-house metrics under this problem.
    pub fn objective(&self, deltas: &[f64], gas: &[f64]) -> f64 {
        match self {
            ProblemKind::Decentralized { lambda } => deltas
                .iter()
                .zip(gas)
                .map(|(d, g)| lambda * d + (1.0 - lambda) * g)
                .sum(),
            ProblemKind::Centralized(cfg) => match cfg.objective {
                ObjectiveKind::MeanDeviation => deltas.iter().sum::<f64>() / deltas.len() as f64,
                ObjectiveKind::MaxDeviation => deltas.iter().copied().fold(0.0, f64::max),
            },
        }
    }
}

/// Variables belonging to one house.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseVars {
    pub theta: Vec<VarId>,
    pub q: Vec<VarId>,
    pub delta: VarId,
    pub gas: Option<VarId>,
}

/// A built control model together with its variable layout.
#[derive(Debug, Clone)]
pub struct OcpModel {
    pub model: MilpModel,
    pub kind: ProblemKind,
    pub houses: Vec<HouseVars>,
    pub epigraph: Option<VarId>,
    pub grid: Grid,
}

fn add_house(
    model: &mut MilpModel,
    tag: &str,
    house: &HouseParams,
    coeff: &ThermalCoefficients,
    setpoint: f64,
    amb: &[f64],
    grid: &Grid,
) -> HouseVars {
    let inf = f64::INFINITY;
    let dt = grid.dt_state();
    let theta: Vec<VarId> = (0..=grid.n())
        .map(|k| model.add_continuous(format!("theta[{tag}][{k}]"), -inf, inf))
        .collect();
    let q: Vec<VarId> = (0..grid.blocks())
        .map(|b| model.add_binary(format!("q[{tag}][{b}]")))
        .collect();
    let delta = model.add_continuous(format!("delta[{tag}]"), 0.0, inf);

    model.add_constraint(format!("init[{tag}]"), vec![(theta[0], 1.0)], Relation::Eq, house.theta0);
    let keep = 1.0 - dt * coeff.alpha;
    let heat = dt * coeff.beta * house.burn_rate;
    for k in 0..grid.n() {
        model.add_constraint(
            format!("dyn[{tag}][{k}]"),
            vec![(theta[k + 1], 1.0), (theta[k], -keep), (q[grid.block_of_step(k)], -heat)],
            Relation::Eq,
            dt * coeff.alpha * amb[k],
        );
    }
    for k in 1..=grid.n() {
        model.add_constraint(
            format!("band_lo[{tag}][{k}]"),
            vec![(theta[k], 1.0), (delta, 1.0)],
            Relation::Ge,
            setpoint,
        );
        model.add_constraint(
            format!("band_hi[{tag}][{k}]"),
            vec![(theta[k], 1.0), (delta, -1.0)],
            Relation::Le,
            setpoint,
        );
    }
    HouseVars {
        theta,
        q,
        delta,
        gas: None,
    }
}

fn check_inputs(house: &HouseParams, coeff: &ThermalCoefficients, grid: &Grid) -> Result<()> {
    house.validate()?;
    coeff.check_stability(grid.dt_state())
}

/// Type 1: one house minimizing `λ Δ + (1 - λ) G` on its own.
pub fn build_decentralized(
    house: &HouseParams,
    coeff: &ThermalCoefficients,
    ambient: &AmbientSeries,
    cfg: &Type1Config,
    grid: &Grid,
) -> Result<OcpModel> {
    cfg.validate()?;
    check_inputs(house, coeff, grid)?;
    let amb = grid.ambient_samples(ambient)?;
    let mut model = MilpModel::new();
    let mut vars = add_house(&mut model, &house.id, house, coeff, cfg.setpoint, &amb, grid);
    let gas = model.add_continuous(format!("gas[{}]", house.id), 0.0, f64::INFINITY);
    let per_block = house.burn_rate * grid.dt_control();
    let mut terms = vec![(gas, 1.0)];
    terms.extend(vars.q.iter().map(|&q| (q, -per_block)));
    model.add_constraint(format!("gas_def[{}]", house.id), terms, Relation::Eq, 0.0);
    vars.gas = Some(gas);
    model.set_objective(
        vec![(vars.delta, cfg.lambda), (gas, 1.0 - cfg.lambda)],
        0.0,
    );
    Ok(OcpModel {
        model,
        kind: ProblemKind::Decentralized { lambda: cfg.lambda },
        houses: vec![vars],
        epigraph: None,
        grid: grid.clone(),
    })
}

/// Type 2: the aggregator's fleet-wide model with the peak-flow cap.
pub fn build_centralized(
    fleet: &[HouseParams],
    coeffs: &[ThermalCoefficients],
    ambient: &AmbientSeries,
    cfg: &Type2Config,
    grid: &Grid,
) -> Result<OcpModel> {
    cfg.validate()?;
    if fleet.is_empty() {
        return Err(Error::validation("fleet", "centralized model needs at least one house"));
    }
    if fleet.len() != coeffs.len() {
        return Err(Error::Shape(format!(
            "{} houses but {} coefficient sets",
            fleet.len(),
            coeffs.len()
        )));
    }
    let amb = grid.ambient_samples(ambient)?;
    let mut model = MilpModel::new();
    let mut houses = Vec::with_capacity(fleet.len());
    for (h, c) in fleet.iter().zip(coeffs) {
        check_inputs(h, c, grid)?;
        houses.push(add_house(&mut model, &h.id, h, c, h.setpoint, &amb, grid));
    }
    for b in 0..grid.blocks() {
        model.add_constraint(
            format!("peak[{b}]"),
            fleet
                .iter()
                .zip(&houses)
                .map(|(h, v)| (v.q[b], h.burn_rate))
                .collect(),
            Relation::Le,
            cfg.cap(),
        );
    }
    let epigraph = match cfg.objective {
        ObjectiveKind::MeanDeviation => {
            let w = 1.0 / fleet.len() as f64;
            model.set_objective(houses.iter().map(|v| (v.delta, w)).collect(), 0.0);
            None
        }
        ObjectiveKind::MaxDeviation => {
            let gamma_var = model.add_continuous("max_delta", 0.0, f64::INFINITY);
            for (h, v) in fleet.iter().zip(&houses) {
                model.add_constraint(
                    format!("epi[{}]", h.id),
                    vec![(gamma_var, 1.0), (v.delta, -1.0)],
                    Relation::Ge,
                    0.0,
                );
            }
            model.set_objective(vec![(gamma_var, 1.0)], 0.0);
            Some(gamma_var)
        }
    };
    Ok(OcpModel {
        model,
        kind: ProblemKind::Centralized(*cfg),
        houses,
        epigraph,
        grid: grid.clone(),
    })
}

/// Per-house schedules, re-simulated trajectories, and metrics of a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub schedules: Vec<ControlSchedule>,
    pub trajectories: Vec<Trajectory>,
    /// Max |θ̄ - θ_k| over k ≥ 1, K.
    pub deltas: Vec<f64>,
    /// Fuel burnt, kg.
    pub gas: Vec<f64>,
    pub objective: f64,
    pub best_bound: f64,
    pub gap: f64,
    pub status: SolveStatus,
}

/// Reads schedules from a MILP solution and re-derives everything else from
/// the simulator.
pub fn extract_outcome(
    ocp: &OcpModel,
    sol: &MilpSolution,
    fleet: &[HouseParams],
    coeffs: &[ThermalCoefficients],
    ambient: &AmbientSeries,
) -> Result<SolveOutcome> {
    if !sol.status.has_incumbent() {
        return Err(Error::validation(
            "solution",
            format!("status {:?} carries no incumbent", sol.status),
        ));
    }
    if fleet.len() != ocp.houses.len() || coeffs.len() != ocp.houses.len() {
        return Err(Error::Shape(format!(
            "model has {} houses, got {} houses and {} coefficient sets",
            ocp.houses.len(),
            fleet.len(),
            coeffs.len()
        )));
    }
    let mut out = SolveOutcome {
        schedules: Vec::new(),
        trajectories: Vec::new(),
        deltas: Vec::new(),
        gas: Vec::new(),
        objective: sol.objective,
        best_bound: sol.best_bound,
        gap: sol.gap,
        status: sol.status,
    };
    for ((vars, house), coeff) in ocp.houses.iter().zip(fleet).zip(coeffs) {
        let bits = vars
            .q
            .iter()
            .map(|&v| {
                let x = sol.value(v);
                let r = x.round();
                if (x - r).abs() > INT_TOL || !(r == 0.0 || r == 1.0) {
                    Err(Error::Consistency(format!("binary {} has value {x}", v.0)))
                } else {
                    Ok(r == 1.0)
                }
            })
            .collect::<Result<Vec<bool>>>()?;
        let schedule = ControlSchedule::new(bits);
        let traj = simulate_trajectory(house, coeff, ambient, &schedule, &ocp.grid)?;
        for (k, (&v, &t)) in vars.theta.iter().zip(&traj.temps).enumerate() {
            let diff = (sol.value(v) - t).abs();
            if diff > CONSISTENCY_TOL {
                return Err(Error::Consistency(format!(
                    "house {}: MILP temperature at step {k} differs from simulation by {diff} K",
                    house.id
                )));
            }
        }
        out.deltas.push(compute_deviation(&traj, house.setpoint)?);
        out.gas.push(gas_of(&schedule, house.burn_rate, &ocp.grid));
        out.schedules.push(schedule);
        out.trajectories.push(traj);
    }
    Ok(out)
}

/// Thermostat schedules usable as a starting solution. Each block, houses
/// below their set-point ask for heat; under a peak cap the coldest are
/// served first while the cap allows.
pub fn thermostat_schedules(
    fleet: &[HouseParams],
    coeffs: &[ThermalCoefficients],
    ambient: &AmbientSeries,
    grid: &Grid,
    cap: Option<f64>,
) -> Result<Vec<ControlSchedule>> {
    let amb = grid.ambient_samples(ambient)?;
    let dt = grid.dt_state();
    let mut theta: Vec<f64> = fleet.iter().map(|h| h.theta0).collect();
    let mut bits = vec![Vec::with_capacity(grid.blocks()); fleet.len()];
    for b in 0..grid.blocks() {
        let mut cold: Vec<usize> = (0..fleet.len())
            .filter(|&i| theta[i] < fleet[i].setpoint)
            .collect();
        cold.sort_by(|&i, &j| {
            (theta[i] - fleet[i].setpoint)
                .total_cmp(&(theta[j] - fleet[j].setpoint))
                .then(i.cmp(&j))
        });
        let mut on = vec![false; fleet.len()];
        let mut load = 0.0;
        for i in cold {
            if cap.map_or(true, |c| load + fleet[i].burn_rate <= c) {
                load += fleet[i].burn_rate;
                on[i] = true;
            }
        }
        for (i, h) in fleet.iter().enumerate() {
            bits[i].push(on[i]);
            let q = if on[i] { 1.0 } else { 0.0 };
            for s in 0..grid.steps_per_block() {
                let k = b * grid.steps_per_block() + s;
                theta[i] = step_unchecked(theta[i], amb[k], &coeffs[i], h.burn_rate, q, dt);
            }
        }
    }
    Ok(bits.into_iter().map(ControlSchedule::new).collect())
}

impl OcpModel {
    /// Full variable assignment of the model for the given schedules, with
    /// temperatures from the simulator and the tightest deviation values.
    pub fn assignment(
        &self,
        schedules: &[ControlSchedule],
        fleet: &[HouseParams],
        coeffs: &[ThermalCoefficients],
        ambient: &AmbientSeries,
    ) -> Result<Vec<f64>> {
        if schedules.len() != self.houses.len() || fleet.len() != self.houses.len() {
            return Err(Error::Shape(format!(
                "model has {} houses, got {} schedules and {} houses",
                self.houses.len(),
                schedules.len(),
                fleet.len()
            )));
        }
        let mut x = vec![0.0; self.model.num_vars()];
        let mut worst: f64 = 0.0;
        for (((vars, s), h), c) in self.houses.iter().zip(schedules).zip(fleet).zip(coeffs) {
            s.check_grid(&self.grid)?;
            let traj = simulate_trajectory(h, c, ambient, s, &self.grid)?;
            for (&v, &t) in vars.theta.iter().zip(&traj.temps) {
                x[v.0] = t;
            }
            for (b, &v) in vars.q.iter().enumerate() {
                x[v.0] = s.q(b);
            }
            let d = compute_deviation(&traj, h.setpoint)?;
            x[vars.delta.0] = d;
            worst = worst.max(d);
            if let Some(g) = vars.gas {
                x[g.0] = gas_of(s, h.burn_rate, &self.grid);
            }
        }
        if let Some(e) = self.epigraph {
            x[e.0] = worst;
        }
        Ok(x)
    }
}

/// Largest |set-point - θ| over every instant after the initial one.
pub fn compute_deviation(traj: &Trajectory, setpoint: f64) -> Result<f64> {
    if traj.temps.is_empty() {
        return Err(Error::validation("trajectory", "is empty"));
    }
    Ok(traj.temps[1..]
        .iter()
        .map(|t| (setpoint - t).abs())
        .fold(0.0, f64::max))
}

/// Q · Δt_c · (number of on-blocks), kg.
pub fn compute_gas(schedule: &ControlSchedule, burn_rate: f64, grid: &Grid) -> Result<f64> {
    if schedule.is_empty() {
        return Err(Error::validation("schedule", "is empty"));
    }
    Ok(gas_of(schedule, burn_rate, grid))
}

fn gas_of(schedule: &ControlSchedule, burn_rate: f64, grid: &Grid) -> f64 {
    burn_rate * grid.dt_control() * schedule.on_blocks() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve_milp, SolveOptions};
    use crate::thermal::{compute_thermal_coefficients, PhysicalConstants};

    fn house(id: &str, burn_rate: f64, theta0: f64) -> HouseParams {
        HouseParams {
            id: id.into(),
            category: "t".into(),
            volume: 400.0,
            wall_area: 180.0,
            kappa: 0.11,
            burn_rate,
            theta0,
            setpoint: 293.15,
        }
    }

    fn coeff(h: &HouseParams) -> ThermalCoefficients {
        compute_thermal_coefficients(&PhysicalConstants::default(), h).unwrap()
    }

    #[test]
    fn deviation_and_gas() {
        let sp = 293.0;
        let flat = Trajectory { t0: 0.0, dt_state: 60.0, temps: vec![sp; 5] };
        assert_eq!(compute_deviation(&flat, sp).unwrap(), 0.0);
        let t = Trajectory { t0: 0.0, dt_state: 60.0, temps: vec![280.0, sp + 2.0, sp - 3.0] };
        assert_eq!(compute_deviation(&t, sp).unwrap(), 3.0);
        let grid = Grid::new(60.0, 180.0, 3600.0).unwrap();
        let g = compute_gas(&ControlSchedule::all(true, 20), 6e-5, &grid).unwrap();
        assert!((g - 0.216).abs() < 1e-15);
        assert_eq!(compute_gas(&ControlSchedule::all(false, 20), 6e-5, &grid).unwrap(), 0.0);
        assert!(compute_gas(&ControlSchedule::default(), 6e-5, &grid).is_err());
        let empty = Trajectory { t0: 0.0, dt_state: 60.0, temps: vec![] };
        assert!(compute_deviation(&empty, sp).is_err());
    }

    #[test]
    fn lambda_zero_never_fires() {
        let h = house("a", 6e-5, 290.0);
        let c = coeff(&h);
        let grid = Grid::new(60.0, 180.0, 1800.0).unwrap();
        let amb = AmbientSeries::constant(255.0, grid.horizon());
        let ocp = build_decentralized(&h, &c, &amb, &Type1Config::for_house(0.0, &h), &grid).unwrap();
        let sol = solve_milp(&ocp.model, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective, 0.0);
        let out = extract_outcome(&ocp, &sol, &[h.clone()], &[c], &amb).unwrap();
        assert_eq!(out.schedules[0].on_blocks(), 0);
        assert_eq!(out.gas[0], 0.0);
    }

    #[test]
    fn invalid_configs() {
        let h = house("a", 6e-5, 290.0);
        let c = coeff(&h);
        let grid = Grid::new(60.0, 180.0, 360.0).unwrap();
        let amb = AmbientSeries::constant(255.0, grid.horizon());
        assert!(build_decentralized(&h, &c, &amb, &Type1Config::for_house(1.5, &h), &grid).is_err());
        let cfg = Type2Config { gamma: 0.0, peak: 1e-4, objective: ObjectiveKind::MaxDeviation };
        assert!(build_centralized(&[h.clone()], &[c], &amb, &cfg, &grid).is_err());
        let cfg = Type2Config { gamma: 0.9, peak: 1e-4, objective: ObjectiveKind::MaxDeviation };
        assert!(matches!(
            build_centralized(&[], &[], &amb, &cfg, &grid),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn tiny_cap_forces_free_cooling() {
        let fleet = [house("a", 6e-5, 292.0), house("b", 3e-5, 293.0)];
        let coeffs: Vec<_> = fleet.iter().map(coeff).collect();
        let grid = Grid::new(60.0, 180.0, 900.0).unwrap();
        let amb = AmbientSeries::constant(260.0, grid.horizon());
        let cfg = Type2Config { gamma: 0.2, peak: 1e-4, objective: ObjectiveKind::MeanDeviation };
        let ocp = build_centralized(&fleet, &coeffs, &amb, &cfg, &grid).unwrap();
        let sol = solve_milp(&ocp.model, &SolveOptions::default()).unwrap();
        let out = extract_outcome(&ocp, &sol, &fleet, &coeffs, &amb).unwrap();
        assert!(out.schedules.iter().all(|s| s.on_blocks() == 0));
        for (i, h) in fleet.iter().enumerate() {
            let free = simulate_trajectory(h, &coeffs[i], &amb, &ControlSchedule::all(false, 5), &grid)
                .unwrap();
            assert_eq!(out.deltas[i], compute_deviation(&free, h.setpoint).unwrap());
        }
    }

    #[test]
    fn extract_rejects_missing_incumbent() {
        let h = house("a", 6e-5, 290.0);
        let c = coeff(&h);
        let grid = Grid::new(60.0, 180.0, 360.0).unwrap();
        let amb = AmbientSeries::constant(255.0, grid.horizon());
        let ocp = build_decentralized(&h, &c, &amb, &Type1Config::for_house(1.0, &h), &grid).unwrap();
        let sol = MilpSolution {
            status: SolveStatus::Infeasible,
            values: vec![],
            objective: f64::NAN,
            best_bound: f64::INFINITY,
            gap: f64::INFINITY,
            nodes: 0,
        };
        assert!(matches!(
            extract_outcome(&ocp, &sol, &[h], &[c], &amb),
            Err(Error::Validation { .. })
        ));
    }
}
