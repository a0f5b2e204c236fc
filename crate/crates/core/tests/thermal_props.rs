mod common;

use common::{random_toy, Toy};
use gasdr::report::generate_fleet;
use gasdr::thermal::*;
use gasdr::{ControlSchedule, Grid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Max error against θ_ss + (θ0 − θ_ss)e^(−αt) over 24 h with the furnace
/// held at `q`.
fn closed_form_error(dt: f64, q: bool) -> f64 {
    let house = &generate_fleet(140)[75];
    let k = PhysicalConstants::default();
    let c = compute_thermal_coefficients(&k, house).unwrap();
    let amb_k = 260.0;
    let horizon = 86_400.0;
    let grid = Grid::new(dt, 240.0, horizon).unwrap();
    let sched = ControlSchedule::all(q, grid.blocks());
    let traj = simulate_trajectory(house, &c, &AmbientSeries::constant(amb_k, horizon), &sched, &grid)
        .unwrap();
    let heat = if q { c.beta * house.burn_rate } else { 0.0 };
    let ss = amb_k + heat / c.alpha;
    traj.temps
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let exact = ss + (house.theta0 - ss) * (-c.alpha * i as f64 * dt).exp();
            (t - exact).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn euler_error_is_first_order() {
    for q in [false, true] {
        let e: Vec<f64> = [120.0, 60.0, 30.0].iter().map(|&dt| closed_form_error(dt, q)).collect();
        for w in e.windows(2) {
            let ratio = w[0] / w[1];
            assert!((1.5..=2.5).contains(&ratio), "q={q}: errors {e:?}");
        }
    }
}

#[test]
fn matches_independent_euler() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let toy: Toy = random_toy(&mut rng, 1, 5);
        let bits: Vec<bool> = (0..5).map(|i| (i * 3 + toy.blocks) % 2 == 0).collect();
        let c = compute_thermal_coefficients(&PhysicalConstants::default(), &toy.fleet[0]).unwrap();
        let traj = simulate_trajectory(
            &toy.fleet[0],
            &c,
            &toy.ambient(),
            &ControlSchedule::new(bits.clone()),
            &toy.grid(),
        )
        .unwrap();
        let oracle = common::oracle_temps(&toy, 0, &bits);
        assert_eq!(traj.temps.len(), oracle.len());
        for (a, b) in traj.temps.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

fn house_strategy() -> impl Strategy<Value = HouseParams> {
    (20.0..400.0f64, 0.05..0.5f64, 3e-5..12e-5f64, 285.0..300.0f64, -3.0..3.0f64).prop_map(
        |(floor, kappa, burn, sp, off)| HouseParams {
            id: "p".into(),
            category: "p".into(),
            volume: floor * 2.5,
            wall_area: 10.0 * floor.sqrt() + floor,
            kappa,
            burn_rate: burn,
            theta0: sp + off,
            setpoint: sp,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficient_identities(h in house_strategy()) {
        let k = PhysicalConstants::default();
        let c = compute_thermal_coefficients(&k, &h).unwrap();
        let cap = k.ca * k.rho_a * h.volume;
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        prop_assert!(rel(c.alpha * cap, h.kappa * h.wall_area) <= 1e-12);
        prop_assert!(rel(c.beta * cap, k.eg) <= 1e-12);
    }

    #[test]
    fn comparison_principle(
        h in house_strategy(),
        hi in prop::collection::vec(any::<bool>(), 8),
        drop in prop::collection::vec(any::<bool>(), 8),
        amb in 240.0..290.0f64,
    ) {
        let k = PhysicalConstants::default();
        let c = compute_thermal_coefficients(&k, &h).unwrap();
        let grid = Grid::new(60.0, 180.0, 8.0 * 180.0).unwrap();
        let lo: Vec<bool> = hi.iter().zip(&drop).map(|(&a, &d)| a && !d).collect();
        let ambient = AmbientSeries::constant(amb, grid.horizon());
        let t1 = simulate_trajectory(&h, &c, &ambient, &ControlSchedule::new(hi), &grid).unwrap();
        let t2 = simulate_trajectory(&h, &c, &ambient, &ControlSchedule::new(lo), &grid).unwrap();
        for (a, b) in t1.temps.iter().zip(&t2.temps) {
            prop_assert!(a >= b);
        }
    }

    #[test]
    fn warmer_ambient_never_cools(
        h in house_strategy(),
        bits in prop::collection::vec(any::<bool>(), 6),
        base in prop::collection::vec(240.0..290.0f64, 4),
        lift in prop::collection::vec(0.0..10.0f64, 4),
    ) {
        let k = PhysicalConstants::default();
        let c = compute_thermal_coefficients(&k, &h).unwrap();
        let grid = Grid::new(60.0, 180.0, 6.0 * 180.0).unwrap();
        let at = |v: &[f64]| {
            AmbientSeries::new(v.iter().enumerate().map(|(i, &t)| (i as f64 * 360.0, t)).collect()).unwrap()
        };
        let warm: Vec<f64> = base.iter().zip(&lift).map(|(b, l)| b + l).collect();
        let s = ControlSchedule::new(bits);
        let t1 = simulate_trajectory(&h, &c, &at(&base), &s, &grid).unwrap();
        let t2 = simulate_trajectory(&h, &c, &at(&warm), &s, &grid).unwrap();
        for (a, b) in t2.temps.iter().zip(&t1.temps) {
            prop_assert!(a >= b);
        }
    }

    #[test]
    fn simulation_is_deterministic(h in house_strategy(), bits in prop::collection::vec(any::<bool>(), 5)) {
        let k = PhysicalConstants::default();
        let c = compute_thermal_coefficients(&k, &h).unwrap();
        let grid = Grid::new(60.0, 180.0, 5.0 * 180.0).unwrap();
        let a = AmbientSeries::new(vec![(0.0, 260.0), (900.0, 250.0)]).unwrap();
        let s = ControlSchedule::new(bits);
        let t1 = simulate_trajectory(&h, &c, &a, &s, &grid).unwrap();
        let t2 = simulate_trajectory(&h, &c, &a, &s, &grid).unwrap();
        prop_assert_eq!(
            t1.temps.iter().map(|t| t.to_bits()).collect::<Vec<_>>(),
            t2.temps.iter().map(|t| t.to_bits()).collect::<Vec<_>>()
        );
    }
}

#[test]
fn unstable_step_is_rejected() {
    let house = &generate_fleet(1)[0];
    let c = compute_thermal_coefficients(&PhysicalConstants::default(), house).unwrap();
    let dt = 1.0 / c.alpha;
    assert!(euler_step(house.theta0, 260.0, &c, house.burn_rate, 1.0, dt).is_err());
    assert!(euler_step(house.theta0, 260.0, &c, house.burn_rate, 0.5, 60.0).is_err());
}

#[test]
fn unit_conversions() {
    assert_eq!(fahrenheit_to_kelvin(32.0), 273.15);
    assert!((fahrenheit_to_kelvin(212.0) - 373.15).abs() < 1e-12);
    assert!((kelvin_dev_to_fahrenheit_dev(1.0) - 1.8).abs() < 1e-15);
    assert!((kelvin_to_fahrenheit(fahrenheit_to_kelvin(67.5)) - 67.5).abs() < 1e-12);
}
