use super::*;

fn config(lanes: usize, per_lane_per_h: f64, length: f64) -> TrafficConfig {
    TrafficConfig {
        road: RoadConfig {
            length,
            lanes_per_direction: lanes,
            ..RoadConfig::default()
        },
        demand: [DirectionDemand::constant(per_lane_per_h / 3600.0); 2],
        alpha: 0.05,
    }
}

fn empty_road(lanes: usize) -> TrafficConfig {
    let mut c = config(lanes, 0.0, 20_000.0);
    c.demand = [DirectionDemand::disabled(); 2];
    c
}

#[test]
fn single_vehicle_approaches_desired_speed_monotonically() {
    let mut sim = Simulation::new(empty_road(1), 1).unwrap();
    sim.spawn(Direction::One, 0, 0.0, 0.0, 30.0, false);
    let mut last = 0.0;
    for _ in 0..2400 {
        sim.step().unwrap();
        let Some(v) = sim.vehicles(Direction::One).next() else { break };
        assert!(v.speed >= last && v.speed <= 30.0);
        last = v.speed;
    }
    assert!((last - 30.0).abs() < 0.05, "{last}");
}

/// IDM acceleration in steady following (no approach rate), written out
/// directly from the model definition.
fn steady_accel(p: &IdmParams, v: f64, v0: f64, gap: f64) -> f64 {
    let s_star = p.min_gap + v * p.time_headway;
    p.max_accel * (1.0 - (v / v0).powf(p.accel_exponent) - (s_star / gap).powi(2))
}

#[test]
fn follower_settles_at_equilibrium_gap() {
    let mut sim = Simulation::new(empty_road(1), 1).unwrap();
    let (v_lead, v0) = (20.0, 33.0);
    sim.spawn(Direction::One, 0, 400.0, v_lead, v_lead, false);
    sim.spawn(Direction::One, 0, 250.0, v_lead, v0, false);
    sim.run_until(600.0).unwrap();
    let cars: Vec<_> = sim.vehicles(Direction::One).collect();
    assert_eq!(cars.len(), 2);
    assert_eq!(cars[0].speed, v_lead);
    let gap = cars[0].s - cars[0].idm.length - cars[1].s;

    let p = IdmParams::default();
    let (mut lo, mut hi) = (p.min_gap, 1000.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if steady_accel(&p, v_lead, v0, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((gap - lo).abs() < 0.05, "gap {gap}, equilibrium {lo}");
    assert!((cars[1].speed - v_lead).abs() < 1e-3);
}

#[test]
fn vehicles_are_conserved_and_never_collide() {
    let mut sim = Simulation::new(config(2, 1500.0, 5_000.0), 7).unwrap();
    for _ in 0..8000 {
        sim.step().unwrap();
        for dir in Direction::BOTH {
            let cw = sim.carriageway(dir);
            let c = cw.counters();
            assert_eq!(c.injected, cw.vehicle_count() as u64 + c.exited);
            for lane in cw.lanes() {
                assert!(lane.windows(2).all(|w| w[0].s >= w[1].s));
                assert!(lane.iter().all(|v| v.speed >= 0.0));
            }
        }
    }
    let c = sim.carriageway(Direction::One).counters();
    assert!(c.exited > 0 && c.lane_changes > 0);
}

#[test]
fn long_run_inflow_matches_demand() {
    let q = 1200.0;
    let mut sim = Simulation::new(config(4, q, 2_000.0), 11).unwrap();
    let hours = 10.0;
    sim.run_until(hours * 3600.0).unwrap();
    let c = sim.carriageway(Direction::One).counters();
    let target = q * 4.0 * hours;
    let entered = (c.injected + sim.carriageway(Direction::One).queued() as u64) as f64;
    assert!((entered - target).abs() < 0.02 * target, "{entered} vs {target}");
    assert_eq!(c.suppressed, 0);
}

#[test]
fn penetration_extremes() {
    for (alpha, expect) in [(0.0, false), (1.0, true)] {
        let mut c = config(2, 1500.0, 3_000.0);
        c.alpha = alpha;
        let mut sim = Simulation::new(c, 3).unwrap();
        sim.run_until(300.0).unwrap();
        for dir in Direction::BOTH {
            let vehicles: Vec<_> = sim.vehicles(dir).collect();
            assert!(!vehicles.is_empty());
            assert!(vehicles.iter().all(|v| v.equipped == expect));
        }
    }
}

#[test]
fn desired_speeds_respect_floor() {
    let mut c = config(1, 1800.0, 3_000.0);
    c.road.desired_speed_std = 30.0;
    let mut sim = Simulation::new(c, 5).unwrap();
    sim.run_until(600.0).unwrap();
    let floor = sim.config().road.desired_speed_floor;
    assert!(sim.vehicles(Direction::Two).all(|v| v.desired_speed >= floor));
}

#[test]
fn directions_are_independent() {
    let both = config(2, 1400.0, 4_000.0);
    let mut only_one = both.clone();
    only_one.demand[1] = DirectionDemand::disabled();
    let mut a = Simulation::new(both, 21).unwrap();
    let mut b = Simulation::new(only_one, 21).unwrap();
    for _ in 0..3000 {
        a.step().unwrap();
        b.step().unwrap();
    }
    assert!(a.vehicles(Direction::Two).next().is_some());
    assert!(b.vehicles(Direction::Two).next().is_none());
    let va: Vec<_> = a.vehicles(Direction::One).cloned().collect();
    let vb: Vec<_> = b.vehicles(Direction::One).cloned().collect();
    assert_eq!(va, vb);
}

#[test]
fn zero_strength_bottleneck_changes_nothing() {
    let plain = config(2, 1600.0, 4_000.0);
    let mut with = plain.clone();
    with.road.bottleneck = Some(BottleneckSpec {
        position: 2_000.0,
        length: 500.0,
        direction: Direction::One,
        strength: 0.0,
    });
    let mut a = Simulation::new(plain, 9).unwrap();
    let mut b = Simulation::new(with, 9).unwrap();
    for _ in 0..3000 {
        a.step().unwrap();
        b.step().unwrap();
    }
    let va: Vec<_> = a.vehicles(Direction::One).cloned().collect();
    let vb: Vec<_> = b.vehicles(Direction::One).cloned().collect();
    assert_eq!(va, vb);
}

#[test]
fn direction_two_runs_towards_negative_x() {
    let mut sim = Simulation::new(empty_road(1), 1).unwrap();
    sim.spawn(Direction::Two, 0, 0.0, 25.0, 25.0, false);
    let x0 = sim.vehicles(Direction::Two).next().unwrap().x(sim.length());
    sim.run_until(10.0).unwrap();
    let x1 = sim.vehicles(Direction::Two).next().unwrap().x(sim.length());
    assert_eq!(x0, 20_000.0);
    assert!((x0 - x1 - 250.0).abs() < 1e-9);
}

#[test]
fn detector_sees_every_vehicle_once() {
    let mut sim = Simulation::new(config(2, 1200.0, 3_000.0), 4).unwrap();
    let idx = sim.add_detector(1_000.0, Direction::Two);
    sim.run_until(1800.0).unwrap();
    let det = sim.detector(Direction::Two, idx);
    let c = sim.carriageway(Direction::Two).counters();
    let downstream = sim
        .vehicles(Direction::Two)
        .filter(|v| v.x(sim.length()) < 1_000.0)
        .count() as u64;
    assert_eq!(det.passages().len() as u64, c.exited + downstream);
    assert!(det.passages().windows(2).all(|w| w[0].time <= w[1].time));
}

#[test]
fn collision_is_reported() {
    let mut sim = Simulation::new(empty_road(1), 1).unwrap();
    sim.spawn(Direction::One, 0, 3.0, 0.0, 1.0, false);
    sim.spawn(Direction::One, 0, 0.0, 10.0, 10.0, false);
    let err = sim.run_until(60.0).unwrap_err();
    assert!(matches!(err, Error::Collision { direction: 1, lane: 0, .. }), "{err}");
}
