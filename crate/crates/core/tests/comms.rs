use transhop::comms::{CommLayer, CommsConfig, DeliveryStatus, MessageKind, TransmissionRecord};
use transhop::experiments::validate::{run_cell, CellSpec};
use transhop::stats::{ks_two_sample, EmpiricalDistribution};
use transhop::traffic::{Direction, DirectionDemand, RoadConfig, Simulation, TrafficConfig};

fn tau2_sample(inflow1: f64, seed: u64) -> Vec<f64> {
    let spec = CellSpec {
        alpha: 0.1,
        lanes: 2,
        messages: 400,
        max_duration: 20.0 * 3600.0,
        seed,
        ..CellSpec::default()
    };
    // the cell runner uses one inflow for both directions; run the
    // simulation directly to vary direction 1 alone
    let mut road = spec.road.clone();
    road.lanes_per_direction = spec.lanes;
    let config = TrafficConfig {
        road,
        demand: [
            DirectionDemand::constant(inflow1 / 3600.0),
            DirectionDemand::constant(1200.0 / 3600.0),
        ],
        alpha: spec.alpha,
    };
    let mut sim = Simulation::new(config, seed).unwrap();
    let mut comms = CommLayer::new(spec.comms, sim.length(), seed).unwrap().without_event_log();
    sim.run_until(1200.0).unwrap();
    while comms.finished().len() < spec.messages {
        sim.step().unwrap();
        comms.update(&sim);
    }
    comms.finished().iter().filter_map(|r| r.tau2).collect()
}

#[test]
fn tau2_does_not_depend_on_direction_one_density() {
    let sparse = EmpiricalDistribution::new(tau2_sample(600.0, 11)).unwrap();
    let dense = EmpiricalDistribution::new(tau2_sample(1600.0, 12)).unwrap();
    let d = ks_two_sample(&sparse, &dense).unwrap();
    let (n, m) = (sparse.len() as f64, dense.len() as f64);
    // 99% critical value
    let critical = 1.63 * ((n + m) / (n * m)).sqrt();
    assert!(d < critical, "KS {d} vs {critical}");
}

#[test]
fn first_relay_is_first_to_deliver_at_uniform_speed() {
    let road = RoadConfig {
        desired_speed_std: 0.0,
        ..RoadConfig::default()
    };
    let spec = CellSpec {
        alpha: 0.05,
        lanes: 2,
        messages: 1200,
        road,
        comms: CommsConfig {
            track_all_relays: true,
            ..CommsConfig::default()
        },
        seed: 1,
        ..CellSpec::default()
    };
    let run = run_cell(&spec).unwrap();
    let rate = run.report.relay_order_violations.unwrap();
    assert!(run.report.delivered > 1000);
    assert!(rate < 0.01, "violation rate {rate}");
}

#[test]
fn message_rate_matches_equipped_flow() {
    let config = TrafficConfig {
        road: RoadConfig::default(),
        demand: [DirectionDemand::constant(1200.0 / 3600.0); 2],
        alpha: 0.05,
    };
    let mut sim = Simulation::new(config, 21).unwrap();
    let landmark = 10_000.0;
    let detector = sim.add_detector(landmark, Direction::One);
    let mut comms = CommLayer::new(CommsConfig::default(), sim.length(), 21).unwrap();
    let warmup = 1200.0;
    sim.run_until(warmup).unwrap();
    while sim.time() < warmup + 3600.0 {
        sim.step().unwrap();
        comms.update(&sim);
    }
    let passed = sim
        .detector(Direction::One, detector)
        .passages()
        .iter()
        .filter(|p| p.time > warmup)
        .count() as f64;
    let created = comms.counters().created as f64;
    let expected = 0.05 * passed;
    let sd = (0.05 * 0.95 * passed).sqrt();
    assert!((created - expected).abs() < 3.0 * sd, "{created} messages for {passed} vehicles");
}

#[test]
fn delivered_records_respect_the_destination_region() {
    let spec = CellSpec {
        alpha: 0.08,
        lanes: 1,
        messages: 300,
        seed: 5,
        ..CellSpec::default()
    };
    let run = run_cell(&spec).unwrap();
    let delivered: Vec<&TransmissionRecord> = run
        .records
        .iter()
        .filter(|r| r.status == DeliveryStatus::Delivered)
        .collect();
    assert!(!delivered.is_empty());
    for r in delivered {
        assert_eq!(r.kind, MessageKind::LandmarkTest);
        assert!(r.tau3.unwrap() >= r.tau2.unwrap());
        assert!(r.delivery_position.unwrap() <= r.source_position - spec.comms.r_min + 1e-9);
    }
}
