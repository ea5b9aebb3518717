//! Simulation vs closed form: landmark messages in homogeneous free traffic.

use serde::{Deserialize, Serialize};

use crate::analytics::{self, Quantity};
use crate::comms::{CommLayer, CommsConfig, DeliveryStatus, TransmissionRecord};
use crate::error::{Error, Result};
use crate::params::{CommParams, TrafficConditions};
use crate::stats::{self, EmpiricalDistribution, QuantityComparison};
use crate::traffic::{
    detector::reading_from_passages, DetectorReading, Direction, DirectionDemand, Passage, RoadConfig,
    Simulation, TrafficConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub alpha: f64,
    pub lanes: usize,
    /// Stop after this many retired landmark messages.
    pub messages: usize,
    /// Hard limit on simulated time after warm-up (s).
    pub max_duration: f64,
    /// veh/s per lane, both directions.
    pub inflow_per_lane: f64,
    pub road: RoadConfig,
    pub comms: CommsConfig,
    pub seed: u64,
}

impl Default for CellSpec {
    fn default() -> Self {
        CellSpec {
            alpha: 0.05,
            lanes: 2,
            messages: 10_000,
            max_duration: 400.0 * 3600.0,
            inflow_per_lane: 1200.0 / 3600.0,
            road: RoadConfig::default(),
            comms: CommsConfig::default(),
            seed: 1,
        }
    }
}

impl CellSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid("validate.alpha", self.alpha, "must lie in (0, 1]"));
        }
        if self.comms.landmark.is_none() {
            return Err(Error::Config("validation cells need a landmark".into()));
        }
        if self.messages == 0 {
            return Err(Error::invalid("validate.messages", 0.0, "must be positive"));
        }
        if !(self.max_duration > 0.0 && self.inflow_per_lane > 0.0) {
            return Err(Error::invalid(
                "validate.inflow_per_lane",
                self.inflow_per_lane,
                "inflow and duration must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredTraffic {
    /// m/s, veh/m (lane-total)
    pub v1: f64,
    pub rho1: f64,
    pub v2: f64,
    pub rho2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub alpha: f64,
    pub lanes: usize,
    pub seed: u64,
    pub warmup: f64,
    pub simulated: f64,
    pub messages: usize,
    pub delivered: usize,
    pub undeliverable: usize,
    pub measured: MeasuredTraffic,
    pub tau1: QuantityComparison,
    pub tau2: QuantityComparison,
    pub tau3: QuantityComparison,
    /// Relative deviation of the simulated from the analytic median of tau3.
    pub tau3_median_error: f64,
    /// Fraction of delivered messages where a later relay beat the first one;
    /// only with `track_all_relays`.
    pub relay_order_violations: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CellRun {
    pub report: CellReport,
    pub records: Vec<TransmissionRecord>,
}

fn detector_positions(comms: &CommsConfig, length: f64) -> Vec<f64> {
    let centre = comms.landmark.unwrap_or(0.5 * length);
    [centre - comms.r_min, centre]
        .into_iter()
        .filter(|x| *x > 0.0 && *x < length)
        .collect()
}

/// Speed and density of one direction pooled over several detectors.
fn pooled_reading(sim: &Simulation, dir: Direction, from: f64, to: f64) -> Result<DetectorReading> {
    let detectors = sim.carriageway(dir).detectors();
    let passages: Vec<Passage> = detectors
        .iter()
        .flat_map(|d| d.passages().iter().filter(|p| p.time > from && p.time <= to).copied())
        .collect();
    let position = detectors.first().map_or(0.0, |d| d.position);
    reading_from_passages(&passages, position, dir, (to - from) * detectors.len() as f64)
}

fn samples(records: &[TransmissionRecord], pick: impl Fn(&TransmissionRecord) -> Option<f64>) -> Result<EmpiricalDistribution> {
    EmpiricalDistribution::new(records.iter().filter_map(pick).collect())
}

/// Compares samples of one characteristic time with the closed form at `tc`.
pub fn compare_quantity(
    quantity: Quantity,
    label: &str,
    dist: &EmpiricalDistribution,
    tc: &TrafficConditions,
    cp: &CommParams,
) -> Result<QuantityComparison> {
    stats::compare(
        label,
        dist,
        |t| analytics::evaluate(quantity, t, tc, cp).unwrap_or(f64::NAN),
        |q| analytics::quantile(quantity, q, tc, cp),
    )
}

pub fn run_cell(spec: &CellSpec) -> Result<CellRun> {
    spec.validate()?;
    let mut road = spec.road.clone();
    road.lanes_per_direction = spec.lanes;
    road.bottleneck = None;
    let config = TrafficConfig {
        road,
        demand: [DirectionDemand::constant(spec.inflow_per_lane); 2],
        alpha: spec.alpha,
    };
    let mut sim = Simulation::new(config, spec.seed)?;
    let length = sim.length();
    for x in detector_positions(&spec.comms, length) {
        for dir in Direction::BOTH {
            sim.add_detector(x, dir);
        }
    }
    let mut comms = CommLayer::new(spec.comms, length, spec.seed)?.without_event_log();

    let warmup = 2.0 * length / sim.config().road.desired_speed_mean;
    sim.run_until(warmup)?;
    let stop = warmup + spec.max_duration;
    while sim.time() < stop && comms.finished().len() < spec.messages {
        sim.step()?;
        comms.update(&sim);
    }
    let end = sim.time();

    let r1 = pooled_reading(&sim, Direction::One, warmup, end)?;
    let r2 = pooled_reading(&sim, Direction::Two, warmup, end)?;
    let measured = MeasuredTraffic {
        v1: r1.mean_speed,
        rho1: r1.density,
        v2: r2.mean_speed,
        rho2: r2.density,
    };
    let tc = TrafficConditions::new(measured.v1, measured.v2, measured.rho1, measured.rho2, spec.alpha)?;
    let cp = CommParams::fixed(spec.comms.range, spec.comms.r_min)?;

    let records: Vec<TransmissionRecord> = comms.finished().to_vec();
    if records.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, have: 0 });
    }
    let tau1 = compare_quantity(Quantity::P1, "tau1", &samples(&records, |r| r.tau1)?, &tc, &cp)?;
    let tau2 = compare_quantity(Quantity::P2, "tau2", &samples(&records, |r| r.tau2)?, &tc, &cp)?;
    let tau3 = compare_quantity(Quantity::P3, "tau3", &samples(&records, |r| r.tau3)?, &tc, &cp)?;
    let delivered: Vec<&TransmissionRecord> = records
        .iter()
        .filter(|r| r.status == DeliveryStatus::Delivered)
        .collect();
    let relay_order_violations = spec.comms.track_all_relays.then(|| {
        let violations = delivered
            .iter()
            .filter(|r| r.tau3_any_relay.is_some_and(|any| any < r.tau3.unwrap()))
            .count();
        violations as f64 / delivered.len().max(1) as f64
    });
    let report = CellReport {
        alpha: spec.alpha,
        lanes: spec.lanes,
        seed: spec.seed,
        warmup,
        simulated: end - warmup,
        messages: records.len(),
        delivered: delivered.len(),
        undeliverable: records.len() - delivered.len(),
        measured,
        tau3_median_error: (tau3.quantiles.q50 - tau3.analytic_quantiles.q50) / tau3.analytic_quantiles.q50,
        tau1,
        tau2,
        tau3,
        relay_order_violations,
    };
    Ok(CellRun { report, records })
}

/// Runs independent cells on separate threads; results keep the input order.
pub fn run_cells(specs: &[CellSpec], parallel: bool) -> Vec<Result<CellRun>> {
    if !parallel {
        return specs.iter().map(run_cell).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = specs.iter().map(|s| scope.spawn(move || run_cell(s))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("validation cell panicked"))
            .collect()
    })
}
