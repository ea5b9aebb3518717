//! Peak-hour bottleneck scenario: jam fronts detected by equipped vehicles
//! and warnings carried upstream by the opposite direction.

use serde::{Deserialize, Serialize};

use crate::comms::{
    JamDetection,     message_age_at_distance, AgeSample, AgeStatistics, CommEvent, CommLayer, CommsConfig,
    MessageKind, TransmissionRecord,
};
use crate::error::{Error, Result};
use crate::traffic::{
    Detector,     BottleneckSpec, CarriagewayCounters, DemandProfile, Direction, DirectionDemand, RoadConfig, Simulation, TrafficConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JamSpec {
    pub alpha: f64,
    pub road: RoadConfig,
    pub bottleneck: BottleneckSpec,
    /// Per-lane inflow of direction 1 in scenario time (t = 0 after warm-up).
    pub demand: DemandProfile,
    /// Constant per-lane inflow of the free direction (veh/s).
    pub opposite_inflow: f64,
    pub comms: CommsConfig,
    /// Simulated time before t = 0, at the demand of t = 0 (s).
    pub warmup: f64,
    pub duration: f64,
    /// Distance upstream of the upstream jam front where message ages are probed (m).
    pub probe_distance: f64,
    /// Half-width of the probe window (m).
    pub probe_tolerance: f64,
    pub probe_interval: f64,
    /// Scenario-time interval in which ages are probed (s).
    pub probe_window: (f64, f64),
    /// Cell size of the space-time speed field (m, s).
    pub field_dx: f64,
    pub field_dt: f64,
    /// Interval of the equipped-vehicle trajectory samples (s).
    pub trajectory_interval: f64,
    pub detector_spacing: f64,
    pub seed: u64,
}

impl Default for JamSpec {
    fn default() -> Self {
        JamSpec {
            alpha: 0.01,
            road: RoadConfig::default(),
            bottleneck: BottleneckSpec {
                position: 10_000.0,
                length: 1000.0,
                direction: Direction::One,
                strength: 0.7,
            },
            demand: DemandProfile::Trapezoid {
                base: 800.0 / 3600.0,
                peak: 1900.0 / 3600.0,
                rise_start: 0.0,
                rise_end: 600.0,
                fall_start: 3600.0,
                fall_end: 4200.0,
            },
            opposite_inflow: 2400.0 / 3600.0,
            comms: CommsConfig {
                landmark: None,
                track_all_relays: true,
                jam_detection: Some(JamDetection::default()),
                ..CommsConfig::default()
            },
            warmup: 1200.0,
            duration: 5400.0,
            probe_distance: 1000.0,
            probe_tolerance: 250.0,
            probe_interval: 10.0,
            probe_window: (0.0, 3600.0),
            field_dx: 100.0,
            field_dt: 30.0,
            trajectory_interval: 5.0,
            detector_spacing: 1000.0,
            seed: 1,
        }
    }
}

impl JamSpec {
    pub fn validate(&self) -> Result<()> {
        if self.bottleneck.direction != Direction::One {
            return Err(Error::Config("the jam scenario expects the bottleneck in direction 1".into()));
        }
        if self.comms.jam_detection.is_none() {
            return Err(Error::Config("the jam scenario needs jam detection enabled".into()));
        }
        for (name, value) in [
            ("jam.warmup", self.warmup),
            ("jam.probe_tolerance", self.probe_tolerance),
            ("jam.probe_interval", self.probe_interval),
            ("jam.field_dx", self.field_dx),
            ("jam.field_dt", self.field_dt),
            ("jam.trajectory_interval", self.trajectory_interval),
            ("jam.detector_spacing", self.detector_spacing),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::invalid(name, value, "must be non-negative"));
            }
        }
        if !(self.duration > 0.0 && self.field_dx > 0.0 && self.field_dt > 0.0) {
            return Err(Error::invalid("jam.duration", self.duration, "duration and field cells must be positive"));
        }
        if !(self.opposite_inflow >= 0.0) {
            return Err(Error::invalid("jam.opposite_inflow", self.opposite_inflow, "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedCell {
    /// Scenario time at the start of the cell (s).
    pub t: f64,
    pub x: f64,
    /// Mean over vehicle samples in the cell (m/s); `None` when empty.
    pub speed: Option<f64>,
    pub samples: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub id: u64,
    pub direction: Direction,
    pub lane: usize,
    pub x: f64,
    pub v: f64,
    pub equipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontPosition {
    pub t: f64,
    pub upstream: f64,
    pub downstream: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JamSummary {
    /// Scenario time at which the bottleneck breaks down (s).
    pub breakdown_time: Option<f64>,
    /// Speed of the upstream front while the jam grows, positive upstream (m/s).
    pub upstream_front_speed: Option<f64>,
    /// Mean position of the downstream front (m).
    pub downstream_front_mean: Option<f64>,
    pub messages_created: usize,
    pub upstream_messages: usize,
    pub downstream_messages: usize,
    /// Front messages delivered at least `r_min` upstream, by kind.
    pub upstream_delivered: usize,
    pub downstream_delivered: usize,
    pub receptions: u64,
    /// Boundary counters of the congested direction.
    pub congested_direction: CarriagewayCounters,
    pub upstream_age: Option<AgeStatistics>,
    pub downstream_age: Option<AgeStatistics>,
}

#[derive(Debug, Clone)]
pub struct JamRun {
    pub summary: JamSummary,
    pub field: Vec<SpeedCell>,
    pub fronts: Vec<FrontPosition>,
    pub trajectories: Vec<TrajectoryPoint>,
    pub events: Vec<CommEvent>,
    pub records: Vec<TransmissionRecord>,
    /// Direction-1 loop detectors every `detector_spacing` metres.
    pub detectors: Vec<Detector>,
    /// Raw probe samples behind the age statistics, for pooling replications.
    pub upstream_ages: AgeSample,
    pub downstream_ages: AgeSample,
}

const BREAKDOWN_ROWS: usize = 5;

/// Shifts a profile given in scenario time by `offset` seconds.
fn shifted(profile: DemandProfile, offset: f64) -> DemandProfile {
    match profile {
        DemandProfile::Constant { .. } => profile,
        DemandProfile::Trapezoid {
            base,
            peak,
            rise_start,
            rise_end,
            fall_start,
            fall_end,
        } => DemandProfile::Trapezoid {
            base,
            peak,
            rise_start: rise_start + offset,
            rise_end: rise_end + offset,
            fall_start: fall_start + offset,
            fall_end: fall_end + offset,
        },
    }
}

struct Field {
    dx: f64,
    dt: f64,
    nx: usize,
    nt: usize,
    sum: Vec<f64>,
    count: Vec<u32>,
}

impl Field {
    fn new(length: f64, duration: f64, dx: f64, dt: f64) -> Self {
        let nx = (length / dx).ceil() as usize;
        let nt = (duration / dt).ceil() as usize;
        Field {
            dx,
            dt,
            nx,
            nt,
            sum: vec![0.0; nx * nt],
            count: vec![0; nx * nt],
        }
    }

    fn add(&mut self, t: f64, x: f64, v: f64) {
        let (i, j) = ((t / self.dt) as usize, (x / self.dx) as usize);
        if i < self.nt && j < self.nx {
            self.sum[i * self.nx + j] += v;
            self.count[i * self.nx + j] += 1;
        }
    }

    fn speed(&self, i: usize, j: usize) -> Option<f64> {
        let k = i * self.nx + j;
        (self.count[k] > 0).then(|| self.sum[k] / self.count[k] as f64)
    }

    fn cells(&self) -> Vec<SpeedCell> {
        (0..self.nt)
            .flat_map(|i| {
                (0..self.nx).map(move |j| SpeedCell {
                    t: i as f64 * self.dt,
                    x: j as f64 * self.dx,
                    speed: self.speed(i, j),
                    samples: self.count[i * self.nx + j],
                })
            })
            .collect()
    }

    /// Congested stretch attached to the bottleneck in time row `i`: walks
    /// upstream from the bottleneck cell while cells are slow, tolerating a
    /// single fast or empty cell.
    fn congested_stretch(&self, i: usize, bottleneck: f64, threshold: f64) -> Option<(f64, f64)> {
        let slow = |j: usize| self.speed(i, j).is_some_and(|v| v < threshold);
        let jb = ((bottleneck / self.dx) as usize).min(self.nx - 1);
        // downstream edge: the slow region may reach slightly past the bottleneck
        let mut down = None;
        for j in (jb.saturating_sub(5)..=(jb + 5).min(self.nx - 1)).rev() {
            if slow(j) {
                down = Some(j);
                break;
            }
        }
        let down = down?;
        let mut up = down;
        let mut j = down;
        while j > 0 {
            if slow(j - 1) {
                up = j - 1;
                j -= 1;
            } else if j > 1 && slow(j - 2) {
                up = j - 2;
                j -= 2;
            } else {
                break;
            }
        }
        Some((up as f64 * self.dx, (down + 1) as f64 * self.dx))
    }
}

/// Least-squares slope of `y` over `x`.
fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn run_jam(spec: &JamSpec) -> Result<JamRun> {
    spec.validate()?;
    let mut road = spec.road.clone();
    road.bottleneck = Some(spec.bottleneck);
    let jam_params = spec
        .comms
        .jam_detection
        .ok_or_else(|| Error::Config("the jam scenario needs jam detection enabled".into()))?;
    let config = TrafficConfig {
        road,
        demand: [
            DirectionDemand {
                enabled: true,
                profile: shifted(spec.demand, spec.warmup),
                arrivals: Default::default(),
            },
            DirectionDemand::constant(spec.opposite_inflow),
        ],
        alpha: spec.alpha,
    };
    let mut sim = Simulation::new(config, spec.seed)?;
    let length = sim.length();
    let mut comms = CommLayer::new(spec.comms, length, spec.seed)?;
    if spec.detector_spacing > 0.0 {
        let mut x = spec.detector_spacing;
        while x < length {
            sim.add_detector(x, Direction::One);
            x += spec.detector_spacing;
        }
    }
    sim.run_until(spec.warmup)?;

    let mut field = Field::new(length, spec.duration, spec.field_dx, spec.field_dt);
    let mut trajectories = Vec::new();
    let mut upstream_ages = AgeSample::default();
    let mut downstream_ages = AgeSample::default();
    let steps_per_probe = (spec.probe_interval / sim.time_step()).round().max(1.0) as u64;
    let steps_per_sample = (spec.trajectory_interval / sim.time_step()).round().max(1.0) as u64;
    let mut fronts: Vec<FrontPosition> = Vec::new();
    let mut last_row = usize::MAX;
    let threshold = jam_params.congested_speed;

    let end = spec.warmup + spec.duration;
    let mut k: u64 = 0;
    while sim.time() < end - 1e-9 {
        sim.step()?;
        comms.update(&sim);
        k += 1;
        let t = sim.time() - spec.warmup;
        for v in sim.vehicles(Direction::One) {
            field.add(t - 1e-9, v.x(length), v.speed);
        }
        if k.is_multiple_of(steps_per_sample) {
            for dir in Direction::BOTH {
                trajectories.extend(sim.vehicles(dir).filter(|v| v.equipped).map(|v| TrajectoryPoint {
                    t,
                    id: v.id.0,
                    direction: dir,
                    lane: v.lane,
                    x: v.x(length),
                    v: v.speed,
                    equipped: true,
                }));
            }
        }
        // fronts from the last completed field row
        let row = ((t - 1e-9) / spec.field_dt) as usize;
        if row != last_row && row > 0 {
            if let Some((up, down)) = field.congested_stretch(row - 1, spec.bottleneck.position, threshold) {
                fronts.push(FrontPosition {
                    t: (row - 1) as f64 * spec.field_dt,
                    upstream: up,
                    downstream: down,
                });
            }
            last_row = row;
        }
        let probing = t >= spec.probe_window.0 && t <= spec.probe_window.1;
        if probing && k.is_multiple_of(steps_per_probe) {
            if let Some(front) = fronts.last().filter(|f| t - f.t <= 2.0 * spec.field_dt) {
                let x = front.upstream - spec.probe_distance;
                upstream_ages.extend(comms.ages_near(&sim, MessageKind::UpstreamJamFront, x, spec.probe_tolerance));
                downstream_ages.extend(comms.ages_near(
                    &sim,
                    MessageKind::DownstreamJamFront,
                    x,
                    spec.probe_tolerance,
                ));
            }
        }
    }

    // first congested row that persists for BREAKDOWN_ROWS consecutive rows
    let breakdown_time = fronts
        .windows(BREAKDOWN_ROWS)
        .find(|w| (w[BREAKDOWN_ROWS - 1].t - w[0].t - (BREAKDOWN_ROWS - 1) as f64 * spec.field_dt).abs() < 1e-6)
        .map(|w| w[0].t);
    let fronts: Vec<FrontPosition> = fronts
        .into_iter()
        .filter(|f| breakdown_time.is_some_and(|t0| f.t >= t0))
        .collect();
    // growth phase: from breakdown to the time of maximum upstream extent
    let upstream_front_speed = fronts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.upstream.total_cmp(&b.1.upstream))
        .and_then(|(imax, _)| {
            let pts: Vec<(f64, f64)> = fronts[..=imax].iter().map(|f| (f.t, f.upstream)).collect();
            slope(&pts).map(|s| -s)
        });
    let downstream_front_mean = (!fronts.is_empty())
        .then(|| fronts.iter().map(|f| f.downstream).sum::<f64>() / fronts.len() as f64);

    let records = comms.records();
    let count = |kind: MessageKind| records.iter().filter(|r| r.kind == kind).count();
    let delivered = |kind: MessageKind| records.iter().filter(|r| r.kind == kind && r.tau3.is_some()).count();
    let summary = JamSummary {
        breakdown_time,
        upstream_front_speed,
        downstream_front_mean,
        messages_created: records.len(),
        upstream_messages: count(MessageKind::UpstreamJamFront),
        downstream_messages: count(MessageKind::DownstreamJamFront),
        upstream_delivered: delivered(MessageKind::UpstreamJamFront),
        downstream_delivered: delivered(MessageKind::DownstreamJamFront),
        receptions: comms.counters().receptions,
        congested_direction: sim.carriageway(Direction::One).counters(),
        upstream_age: message_age_at_distance(&upstream_ages).ok(),
        downstream_age: message_age_at_distance(&downstream_ages).ok(),
    };
    let events = comms
        .events()
        .iter()
        .map(|e| CommEvent {
            time: e.time - spec.warmup,
            ..*e
        })
        .collect();
    let records = records
        .into_iter()
        .map(|r| TransmissionRecord {
            creation_time: r.creation_time - spec.warmup,
            ..r
        })
        .collect();
    Ok(JamRun {
        summary,
        field: field.cells(),
        fronts,
        trajectories,
        events,
        records,
        detectors: sim.carriageway(Direction::One).detectors().to_vec(),
        upstream_ages,
        downstream_ages,
    })
}
