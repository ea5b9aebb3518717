use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::demand::ArrivalStream;
use super::idm::Leader;
use super::mobil::LaneChangeEffect;
use super::{
    BottleneckSpec, Detector, Direction, DirectionDemand, Passage, RoadConfig, StepReport,
    TrafficConfig, Vehicle, VehicleId,
};
use crate::error::{Error, Result};

/// Arrivals waiting at the upstream boundary beyond this are dropped.
const MAX_QUEUED_ARRIVALS: u32 = 500;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarriagewayCounters {
    /// Demand arrivals generated at the boundary.
    pub arrivals: u64,
    pub injected: u64,
    pub exited: u64,
    /// Arrivals that could not enter in the step they arrived.
    pub delayed: u64,
    /// Arrivals dropped because the boundary queue was full.
    pub suppressed: u64,
    pub lane_changes: u64,
}

#[derive(Debug, Clone, Copy)]
struct QueuedVehicle {
    desired_speed: f64,
    equipped: bool,
}

#[derive(Debug, Clone, Copy)]
struct BottleneckStretch {
    start: f64,
    end: f64,
    factor: f64,
}

/// One driving direction: its lanes, boundary generators and detectors.
#[derive(Debug, Clone)]
pub struct Carriageway {
    direction: Direction,
    /// Per lane, ordered by decreasing travelled distance (leader first).
    lanes: Vec<Vec<Vehicle>>,
    rng: ChaCha8Rng,
    arrivals: Vec<ArrivalStream>,
    waiting: Vec<u32>,
    queue_head: Vec<Option<QueuedVehicle>>,
    detectors: Vec<Detector>,
    bottleneck: Option<BottleneckStretch>,
    next_serial: u64,
    counters: CarriagewayCounters,
}

impl Carriageway {
    pub(crate) fn new(config: &TrafficConfig, direction: Direction, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(direction.number() as u64);
        let lanes = config.road.lanes_per_direction;
        let demand = &config.demand[direction.index()];
        let arrivals = (0..lanes)
            .map(|_| ArrivalStream::new(demand.arrivals, &demand.profile, &mut rng))
            .collect();
        let mut cw = Carriageway {
            direction,
            lanes: vec![Vec::new(); lanes],
            rng,
            arrivals,
            waiting: vec![0; lanes],
            queue_head: vec![None; lanes],
            detectors: Vec::new(),
            bottleneck: None,
            next_serial: 0,
            counters: CarriagewayCounters::default(),
        };
        cw.set_bottleneck(config.road.bottleneck, config.road.length);
        cw
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn lanes(&self) -> &[Vec<Vehicle>] {
        &self.lanes
    }

    pub fn vehicles(&self) -> impl Iterator<Item = &Vehicle> {
        self.lanes.iter().flatten()
    }

    pub fn vehicle_count(&self) -> usize {
        self.lanes.iter().map(Vec::len).sum()
    }

    pub fn counters(&self) -> CarriagewayCounters {
        self.counters
    }

    pub fn detectors(&self) -> &[Detector] {
        &self.detectors
    }

    /// Arrivals currently queued at the upstream boundary.
    pub fn queued(&self) -> u32 {
        self.waiting.iter().sum()
    }

    pub(crate) fn add_detector(&mut self, x: f64, length: f64) -> usize {
        let s = self.direction.to_travel(x, length);
        self.detectors.push(Detector::new(x, self.direction, s));
        self.detectors.len() - 1
    }

    pub(crate) fn set_bottleneck(&mut self, spec: Option<BottleneckSpec>, length: f64) {
        self.bottleneck = spec.filter(|b| b.direction == self.direction).map(|b| {
            let start = self.direction.to_travel(b.position, length);
            BottleneckStretch {
                start,
                end: start + b.length,
                factor: 1.0 + b.strength,
            }
        });
    }

    fn headway_factor(&self, s: f64) -> f64 {
        match self.bottleneck {
            Some(b) if s >= b.start && s <= b.end => b.factor,
            _ => 1.0,
        }
    }

    /// Places a vehicle at travelled distance `s` in `lane`. Used to build
    /// controlled scenarios; regular traffic enters through the boundary.
    pub fn spawn(
        &mut self,
        config: &RoadConfig,
        lane: usize,
        s: f64,
        speed: f64,
        desired_speed: f64,
        equipped: bool,
    ) -> VehicleId {
        let id = VehicleId::new(self.direction, self.next_serial);
        self.next_serial += 1;
        let vehicle = Vehicle {
            id,
            direction: self.direction,
            lane,
            s,
            speed,
            desired_speed,
            idm: config.idm,
            equipped,
            accel: 0.0,
            last_lane_change: f64::NEG_INFINITY,
        };
        let idx = self.lanes[lane].partition_point(|o| o.s > s);
        self.lanes[lane].insert(idx, vehicle);
        self.counters.injected += 1;
        id
    }

    fn accel_behind(&self, follower: &Vehicle, leader: Option<&Vehicle>) -> f64 {
        let leader = leader.map(|l| Leader {
            gap: l.s - l.idm.length - follower.s,
            speed: l.speed,
        });
        follower.idm.acceleration(
            follower.speed,
            follower.desired_speed,
            leader,
            self.headway_factor(follower.s),
        )
    }

    fn compute_accelerations(&mut self) {
        for lane in 0..self.lanes.len() {
            for i in 0..self.lanes[lane].len() {
                let leader = i.checked_sub(1).map(|j| &self.lanes[lane][j]);
                let a = self.accel_behind(&self.lanes[lane][i], leader);
                self.lanes[lane][i].accel = a;
            }
        }
    }

    fn evaluate_change(&self, road: &RoadConfig, lane: usize, i: usize, target: usize) -> Option<f64> {
        let current = &self.lanes[lane];
        let c = &current[i];
        let old_leader = i.checked_sub(1).map(|j| &current[j]);
        let old_follower = current.get(i + 1);

        let target_lane = &self.lanes[target];
        let idx = target_lane.partition_point(|o| o.s > c.s);
        let new_leader = idx.checked_sub(1).map(|j| &target_lane[j]);
        let new_follower = target_lane.get(idx);

        if let Some(l) = new_leader {
            if l.s - l.idm.length - c.s <= 0.0 {
                return None;
            }
        }
        if let Some(f) = new_follower {
            if c.s - c.idm.length - f.s <= 0.0 {
                return None;
            }
        }

        let own_after = self.accel_behind(c, new_leader);
        let (new_follower_after, new_follower_gain) = match new_follower {
            Some(f) => {
                let after = self.accel_behind(f, Some(c));
                (after, after - f.accel)
            }
            None => (0.0, 0.0),
        };
        let old_follower_gain = match old_follower {
            Some(o) => self.accel_behind(o, old_leader) - o.accel,
            None => 0.0,
        };
        let effect = LaneChangeEffect {
            own_gain: own_after - c.accel,
            own_after,
            new_follower_after,
            new_follower_gain,
            old_follower_gain,
        };
        road.mobil.accepts(&effect).then(|| road.mobil.incentive(&effect))
    }

    fn change_lanes(&mut self, road: &RoadConfig, t: f64, step_index: u64) -> bool {
        let lanes = self.lanes.len();
        if lanes < 2 {
            return false;
        }
        let interval = road.mobil.decision_interval;
        let period = ((interval / road.time_step).round() as u64).max(1);
        let mut changed = false;
        for lane in 0..lanes {
            let mut i = 0;
            while i < self.lanes[lane].len() {
                let v = &self.lanes[lane][i];
                if !(step_index + v.id.0).is_multiple_of(period) || t - v.last_lane_change < interval {
                    i += 1;
                    continue;
                }
                let mut best: Option<(usize, f64)> = None;
                let candidates = [lane.checked_sub(1), (lane + 1 < lanes).then_some(lane + 1)];
                for target in candidates.into_iter().flatten() {
                    if let Some(incentive) = self.evaluate_change(road, lane, i, target) {
                        if best.is_none_or(|(_, b)| incentive > b) {
                            best = Some((target, incentive));
                        }
                    }
                }
                match best {
                    Some((target, _)) => {
                        let mut vehicle = self.lanes[lane].remove(i);
                        vehicle.lane = target;
                        vehicle.last_lane_change = t;
                        let idx = self.lanes[target].partition_point(|o| o.s > vehicle.s);
                        self.lanes[target].insert(idx, vehicle);
                        self.counters.lane_changes += 1;
                        changed = true;
                    }
                    None => i += 1,
                }
            }
        }
        changed
    }

    fn integrate(&mut self, t: f64, dt: f64) {
        let Carriageway {
            lanes, detectors, ..
        } = self;
        for (lane_index, lane) in lanes.iter_mut().enumerate() {
            for v in lane.iter_mut() {
                let (s_old, v_old, a) = (v.s, v.speed, v.accel);
                let v_new = v_old + a * dt;
                if v_new < 0.0 {
                    // stops within the step
                    v.s += -0.5 * v_old * v_old / a;
                    v.speed = 0.0;
                } else {
                    v.s += v_old * dt + 0.5 * a * dt * dt;
                    v.speed = v_new;
                }
                for det in detectors.iter_mut() {
                    if s_old < det.travel_position && det.travel_position <= v.s {
                        let frac = (det.travel_position - s_old) / (v.s - s_old);
                        det.record(Passage {
                            time: t + frac * dt,
                            speed: v_old + frac * (v.speed - v_old),
                            lane: lane_index,
                        });
                    }
                }
            }
        }
    }

    fn check_collisions(&self, t: f64) -> Result<()> {
        for (lane_index, lane) in self.lanes.iter().enumerate() {
            for pair in lane.windows(2) {
                let gap = pair[0].s - pair[0].idm.length - pair[1].s;
                if gap < 0.0 {
                    return Err(Error::Collision {
                        time: t,
                        direction: self.direction.number(),
                        lane: lane_index,
                        leader: pair[0].id.0,
                        follower: pair[1].id.0,
                        gap,
                    });
                }
            }
        }
        Ok(())
    }

    fn remove_exited(&mut self, length: f64, report: &mut StepReport) {
        for lane in &mut self.lanes {
            let k = lane.partition_point(|v| v.s > length);
            report.exited.extend(lane.drain(..k).map(|v| v.id));
            self.counters.exited += k as u64;
        }
    }

    fn draw_vehicle(&mut self, road: &RoadConfig, alpha: f64) -> QueuedVehicle {
        let normal = Normal::new(road.desired_speed_mean, road.desired_speed_std)
            .expect("validated desired-speed distribution");
        let mut desired_speed = road.desired_speed_floor;
        for _ in 0..1000 {
            let v = normal.sample(&mut self.rng);
            if v >= road.desired_speed_floor {
                desired_speed = v;
                break;
            }
        }
        let equipped = self.rng.random::<f64>() < alpha;
        QueuedVehicle {
            desired_speed,
            equipped,
        }
    }

    fn inject(
        &mut self,
        config: &TrafficConfig,
        demand: &DirectionDemand,
        t: f64,
        report: &mut StepReport,
    ) {
        let road = &config.road;
        let dt = road.time_step;
        for lane in 0..self.lanes.len() {
            let new = self.arrivals[lane].arrivals(&demand.profile, t, dt, &mut self.rng);
            self.counters.arrivals += new as u64;
            self.waiting[lane] += new;
            if self.waiting[lane] > MAX_QUEUED_ARRIVALS {
                self.counters.suppressed += (self.waiting[lane] - MAX_QUEUED_ARRIVALS) as u64;
                self.waiting[lane] = MAX_QUEUED_ARRIVALS;
            }
            if self.waiting[lane] == 0 {
                continue;
            }
            let queued = match self.queue_head[lane] {
                Some(q) => q,
                None => self.draw_vehicle(road, config.alpha),
            };
            let (gap, leader_speed) = match self.lanes[lane].last() {
                Some(l) => (l.s - l.idm.length, l.speed),
                None => (f64::INFINITY, f64::INFINITY),
            };
            let idm = &road.idm;
            let reference = queued.desired_speed.min(leader_speed);
            let headway = idm.time_headway * self.headway_factor(0.0);
            if gap >= idm.min_gap + 0.5 * headway * reference {
                let speed = reference.min((gap - idm.min_gap) / headway).max(0.0);
                let id = self.spawn(road, lane, 0.0, speed, queued.desired_speed, queued.equipped);
                report.entered.push(id);
                self.queue_head[lane] = None;
                self.waiting[lane] -= 1;
            } else if self.queue_head[lane].is_none() {
                self.counters.delayed += 1;
                self.queue_head[lane] = Some(queued);
            }
        }
    }

    pub(crate) fn step(
        &mut self,
        config: &TrafficConfig,
        demand: &DirectionDemand,
        t: f64,
        step_index: u64,
        report: &mut StepReport,
    ) -> Result<()> {
        let road = &config.road;
        self.compute_accelerations();
        if self.change_lanes(road, t, step_index) {
            self.compute_accelerations();
        }
        self.integrate(t, road.time_step);
        self.check_collisions(t + road.time_step)?;
        self.remove_exited(road.length, report);
        if demand.enabled {
            self.inject(config, demand, t, report);
        }
        Ok(())
    }
}
