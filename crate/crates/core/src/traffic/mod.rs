//! Microscopic bi-directional multi-lane freeway: IDM car following, MOBIL
//! lane changes, open boundaries with stochastic inflow, loop detectors and an
//! optional flow-conserving bottleneck.
//!
//! Both directions share one x axis. Direction 1 drives towards +x from
//! `x = 0`, direction 2 towards -x from `x = length`. Internally every vehicle
//! carries its travelled distance `s` from the entry of its carriageway; the
//! two carriageways never interact dynamically.

mod carriageway;
pub mod demand;
pub mod detector;
pub mod idm;
pub mod mobil;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use carriageway::{Carriageway, CarriagewayCounters};
pub use demand::{ArrivalProcess, DemandProfile};
pub use detector::{Detector, DetectorReading, Passage};
pub use idm::{IdmParams, Leader};
pub use mobil::MobilParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    /// Towards +x.
    #[serde(rename = "1")]
    One,
    /// Towards -x.
    #[serde(rename = "2")]
    Two,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::One, Direction::Two];

    pub fn number(self) -> u8 {
        match self {
            Direction::One => 1,
            Direction::Two => 2,
        }
    }

    pub fn index(self) -> usize {
        self.number() as usize - 1
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::One => Direction::Two,
            Direction::Two => Direction::One,
        }
    }

    /// Shared x coordinate of travelled distance `s` on a road of `length`.
    pub fn to_x(self, s: f64, length: f64) -> f64 {
        match self {
            Direction::One => s,
            Direction::Two => length - s,
        }
    }

    pub fn to_travel(self, x: f64, length: f64) -> f64 {
        match self {
            Direction::One => x,
            Direction::Two => length - x,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VehicleId(pub u64);

impl VehicleId {
    const DIRECTION_SHIFT: u32 = 40;

    pub(crate) fn new(direction: Direction, serial: u64) -> Self {
        VehicleId(((direction.number() as u64) << Self::DIRECTION_SHIFT) | serial)
    }

    pub fn direction(self) -> Direction {
        if self.0 >> Self::DIRECTION_SHIFT == 2 {
            Direction::Two
        } else {
            Direction::One
        }
    }
}

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: VehicleId,
    pub direction: Direction,
    pub lane: usize,
    /// Distance travelled since entering the carriageway (m).
    pub s: f64,
    /// Non-negative speed along the own travel direction (m/s).
    pub speed: f64,
    pub desired_speed: f64,
    pub idm: IdmParams,
    pub equipped: bool,
    /// Acceleration applied in the last update (m/s^2).
    pub accel: f64,
    pub(crate) last_lane_change: f64,
}

impl Vehicle {
    pub fn x(&self, length: f64) -> f64 {
        self.direction.to_x(self.s, length)
    }
}

/// Local capacity reduction: the time headway of every driver is multiplied
/// by `1 + strength` over `length` metres downstream of `position`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BottleneckSpec {
    /// Shared x coordinate where the stretch begins (m).
    pub position: f64,
    /// Extent in the travel direction (m).
    pub length: f64,
    pub direction: Direction,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadConfig {
    /// m
    pub length: f64,
    pub lanes_per_direction: usize,
    /// s
    pub time_step: f64,
    /// Gaussian desired speeds, m/s.
    pub desired_speed_mean: f64,
    pub desired_speed_std: f64,
    /// Truncation floor of the desired-speed distribution (m/s).
    pub desired_speed_floor: f64,
    pub idm: IdmParams,
    pub mobil: MobilParams,
    pub bottleneck: Option<BottleneckSpec>,
}

impl Default for RoadConfig {
    fn default() -> Self {
        RoadConfig {
            length: 20_000.0,
            lanes_per_direction: 2,
            time_step: 0.25,
            desired_speed_mean: 120.0 / 3.6,
            desired_speed_std: 18.0 / 3.6,
            desired_speed_floor: 50.0 / 3.6,
            idm: IdmParams::default(),
            mobil: MobilParams::default(),
            bottleneck: None,
        }
    }
}

impl RoadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::invalid("road.length", self.length, "must be positive"));
        }
        if !(1..=4).contains(&self.lanes_per_direction) {
            return Err(Error::invalid(
                "road.lanes_per_direction",
                self.lanes_per_direction as f64,
                "must be between 1 and 4",
            ));
        }
        if !(self.time_step > 0.0) {
            return Err(Error::invalid("road.time_step", self.time_step, "must be positive"));
        }
        if !(self.desired_speed_mean > 0.0) || self.desired_speed_std < 0.0 {
            return Err(Error::invalid(
                "road.desired_speed_mean",
                self.desired_speed_mean,
                "needs positive mean and non-negative spread",
            ));
        }
        if !(self.desired_speed_floor > 0.0) {
            return Err(Error::invalid(
                "road.desired_speed_floor",
                self.desired_speed_floor,
                "must be positive",
            ));
        }
        if let Some(b) = &self.bottleneck {
            if b.strength < 0.0 || b.length < 0.0 {
                return Err(Error::invalid("bottleneck.strength", b.strength, "must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Boundary inflow of one driving direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionDemand {
    pub enabled: bool,
    pub profile: DemandProfile,
    pub arrivals: ArrivalProcess,
}

impl DirectionDemand {
    pub fn constant(per_lane_veh_per_s: f64) -> Self {
        DirectionDemand {
            enabled: true,
            profile: DemandProfile::Constant {
                per_lane: per_lane_veh_per_s,
            },
            arrivals: ArrivalProcess::Poisson,
        }
    }

    pub fn disabled() -> Self {
        DirectionDemand {
            enabled: false,
            ..Self::constant(0.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficConfig {
    pub road: RoadConfig,
    pub demand: [DirectionDemand; 2],
    /// Penetration level of equipped vehicles.
    pub alpha: f64,
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<()> {
        self.road.validate()?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid("alpha", self.alpha, "penetration must lie in [0, 1]"));
        }
        for d in &self.demand {
            if d.profile.max_rate() < 0.0 {
                return Err(Error::invalid("demand", d.profile.max_rate(), "inflow must be non-negative"));
            }
        }
        Ok(())
    }
}

/// What happened at the boundaries during one step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub entered: Vec<VehicleId>,
    pub exited: Vec<VehicleId>,
}

/// The complete simulation state.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: TrafficConfig,
    time: f64,
    step_index: u64,
    carriageways: [Carriageway; 2],
}

impl Simulation {
    /// Each direction draws from its own ChaCha8 stream (stream id = direction
    /// number) so toggling one direction leaves the other bit-identical.
    pub fn new(config: TrafficConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let carriageways = Direction::BOTH.map(|dir| Carriageway::new(&config, dir, seed));
        Ok(Simulation {
            config,
            time: 0.0,
            step_index: 0,
            carriageways,
        })
    }

    pub fn config(&self) -> &TrafficConfig {
        &self.config
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn time_step(&self) -> f64 {
        self.config.road.time_step
    }

    pub fn length(&self) -> f64 {
        self.config.road.length
    }

    pub fn carriageway(&self, direction: Direction) -> &Carriageway {
        &self.carriageways[direction.index()]
    }

    pub fn carriageway_mut(&mut self, direction: Direction) -> &mut Carriageway {
        &mut self.carriageways[direction.index()]
    }

    pub fn vehicles(&self, direction: Direction) -> impl Iterator<Item = &Vehicle> {
        self.carriageway(direction).vehicles()
    }

    /// Registers a loop detector at shared coordinate `x`; returns its index
    /// within the direction.
    pub fn add_detector(&mut self, x: f64, direction: Direction) -> usize {
        let length = self.length();
        self.carriageway_mut(direction).add_detector(x, length)
    }

    pub fn detector(&self, direction: Direction, index: usize) -> &Detector {
        &self.carriageway(direction).detectors()[index]
    }

    pub fn read_detector(
        &self,
        direction: Direction,
        index: usize,
        window: f64,
    ) -> Result<DetectorReading> {
        self.detector(direction, index).read(self.time, window)
    }

    /// Places a vehicle directly on the road, bypassing the boundary.
    pub fn spawn(
        &mut self,
        direction: Direction,
        lane: usize,
        s: f64,
        speed: f64,
        desired_speed: f64,
        equipped: bool,
    ) -> VehicleId {
        let road = self.config.road.clone();
        self.carriageway_mut(direction)
            .spawn(&road, lane, s, speed, desired_speed, equipped)
    }

    /// Installs (or with `None` removes) a bottleneck.
    pub fn apply_bottleneck(&mut self, spec: Option<BottleneckSpec>) {
        self.config.road.bottleneck = spec;
        let length = self.length();
        for cw in &mut self.carriageways {
            cw.set_bottleneck(spec, length);
        }
    }

    /// Advances both directions by one time step.
    pub fn step(&mut self) -> Result<StepReport> {
        let mut report = StepReport::default();
        for (cw, demand) in self.carriageways.iter_mut().zip(&self.config.demand) {
            cw.step(&self.config, demand, self.time, self.step_index, &mut report)?;
        }
        self.step_index += 1;
        self.time = self.step_index as f64 * self.config.road.time_step;
        Ok(report)
    }

    /// Runs until `time >= until`, discarding boundary reports.
    pub fn run_until(&mut self, until: f64) -> Result<()> {
        while self.time < until {
            self.step()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
