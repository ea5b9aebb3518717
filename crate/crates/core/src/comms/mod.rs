//! Store-and-forward messaging between the two driving directions.
//!
//! A message created by a direction-1 vehicle is picked up by an equipped
//! direction-2 vehicle within broadcast range (first transversal hop), carried
//! upstream, and handed back to an equipped direction-1 vehicle at least
//! `r_min` behind the source (second transversal hop). Distances are purely
//! longitudinal; hops are instantaneous and error-free.

pub mod jam;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::EmpiricalDistribution;
use crate::traffic::{Direction, Simulation, VehicleId};
pub use jam::{detect_jam_fronts, FrontEvent, FrontKind, JamDetection, JamDetector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommsConfig {
    /// Fixed broadcast range r (m).
    pub range: f64,
    /// Minimum distance upstream of the source where a message is useful (m).
    pub r_min: f64,
    /// Shared x coordinate of the test-message landmark.
    pub landmark: Option<f64>,
    /// `None` broadcasts every time step; otherwise every vehicle broadcasts
    /// once per interval at its own random phase (s).
    pub broadcast_interval: Option<f64>,
    /// Follow every relay that picks a message up, not only the first one.
    pub track_all_relays: bool,
    pub jam_detection: Option<JamDetection>,
}

impl Default for CommsConfig {
    fn default() -> Self {
        CommsConfig {
            range: 200.0,
            r_min: 1000.0,
            landmark: Some(10_000.0),
            broadcast_interval: None,
            track_all_relays: false,
            jam_detection: None,
        }
    }
}

impl CommsConfig {
    pub fn validate(&self, road_length: f64) -> Result<()> {
        if !(self.range > 0.0) {
            return Err(Error::invalid("comms.range", self.range, "must be positive"));
        }
        if !(self.r_min > 0.0) {
            return Err(Error::invalid("comms.r_min", self.r_min, "must be positive"));
        }
        if let Some(x) = self.landmark {
            if !(x > 0.0 && x < road_length) {
                return Err(Error::invalid("comms.landmark", x, "must lie inside the road"));
            }
        }
        if let Some(dt) = self.broadcast_interval {
            if !(dt > 0.0) {
                return Err(Error::invalid("comms.broadcast_interval", dt, "must be positive"));
            }
        }
        if let Some(j) = &self.jam_detection {
            j.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    LandmarkTest,
    UpstreamJamFront,
    DownstreamJamFront,
}

impl MessageKind {
    pub fn name(self) -> &'static str {
        match self {
            MessageKind::LandmarkTest => "landmark_test",
            MessageKind::UpstreamJamFront => "upstream_jam_front",
            MessageKind::DownstreamJamFront => "downstream_jam_front",
        }
    }

    fn from_front(kind: FrontKind) -> Self {
        match kind {
            FrontKind::Upstream => MessageKind::UpstreamJamFront,
            FrontKind::Downstream => MessageKind::DownstreamJamFront,
        }
    }

    /// Jam warnings keep spreading after their first delivery.
    fn is_persistent(self) -> bool {
        self != MessageKind::LandmarkTest
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JamPayload {
    pub front_position: f64,
    pub front_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub id: u64,
    pub kind: MessageKind,
    pub source: VehicleId,
    pub source_position: f64,
    pub creation_time: f64,
    pub payload: Option<JamPayload>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryStatus {
    Pending,
    Delivered,
    /// The first relay left the road (or no relay was ever found) before a
    /// delivery.
    Undeliverable,
}

/// Timing of one message; all times relative to its creation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionRecord {
    pub message_id: u64,
    pub kind: MessageKind,
    pub creation_time: f64,
    pub source_position: f64,
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    /// Delivery by the first relay.
    pub tau3: Option<f64>,
    pub relay_id: Option<VehicleId>,
    pub receiver_id: Option<VehicleId>,
    pub delivery_position: Option<f64>,
    /// Earliest delivery by any relay; only tracked with `track_all_relays`.
    pub tau3_any_relay: Option<f64>,
    pub status: DeliveryStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommEventKind {
    Created,
    FirstHop,
    Available,
    Delivered,
    /// Further reception of a persistent message by a direction-1 vehicle.
    Received,
}

/// One entry of the communication event log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommEvent {
    pub time: f64,
    pub message_id: u64,
    pub message_kind: MessageKind,
    pub event: CommEventKind,
    pub vehicle: VehicleId,
    pub position: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommCounters {
    pub created: u64,
    pub delivered: u64,
    pub undeliverable: u64,
    pub receptions: u64,
}

/// Most recent jam information a direction-1 vehicle has received.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Received {
    pub message_id: u64,
    pub payload: JamPayload,
    pub received_at: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Knowledge {
    pub upstream: Option<Received>,
    pub downstream: Option<Received>,
}

impl Knowledge {
    pub fn latest(&self, kind: MessageKind) -> Option<&Received> {
        match kind {
            MessageKind::UpstreamJamFront => self.upstream.as_ref(),
            MessageKind::DownstreamJamFront => self.downstream.as_ref(),
            MessageKind::LandmarkTest => None,
        }
    }

    fn store(&mut self, kind: MessageKind, info: Received) {
        let slot = match kind {
            MessageKind::UpstreamJamFront => &mut self.upstream,
            MessageKind::DownstreamJamFront => &mut self.downstream,
            MessageKind::LandmarkTest => return,
        };
        if slot.is_none_or(|old| old.payload.front_time <= info.payload.front_time) {
            *slot = Some(info);
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    id: VehicleId,
    x: f64,
}

/// Equipped vehicles of both directions at one instant, sorted by x.
struct Snapshot {
    nodes: [Vec<Node>; 2],
    positions: BTreeMap<VehicleId, f64>,
}

impl Snapshot {
    fn take(sim: &Simulation) -> Self {
        let length = sim.length();
        let mut positions = BTreeMap::new();
        let nodes = Direction::BOTH.map(|dir| {
            let mut nodes: Vec<Node> = sim
                .vehicles(dir)
                .filter(|v| v.equipped)
                .map(|v| Node {
                    id: v.id,
                    x: v.x(length),
                })
                .collect();
            nodes.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.id.cmp(&b.id)));
            positions.extend(nodes.iter().map(|n| (n.id, n.x)));
            nodes
        });
        Snapshot { nodes, positions }
    }

    /// Equipped vehicles of `dir` with `lo <= x <= hi`, ascending in x.
    fn within(&self, dir: Direction, lo: f64, hi: f64) -> &[Node] {
        let nodes = &self.nodes[dir.index()];
        let start = nodes.partition_point(|n| n.x < lo);
        let end = nodes.partition_point(|n| n.x <= hi);
        &nodes[start..end.max(start)]
    }
}

#[derive(Debug, Clone)]
struct ActiveMessage {
    message: Message,
    record: TransmissionRecord,
    /// Relays holding the message, with pickup time.
    holders: BTreeMap<VehicleId, f64>,
    first_relay_lost: bool,
    receivers: BTreeSet<VehicleId>,
}

/// True when a vehicle with the given broadcast phase transmits in `(t - dt, t]`.
fn broadcasts(
    phases: &mut BTreeMap<VehicleId, f64>,
    rng: &mut ChaCha8Rng,
    interval: Option<f64>,
    id: VehicleId,
    t: f64,
    dt: f64,
) -> bool {
    let Some(interval) = interval else {
        return true;
    };
    let phase = *phases.entry(id).or_insert_with(|| rng.random::<f64>() * interval);
    let last = phase + ((t - phase) / interval).floor() * interval;
    t - last < dt
}

/// Communication state running alongside a [`Simulation`].
#[derive(Debug, Clone)]
pub struct CommLayer {
    config: CommsConfig,
    rng: ChaCha8Rng,
    next_id: u64,
    active: BTreeMap<u64, ActiveMessage>,
    finished: Vec<TransmissionRecord>,
    messages: Vec<Message>,
    events: Vec<CommEvent>,
    record_events: bool,
    previous_x: BTreeMap<VehicleId, f64>,
    detectors: BTreeMap<VehicleId, JamDetector>,
    phases: BTreeMap<VehicleId, f64>,
    knowledge: BTreeMap<VehicleId, Knowledge>,
    counters: CommCounters,
}

impl CommLayer {
    pub fn new(config: CommsConfig, road_length: f64, seed: u64) -> Result<Self> {
        config.validate(road_length)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(3);
        Ok(CommLayer {
            config,
            rng,
            next_id: 0,
            active: BTreeMap::new(),
            finished: Vec::new(),
            messages: Vec::new(),
            events: Vec::new(),
            record_events: true,
            previous_x: BTreeMap::new(),
            detectors: BTreeMap::new(),
            phases: BTreeMap::new(),
            knowledge: BTreeMap::new(),
            counters: CommCounters::default(),
        })
    }

    /// Disables the event log for long validation runs.
    pub fn without_event_log(mut self) -> Self {
        self.record_events = false;
        self
    }

    pub fn config(&self) -> &CommsConfig {
        &self.config
    }

    pub fn counters(&self) -> CommCounters {
        self.counters
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn events(&self) -> &[CommEvent] {
        &self.events
    }

    /// Records of retired messages, in retirement order.
    pub fn finished(&self) -> &[TransmissionRecord] {
        &self.finished
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    /// Records of all messages (retired and in flight), ordered by id.
    pub fn records(&self) -> Vec<TransmissionRecord> {
        let mut all: Vec<_> = self
            .finished
            .iter()
            .copied()
            .chain(self.active.values().map(|m| m.record))
            .collect();
        all.sort_by_key(|r| r.message_id);
        all
    }

    pub fn knowledge(&self, vehicle: VehicleId) -> Option<&Knowledge> {
        self.knowledge.get(&vehicle)
    }

    fn log(&mut self, message: &Message, event: CommEventKind, vehicle: VehicleId, x: f64, t: f64) {
        if self.record_events {
            self.events.push(CommEvent {
                time: t,
                message_id: message.id,
                message_kind: message.kind,
                event,
                vehicle,
                position: x,
            });
        }
    }

    fn create(&mut self, kind: MessageKind, source: VehicleId, x: f64, t: f64, payload: Option<JamPayload>) {
        let message = Message {
            id: self.next_id,
            kind,
            source,
            source_position: x,
            creation_time: t,
            payload,
        };
        self.next_id += 1;
        self.counters.created += 1;
        self.messages.push(message);
        self.log(&message, CommEventKind::Created, source, x, t);
        let record = TransmissionRecord {
            message_id: message.id,
            kind,
            creation_time: t,
            source_position: x,
            tau1: None,
            tau2: None,
            tau3: None,
            relay_id: None,
            receiver_id: None,
            delivery_position: None,
            tau3_any_relay: None,
            status: DeliveryStatus::Pending,
        };
        self.active.insert(
            message.id,
            ActiveMessage {
                message,
                record,
                holders: BTreeMap::new(),
                first_relay_lost: false,
                receivers: BTreeSet::new(),
            },
        );
    }

    fn generate(&mut self, sim: &Simulation, t: f64, dt: f64) {
        let length = sim.length();
        let mut created = Vec::new();
        for v in sim.vehicles(Direction::One).filter(|v| v.equipped) {
            let x = v.x(length);
            let previous = self.previous_x.insert(v.id, x);
            if let (Some(landmark), Some(prev)) = (self.config.landmark, previous) {
                if prev < landmark && x >= landmark {
                    created.push((MessageKind::LandmarkTest, v.id, x, None));
                }
            }
            if let Some(params) = self.config.jam_detection {
                match self.detectors.get_mut(&v.id) {
                    Some(det) => {
                        if let Some(ev) = det.update(v.speed, x, t, dt) {
                            let payload = JamPayload {
                                front_position: ev.position,
                                front_time: ev.time,
                            };
                            created.push((MessageKind::from_front(ev.kind), v.id, x, Some(payload)));
                        }
                    }
                    None => {
                        self.detectors.insert(v.id, JamDetector::new(params, v.speed));
                    }
                }
            }
        }
        for (kind, id, x, payload) in created {
            self.create(kind, id, x, t, payload);
        }
    }

    /// Advances the communication state to the simulation's current time.
    /// Call once after every traffic step.
    pub fn update(&mut self, sim: &Simulation) {
        let t = sim.time();
        let dt = sim.time_step();
        self.generate(sim, t, dt);
        let snap = Snapshot::take(sim);

        let CommsConfig {
            range: r,
            r_min,
            broadcast_interval: interval,
            track_all_relays: track_all,
            ..
        } = self.config;
        let mut log = Vec::new();
        let mut retired = Vec::new();
        for (&id, m) in self.active.iter_mut() {
            let created = m.message.creation_time;
            let origin = m.message.source_position;
            let source_x = snap.positions.get(&m.message.source).copied();

            let first = m.record.relay_id;
            m.holders.retain(|h, _| snap.positions.contains_key(h));
            if let Some(relay) = first {
                if m.record.tau3.is_none() && !m.holders.contains_key(&relay) {
                    m.first_relay_lost = true;
                }
            }

            // first transversal hop
            if let Some(xs) = source_x {
                let wanted = m.record.relay_id.is_none() || track_all;
                if wanted
                    && broadcasts(&mut self.phases, &mut self.rng, interval, m.message.source, t, dt)
                {
                    for node in snap.within(Direction::Two, xs - r, xs + r) {
                        if m.holders.contains_key(&node.id) {
                            continue;
                        }
                        if m.record.relay_id.is_none() {
                            m.record.relay_id = Some(node.id);
                            m.record.tau1 = Some(t - created);
                            log.push((m.message, CommEventKind::FirstHop, node.id, node.x));
                        }
                        m.holders.insert(node.id, t);
                        if !track_all {
                            break;
                        }
                    }
                }
            }

            // availability of the first relay in the destination region
            let boundary = origin - r_min;
            if m.record.tau2.is_none() {
                if let Some(xr) = m.record.relay_id.and_then(|id| snap.positions.get(&id)) {
                    if *xr <= boundary + r {
                        m.record.tau2 = Some(t - created);
                        log.push((m.message, CommEventKind::Available, m.record.relay_id.unwrap(), *xr));
                    }
                }
            }

            // second transversal hop; jam warnings stay useful to every
            // vehicle still approaching the front, so their later receptions
            // reach up to the source position
            let reach = if m.message.kind.is_persistent() { origin } else { boundary };
            for &holder in m.holders.keys() {
                let xh = snap.positions[&holder];
                if xh - r > reach {
                    continue;
                }
                if !broadcasts(&mut self.phases, &mut self.rng, interval, holder, t, dt) {
                    continue;
                }
                let heard = snap.within(Direction::One, xh - r, (xh + r).min(reach));
                let destination = &heard[..heard.partition_point(|n| n.x <= boundary)];
                if let Some(nearest) = destination.last() {
                    if track_all && m.record.tau3_any_relay.is_none() {
                        m.record.tau3_any_relay = Some(t - created);
                    }
                    if Some(holder) == m.record.relay_id && m.record.tau3.is_none() && !m.first_relay_lost {
                        assert!(nearest.x <= boundary, "delivery outside the destination region");
                        m.record.tau3 = Some(t - created);
                        m.record.receiver_id = Some(nearest.id);
                        m.record.delivery_position = Some(nearest.x);
                        m.record.status = DeliveryStatus::Delivered;
                        self.counters.delivered += 1;
                        log.push((m.message, CommEventKind::Delivered, nearest.id, nearest.x));
                    }
                }
                if let Some(payload) = m.message.payload {
                    for node in heard {
                        if m.receivers.insert(node.id) {
                            self.counters.receptions += 1;
                            self.knowledge.entry(node.id).or_default().store(
                                m.message.kind,
                                Received {
                                    message_id: id,
                                    payload,
                                    received_at: t,
                                },
                            );
                            log.push((m.message, CommEventKind::Received, node.id, node.x));
                        }
                    }
                }
            }

            let exhausted = source_x.is_none() && m.holders.is_empty();
            let done = if m.message.kind.is_persistent() {
                exhausted
            } else {
                let first_done = m.record.tau3.is_some()
                    || m.first_relay_lost
                    || (source_x.is_none() && m.record.relay_id.is_none());
                let any_done = !track_all || m.record.tau3_any_relay.is_some() || exhausted;
                first_done && any_done
            };
            if done {
                retired.push(id);
            }
        }

        for (message, event, vehicle, x) in log {
            self.log(&message, event, vehicle, x, t);
        }
        for id in retired {
            let mut m = self.active.remove(&id).expect("retired message is active");
            if m.record.status == DeliveryStatus::Pending {
                m.record.status = DeliveryStatus::Undeliverable;
                self.counters.undeliverable += 1;
            }
            self.finished.push(m.record);
        }

        let present = |id: &VehicleId| snap.positions.contains_key(id);
        self.previous_x.retain(|id, _| present(id));
        self.detectors.retain(|id, _| present(id));
        self.phases.retain(|id, _| present(id));
        self.knowledge.retain(|id, _| present(id));
    }

    /// Ages `t - front_time` of the most recent `kind` information held by
    /// equipped direction-1 vehicles within `tolerance` of `x`. Vehicles
    /// without such information are counted separately.
    pub fn ages_near(&self, sim: &Simulation, kind: MessageKind, x: f64, tolerance: f64) -> AgeSample {
        let length = sim.length();
        let mut sample = AgeSample::default();
        for v in sim.vehicles(Direction::One).filter(|v| v.equipped) {
            if (v.x(length) - x).abs() > tolerance {
                continue;
            }
            match self.knowledge.get(&v.id).and_then(|k| k.latest(kind)) {
                Some(info) => sample.ages.push(sim.time() - info.payload.front_time),
                None => sample.uninformed += 1,
            }
        }
        sample
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AgeSample {
    pub ages: Vec<f64>,
    pub uninformed: usize,
}

impl AgeSample {
    pub fn extend(&mut self, other: AgeSample) {
        self.ages.extend(other.ages);
        self.uninformed += other.uninformed;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeStatistics {
    pub count: usize,
    pub uninformed: usize,
    /// s
    pub mean: f64,
    pub median: f64,
    pub q90: f64,
}

/// Statistics of the ages of jam information `distance` upstream of a front,
/// pooled over probes taken at several instants.
pub fn message_age_at_distance(sample: &AgeSample) -> Result<AgeStatistics> {
    let dist = EmpiricalDistribution::new(sample.ages.clone())?;
    Ok(AgeStatistics {
        count: dist.len(),
        uninformed: sample.uninformed,
        mean: dist.mean()?,
        median: dist.median()?,
        q90: dist.quantile(0.9)?,
    })
}
