//! Stationary loop detectors: passage logging, flows and harmonic-mean speeds.

use serde::{Deserialize, Serialize};

use super::Direction;
use crate::error::{Error, Result};

/// Speeds below this floor (m/s) are clamped before harmonic averaging.
const MIN_SPEED: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub time: f64,
    pub speed: f64,
    pub lane: usize,
}

/// Aggregated detector data over one time window.
///
/// `mean_speed` is the harmonic mean of the passage speeds, which turns the
/// time-mean into a space-mean, so `density = flow / mean_speed` holds
/// exactly. `density` is lane-total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorReading {
    pub position: f64,
    pub direction: Direction,
    pub window: f64,
    pub count: usize,
    /// m/s
    pub mean_speed: f64,
    /// veh/m
    pub density: f64,
    /// veh/s
    pub flow: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Detector {
    /// Shared x coordinate (m).
    pub position: f64,
    pub direction: Direction,
    /// Distance from the entry of the detector's carriageway.
    pub(crate) travel_position: f64,
    passages: Vec<Passage>,
}

impl Detector {
    pub(crate) fn new(position: f64, direction: Direction, travel_position: f64) -> Self {
        Detector {
            position,
            direction,
            travel_position,
            passages: Vec::new(),
        }
    }

    /// Keeps passages ordered by time; passages from the same step arrive lane
    /// by lane, so the insertion point is always near the end.
    pub(crate) fn record(&mut self, passage: Passage) {
        let idx = self.passages.partition_point(|p| p.time <= passage.time);
        self.passages.insert(idx, passage);
    }

    pub fn passages(&self) -> &[Passage] {
        &self.passages
    }

    /// Reading for the sliding window `(now - window, now]`.
    pub fn read(&self, now: f64, window: f64) -> Result<DetectorReading> {
        self.aggregate(now - window, now)
    }

    /// Reading for passages in `(from, to]`.
    pub fn aggregate(&self, from: f64, to: f64) -> Result<DetectorReading> {
        let start = self.passages.partition_point(|p| p.time <= from);
        let end = self.passages.partition_point(|p| p.time <= to);
        reading_from_passages(
            &self.passages[start..end],
            self.position,
            self.direction,
            to - from,
        )
    }

    /// Time headways between consecutive passages (all lanes) in `(from, to]`.
    pub fn headways(&self, from: f64, to: f64) -> Vec<f64> {
        let start = self.passages.partition_point(|p| p.time <= from);
        let end = self.passages.partition_point(|p| p.time <= to);
        self.passages[start..end]
            .windows(2)
            .map(|w| w[1].time - w[0].time)
            .collect()
    }
}

/// Flow, harmonic-mean speed and density from a set of passages observed
/// over `window` seconds.
pub fn reading_from_passages(
    passages: &[Passage],
    position: f64,
    direction: Direction,
    window: f64,
) -> Result<DetectorReading> {
    if passages.is_empty() || window <= 0.0 {
        return Err(Error::NoDetectorData { position });
    }
    let count = passages.len();
    let inverse_sum: f64 = passages.iter().map(|p| 1.0 / p.speed.max(MIN_SPEED)).sum();
    let mean_speed = count as f64 / inverse_sum;
    let flow = count as f64 / window;
    Ok(DetectorReading {
        position,
        direction,
        window,
        count,
        mean_speed,
        density: flow / mean_speed,
        flow,
    })
}
