//! Jam-front detection from a vehicle's own smoothed speed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JamDetection {
    /// Smoothed speed below which a vehicle considers itself congested (m/s).
    pub congested_speed: f64,
    /// Smoothed speed above which a vehicle considers itself in free flow (m/s).
    pub free_speed: f64,
    /// Time constant of the exponential moving average (s).
    pub smoothing_time: f64,
}

impl Default for JamDetection {
    fn default() -> Self {
        JamDetection {
            congested_speed: 30.0 / 3.6,
            free_speed: 60.0 / 3.6,
            smoothing_time: 10.0,
        }
    }
}

impl JamDetection {
    pub fn validate(&self) -> Result<()> {
        if !(self.congested_speed > 0.0 && self.free_speed > self.congested_speed) {
            return Err(Error::invalid(
                "jam.free_speed",
                self.free_speed,
                "must exceed a positive congested speed",
            ));
        }
        if !(self.smoothing_time > 0.0) {
            return Err(Error::invalid("jam.smoothing_time", self.smoothing_time, "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontKind {
    /// Entering congestion: the upstream end of a jam.
    Upstream,
    /// Leaving congestion: the downstream end of a jam.
    Downstream,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontEvent {
    pub kind: FrontKind,
    pub position: f64,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Regime {
    /// Not yet seen free flow; no front can be reported.
    Unknown,
    Free,
    Congested,
}

/// Per-vehicle detector state.
#[derive(Debug, Clone)]
pub struct JamDetector {
    params: JamDetection,
    smoothed: f64,
    regime: Regime,
}

impl JamDetector {
    pub fn new(params: JamDetection, initial_speed: f64) -> Self {
        let regime = if initial_speed >= params.free_speed {
            Regime::Free
        } else {
            Regime::Unknown
        };
        JamDetector {
            params,
            smoothed: initial_speed,
            regime,
        }
    }

    pub fn smoothed_speed(&self) -> f64 {
        self.smoothed
    }

    /// Feeds the speed observed at `(time, position)` after an interval `dt`.
    pub fn update(&mut self, speed: f64, position: f64, time: f64, dt: f64) -> Option<FrontEvent> {
        let w = -(-dt / self.params.smoothing_time).exp_m1();
        self.smoothed += w * (speed - self.smoothed);
        let (next, kind) = match self.regime {
            Regime::Unknown if self.smoothed >= self.params.free_speed => (Regime::Free, None),
            Regime::Free if self.smoothed < self.params.congested_speed => {
                (Regime::Congested, Some(FrontKind::Upstream))
            }
            Regime::Congested if self.smoothed > self.params.free_speed => {
                (Regime::Free, Some(FrontKind::Downstream))
            }
            r => (r, None),
        };
        self.regime = next;
        kind.map(|kind| FrontEvent {
            kind,
            position,
            time,
        })
    }
}

/// Runs a detector over a sampled trajectory `(time, position, speed)`.
pub fn detect_jam_fronts(params: JamDetection, trajectory: &[(f64, f64, f64)]) -> Vec<FrontEvent> {
    let Some(&(mut t_prev, _, v0)) = trajectory.first() else {
        return Vec::new();
    };
    let mut det = JamDetector::new(params, v0);
    let mut events = Vec::new();
    for &(t, x, v) in &trajectory[1..] {
        events.extend(det.update(v, x, t, t - t_prev));
        t_prev = t;
    }
    events
}
