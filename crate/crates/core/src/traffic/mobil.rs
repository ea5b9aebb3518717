use serde::{Deserialize, Serialize};

/// Parameters of the MOBIL lane-changing rule (symmetric variant).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilParams {
    pub politeness: f64,
    /// m/s^2
    pub threshold: f64,
    /// Maximum deceleration imposed on the new follower (m/s^2).
    pub safe_decel: f64,
    /// Seconds between two lane-change decisions of one vehicle.
    pub decision_interval: f64,
}

impl Default for MobilParams {
    fn default() -> Self {
        MobilParams {
            politeness: 0.2,
            threshold: 0.2,
            safe_decel: 4.0,
            decision_interval: 1.0,
        }
    }
}

/// Acceleration changes caused by one prospective lane change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneChangeEffect {
    /// Own acceleration after minus before.
    pub own_gain: f64,
    /// Own acceleration in the target lane.
    pub own_after: f64,
    /// New follower: acceleration after the change, and its change.
    pub new_follower_after: f64,
    pub new_follower_gain: f64,
    /// Old follower: change in acceleration once the gap opens.
    pub old_follower_gain: f64,
}

impl MobilParams {
    pub fn is_safe(&self, e: &LaneChangeEffect) -> bool {
        e.new_follower_after >= -self.safe_decel && e.own_after >= -self.safe_decel
    }

    pub fn incentive(&self, e: &LaneChangeEffect) -> f64 {
        e.own_gain + self.politeness * (e.new_follower_gain + e.old_follower_gain) - self.threshold
    }

    /// Positive incentive and safe: the change is taken.
    pub fn accepts(&self, e: &LaneChangeEffect) -> bool {
        self.is_safe(e) && self.incentive(e) > 0.0
    }
}
