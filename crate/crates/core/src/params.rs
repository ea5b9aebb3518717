//! Parameter types shared by the closed-form model, the Monte Carlo oracle and
//! the simulation harness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Homogeneous traffic state of both driving directions plus the penetration
/// level. Direction 1 travels towards +x, direction 2 towards -x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficConditions {
    /// Mean speed of direction 1 (m/s).
    pub v1: f64,
    /// Mean speed of direction 2 (m/s).
    pub v2: f64,
    /// Lane-total density of direction 1 (1/m).
    pub rho1: f64,
    /// Lane-total density of direction 2 (1/m).
    pub rho2: f64,
    /// Fraction of equipped vehicles.
    pub alpha: f64,
}

impl TrafficConditions {
    pub fn new(v1: f64, v2: f64, rho1: f64, rho2: f64, alpha: f64) -> Result<Self> {
        let tc = TrafficConditions {
            v1,
            v2,
            rho1,
            rho2,
            alpha,
        };
        tc.validate()?;
        Ok(tc)
    }

    /// Identical speed and density in both directions.
    pub fn symmetric(v: f64, rho: f64, alpha: f64) -> Result<Self> {
        Self::new(v, v, rho, rho, alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v1.is_finite() && self.v1 > 0.0) {
            return Err(Error::invalid("v1", self.v1, "speed must be positive"));
        }
        if !(self.v2.is_finite() && self.v2 > 0.0) {
            return Err(Error::invalid("v2", self.v2, "speed must be positive"));
        }
        if !(self.rho1.is_finite() && self.rho1 >= 0.0) {
            return Err(Error::invalid("rho1", self.rho1, "density must be non-negative"));
        }
        if !(self.rho2.is_finite() && self.rho2 >= 0.0) {
            return Err(Error::invalid("rho2", self.rho2, "density must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid("alpha", self.alpha, "penetration must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Partial density of equipped vehicles in direction 1.
    pub fn lambda1(&self) -> f64 {
        self.alpha * self.rho1
    }

    /// Partial density of equipped vehicles in direction 2.
    pub fn lambda2(&self) -> f64 {
        self.alpha * self.rho2
    }

    /// Equipped density of direction 1 rescaled to the relay's frame:
    /// `lambda1 * (v1 + v2) / v2`.
    pub fn lambda_tilde1(&self) -> f64 {
        self.lambda1() * (self.v1 + self.v2) / self.v2
    }

    pub fn is_symmetric(&self) -> bool {
        self.v1 == self.v2 && self.rho1 == self.rho2
    }
}

/// Maximum distance of instantaneous, error-free direct communication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum RangeModel {
    /// Deterministic range `range` (m).
    Fixed { range: f64 },
    /// Exponentially distributed range with rate `rate` (1/m), identical for
    /// both hops of one message.
    Exponential { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommParams {
    pub range_model: RangeModel,
    /// Minimum distance upstream of the source at which a delivery is useful (m).
    pub r_min: f64,
}

impl CommParams {
    pub fn fixed(range: f64, r_min: f64) -> Result<Self> {
        let cp = CommParams {
            range_model: RangeModel::Fixed { range },
            r_min,
        };
        cp.validate()?;
        Ok(cp)
    }

    pub fn exponential(rate: f64, r_min: f64) -> Result<Self> {
        let cp = CommParams {
            range_model: RangeModel::Exponential { rate },
            r_min,
        };
        cp.validate()?;
        Ok(cp)
    }

    pub fn validate(&self) -> Result<()> {
        match self.range_model {
            RangeModel::Fixed { range } if !(range.is_finite() && range > 0.0) => {
                return Err(Error::invalid("range", range, "broadcast range must be positive"));
            }
            RangeModel::Exponential { rate } if !(rate.is_finite() && rate > 0.0) => {
                return Err(Error::invalid("rate", rate, "range rate must be positive"));
            }
            _ => {}
        }
        if !(self.r_min.is_finite() && self.r_min > 0.0) {
            return Err(Error::invalid("r_min", self.r_min, "must be positive"));
        }
        Ok(())
    }

    /// The fixed range, if this is the deterministic model.
    pub fn fixed_range(&self) -> Option<f64> {
        match self.range_model {
            RangeModel::Fixed { range } => Some(range),
            RangeModel::Exponential { .. } => None,
        }
    }

    /// Minimum complete transmission time `(r_min - 2r) / v2`. Negative when
    /// `r_min < 2r`. Only defined for the fixed-range model.
    pub fn tau_min(&self, v2: f64) -> Option<f64> {
        self.fixed_range().map(|r| (self.r_min - 2.0 * r) / v2)
    }
}
