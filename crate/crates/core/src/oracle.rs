//! Kinematic Monte Carlo oracle of the three-stage transmission process.
//!
//! Each sample places the first relay candidate at `-r + E` with
//! `E ~ Exp(lambda2)`, moves it at constant `v2`, and waits an
//! `Exp(lambda1 (v1 + v2))` time for the first destination vehicle once the
//! message is available. Nothing here calls into [`crate::analytics`]; the two
//! are meant to be compared against each other.
//!
//! Random numbers come from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`, so a seed reproduces the same samples on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{CommParams, RangeModel, TrafficConditions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSample {
    /// Initial position of the relay (m), message source at 0.
    pub x2_initial: f64,
    /// Range used for both hops of this message (m).
    pub range: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Broadcast period. `None` is continuous broadcasting. With a period,
    /// each of the two transversal hops waits for the broadcaster's next
    /// transmission, a uniform delay in `[0, period)` with random phase; the
    /// waits add to the total transmission time.
    pub broadcast_interval: Option<f64>,
}

/// Unit draw in (0, 1].
fn unit_open_closed(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    -unit_open_closed(rng).ln() / rate
}

/// Stateful sampler owning its random stream.
#[derive(Debug, Clone)]
pub struct Oracle {
    tc: TrafficConditions,
    cp: CommParams,
    options: OracleOptions,
    rng: ChaCha8Rng,
}

impl Oracle {
    pub fn new(tc: TrafficConditions, cp: CommParams, seed: u64) -> Result<Self> {
        Self::with_options(tc, cp, seed, OracleOptions::default())
    }

    pub fn with_options(
        tc: TrafficConditions,
        cp: CommParams,
        seed: u64,
        options: OracleOptions,
    ) -> Result<Self> {
        tc.validate()?;
        cp.validate()?;
        if tc.alpha * tc.rho2 <= 0.0 {
            return Err(Error::NonTerminating("no equipped relay vehicles in direction 2"));
        }
        if tc.alpha * tc.rho1 <= 0.0 {
            return Err(Error::NonTerminating("no equipped receivers in direction 1"));
        }
        if let Some(period) = options.broadcast_interval {
            if !(period.is_finite() && period >= 0.0) {
                return Err(Error::invalid("broadcast_interval", period, "must be non-negative"));
            }
        }
        Ok(Oracle {
            tc,
            cp,
            options,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn next_sample(&mut self) -> OracleSample {
        let TrafficConditions { v1, v2, rho1, rho2, alpha } = self.tc;
        let relay_rate = alpha * rho2;
        let receiver_rate = alpha * rho1;

        let range = match self.cp.range_model {
            RangeModel::Fixed { range } => range,
            RangeModel::Exponential { rate } => exponential(&mut self.rng, rate),
        };
        let x2 = -range + exponential(&mut self.rng, relay_rate);

        // the relay closes in on the source at v1 + v2
        let tau1 = ((x2 - range) / (v1 + v2)).max(0.0);
        // availability once the relay passes -r_min + r
        let trigger = -self.cp.r_min + range;
        let tau2 = ((x2 - trigger) / v2).max(0.0);
        let wait = exponential(&mut self.rng, receiver_rate * (v1 + v2));
        let mut tau3 = tau2 + wait;

        let mut tau1 = tau1;
        if let Some(period) = self.options.broadcast_interval {
            let first = period * self.rng.random::<f64>();
            let second = period * self.rng.random::<f64>();
            tau1 += first;
            tau3 += first + second;
        }

        OracleSample {
            x2_initial: x2,
            range,
            tau1,
            tau2,
            tau3,
        }
    }
}

/// One sample from a fresh stream.
pub fn sample(tc: &TrafficConditions, cp: &CommParams, rng_seed: u64) -> Result<OracleSample> {
    Ok(Oracle::new(*tc, *cp, rng_seed)?.next_sample())
}

/// `n` independent samples from one seeded stream.
pub fn sample_batch(
    n: usize,
    tc: &TrafficConditions,
    cp: &CommParams,
    rng_seed: u64,
) -> Result<Vec<OracleSample>> {
    sample_batch_with(n, tc, cp, rng_seed, OracleOptions::default())
}

pub fn sample_batch_with(
    n: usize,
    tc: &TrafficConditions,
    cp: &CommParams,
    rng_seed: u64,
    options: OracleOptions,
) -> Result<Vec<OracleSample>> {
    if n == 0 {
        return Err(Error::TooFewSamples { needed: 1, have: 0 });
    }
    let mut oracle = Oracle::with_options(*tc, *cp, rng_seed, options)?;
    Ok((0..n).map(|_| oracle.next_sample()).collect())
}
