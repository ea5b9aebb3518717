//! Browser bindings: closed-form curves, characteristic times and an oracle
//! check, each returned as a JSON string.

use serde::Serialize;
use transhop::analytics::{self, Quantity};
use transhop::oracle::{sample_batch_with, OracleOptions};
use transhop::stats::{ks_critical_one_sample, ks_distance, EmpiricalDistribution};
use transhop::{CommParams, TrafficConditions};
use wasm_bindgen::prelude::*;

/// Symmetric road in user units: km/h, veh/km, m, km.
#[derive(Debug, Clone, Copy)]
pub struct Road {
    pub alpha: f64,
    pub speed_kmh: f64,
    pub density_per_km: f64,
    pub range_m: f64,
    pub r_min_km: f64,
}

impl Road {
    fn conditions(&self) -> transhop::Result<(TrafficConditions, CommParams)> {
        Ok((
            TrafficConditions::symmetric(self.speed_kmh / 3.6, self.density_per_km / 1000.0, self.alpha)?,
            CommParams::fixed(self.range_m, self.r_min_km * 1000.0)?,
        ))
    }
}

#[derive(Debug, Serialize)]
pub struct Curves {
    pub tau: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub p3: Vec<f64>,
    /// Exponentially distributed range with the same mean.
    pub p3_distributed: Vec<f64>,
}

pub fn curves(road: Road, tau_max: f64, points: usize) -> transhop::Result<Curves> {
    let (tc, cp) = road.conditions()?;
    let dist = CommParams::exponential(1.0 / road.range_m, cp.r_min)?;
    let n = points.max(2);
    let tau: Vec<f64> = (0..n).map(|i| tau_max * i as f64 / (n - 1) as f64).collect();
    let eval = |q: Quantity, c: &CommParams| -> transhop::Result<Vec<f64>> {
        tau.iter().map(|&t| analytics::evaluate(q, t, &tc, c)).collect()
    };
    Ok(Curves {
        p1: eval(Quantity::P1, &cp)?,
        p2: eval(Quantity::P2, &cp)?,
        p3: eval(Quantity::P3, &cp)?,
        p3_distributed: eval(Quantity::P3Distributed, &dist)?,
        tau,
    })
}

pub fn times(road: Road) -> transhop::Result<analytics::CharacteristicTimes> {
    let (_, cp) = road.conditions()?;
    analytics::characteristic_times(road.alpha, road.density_per_km / 1000.0, road.speed_kmh / 3.6, &cp)
}

#[derive(Debug, Serialize)]
pub struct OracleCheck {
    pub samples: usize,
    pub ks: f64,
    pub ks_critical: f64,
    pub median: f64,
    pub analytic_median: f64,
    /// ECDF of tau3 against the closed form on a common grid.
    pub tau: Vec<f64>,
    pub ecdf: Vec<f64>,
    pub analytic: Vec<f64>,
}

pub fn oracle_check(road: Road, samples: usize, seed: u64, broadcast_interval: Option<f64>) -> transhop::Result<OracleCheck> {
    let (tc, cp) = road.conditions()?;
    let options = OracleOptions { broadcast_interval };
    let draws = sample_batch_with(samples, &tc, &cp, seed, options)?;
    let dist = EmpiricalDistribution::new(draws.iter().map(|s| s.tau3).collect())?;
    let cdf = |t: f64| analytics::p3(t, &tc, &cp).unwrap_or(f64::NAN);
    let hi = dist.quantile(0.995)?;
    let tau: Vec<f64> = (0..=200).map(|i| hi * i as f64 / 200.0).collect();
    Ok(OracleCheck {
        samples,
        ks: ks_distance(&dist, cdf)?,
        ks_critical: ks_critical_one_sample(samples),
        median: dist.median()?,
        analytic_median: analytics::quantile(Quantity::P3, 0.5, &tc, &cp)?,
        ecdf: tau.iter().map(|&t| dist.ecdf(t)).collect::<transhop::Result<_>>()?,
        analytic: tau.iter().map(|&t| cdf(t)).collect(),
        tau,
    })
}

fn to_js<T: Serialize>(r: transhop::Result<T>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = curves)]
pub fn curves_js(
    alpha: f64,
    speed_kmh: f64,
    density_per_km: f64,
    range_m: f64,
    r_min_km: f64,
    tau_max: f64,
    points: usize,
) -> Result<String, JsError> {
    let road = Road { alpha, speed_kmh, density_per_km, range_m, r_min_km };
    to_js(curves(road, tau_max, points))
}

#[wasm_bindgen(js_name = characteristicTimes)]
pub fn times_js(alpha: f64, speed_kmh: f64, density_per_km: f64, range_m: f64, r_min_km: f64) -> Result<String, JsError> {
    to_js(times(Road { alpha, speed_kmh, density_per_km, range_m, r_min_km }))
}

/// `broadcast_interval <= 0` means continuous broadcasting.
#[wasm_bindgen(js_name = oracleCheck)]
#[allow(clippy::too_many_arguments)]
pub fn oracle_js(
    alpha: f64,
    speed_kmh: f64,
    density_per_km: f64,
    range_m: f64,
    r_min_km: f64,
    samples: usize,
    seed: u32,
    broadcast_interval: f64,
) -> Result<String, JsError> {
    let road = Road { alpha, speed_kmh, density_per_km, range_m, r_min_km };
    let interval = (broadcast_interval > 0.0).then_some(broadcast_interval);
    to_js(oracle_check(road, samples, seed as u64, interval))
}
