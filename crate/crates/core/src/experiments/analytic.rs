//! Closed-form tables and curves, and the fixed vs distributed range comparison.

use serde::{Deserialize, Serialize};

use crate::analytics::{self, CharacteristicTimes, DistributionCurve, Quantity};
use crate::error::{Error, Result};
use crate::params::{CommParams, TrafficConditions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSpec {
    /// Penetration levels of the characteristic-time table.
    pub table_alphas: Vec<f64>,
    /// Penetration levels of the tabulated curves.
    pub curve_alphas: Vec<f64>,
    /// Speed of both directions (m/s).
    pub speed: f64,
    /// Lane-total density of both directions (1/m).
    pub density: f64,
    pub range: f64,
    pub r_min: f64,
    pub tau_max: f64,
    pub tau_step: f64,
    /// Grid step of the crossover search (s).
    pub crossover_step: f64,
    /// Band of `p3` in which sign changes of the range-model difference are counted.
    pub crossover_band: (f64, f64),
}

impl Default for AnalyticSpec {
    fn default() -> Self {
        AnalyticSpec {
            table_alphas: vec![0.01, 0.02, 0.03, 0.05, 0.10, 0.20, 0.50],
            curve_alphas: vec![0.01, 0.02, 0.05, 0.10],
            speed: 25.0,
            density: 0.03,
            range: 200.0,
            r_min: 1000.0,
            tau_max: 600.0,
            tau_step: 1.0,
            crossover_step: 0.05,
            crossover_band: (0.15, 0.35),
        }
    }
}

/// Difference `p3_distributed - p3` with mean range equal to the fixed range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub alpha: f64,
    /// Sign changes with `p3` inside the band.
    pub sign_changes: usize,
    /// `tau` and `p3` of the first sign change in the band.
    pub tau: Option<f64>,
    pub p3: Option<f64>,
    /// Largest absolute difference where `p3 >= 0.9`.
    pub max_difference_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticReport {
    pub table: Vec<CharacteristicTimes>,
    pub curves: Vec<DistributionCurve>,
    pub crossovers: Vec<Crossover>,
}

impl AnalyticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.table_alphas.is_empty() && self.curve_alphas.is_empty() {
            return Err(Error::Config("analytic: no penetration levels given".into()));
        }
        for &a in self.table_alphas.iter().chain(&self.curve_alphas) {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::invalid("analytic.alpha", a, "must lie in (0, 1]"));
            }
        }
        if !(self.tau_step > 0.0 && self.tau_max > self.tau_step) {
            return Err(Error::invalid("analytic.tau_step", self.tau_step, "must be positive and below tau_max"));
        }
        if !(self.crossover_step > 0.0) {
            return Err(Error::invalid("analytic.crossover_step", self.crossover_step, "must be positive"));
        }
        TrafficConditions::symmetric(self.speed, self.density, 0.0)?;
        CommParams::fixed(self.range, self.r_min)?;
        Ok(())
    }
}

pub fn crossover(
    alpha: f64,
    tc: &TrafficConditions,
    fixed: &CommParams,
    distributed: &CommParams,
    step: f64,
    tau_max: f64,
    band: (f64, f64),
) -> Result<Crossover> {
    let grid = analytics::uniform_grid(0.0, tau_max, step);
    let mut prev: Option<(f64, f64, f64)> = None;
    let mut out = Crossover {
        alpha,
        sign_changes: 0,
        tau: None,
        p3: None,
        max_difference_high: 0.0,
    };
    for tau in grid {
        let p = analytics::p3(tau, tc, fixed)?;
        let d = analytics::p3_distributed(tau, tc, distributed)? - p;
        if p >= 0.9 {
            out.max_difference_high = out.max_difference_high.max(d.abs());
        }
        if let Some((t0, p0, d0)) = prev {
            if d0 != 0.0 && d != 0.0 && (d0 > 0.0) != (d > 0.0) {
                let w = d0 / (d0 - d);
                let pc = p0 + w * (p - p0);
                if pc >= band.0 && pc <= band.1 {
                    out.sign_changes += 1;
                    if out.tau.is_none() {
                        out.tau = Some(t0 + w * (tau - t0));
                        out.p3 = Some(pc);
                    }
                }
            }
        }
        if d != 0.0 {
            prev = Some((tau, p, d));
        }
    }
    Ok(out)
}

pub fn run_analytic(spec: &AnalyticSpec) -> Result<AnalyticReport> {
    spec.validate()?;
    let fixed = CommParams::fixed(spec.range, spec.r_min)?;
    let distributed = CommParams::exponential(1.0 / spec.range, spec.r_min)?;
    let table = spec
        .table_alphas
        .iter()
        .map(|&a| analytics::characteristic_times(a, spec.density, spec.speed, &fixed))
        .collect::<Result<Vec<_>>>()?;

    let grid = analytics::uniform_grid(0.0, spec.tau_max, spec.tau_step);
    let mut curves = Vec::new();
    let mut crossovers = Vec::new();
    for &alpha in &spec.curve_alphas {
        let tc = TrafficConditions::symmetric(spec.speed, spec.density, alpha)?;
        for q in [Quantity::P1, Quantity::P2, Quantity::P3] {
            curves.push(analytics::tabulate(q, &tc, &fixed, &grid)?);
        }
        curves.push(analytics::tabulate(Quantity::P3Distributed, &tc, &distributed, &grid)?);
        crossovers.push(crossover(
            alpha,
            &tc,
            &fixed,
            &distributed,
            spec.crossover_step,
            spec.tau_max,
            spec.crossover_band,
        )?);
    }
    Ok(AnalyticReport {
        table,
        curves,
        crossovers,
    })
}
