//! Oracle samples against the closed forms, one cell per penetration level.

use serde::{Deserialize, Serialize};

use crate::analytics::Quantity;
use crate::error::{Error, Result};
use crate::experiments::validate::compare_quantity;
use crate::oracle::{sample_batch_with, OracleOptions, OracleSample};
use crate::params::{CommParams, TrafficConditions};
use crate::stats::{ks_critical_one_sample, EmpiricalDistribution, QuantityComparison};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub alphas: Vec<f64>,
    pub samples: usize,
    /// m/s
    pub v1: f64,
    pub v2: f64,
    /// Lane-total densities (1/m).
    pub rho1: f64,
    pub rho2: f64,
    pub range: f64,
    pub r_min: f64,
    pub broadcast_interval: Option<f64>,
    pub seed: u64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            alphas: vec![0.01, 0.05, 0.10],
            samples: 100_000,
            v1: 25.0,
            v2: 25.0,
            rho1: 0.03,
            rho2: 0.03,
            range: 200.0,
            r_min: 1000.0,
            broadcast_interval: None,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    /// No equipped vehicles on one side: messages never arrive.
    Undeliverable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCell {
    pub alpha: f64,
    pub seed: u64,
    pub status: CellStatus,
    pub reason: Option<String>,
    pub tau1: Option<QuantityComparison>,
    pub tau2: Option<QuantityComparison>,
    pub tau3: Option<QuantityComparison>,
    /// 95% one-sample KS critical value.
    pub ks_critical: f64,
    /// Median of tau3 with periodic broadcasting minus the continuous median,
    /// same seed; only with a broadcast interval.
    pub median_shift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub samples: usize,
    pub broadcast_interval: Option<f64>,
    pub cells: Vec<OracleCell>,
}

fn dist(samples: &[OracleSample], pick: fn(&OracleSample) -> f64) -> Result<EmpiricalDistribution> {
    EmpiricalDistribution::new(samples.iter().map(pick).collect())
}

fn run_cell(spec: &OracleSpec, alpha: f64, seed: u64) -> Result<OracleCell> {
    let tc = TrafficConditions::new(spec.v1, spec.v2, spec.rho1, spec.rho2, alpha)?;
    let cp = CommParams::fixed(spec.range, spec.r_min)?;
    let mut cell = OracleCell {
        alpha,
        seed,
        status: CellStatus::Ok,
        reason: None,
        tau1: None,
        tau2: None,
        tau3: None,
        ks_critical: ks_critical_one_sample(spec.samples),
        median_shift: None,
    };
    let options = OracleOptions {
        broadcast_interval: spec.broadcast_interval,
    };
    let samples = match sample_batch_with(spec.samples, &tc, &cp, seed, options) {
        Ok(s) => s,
        Err(Error::NonTerminating(reason)) => {
            cell.status = CellStatus::Undeliverable;
            cell.reason = Some(reason.to_string());
            return Ok(cell);
        }
        Err(e) => return Err(e),
    };
    let tau3 = dist(&samples, |s| s.tau3)?;
    cell.tau1 = Some(compare_quantity(Quantity::P1, "tau1", &dist(&samples, |s| s.tau1)?, &tc, &cp)?);
    cell.tau2 = Some(compare_quantity(Quantity::P2, "tau2", &dist(&samples, |s| s.tau2)?, &tc, &cp)?);
    cell.tau3 = Some(compare_quantity(Quantity::P3, "tau3", &tau3, &tc, &cp)?);
    if spec.broadcast_interval.is_some() {
        let continuous = sample_batch_with(spec.samples, &tc, &cp, seed, OracleOptions::default())?;
        cell.median_shift = Some(tau3.median()? - dist(&continuous, |s| s.tau3)?.median()?);
    }
    Ok(cell)
}

pub fn run_oracle(spec: &OracleSpec) -> Result<OracleReport> {
    if spec.alphas.is_empty() {
        return Err(Error::Config("oracle: no penetration levels given".into()));
    }
    if spec.samples < 2 {
        return Err(Error::invalid("oracle.samples", spec.samples as f64, "need at least 2"));
    }
    let cells = spec
        .alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| run_cell(spec, alpha, spec.seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleReport {
        samples: spec.samples,
        broadcast_interval: spec.broadcast_interval,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_receivers_are_flagged() {
        let spec = OracleSpec {
            rho1: 0.0,
            samples: 100,
            ..OracleSpec::default()
        };
        let report = run_oracle(&spec).unwrap();
        assert!(report.cells.iter().all(|c| c.status == CellStatus::Undeliverable && c.tau3.is_none()));
    }

    #[test]
    fn report_is_reproducible() {
        let spec = OracleSpec {
            samples: 2000,
            ..OracleSpec::default()
        };
        let a = serde_json::to_string(&run_oracle(&spec).unwrap()).unwrap();
        let b = serde_json::to_string(&run_oracle(&spec).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
