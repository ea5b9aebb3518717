//! Acceptance bands checked by `--self-test`.

use std::path::Path;

use serde::Serialize;

use transhop::analytics::CharacteristicTimes;
use transhop::experiments::analytic::AnalyticReport;
use transhop::experiments::jam::JamSummary;
use transhop::experiments::oracle::{CellStatus, OracleReport};
use transhop::experiments::validate::CellReport;
use transhop::export;
use transhop::units::ms_to_kmh;
use transhop::Result;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

pub fn report(checks: &[Check]) -> bool {
    for c in checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("self-test: {} checks, {failed} failed", checks.len());
    failed == 0
}

pub fn write(dir: &Path, checks: &[Check]) -> Result<()> {
    export::to_file(&dir.join("self_test.json"), |w| export::write_json(w, &checks))
}

/// Printed characteristic times at v = 90 km/h, rho = 30/km, r = 200 m,
/// r_min = 1 km, each with the number of printed decimals:
/// alpha, <tau2>, <tau3>, tau3 at 0.5 / 0.9 / 0.95, info speed (km/h).
type Printed = (f64, u8);
const REFERENCE: [(f64, [Printed; 6]); 7] = [
    (0.01, [(157.0, 0), (224.0, 0), (188.0, 0), (420.0, 0), (514.0, 0), (16.1, 1)]),
    (0.02, [(90.7, 1), (124.0, 0), (106.0, 0), (222.0, 0), (269.0, 0), (29.0, 1)]),
    (0.03, [(68.4, 1), (90.7, 1), (78.6, 1), (156.0, 0), (187.0, 0), (39.7, 1)]),
    (0.05, [(50.7, 1), (64.0, 1), (56.7, 1), (103.0, 0), (122.0, 0), (56.3, 1)]),
    (0.10, [(37.3, 1), (44.0, 1), (40.4, 1), (63.6, 1), (73.0, 1), (81.8, 1)]),
    (0.20, [(30.7, 1), (34.0, 1), (32.2, 1), (43.8, 1), (48.5, 1), (105.0, 0)]),
    (0.50, [(26.7, 1), (28.0, 1), (27.3, 1), (31.9, 1), (33.8, 1), (128.0, 0)]),
];

fn row_values(c: &CharacteristicTimes) -> [f64; 6] {
    [
        c.mean_tau2,
        c.mean_tau3,
        c.tau3_q50,
        c.tau3_q90,
        c.tau3_q95,
        ms_to_kmh(c.info_speed),
    ]
}

/// Distance to the printed value in units of its last digit.
pub fn printed_error(value: f64, printed: Printed) -> f64 {
    (value - printed.0).abs() * 10f64.powi(printed.1 as i32)
}

pub fn analytic(report: &AnalyticReport, table_defaults: bool) -> Vec<Check> {
    let mut checks = Vec::new();
    if table_defaults {
        for (alpha, printed) in REFERENCE {
            let Some(row) = report.table.iter().find(|r| (r.alpha - alpha).abs() < 1e-12) else {
                continue;
            };
            let values = row_values(row);
            let worst = values
                .iter()
                .zip(printed)
                .map(|(&v, p)| printed_error(v, p))
                .fold(0.0, f64::max);
            checks.push(Check::new(
                format!("table alpha={alpha}"),
                worst <= 1.0,
                format!("{values:.1?}, worst deviation {worst:.2} of the last printed digit"),
            ));
        }
    }
    for c in report.crossovers.iter().filter(|c| c.alpha <= 0.05 + 1e-12) {
        checks.push(Check::new(
            format!("range models alpha={}", c.alpha),
            c.sign_changes == 1 && c.max_difference_high < 0.02,
            format!(
                "{} sign change(s) in band at p3 = {:?}, max |difference| at p3 >= 0.9 = {:.4}",
                c.sign_changes, c.p3, c.max_difference_high
            ),
        ));
    }
    checks
}

pub fn oracle(report: &OracleReport) -> Vec<Check> {
    let mut checks = Vec::new();
    let limit = (1.63 / (report.samples as f64).sqrt()).max(0.01);
    for cell in &report.cells {
        let name = format!("oracle alpha={}", cell.alpha);
        if cell.status == CellStatus::Undeliverable {
            checks.push(Check::new(name, true, "undeliverable: no equipped vehicles"));
            continue;
        }
        match (report.broadcast_interval, cell.median_shift) {
            (Some(period), Some(shift)) => checks.push(Check::new(
                format!("{name} periodic"),
                (shift - period).abs() <= 3.0,
                format!("median tau3 shift {shift:.2} s for interval {period} s"),
            )),
            _ => {
                for q in [&cell.tau1, &cell.tau2, &cell.tau3].into_iter().flatten() {
                    checks.push(Check::new(
                        format!("{name} {}", q.quantity),
                        q.ks < limit,
                        format!("KS {:.5} (limit {limit:.5})", q.ks),
                    ));
                }
            }
        }
    }
    checks
}

pub fn validate(reports: &[CellReport]) -> Vec<Check> {
    let mut checks = Vec::new();
    for r in reports.iter().filter(|r| r.lanes > 1) {
        let u = r.tau3.u.unwrap_or(f64::INFINITY);
        checks.push(Check::new(
            format!("cell alpha={} lanes={}", r.alpha, r.lanes),
            u < 0.01 && r.tau3_median_error.abs() < 0.05,
            format!(
                "U(tau3) {u:.5}, median error {:+.2}% over {} messages",
                100.0 * r.tau3_median_error,
                r.messages
            ),
        ));
    }
    let mut single: Vec<&CellReport> = reports.iter().filter(|r| r.lanes == 1).collect();
    single.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    if single.len() >= 2 {
        let us: Vec<f64> = single.iter().map(|r| r.tau3.u.unwrap_or(f64::NAN)).collect();
        let increasing = us.windows(2).all(|w| w[1] > w[0]);
        let (lo, hi) = (single[0], single[single.len() - 1]);
        checks.push(Check::new(
            "single lane U ordering",
            increasing && us[us.len() - 1] > 3.0 * us[0],
            format!("U(tau3) {us:.4?} at alpha {:?}", single.iter().map(|r| r.alpha).collect::<Vec<_>>()),
        ));
        checks.push(Check::new(
            format!("single lane bias alpha={}", hi.alpha),
            hi.tau3_median_error >= 0.0,
            format!(
                "median error {:+.2}% (alpha={} has {:+.2}%)",
                100.0 * hi.tau3_median_error,
                lo.alpha,
                100.0 * lo.tau3_median_error
            ),
        ));
    }
    checks
}

pub fn jam(summary: &JamSummary) -> Vec<Check> {
    let mut checks = vec![
        Check::new(
            "breakdown",
            summary.breakdown_time.is_some(),
            format!("at {:?} s", summary.breakdown_time),
        ),
        Check::new(
            "front warnings delivered",
            summary.upstream_delivered >= 1 && summary.downstream_delivered >= 1,
            format!(
                "{} upstream, {} downstream",
                summary.upstream_delivered, summary.downstream_delivered
            ),
        ),
    ];
    let age = summary.upstream_age.as_ref().map(|a| a.mean);
    checks.push(Check::new(
        "message age",
        age.is_some_and(|a| (60.0..=300.0).contains(&a)),
        format!("mean {:?} s", age),
    ));
    let speed = summary.upstream_front_speed.map(ms_to_kmh);
    checks.push(Check::new(
        "front speed",
        speed.is_some_and(|v| (0.0..=18.0).contains(&v)),
        format!("{:?} km/h", speed),
    ));
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_digit_distance() {
        assert!((printed_error(90.75, (90.7, 1)) - 0.5).abs() < 1e-9);
        assert!((printed_error(125.0, (124.0, 0)) - 1.0).abs() < 1e-12);
    }
}
