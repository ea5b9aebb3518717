//! Closed-form distributions of the three characteristic times of a
//! transversal-hop (store-and-forward) message transmission.
//!
//! Conventions: a message is created at `x = 0`, `t = 0` by a direction-1
//! vehicle; direction 2 travels towards -x and carries the message upstream.
//! Equipped vehicles are Poisson distributed with partial densities
//! `lambda1`, `lambda2`.
//!
//! * `p1(tau)` – probability that the first hop to a relay happened by `tau`.
//! * `p2(tau)` – probability that the relay's range touches the destination
//!   region (`x <= -r_min`) by `tau`.
//! * `p3(tau)` – probability that an equipped direction-1 vehicle in the
//!   destination region received the message by `tau`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate, invert_monotone, one_minus_exp_neg};
use crate::params::{CommParams, RangeModel, TrafficConditions};

/// Relative rate gap below which the distributed-range closed form, whose
/// coefficients amplify rounding by the inverse gap, gives way to quadrature.
pub const DISTRIBUTED_DEGENERACY_TOL: f64 = 1e-6;

/// Absolute tolerance of the weighted-average quadrature fallback.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Tail mass of the range density ignored by the quadrature fallback.
pub const RANGE_TAIL_MASS: f64 = 1e-12;

fn fixed_range(cp: &CommParams, operation: &'static str) -> Result<f64> {
    cp.fixed_range().ok_or(Error::UnsupportedRangeModel {
        operation,
        required: "fixed",
    })
}

fn check_range(r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("r", r, "broadcast range must be non-negative"))
    }
}

/// Density of the initial position of the first relay candidate: the nearest
/// equipped direction-2 vehicle at or beyond `-r`.
pub fn relay_position_density(x: f64, tc: &TrafficConditions, r: f64) -> Result<f64> {
    check_range(r)?;
    if x < -r {
        return Ok(0.0);
    }
    let lambda2 = tc.lambda2();
    Ok(lambda2 * (-lambda2 * (x + r)).exp())
}

/// CDF of the first-hop time. Zero for negative `tau`.
pub fn p1(tau: f64, tc: &TrafficConditions, r: f64) -> Result<f64> {
    check_range(r)?;
    if tau < 0.0 {
        return Ok(0.0);
    }
    let reach = 2.0 * r + (tc.v1 + tc.v2) * tau;
    Ok(one_minus_exp_neg(tc.lambda2() * reach))
}

/// CDF of the time at which the message becomes available in the destination
/// region. Depends on direction 2 only.
pub fn p2(tau: f64, tc: &TrafficConditions, cp: &CommParams) -> Result<f64> {
    let r = fixed_range(cp, "p2")?;
    let reach = 2.0 * r + tc.v2 * tau - cp.r_min;
    if reach < 0.0 {
        return Ok(0.0);
    }
    Ok(one_minus_exp_neg(tc.lambda2() * reach))
}

/// Probability that two independent exponential gaps with rates `l2` and `lt`
/// fit into the length `x_e`. Exact for equal rates and free of cancellation
/// for close ones: a series with positive coefficients while the larger rate
/// times `x_e` is small, the survival function `exp(-a x)(1 + a x phi(d x))`
/// beyond.
fn hypoexponential_cdf(x_e: f64, l2: f64, lt: f64) -> f64 {
    if x_e <= 0.0 {
        return 0.0;
    }
    let (a, b) = if l2 <= lt { (l2, lt) } else { (lt, l2) };
    if b * x_e <= 2.0 {
        // a b sum_{n>=2} (-x)^n / n! h_{n-2}(a, b), h_k = sum_i a^i b^(k-i)
        let mut pow_over_fact = x_e * x_e / 2.0;
        let mut h = 1.0;
        let mut b_pow = 1.0;
        let mut sum = pow_over_fact;
        for n in 3..80 {
            pow_over_fact *= -x_e / n as f64;
            b_pow *= b;
            h = a * h + b_pow;
            let term = pow_over_fact * h;
            sum += term;
            if term.abs() <= 0.25 * f64::EPSILON * sum.abs() {
                break;
            }
        }
        return (a * b * sum).clamp(0.0, 1.0);
    }
    let z = (b - a) * x_e;
    let phi = if z < 1e-300 { 1.0 } else { one_minus_exp_neg(z) / z };
    let survival = (-a * x_e).exp() * (1.0 + a * x_e * phi);
    (1.0 - survival).clamp(0.0, 1.0)
}

/// CDF of the total transmission time for a fixed range.
pub fn p3(tau: f64, tc: &TrafficConditions, cp: &CommParams) -> Result<f64> {
    let r = fixed_range(cp, "p3")?;
    let x_e = tc.v2 * tau - cp.r_min + 2.0 * r;
    Ok(hypoexponential_cdf(x_e, tc.lambda2(), tc.lambda_tilde1()))
}

/// `p3` for identical conditions in both directions: the square of `p2`.
pub fn p3_symmetric(tau: f64, lambda: f64, v: f64, cp: &CommParams) -> Result<f64> {
    let r = fixed_range(cp, "p3_symmetric")?;
    check_symmetric(lambda, v)?;
    let reach = 2.0 * r + v * tau - cp.r_min;
    if reach < 0.0 {
        return Ok(0.0);
    }
    let p = one_minus_exp_neg(lambda * reach);
    Ok(p * p)
}

fn check_symmetric(lambda: f64, v: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid("lambda", lambda, "partial density must be non-negative"));
    }
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::invalid("v", v, "speed must be positive"));
    }
    Ok(())
}

/// CDF of the total transmission time when the range is exponentially
/// distributed (rate `lambda_r`) and identical for both hops.
pub fn p3_distributed(tau: f64, tc: &TrafficConditions, cp: &CommParams) -> Result<f64> {
    let lambda_r = match cp.range_model {
        RangeModel::Exponential { rate } => rate,
        RangeModel::Fixed { .. } => {
            return Err(Error::UnsupportedRangeModel {
                operation: "p3_distributed",
                required: "exponential",
            })
        }
    };
    let l2 = tc.lambda2();
    let lt = tc.lambda_tilde1();
    if (lt - l2).abs() <= DISTRIBUTED_DEGENERACY_TOL * l2.max(lt) {
        return Ok(p3_distributed_quadrature(tau, tc, cp.r_min, lambda_r));
    }

    // d = r_min - v2 tau; the exponentials exp(l d) exp(-2 l r0) collapse to
    // exp(l min(d, 0)).
    let d = cp.r_min - tc.v2 * tau;
    let r0 = (0.5 * d).max(0.0);
    let d_neg = d.min(0.0);
    let first = lt / (lt - l2) * lambda_r / (lambda_r + 2.0 * l2) * (l2 * d_neg).exp();
    let second = l2 / (lt - l2) * lambda_r / (lambda_r + 2.0 * lt) * (lt * d_neg).exp();
    let p = (-lambda_r * r0).exp() * (1.0 - first + second);
    Ok(p.clamp(0.0, 1.0))
}

/// Weighted average of the fixed-range `p3` over the exponential range
/// density, by adaptive quadrature. Used where the closed form is singular.
pub fn p3_distributed_quadrature(
    tau: f64,
    tc: &TrafficConditions,
    r_min: f64,
    lambda_r: f64,
) -> f64 {
    let l2 = tc.lambda2();
    let lt = tc.lambda_tilde1();
    let integrand = |r: f64| {
        let x_e = tc.v2 * tau - r_min + 2.0 * r;
        lambda_r * (-lambda_r * r).exp() * hypoexponential_cdf(x_e, l2, lt)
    };
    let upper = -RANGE_TAIL_MASS.ln() / lambda_r;
    // the integrand has a kink where x_e crosses zero
    let kink = 0.5 * (r_min - tc.v2 * tau);
    let p = if kink > 0.0 && kink < upper {
        integrate(&integrand, kink, upper, QUADRATURE_TOL)
    } else {
        integrate(&integrand, 0.0, upper, QUADRATURE_TOL)
    };
    p.clamp(0.0, 1.0)
}

/// Quantile of the symmetric total transmission time:
/// `(r_min - 2r)/v - ln(1 - sqrt(q)) / (lambda v)`.
pub fn tau3_quantile(q: f64, lambda: f64, v: f64, cp: &CommParams) -> Result<f64> {
    let r = fixed_range(cp, "tau3_quantile")?;
    check_symmetric(lambda, v)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid("q", q, "quantile level must lie in (0, 1)"));
    }
    if lambda == 0.0 {
        return Err(Error::UndefinedExpectation("no equipped vehicles"));
    }
    Ok((cp.r_min - 2.0 * r) / v - (-q.sqrt()).ln_1p() / (lambda * v))
}

fn symmetric_offset(lambda: f64, v: f64, cp: &CommParams, operation: &'static str) -> Result<f64> {
    let r = fixed_range(cp, operation)?;
    check_symmetric(lambda, v)?;
    if lambda == 0.0 {
        return Err(Error::UndefinedExpectation("no equipped vehicles"));
    }
    Ok((cp.r_min - 2.0 * r) / v)
}

/// Expected availability time in the symmetric case.
pub fn mean_tau2(lambda: f64, v: f64, cp: &CommParams) -> Result<f64> {
    Ok(symmetric_offset(lambda, v, cp, "mean_tau2")? + 1.0 / (lambda * v))
}

/// Expected total transmission time in the symmetric case.
pub fn mean_tau3(lambda: f64, v: f64, cp: &CommParams) -> Result<f64> {
    Ok(symmetric_offset(lambda, v, cp, "mean_tau3")? + 1.5 / (lambda * v))
}

/// Average information propagation speed `r_min / <tau3>` (m/s).
pub fn info_speed(lambda: f64, v: f64, cp: &CommParams) -> Result<f64> {
    Ok(cp.r_min / mean_tau3(lambda, v, cp)?)
}

/// The characteristic quantities of one penetration level in the symmetric case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicTimes {
    pub alpha: f64,
    pub mean_tau2: f64,
    pub mean_tau3: f64,
    pub tau3_q50: f64,
    pub tau3_q90: f64,
    pub tau3_q95: f64,
    /// m/s
    pub info_speed: f64,
}

pub fn characteristic_times(
    alpha: f64,
    rho: f64,
    v: f64,
    cp: &CommParams,
) -> Result<CharacteristicTimes> {
    let lambda = alpha * rho;
    Ok(CharacteristicTimes {
        alpha,
        mean_tau2: mean_tau2(lambda, v, cp)?,
        mean_tau3: mean_tau3(lambda, v, cp)?,
        tau3_q50: tau3_quantile(0.5, lambda, v, cp)?,
        tau3_q90: tau3_quantile(0.9, lambda, v, cp)?,
        tau3_q95: tau3_quantile(0.95, lambda, v, cp)?,
        info_speed: info_speed(lambda, v, cp)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    P1,
    P2,
    P3,
    P3Distributed,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::P1 => "p1",
            Quantity::P2 => "p2",
            Quantity::P3 => "p3",
            Quantity::P3Distributed => "p3_distributed",
        }
    }
}

/// Evaluate one of the CDFs. `P1`, `P2` and `P3` need the fixed-range model;
/// there is no distributed-range variant of the first two.
pub fn evaluate(quantity: Quantity, tau: f64, tc: &TrafficConditions, cp: &CommParams) -> Result<f64> {
    match quantity {
        Quantity::P1 => p1(tau, tc, fixed_range(cp, "p1")?),
        Quantity::P2 => p2(tau, tc, cp),
        Quantity::P3 => p3(tau, tc, cp),
        Quantity::P3Distributed => p3_distributed(tau, tc, cp),
    }
}

/// Numerical quantile of any of the CDFs by bisection.
pub fn quantile(quantity: Quantity, q: f64, tc: &TrafficConditions, cp: &CommParams) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid("q", q, "quantile level must lie in (0, 1)"));
    }
    if tc.lambda2() == 0.0 || (quantity != Quantity::P1 && quantity != Quantity::P2 && tc.lambda1() == 0.0) {
        return Err(Error::UndefinedExpectation("no equipped vehicles"));
    }
    // validate the model once; the closure below cannot fail afterwards
    evaluate(quantity, 0.0, tc, cp)?;
    let f = |t: f64| evaluate(quantity, t, tc, cp).unwrap_or(0.0);
    let mut hi = 1.0;
    while f(hi) < q {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::UndefinedExpectation("quantile beyond search range"));
        }
    }
    Ok(invert_monotone(f, q, 0.0, hi, 1e-12).expect("bracket contains the level"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub tau: f64,
    pub p: f64,
}

/// A tabulated CDF together with the parameters it was evaluated at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionCurve {
    pub quantity: Quantity,
    pub conditions: TrafficConditions,
    pub comm: CommParams,
    pub points: Vec<CurvePoint>,
}

pub fn tabulate(
    quantity: Quantity,
    tc: &TrafficConditions,
    cp: &CommParams,
    tau_grid: &[f64],
) -> Result<DistributionCurve> {
    if tau_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if let Some(index) = tau_grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonIncreasingGrid { index: index + 1 });
    }
    let points = tau_grid
        .iter()
        .map(|&tau| {
            evaluate(quantity, tau, tc, cp).map(|p| CurvePoint { tau, p })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DistributionCurve {
        quantity,
        conditions: *tc,
        comm: *cp,
        points,
    })
}

/// Evenly spaced grid `start, start + step, ...` up to and including `end`.
pub fn uniform_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const V: f64 = 25.0;
    const RHO: f64 = 0.03;

    fn table_cp() -> CommParams {
        CommParams::fixed(200.0, 1000.0).unwrap()
    }

    fn table_tc(alpha: f64) -> TrafficConditions {
        TrafficConditions::symmetric(V, RHO, alpha).unwrap()
    }

    #[test]
    fn relay_density_support() {
        let tc = TrafficConditions::symmetric(V, 0.012, 0.05).unwrap(); // lambda2 = 0.6/km
        let l2 = tc.lambda2();
        assert_eq!(relay_position_density(-200.0, &tc, 200.0).unwrap(), l2);
        assert_eq!(relay_position_density(-201.0, &tc, 200.0).unwrap(), 0.0);
        let at_zero = relay_position_density(0.0, &tc, 200.0).unwrap();
        assert_relative_eq!(at_zero, 0.0006 * (-0.12f64).exp(), max_relative = 1e-12);
        assert!(relay_position_density(0.0, &tc, -1.0).is_err());
        let total = integrate(
            &|x| relay_position_density(x, &tc, 200.0).unwrap(),
            -200.0,
            -200.0 + 40.0 / l2,
            1e-12,
        );
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn p1_values() {
        let none = TrafficConditions::symmetric(V, RHO, 0.0).unwrap();
        assert_eq!(p1(50.0, &none, 200.0).unwrap(), 0.0);
        let tc = TrafficConditions::symmetric(V, 0.012, 0.05).unwrap();
        assert_relative_eq!(p1(0.0, &tc, 200.0).unwrap(), 1.0 - (-0.24f64).exp(), max_relative = 1e-12);
        assert!((p1(0.0, &tc, 200.0).unwrap() - 0.2134).abs() < 1e-4);
        // alpha = 5 %, 30/km, 90 km/h: P1 passes 0.9 near 20 s
        let tc = table_tc(0.05);
        let t90 = quantile(Quantity::P1, 0.9, &tc, &table_cp()).unwrap();
        assert!((t90 - 20.0).abs() <= 5.0, "t90 = {t90}");
    }

    #[test]
    fn p2_values() {
        let cp = table_cp();
        let tc = TrafficConditions::symmetric(V, 0.012, 0.05).unwrap();
        let tau_min = cp.tau_min(V).unwrap();
        assert_eq!(p2(tau_min, &tc, &cp).unwrap(), 0.0);
        assert_eq!(p2(tau_min - 1.0, &tc, &cp).unwrap(), 0.0);
        let v = p2(90.7, &tc, &cp).unwrap();
        assert_relative_eq!(v, 1.0 - (-0.6f64 * (0.4 + 25.0 * 90.7 / 1000.0 - 1.0)).exp(), max_relative = 1e-12);
        assert!((v - 0.632).abs() < 1e-3);
        assert!((p2(1e6, &tc, &cp).unwrap() - 1.0).abs() < 1e-15);
        assert!(p2(10.0, &tc, &CommParams::exponential(0.005, 1000.0).unwrap()).is_err());
    }

    #[test]
    fn p2_ignores_direction_one() {
        let cp = table_cp();
        let a = TrafficConditions::new(10.0, 25.0, 0.01, 0.03, 0.05).unwrap();
        let b = TrafficConditions::new(40.0, 25.0, 0.09, 0.03, 0.05).unwrap();
        for tau in [0.0, 24.0, 30.0, 100.0, 500.0] {
            assert_eq!(p2(tau, &a, &cp).unwrap().to_bits(), p2(tau, &b, &cp).unwrap().to_bits());
        }
    }

    #[test]
    fn p3_table_values_and_symmetric_reduction() {
        let cp = table_cp();
        // 106 s median at 2 %, rounding of the printed time allows +-0.5 s
        let tc = table_tc(0.02);
        let lo = p3(105.5, &tc, &cp).unwrap();
        let hi = p3(106.5, &tc, &cp).unwrap();
        assert!(lo <= 0.5 && 0.5 <= hi, "{lo} {hi}");
        let tc = table_tc(0.01);
        assert!(p3(513.5, &tc, &cp).unwrap() <= 0.95 && p3(514.5, &tc, &cp).unwrap() >= 0.95);
        let tc = table_tc(0.02);
        let lam = tc.lambda1();
        for tau in [24.001, 25.0, 60.0, 106.0, 222.0, 900.0] {
            let a = p3(tau, &tc, &cp).unwrap();
            let b = p3_symmetric(tau, lam, V, &cp).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        assert!(p3_symmetric(221.5, lam, V, &cp).unwrap() <= 0.9);
        assert!(p3_symmetric(222.5, lam, V, &cp).unwrap() >= 0.9);
        assert_eq!(p3_symmetric(24.0, lam, V, &cp).unwrap(), 0.0);
        assert!((p3_symmetric(25.0, 1e3, V, &cp).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn p3_degenerate_rates_are_continuous() {
        let cp = table_cp();
        // lambda_tilde1 = lambda2 when rho1 / rho2 = v2 / (v1 + v2)
        let v1 = 20.0;
        let v2 = 30.0;
        let rho2 = 0.03;
        let rho1 = rho2 * v2 / (v1 + v2);
        let exact = TrafficConditions::new(v1, v2, rho1, rho2, 0.05).unwrap();
        let near = TrafficConditions::new(v1, v2, rho1 * (1.0 + 1e-7), rho2, 0.05).unwrap();
        let off = TrafficConditions::new(v1, v2, rho1 * (1.0 + 1e-4), rho2, 0.05).unwrap();
        for tau in [30.0, 50.0, 80.0, 200.0] {
            let a = p3(tau, &exact, &cp).unwrap();
            let b = p3(tau, &near, &cp).unwrap();
            let c = p3(tau, &off, &cp).unwrap();
            assert!((a - b).abs() < 1e-7);
            assert!((a - c).abs() < 1e-4);
        }
    }

    #[test]
    fn hypoexponential_matches_convolution_at_any_rate_gap() {
        let a = 1e-3;
        for b in [a, a * (1.0 + 1e-12), a * (1.0 + 1e-6), a * (1.0 + 1e-3), 2.0 * a, 30.0 * a] {
            let mut last = 0.0;
            for k in 1..200 {
                let x = k as f64 * 50.0;
                let f = |s: f64| a * (-a * s).exp() * -(-b * (x - s)).exp_m1();
                let direct = integrate(&f, 0.0, x, 1e-14);
                let p = hypoexponential_cdf(x, a, b);
                assert!((p - direct).abs() < 1e-12, "b={b} x={x}: {p} vs {direct}");
                assert_eq!(p, hypoexponential_cdf(x, b, a));
                assert!(p >= last);
                last = p;
            }
        }
    }

    #[test]
    fn table_quantities() {
        let cp = table_cp();
        let row = characteristic_times(0.02, RHO, V, &cp).unwrap();
        assert!((row.mean_tau2 - 90.7).abs() <= 0.1);
        assert!((row.mean_tau3 - 124.0).abs() <= 1.0);
        assert!((row.info_speed * 3.6 - 29.0).abs() <= 0.1);
        let row = characteristic_times(0.5, RHO, V, &cp).unwrap();
        assert!((row.mean_tau2 - 26.7).abs() <= 0.1);
        assert!((row.mean_tau3 - 28.0).abs() <= 0.1);
        assert!((row.info_speed * 3.6 - 128.0).abs() <= 1.0);
        let row = characteristic_times(0.1, RHO, V, &cp).unwrap();
        assert!((row.tau3_q90 - 63.6).abs() <= 0.5);
        // saturation
        let big = mean_tau3(1e9, V, &cp).unwrap();
        assert!((big - 24.0).abs() < 1e-6);
        assert!(mean_tau2(0.0, V, &cp).is_err());
        assert!(info_speed(0.0, V, &cp).is_err());
    }

    #[test]
    fn quantile_round_trip() {
        let cp = table_cp();
        let lam = 0.02 * RHO;
        for i in 1..=99 {
            let q = i as f64 / 100.0;
            let t = tau3_quantile(q, lam, V, &cp).unwrap();
            assert!((p3_symmetric(t, lam, V, &cp).unwrap() - q).abs() < 1e-10);
        }
        assert!(tau3_quantile(0.0, lam, V, &cp).is_err());
        assert!(tau3_quantile(1.0, lam, V, &cp).is_err());
    }

    #[test]
    fn distributed_range_limits() {
        let cp = CommParams::exponential(1.0 / 200.0, 1000.0).unwrap();
        let tc = table_tc(0.05);
        assert!((p3_distributed(1e5, &tc, &cp).unwrap() - 1.0).abs() < 1e-12);
        assert!(p3_distributed(10.0, &tc, &table_cp()).is_err());
        // closed form against the fallback quadrature
        for tau in [0.0, 10.0, 40.0, 60.0, 200.0] {
            let closed = p3_distributed(tau, &tc, &cp).unwrap();
            let quad = p3_distributed_quadrature(tau, &tc, cp.r_min, 1.0 / 200.0);
            assert!((closed - quad).abs() < 1e-8, "tau {tau}: {closed} vs {quad}");
        }
    }

    #[test]
    fn distributed_degenerate_uses_quadrature() {
        let cp = CommParams::exponential(1.0 / 200.0, 1000.0).unwrap();
        let v1 = 20.0;
        let v2 = 30.0;
        let rho2 = 0.03;
        let rho1 = rho2 * v2 / (v1 + v2);
        let exact = TrafficConditions::new(v1, v2, rho1, rho2, 0.05).unwrap();
        let off = TrafficConditions::new(v1, v2, rho1 * 1.001, rho2, 0.05).unwrap();
        for tau in [10.0, 40.0, 100.0] {
            let a = p3_distributed(tau, &exact, &cp).unwrap();
            let b = p3_distributed(tau, &off, &cp).unwrap();
            assert!(a.is_finite() && (a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn tabulate_checks_grid() {
        let cp = table_cp();
        let tc = table_tc(0.05);
        assert!(matches!(tabulate(Quantity::P3, &tc, &cp, &[]), Err(Error::EmptyGrid)));
        assert!(matches!(
            tabulate(Quantity::P3, &tc, &cp, &[1.0, 1.0]),
            Err(Error::NonIncreasingGrid { index: 1 })
        ));
        let one = tabulate(Quantity::P2, &tc, &cp, &[50.0]).unwrap();
        assert_eq!(one.points.len(), 1);
        assert_eq!(one.points[0].p, p2(50.0, &tc, &cp).unwrap());
        assert!(tabulate(Quantity::P1, &tc, &CommParams::exponential(0.005, 1000.0).unwrap(), &[1.0]).is_err());
        let grid = uniform_grid(0.0, 100.0, 0.5);
        assert_eq!(grid.len(), 201);
        let curve = tabulate(Quantity::P3, &tc, &cp, &grid).unwrap();
        for (pt, &t) in curve.points.iter().zip(&grid) {
            assert_eq!(pt.p, p3(t, &tc, &cp).unwrap());
        }
    }

    #[test]
    fn tabulate_is_fast() {
        let cp = table_cp();
        let tc = table_tc(0.05);
        let grid = uniform_grid(0.0, 999.9, 0.1);
        assert!(grid.len() >= 10_000);
        let start = std::time::Instant::now();
        let curve = tabulate(Quantity::P3, &tc, &cp, &grid).unwrap();
        let elapsed = start.elapsed();
        assert_eq!(curve.points.len(), grid.len());
        assert!(elapsed.as_millis() < 10, "{elapsed:?}");
    }
}
