//! Empirical distributions and their comparison with analytic CDFs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted sample set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Builds the distribution from finite samples; NaNs are rejected.
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("sample", bad, "samples must be finite"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(EmpiricalDistribution { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn mean(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        Ok(self.samples.iter().sum::<f64>() / self.len() as f64)
    }

    /// Fraction of samples `<= tau` (right-continuous).
    pub fn ecdf(&self, tau: f64) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        Ok(self.count_le(tau) as f64 / self.len() as f64)
    }

    fn count_le(&self, tau: f64) -> usize {
        self.samples.partition_point(|&s| s <= tau)
    }

    /// Quantile with linear interpolation between order statistics at
    /// position `q (n - 1)`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::invalid("q", q, "quantile level must lie in [0, 1]"));
        }
        let h = q * (self.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(self.len() - 1);
        let frac = h - lo as f64;
        Ok(self.samples[lo] + frac * (self.samples[hi] - self.samples[lo]))
    }

    pub fn median(&self) -> Result<f64> {
        self.quantile(0.5)
    }
}

/// One-sample Kolmogorov–Smirnov distance `sup |F_n - F|`. The left limit of
/// `cdf` is taken one ulp below each sample, so CDFs with atoms (e.g. the
/// instantaneous first hop at `tau = 0`) are handled.
pub fn ks_distance<F: Fn(f64) -> f64>(dist: &EmpiricalDistribution, cdf: F) -> Result<f64> {
    if dist.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let n = dist.len() as f64;
    let samples = dist.samples();
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < samples.len() {
        let x = samples[i];
        let mut j = i;
        while j < samples.len() && samples[j] == x {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        d = d.max((at - cdf(x)).abs()).max((below - cdf(x.next_down())).abs());
        i = j;
    }
    Ok(d)
}

/// Two-sample Kolmogorov–Smirnov distance.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let (xa, xb) = (a.samples(), b.samples());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Critical one-sample KS distance `1.63 / sqrt(n)`.
pub fn ks_critical_one_sample(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Asymptotic two-sample KS critical distance at the 5 % level.
pub fn ks_critical_two_sample(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.36 * ((n + m) / (n * m)).sqrt()
}

/// Normalised squared discrepancy between the empirical and an analytic CDF:
///
/// `U = sum_i (x_i - xhat_i)^2 / sum_i (x_i - xbar)^2`
///
/// over all samples `t_i <= analytic_q95`, where `x_i` is the empirical CDF at
/// `t_i` (equal to `i / n` for distinct samples), `xhat_i` the analytic CDF and
/// `xbar` the mean of the included `x_i`.
pub fn uncertainty_u<F: Fn(f64) -> f64>(
    dist: &EmpiricalDistribution,
    analytic_cdf: F,
    analytic_q95: f64,
) -> Result<f64> {
    if dist.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            have: dist.len(),
        });
    }
    let included = dist.count_le(analytic_q95);
    if included < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            have: included,
        });
    }
    let n = dist.len() as f64;
    let samples = &dist.samples()[..included];
    let observed: Vec<f64> = samples
        .iter()
        .map(|&t| dist.count_le(t) as f64 / n)
        .collect();
    let analytic: Vec<f64> = samples.iter().map(|&t| analytic_cdf(t)).collect();
    uncertainty_from_values(&observed, &analytic)
}

/// `U` from paired observed and analytic cumulative values.
pub fn uncertainty_from_values(observed: &[f64], analytic: &[f64]) -> Result<f64> {
    assert_eq!(observed.len(), analytic.len());
    if observed.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            have: observed.len(),
        });
    }
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &xhat) in observed.iter().zip(analytic) {
        num += (x - xhat).powi(2);
        den += (x - mean).powi(2);
    }
    if den == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q50: f64,
    pub q90: f64,
    pub q95: f64,
}

/// Summary of one characteristic time against its analytic CDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantityComparison {
    pub quantity: String,
    pub n: usize,
    #[serde(rename = "U")]
    pub u: Option<f64>,
    #[serde(rename = "KS")]
    pub ks: f64,
    pub quantiles: Quantiles,
    pub analytic_quantiles: Quantiles,
}

/// Compares samples against `cdf`, whose quantiles are supplied by `inverse`.
pub fn compare<F, Q>(
    quantity: &str,
    dist: &EmpiricalDistribution,
    cdf: F,
    inverse: Q,
) -> Result<QuantityComparison>
where
    F: Fn(f64) -> f64,
    Q: Fn(f64) -> Result<f64>,
{
    let analytic_quantiles = Quantiles {
        q50: inverse(0.5)?,
        q90: inverse(0.9)?,
        q95: inverse(0.95)?,
    };
    let ks = ks_distance(dist, &cdf)?;
    let u = match uncertainty_u(dist, &cdf, analytic_quantiles.q95) {
        Ok(u) => Some(u),
        Err(Error::DegenerateDenominator | Error::TooFewSamples { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(QuantityComparison {
        quantity: quantity.to_string(),
        n: dist.len(),
        u,
        ks,
        quantiles: Quantiles {
            q50: dist.quantile(0.5)?,
            q90: dist.quantile(0.9)?,
            q95: dist.quantile(0.95)?,
        },
        analytic_quantiles,
    })
}
