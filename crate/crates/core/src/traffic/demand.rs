use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Per-lane inflow at the upstream boundary as a function of time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DemandProfile {
    /// veh/s per lane
    Constant { per_lane: f64 },
    /// Base flow, linear rise to a peak, plateau, linear fall back to base.
    /// Times in seconds of simulation time.
    Trapezoid {
        base: f64,
        peak: f64,
        rise_start: f64,
        rise_end: f64,
        fall_start: f64,
        fall_end: f64,
    },
}

impl DemandProfile {
    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            DemandProfile::Constant { per_lane } => per_lane,
            DemandProfile::Trapezoid {
                base,
                peak,
                rise_start,
                rise_end,
                fall_start,
                fall_end,
            } => {
                if t <= rise_start || t >= fall_end {
                    base
                } else if t < rise_end {
                    base + (peak - base) * (t - rise_start) / (rise_end - rise_start)
                } else if t <= fall_start {
                    peak
                } else {
                    peak + (base - peak) * (t - fall_start) / (fall_end - fall_start)
                }
            }
        }
    }

    pub fn max_rate(&self) -> f64 {
        match *self {
            DemandProfile::Constant { per_lane } => per_lane,
            DemandProfile::Trapezoid { base, peak, .. } => base.max(peak),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalProcess {
    /// Inhomogeneous Poisson arrivals (thinning).
    #[default]
    Poisson,
    /// Deterministic arrivals whenever the integrated demand crosses an integer.
    Regular,
}

/// Arrival generator for one lane.
#[derive(Debug, Clone)]
pub(crate) struct ArrivalStream {
    process: ArrivalProcess,
    next_candidate: f64,
    integrated: f64,
}

impl ArrivalStream {
    pub fn new(process: ArrivalProcess, profile: &DemandProfile, rng: &mut ChaCha8Rng) -> Self {
        let mut stream = ArrivalStream {
            process,
            next_candidate: 0.0,
            integrated: 0.0,
        };
        if process == ArrivalProcess::Poisson {
            stream.next_candidate = exp_draw(rng, profile.max_rate());
        }
        stream
    }

    /// Number of arrivals in `(t, t + dt]`.
    pub fn arrivals(
        &mut self,
        profile: &DemandProfile,
        t: f64,
        dt: f64,
        rng: &mut ChaCha8Rng,
    ) -> u32 {
        let end = t + dt;
        match self.process {
            ArrivalProcess::Poisson => {
                let max = profile.max_rate();
                let mut count = 0;
                while self.next_candidate <= end {
                    let accept = profile.rate(self.next_candidate) / max;
                    if rng.random::<f64>() < accept {
                        count += 1;
                    }
                    self.next_candidate += exp_draw(rng, max);
                }
                count
            }
            ArrivalProcess::Regular => {
                let before = self.integrated.floor();
                self.integrated += 0.5 * (profile.rate(t) + profile.rate(end)) * dt;
                (self.integrated.floor() - before) as u32
            }
        }
    }
}

fn exp_draw(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    -(1.0 - rng.random::<f64>()).ln() / rate
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn trapezoid_shape() {
        let p = DemandProfile::Trapezoid {
            base: 0.2,
            peak: 0.5,
            rise_start: 100.0,
            rise_end: 200.0,
            fall_start: 300.0,
            fall_end: 400.0,
        };
        assert_eq!(p.rate(0.0), 0.2);
        assert!((p.rate(150.0) - 0.35).abs() < 1e-12);
        assert_eq!(p.rate(250.0), 0.5);
        assert!((p.rate(350.0) - 0.35).abs() < 1e-12);
        assert_eq!(p.rate(500.0), 0.2);
        assert_eq!(p.max_rate(), 0.5);
    }

    #[test]
    fn counts_match_demand() {
        let profile = DemandProfile::Constant { per_lane: 1200.0 / 3600.0 };
        for process in [ArrivalProcess::Poisson, ArrivalProcess::Regular] {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let mut s = ArrivalStream::new(process, &profile, &mut rng);
            let dt = 0.25;
            let total: u32 = (0..144_000)
                .map(|i| s.arrivals(&profile, i as f64 * dt, dt, &mut rng))
                .sum();
            // 10 h at 1200/h
            assert!((total as f64 - 12_000.0).abs() < 12_000.0 * 0.02, "{process:?}: {total}");
        }
    }
}
