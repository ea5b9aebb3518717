use serde::{Deserialize, Serialize};

/// Intelligent Driver Model parameters of one driver-vehicle unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdmParams {
    /// m/s^2
    pub max_accel: f64,
    /// m/s^2
    pub comfort_decel: f64,
    /// s
    pub time_headway: f64,
    /// m
    pub min_gap: f64,
    /// m
    pub length: f64,
    pub accel_exponent: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        IdmParams {
            max_accel: 1.0,
            comfort_decel: 1.5,
            time_headway: 1.2,
            min_gap: 2.0,
            length: 5.0,
            accel_exponent: 4.0,
        }
    }
}

/// Leader seen by a follower: bumper-to-bumper gap and leader speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leader {
    pub gap: f64,
    pub speed: f64,
}

impl IdmParams {
    /// Desired dynamical gap `s0 + max(0, v T + v dv / (2 sqrt(a b)))`.
    pub fn desired_gap(&self, speed: f64, approach_rate: f64, headway_factor: f64) -> f64 {
        let dynamic = speed * self.time_headway * headway_factor
            + speed * approach_rate / (2.0 * (self.max_accel * self.comfort_decel).sqrt());
        self.min_gap + dynamic.max(0.0)
    }

    /// IDM acceleration. `headway_factor` scales the time headway and is 1
    /// outside bottlenecks.
    pub fn acceleration(
        &self,
        speed: f64,
        desired_speed: f64,
        leader: Option<Leader>,
        headway_factor: f64,
    ) -> f64 {
        let free = 1.0 - (speed / desired_speed).powf(self.accel_exponent);
        let interaction = match leader {
            Some(l) => {
                let s_star = self.desired_gap(speed, speed - l.speed, headway_factor);
                let gap = l.gap.max(1e-3);
                (s_star / gap).powi(2)
            }
            None => 0.0,
        };
        self.max_accel * (free - interaction)
    }

    /// Steady-state gap at speed `v < v0` behind a leader at the same speed.
    pub fn equilibrium_gap(&self, speed: f64, desired_speed: f64) -> f64 {
        let s_star = self.min_gap + speed * self.time_headway;
        s_star / (1.0 - (speed / desired_speed).powf(self.accel_exponent)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_road_fixed_point() {
        let p = IdmParams::default();
        assert_eq!(p.acceleration(30.0, 30.0, None, 1.0), 0.0);
        assert!(p.acceleration(10.0, 30.0, None, 1.0) > 0.0);
        assert!(p.acceleration(35.0, 30.0, None, 1.0) < 0.0);
    }

    #[test]
    fn equilibrium_has_zero_acceleration() {
        let p = IdmParams::default();
        let gap = p.equilibrium_gap(20.0, 33.0);
        let a = p.acceleration(20.0, 33.0, Some(Leader { gap, speed: 20.0 }), 1.0);
        assert!(a.abs() < 1e-12);
    }

    #[test]
    fn longer_headway_brakes_harder() {
        let p = IdmParams::default();
        let lead = Some(Leader { gap: 30.0, speed: 20.0 });
        assert!(p.acceleration(20.0, 33.0, lead, 1.5) < p.acceleration(20.0, 33.0, lead, 1.0));
    }
}
