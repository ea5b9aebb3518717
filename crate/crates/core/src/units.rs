//! Unit conversions applied at the configuration boundary. Everything inside
//! the crate is SI: metres, seconds, vehicles per metre.

pub const KMH_PER_MS: f64 = 3.6;

pub fn kmh_to_ms(v: f64) -> f64 {
    v / KMH_PER_MS
}

pub fn ms_to_kmh(v: f64) -> f64 {
    v * KMH_PER_MS
}

/// Vehicles per kilometre to vehicles per metre.
pub fn per_km_to_per_m(rho: f64) -> f64 {
    rho / 1000.0
}

pub fn per_m_to_per_km(rho: f64) -> f64 {
    rho * 1000.0
}

pub fn km_to_m(x: f64) -> f64 {
    x * 1000.0
}

pub fn m_to_km(x: f64) -> f64 {
    x / 1000.0
}

/// Vehicles per hour to vehicles per second.
pub fn per_h_to_per_s(q: f64) -> f64 {
    q / 3600.0
}

pub fn per_s_to_per_h(q: f64) -> f64 {
    q * 3600.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_invert() {
        assert_eq!(kmh_to_ms(90.0), 25.0);
        assert_eq!(ms_to_kmh(25.0), 90.0);
        assert_eq!(per_km_to_per_m(30.0), 0.03);
        assert_eq!(km_to_m(1.0), 1000.0);
        assert_eq!(per_h_to_per_s(3600.0), 1.0);
        assert!((per_m_to_per_km(per_km_to_per_m(15.2)) - 15.2).abs() < 1e-12);
    }
}
