//! TOML run configuration in user units (km, km/h, veh/km, veh/h, minutes).
//!
//! Every key has a default, so an empty file is a valid configuration.
//! Unknown keys are rejected. See `config/default.toml` for the full schema.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::comms::{CommsConfig, JamDetection};
use crate::error::{Error, Result};
use crate::experiments::analytic::AnalyticSpec;
use crate::experiments::jam::JamSpec;
use crate::experiments::oracle::OracleSpec;
use crate::experiments::validate::CellSpec;
use crate::traffic::{BottleneckSpec, DemandProfile, Direction, IdmParams, MobilParams, RoadConfig};
use crate::units::{kmh_to_ms, km_to_m, per_h_to_per_s, per_km_to_per_m};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub road: RoadSection,
    pub idm: IdmParams,
    pub mobil: MobilParams,
    pub comms: CommsSection,
    pub jam_detection: JamDetectionSection,
    pub analytic: AnalyticSection,
    pub oracle: OracleSection,
    pub validate: ValidateSection,
    pub jam: JamSection,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 1,
            output_dir: PathBuf::from("out"),
            road: RoadSection::default(),
            idm: IdmParams::default(),
            mobil: MobilParams::default(),
            comms: CommsSection::default(),
            jam_detection: JamDetectionSection::default(),
            analytic: AnalyticSection::default(),
            oracle: OracleSection::default(),
            validate: ValidateSection::default(),
            jam: JamSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoadSection {
    pub length_km: f64,
    pub lanes_per_direction: usize,
    pub time_step_s: f64,
    pub desired_speed_kmh: f64,
    pub desired_speed_std_kmh: f64,
    pub desired_speed_floor_kmh: f64,
}

impl Default for RoadSection {
    fn default() -> Self {
        RoadSection {
            length_km: 20.0,
            lanes_per_direction: 2,
            time_step_s: 0.25,
            desired_speed_kmh: 120.0,
            desired_speed_std_kmh: 18.0,
            desired_speed_floor_kmh: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommsSection {
    pub range_m: f64,
    pub r_min_km: f64,
    pub landmark_km: f64,
    /// Omit for continuous broadcasting.
    pub broadcast_interval_s: Option<f64>,
    pub track_all_relays: bool,
}

impl Default for CommsSection {
    fn default() -> Self {
        CommsSection {
            range_m: 200.0,
            r_min_km: 1.0,
            landmark_km: 10.0,
            broadcast_interval_s: None,
            track_all_relays: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JamDetectionSection {
    pub congested_kmh: f64,
    pub free_kmh: f64,
    pub smoothing_s: f64,
}

impl Default for JamDetectionSection {
    fn default() -> Self {
        JamDetectionSection {
            congested_kmh: 30.0,
            free_kmh: 60.0,
            smoothing_s: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyticSection {
    /// Penetration levels as fractions.
    pub table_alphas: Vec<f64>,
    pub curve_alphas: Vec<f64>,
    pub speed_kmh: f64,
    pub density_per_km: f64,
    pub tau_max_s: f64,
    pub tau_step_s: f64,
    pub crossover_step_s: f64,
}

impl Default for AnalyticSection {
    fn default() -> Self {
        let d = AnalyticSpec::default();
        AnalyticSection {
            table_alphas: d.table_alphas,
            curve_alphas: d.curve_alphas,
            speed_kmh: 90.0,
            density_per_km: 30.0,
            tau_max_s: d.tau_max,
            tau_step_s: d.tau_step,
            crossover_step_s: d.crossover_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub alphas: Vec<f64>,
    pub samples: usize,
    pub v1_kmh: f64,
    pub v2_kmh: f64,
    pub rho1_per_km: f64,
    pub rho2_per_km: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            alphas: OracleSpec::default().alphas,
            samples: 100_000,
            v1_kmh: 90.0,
            v2_kmh: 90.0,
            rho1_per_km: 30.0,
            rho2_per_km: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    pub inflow_per_h_per_lane: f64,
    /// Landmark messages per cell.
    pub messages: usize,
    pub max_duration_h: f64,
    /// Penetration sweep on `alpha_sweep_lanes` lanes.
    pub alpha_sweep: Vec<f64>,
    pub alpha_sweep_lanes: usize,
    /// Lane sweep at `lane_sweep_alpha`.
    pub lane_sweep: Vec<usize>,
    pub lane_sweep_alpha: f64,
    pub parallel: bool,
}

impl Default for ValidateSection {
    fn default() -> Self {
        ValidateSection {
            inflow_per_h_per_lane: 1200.0,
            messages: 10_000,
            max_duration_h: 400.0,
            alpha_sweep: vec![0.02, 0.04, 0.06, 0.10],
            alpha_sweep_lanes: 1,
            lane_sweep: vec![2, 3, 4],
            lane_sweep_alpha: 0.05,
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JamSection {
    pub alpha: f64,
    pub lanes_per_direction: usize,
    pub bottleneck_km: f64,
    pub bottleneck_length_m: f64,
    /// Relative increase of the time headway inside the bottleneck.
    pub bottleneck_strength: f64,
    pub base_per_h_per_lane: f64,
    pub peak_per_h_per_lane: f64,
    pub rise_start_min: f64,
    pub rise_end_min: f64,
    pub fall_start_min: f64,
    pub fall_end_min: f64,
    pub opposite_per_h_per_lane: f64,
    pub warmup_min: f64,
    pub duration_min: f64,
    pub probe_distance_m: f64,
    pub probe_tolerance_m: f64,
    pub probe_interval_s: f64,
    pub probe_window_min: [f64; 2],
    pub field_dx_m: f64,
    pub field_dt_s: f64,
    pub trajectory_interval_s: f64,
    /// 0 disables the detector log.
    pub detector_spacing_m: f64,
}

impl Default for JamSection {
    fn default() -> Self {
        JamSection {
            alpha: 0.01,
            lanes_per_direction: 2,
            bottleneck_km: 10.0,
            bottleneck_length_m: 1000.0,
            bottleneck_strength: 0.7,
            base_per_h_per_lane: 800.0,
            peak_per_h_per_lane: 1900.0,
            rise_start_min: 0.0,
            rise_end_min: 10.0,
            fall_start_min: 60.0,
            fall_end_min: 70.0,
            opposite_per_h_per_lane: 2400.0,
            warmup_min: 20.0,
            duration_min: 90.0,
            probe_distance_m: 1000.0,
            probe_tolerance_m: 250.0,
            probe_interval_s: 10.0,
            probe_window_min: [0.0, 60.0],
            field_dx_m: 100.0,
            field_dt_s: 30.0,
            trajectory_interval_s: 5.0,
            detector_spacing_m: 1000.0,
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Checks every derived specification.
    pub fn validate(&self) -> Result<()> {
        let road = self.road_config();
        road.validate()?;
        self.comms_config().validate(road.length)?;
        self.jam_detection().validate()?;
        self.analytic_spec().validate()?;
        for cell in self.validate_cells() {
            cell.validate()?;
        }
        let jam = self.jam_spec();
        jam.road.validate()?;
        jam.validate()?;
        Ok(())
    }

    pub fn road_config(&self) -> RoadConfig {
        let r = &self.road;
        RoadConfig {
            length: km_to_m(r.length_km),
            lanes_per_direction: r.lanes_per_direction,
            time_step: r.time_step_s,
            desired_speed_mean: kmh_to_ms(r.desired_speed_kmh),
            desired_speed_std: kmh_to_ms(r.desired_speed_std_kmh),
            desired_speed_floor: kmh_to_ms(r.desired_speed_floor_kmh),
            idm: self.idm,
            mobil: self.mobil,
            bottleneck: None,
        }
    }

    pub fn comms_config(&self) -> CommsConfig {
        let c = &self.comms;
        CommsConfig {
            range: c.range_m,
            r_min: km_to_m(c.r_min_km),
            landmark: Some(km_to_m(c.landmark_km)),
            broadcast_interval: c.broadcast_interval_s,
            track_all_relays: c.track_all_relays,
            jam_detection: None,
        }
    }

    pub fn jam_detection(&self) -> JamDetection {
        let j = &self.jam_detection;
        JamDetection {
            congested_speed: kmh_to_ms(j.congested_kmh),
            free_speed: kmh_to_ms(j.free_kmh),
            smoothing_time: j.smoothing_s,
        }
    }

    pub fn analytic_spec(&self) -> AnalyticSpec {
        let a = &self.analytic;
        AnalyticSpec {
            table_alphas: a.table_alphas.clone(),
            curve_alphas: a.curve_alphas.clone(),
            speed: kmh_to_ms(a.speed_kmh),
            density: per_km_to_per_m(a.density_per_km),
            range: self.comms.range_m,
            r_min: km_to_m(self.comms.r_min_km),
            tau_max: a.tau_max_s,
            tau_step: a.tau_step_s,
            crossover_step: a.crossover_step_s,
            ..AnalyticSpec::default()
        }
    }

    pub fn oracle_spec(&self) -> OracleSpec {
        let o = &self.oracle;
        OracleSpec {
            alphas: o.alphas.clone(),
            samples: o.samples,
            v1: kmh_to_ms(o.v1_kmh),
            v2: kmh_to_ms(o.v2_kmh),
            rho1: per_km_to_per_m(o.rho1_per_km),
            rho2: per_km_to_per_m(o.rho2_per_km),
            range: self.comms.range_m,
            r_min: km_to_m(self.comms.r_min_km),
            broadcast_interval: self.comms.broadcast_interval_s,
            seed: self.seed,
        }
    }

    /// The penetration sweep followed by the lane sweep; cell `i` uses seed `seed + i`.
    pub fn validate_cells(&self) -> Vec<CellSpec> {
        let v = &self.validate;
        let cells = v
            .alpha_sweep
            .iter()
            .map(|&a| (a, v.alpha_sweep_lanes))
            .chain(v.lane_sweep.iter().map(|&l| (v.lane_sweep_alpha, l)));
        cells
            .enumerate()
            .map(|(i, (alpha, lanes))| CellSpec {
                alpha,
                lanes,
                messages: v.messages,
                max_duration: v.max_duration_h * 3600.0,
                inflow_per_lane: per_h_to_per_s(v.inflow_per_h_per_lane),
                road: self.road_config(),
                comms: self.comms_config(),
                seed: self.seed.wrapping_add(i as u64),
            })
            .collect()
    }

    pub fn jam_spec(&self) -> JamSpec {
        let j = &self.jam;
        let min = |m: f64| m * 60.0;
        let mut road = self.road_config();
        road.lanes_per_direction = j.lanes_per_direction;
        let mut comms = self.comms_config();
        comms.landmark = None;
        comms.track_all_relays = true;
        comms.jam_detection = Some(self.jam_detection());
        JamSpec {
            alpha: j.alpha,
            road,
            bottleneck: BottleneckSpec {
                position: km_to_m(j.bottleneck_km),
                length: j.bottleneck_length_m,
                direction: Direction::One,
                strength: j.bottleneck_strength,
            },
            demand: DemandProfile::Trapezoid {
                base: per_h_to_per_s(j.base_per_h_per_lane),
                peak: per_h_to_per_s(j.peak_per_h_per_lane),
                rise_start: min(j.rise_start_min),
                rise_end: min(j.rise_end_min),
                fall_start: min(j.fall_start_min),
                fall_end: min(j.fall_end_min),
            },
            opposite_inflow: per_h_to_per_s(j.opposite_per_h_per_lane),
            comms,
            warmup: min(j.warmup_min),
            duration: min(j.duration_min),
            probe_distance: j.probe_distance_m,
            probe_tolerance: j.probe_tolerance_m,
            probe_interval: j.probe_interval_s,
            probe_window: (min(j.probe_window_min[0]), min(j.probe_window_min[1])),
            field_dx: j.field_dx_m,
            field_dt: j.field_dt_s,
            trajectory_interval: j.trajectory_interval_s,
            detector_spacing: j.detector_spacing_m,
            seed: self.seed,
        }
    }
}
