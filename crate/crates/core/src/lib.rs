//! Store-and-forward ("transversal hopping") inter-vehicle communication:
//! closed-form transmission-time statistics, an independent Monte Carlo
//! oracle, and a bi-directional microscopic traffic and communication
//! simulator to validate them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod comms;
pub mod config;
pub mod error;
pub mod experiments;
pub mod export;
pub mod numerics;
pub mod oracle;
pub mod params;
pub mod stats;
pub mod traffic;
pub mod units;

pub use error::{Error, Result};
pub use params::{CommParams, RangeModel, TrafficConditions};
