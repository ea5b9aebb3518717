//! CSV and JSON output. Units are SI (s, m, m/s) unless a column name says
//! otherwise; missing values are empty fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::analytics::{CharacteristicTimes, DistributionCurve};
use crate::comms::{CommEvent, TransmissionRecord};
use crate::error::Result;
use crate::experiments::jam::{FrontPosition, SpeedCell, TrajectoryPoint};
use crate::traffic::Detector;
use crate::units::ms_to_kmh;

pub const TRAJECTORY_HEADER: &str = "t,id,direction,lane,x,v,equipped";
pub const RECORD_HEADER: &str =
    "message_id,kind,creation_time,source_x,tau1,tau2,tau3,delivery_x,relay_id,receiver_id,tau3_any_relay,status";
pub const EVENT_HEADER: &str = "time,message_id,kind,event,vehicle,x";
pub const DETECTOR_HEADER: &str = "x,direction,time,lane,speed";
pub const FIELD_HEADER: &str = "t,x,speed,samples";
pub const FRONT_HEADER: &str = "t,upstream_x,downstream_x";
pub const TABLE_HEADER: &str = "alpha,mean_tau2,mean_tau3,tau3_q50,tau3_q90,tau3_q95,info_speed_kmh";
pub const CURVE_HEADER: &str = "quantity,alpha,tau,p";

#[derive(Serialize)]
struct RecordRow<'a> {
    message_id: u64,
    kind: &'a str,
    creation_time: f64,
    source_x: f64,
    tau1: Option<f64>,
    tau2: Option<f64>,
    tau3: Option<f64>,
    delivery_x: Option<f64>,
    relay_id: Option<u64>,
    receiver_id: Option<u64>,
    tau3_any_relay: Option<f64>,
    status: &'a str,
}

#[derive(Serialize)]
struct EventRow<'a> {
    time: f64,
    message_id: u64,
    kind: &'a str,
    event: &'a str,
    vehicle: u64,
    x: f64,
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    id: u64,
    direction: u8,
    lane: usize,
    x: f64,
    v: f64,
    equipped: u8,
}

#[derive(Serialize)]
struct DetectorRow {
    x: f64,
    direction: u8,
    time: f64,
    lane: usize,
    speed: f64,
}

#[derive(Serialize)]
struct TableRow {
    alpha: f64,
    mean_tau2: f64,
    mean_tau3: f64,
    tau3_q50: f64,
    tau3_q90: f64,
    tau3_q95: f64,
    info_speed_kmh: f64,
}

#[derive(Serialize)]
struct CurveRow<'a> {
    quantity: &'a str,
    alpha: f64,
    tau: f64,
    p: f64,
}

#[derive(Serialize)]
struct FrontRow {
    t: f64,
    upstream_x: f64,
    downstream_x: f64,
}

/// Writes rows with the given header even when there are no rows.
fn write_rows<W: Write, R: Serialize>(out: W, header: &str, rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header.split(','))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn snake<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

pub fn write_records<W: Write>(out: W, records: &[TransmissionRecord]) -> Result<()> {
    let status: Vec<String> = records.iter().map(|r| snake(&r.status)).collect();
    write_rows(
        out,
        RECORD_HEADER,
        records.iter().zip(&status).map(|(r, s)| RecordRow {
            message_id: r.message_id,
            kind: r.kind.name(),
            creation_time: r.creation_time,
            source_x: r.source_position,
            tau1: r.tau1,
            tau2: r.tau2,
            tau3: r.tau3,
            delivery_x: r.delivery_position,
            relay_id: r.relay_id.map(|v| v.0),
            receiver_id: r.receiver_id.map(|v| v.0),
            tau3_any_relay: r.tau3_any_relay,
            status: s,
        }),
    )
}

pub fn write_events<W: Write>(out: W, events: &[CommEvent]) -> Result<()> {
    let names: Vec<String> = events.iter().map(|e| snake(&e.event)).collect();
    write_rows(
        out,
        EVENT_HEADER,
        events.iter().zip(&names).map(|(e, name)| EventRow {
            time: e.time,
            message_id: e.message_id,
            kind: e.message_kind.name(),
            event: name,
            vehicle: e.vehicle.0,
            x: e.position,
        }),
    )
}

pub fn write_trajectories<W: Write>(out: W, points: &[TrajectoryPoint]) -> Result<()> {
    write_rows(
        out,
        TRAJECTORY_HEADER,
        points.iter().map(|p| TrajectoryRow {
            t: p.t,
            id: p.id,
            direction: p.direction.number(),
            lane: p.lane,
            x: p.x,
            v: p.v,
            equipped: p.equipped as u8,
        }),
    )
}

pub fn write_detectors<'a, W: Write>(out: W, detectors: impl IntoIterator<Item = &'a Detector>) -> Result<()> {
    let rows = detectors.into_iter().flat_map(|d| {
        d.passages().iter().map(move |p| DetectorRow {
            x: d.position,
            direction: d.direction.number(),
            time: p.time,
            lane: p.lane,
            speed: p.speed,
        })
    });
    write_rows(out, DETECTOR_HEADER, rows)
}

pub fn write_field<W: Write>(out: W, cells: &[SpeedCell]) -> Result<()> {
    write_rows(out, FIELD_HEADER, cells)
}

pub fn write_fronts<W: Write>(out: W, fronts: &[FrontPosition]) -> Result<()> {
    write_rows(
        out,
        FRONT_HEADER,
        fronts.iter().map(|f| FrontRow {
            t: f.t,
            upstream_x: f.upstream,
            downstream_x: f.downstream,
        }),
    )
}

pub fn write_table<W: Write>(out: W, rows: &[CharacteristicTimes]) -> Result<()> {
    write_rows(
        out,
        TABLE_HEADER,
        rows.iter().map(|c| TableRow {
            alpha: c.alpha,
            mean_tau2: c.mean_tau2,
            mean_tau3: c.mean_tau3,
            tau3_q50: c.tau3_q50,
            tau3_q90: c.tau3_q90,
            tau3_q95: c.tau3_q95,
            info_speed_kmh: ms_to_kmh(c.info_speed),
        }),
    )
}

/// Long format: one row per curve point.
pub fn write_curves<W: Write>(out: W, curves: &[DistributionCurve]) -> Result<()> {
    let rows = curves.iter().flat_map(|c| {
        c.points.iter().map(move |p| CurveRow {
            quantity: c.quantity.name(),
            alpha: c.conditions.alpha,
            tau: p.tau,
            p: p.p,
        })
    });
    write_rows(out, CURVE_HEADER, rows)
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Creates `path` and hands a buffered writer to `write`.
pub fn to_file<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut out = BufWriter::new(File::create(path)?);
    write(&mut out)?;
    out.flush()?;
    Ok(())
}
