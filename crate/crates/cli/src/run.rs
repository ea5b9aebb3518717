//! Subcommand drivers: run an experiment and write its outputs.

use std::fs;
use std::path::Path;

use transhop::config::Config;
use transhop::experiments::{analytic, jam, oracle, validate};
use transhop::export::{self, to_file};
use transhop::{Error, Result};

use crate::selftest::{self, Check};

fn prepare(dir: &Path, config: &Config) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), config.to_toml_string())?;
    Ok(())
}

pub fn analytic(config: &Config) -> Result<Vec<Check>> {
    let dir = config.output_dir.join("analytic");
    prepare(&dir, config)?;
    let spec = config.analytic_spec();
    let report = analytic::run_analytic(&spec)?;
    to_file(&dir.join("table.csv"), |w| export::write_table(w, &report.table))?;
    to_file(&dir.join("curves.csv"), |w| export::write_curves(w, &report.curves))?;
    to_file(&dir.join("crossover.json"), |w| export::write_json(w, &report.crossovers))?;
    eprintln!("analytic: {} table rows, {} curves -> {}", report.table.len(), report.curves.len(), dir.display());
    let reference = spec.speed == 25.0 && spec.density == 0.03 && spec.range == 200.0 && spec.r_min == 1000.0;
    Ok(selftest::analytic(&report, reference))
}

pub fn oracle(config: &Config) -> Result<Vec<Check>> {
    let dir = config.output_dir.join("oracle");
    prepare(&dir, config)?;
    let report = oracle::run_oracle(&config.oracle_spec())?;
    to_file(&dir.join("report.json"), |w| export::write_json(w, &report))?;
    eprintln!("oracle: {} cells of {} samples -> {}", report.cells.len(), report.samples, dir.display());
    Ok(selftest::oracle(&report))
}

pub fn validate(config: &Config) -> Result<Vec<Check>> {
    let dir = config.output_dir.join("validate");
    prepare(&dir, config)?;
    let specs = config.validate_cells();
    if specs.is_empty() {
        return Err(Error::Config("validate: no cells configured".into()));
    }
    eprintln!("validate: {} cells", specs.len());
    let mut reports = Vec::new();
    for (spec, run) in specs.iter().zip(validate::run_cells(&specs, config.validate.parallel)) {
        let run = run?;
        let name = format!("records_alpha{}_lanes{}.csv", spec.alpha, spec.lanes);
        to_file(&dir.join(name), |w| export::write_records(w, &run.records))?;
        let r = &run.report;
        eprintln!(
            "  alpha={} lanes={}: {} messages in {:.1} h, U(tau3) = {:?}",
            r.alpha,
            r.lanes,
            r.messages,
            r.simulated / 3600.0,
            r.tau3.u
        );
        reports.push(run.report);
    }
    to_file(&dir.join("report.json"), |w| export::write_json(w, &reports))?;
    Ok(selftest::validate(&reports))
}

pub fn jam(config: &Config) -> Result<Vec<Check>> {
    let dir = config.output_dir.join("jam");
    prepare(&dir, config)?;
    let run = jam::run_jam(&config.jam_spec())?;
    to_file(&dir.join("summary.json"), |w| export::write_json(w, &run.summary))?;
    to_file(&dir.join("speed_field.csv"), |w| export::write_field(w, &run.field))?;
    to_file(&dir.join("fronts.csv"), |w| export::write_fronts(w, &run.fronts))?;
    to_file(&dir.join("trajectories.csv"), |w| export::write_trajectories(w, &run.trajectories))?;
    to_file(&dir.join("events.csv"), |w| export::write_events(w, &run.events))?;
    to_file(&dir.join("records.csv"), |w| export::write_records(w, &run.records))?;
    to_file(&dir.join("detectors.csv"), |w| export::write_detectors(w, &run.detectors))?;
    eprintln!(
        "jam: breakdown at {:?} s, {} messages -> {}",
        run.summary.breakdown_time,
        run.summary.messages_created,
        dir.display()
    );
    Ok(selftest::jam(&run.summary))
}
