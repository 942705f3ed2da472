use attnsched_core::simulate::analytic_reference;
use attnsched_core::{simulate, simulate_merged, RunConfig, SimulationMode};
use serde::Serialize;

use crate::error::CliResult;
use crate::{emit, files, SimulateArgs};

#[derive(Serialize)]
struct SimulateReport {
    mode: SimulationMode,
    days: u64,
    seed: u64,
    empirical_total: f64,
    standard_error: f64,
    analytic_total: f64,
    /// Absent when the standard error is zero.
    z_score: Option<f64>,
}

pub fn run(args: SimulateArgs, config: RunConfig, json: bool) -> CliResult<()> {
    let instance = files::read_instance(&args.instance)?;
    let schedule = files::read_schedule(&args.schedule)?;
    let days = args.days.unwrap_or(config.days);
    let seed = args.seed.unwrap_or(config.seed);
    let result = if args.merged {
        simulate_merged(&schedule, &instance, days, seed)?
    } else {
        simulate(&schedule, &instance, days, seed)?
    };
    let analytic = analytic_reference(&schedule, &instance)?;
    let gap = result.empirical_total - analytic;
    let z_score = if result.standard_error > 0.0 {
        Some(gap / result.standard_error)
    } else if gap.abs() < 1e-12 {
        Some(0.0)
    } else {
        None
    };
    let report = SimulateReport {
        mode: result.mode,
        days,
        seed,
        empirical_total: result.empirical_total,
        standard_error: result.standard_error,
        analytic_total: analytic,
        z_score,
    };
    let mode = match report.mode {
        SimulationMode::PerSlotClusters => "per-slot clusters",
        SimulationMode::MergedClusters => "merged clusters",
    };
    let z = report
        .z_score
        .map_or_else(|| "undefined".to_string(), |z| format!("{z:.6}"));
    let text = format!(
        "mode: {mode}\ndays: {days}\nseed: {seed}\nempirical: {:.6}\nstandard error: {:.6}\nanalytic (rounded loads): {:.6}\nz: {z}\n",
        report.empirical_total, report.standard_error, report.analytic_total
    );
    emit(json, &report, text);
    Ok(())
}
