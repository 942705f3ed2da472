use std::fmt::Write as _;

use attnsched_core::io::write_rows;
use attnsched_core::optimize::{
    brute_force, heuristic, login_activity, marginal_allocation, multistart, Step,
};
use attnsched_core::{attention_potential, RunConfig, Schedule, Termination};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::{emit, files, Method, OptimizeArgs};

#[derive(Serialize)]
struct OptimizeReport {
    method: String,
    schedule: Schedule,
    total: f64,
    posts: u64,
    budget: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    evaluations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    terminated_by: Option<Termination>,
    trajectory: Vec<Step>,
}

#[derive(Serialize)]
struct StepRow {
    step: usize,
    slot: usize,
    gain: f64,
}

pub fn run(args: OptimizeArgs, config: RunConfig, json: bool) -> CliResult<()> {
    let mut instance = files::read_instance(&args.instance)?;
    if let Some(budget) = args.budget.or(config.budget) {
        instance.budget = budget;
    }
    let report = if let Some(kind) = args.heuristic {
        let spend = args.spend.unwrap_or(instance.budget);
        let activity = login_activity(&instance);
        let schedule = heuristic(kind, &instance, spend, Some(&activity), &config.windows())?;
        let total = attention_potential(&schedule, &instance)?.total;
        OptimizeReport {
            method: format!("heuristic {kind}"),
            posts: schedule.total(),
            schedule,
            total,
            budget: instance.budget,
            evaluations: None,
            terminated_by: None,
            trajectory: Vec::new(),
        }
    } else {
        let (name, result) = match args.method {
            Method::Marginal => {
                let initial = match &args.initial {
                    Some(path) => files::read_schedule(path)?,
                    None => Schedule::zeros(instance.slots),
                };
                ("marginal", marginal_allocation(&instance, &initial)?)
            }
            Method::Brute => {
                let cap = args.enumeration_cap.unwrap_or(config.enumeration_cap);
                ("brute", brute_force(&instance, u128::from(cap))?)
            }
            Method::Multistart => {
                let restarts = args.restarts.unwrap_or(config.restarts);
                let seed = args.seed.unwrap_or(config.seed);
                ("multistart", multistart(&instance, restarts, seed)?)
            }
        };
        OptimizeReport {
            method: name.to_string(),
            posts: result.schedule.total(),
            schedule: result.schedule,
            total: result.total,
            budget: instance.budget,
            evaluations: Some(result.evaluations),
            terminated_by: Some(result.terminated_by),
            trajectory: result.trajectory,
        }
    };

    if let Some(path) = &args.trace {
        let rows: Vec<StepRow> = report
            .trajectory
            .iter()
            .enumerate()
            .map(|(k, s)| StepRow {
                step: k + 1,
                slot: s.slot,
                gain: s.gain,
            })
            .collect();
        write_rows(files::create(path)?, &rows).map_err(|e| CliError::file(path, e))?;
    }
    if let Some(path) = &args.out {
        files::write_json(path, &report.schedule)?;
    }

    let mut text = format!("method: {}\n", report.method);
    let _ = writeln!(text, "attention potential: {:.6}", report.total);
    let _ = writeln!(text, "posts: {} of budget {}", report.posts, report.budget);
    let _ = writeln!(text, "schedule: {:?}", report.schedule.posts);
    if let (Some(evaluations), Some(stop)) = (report.evaluations, report.terminated_by) {
        let _ = writeln!(text, "evaluations: {evaluations}\nterminated by: {stop}");
    }
    emit(json, &report, text);
    Ok(())
}
