use std::fmt::Write as _;

use attnsched_core::io::{write_matrix, write_rows};
use attnsched_core::objective::timeline_view;
use attnsched_core::{heatmap, Objective};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::{emit, files, EvaluateArgs};

#[derive(Serialize)]
struct FollowerAttention<'a> {
    id: &'a str,
    attention: f64,
    weighted: f64,
}

#[derive(Serialize)]
struct EvaluateReport<'a> {
    total: f64,
    posts: u64,
    budget: u64,
    followers: Vec<FollowerAttention<'a>>,
    per_source_slot: &'a [f64],
}

#[derive(Serialize)]
struct ClusterRow<'a> {
    follower: &'a str,
    position: usize,
    source_slot: usize,
    producer_count: u64,
    depth_offset: f64,
    attention: f64,
}

pub fn run(args: EvaluateArgs, json: bool) -> CliResult<()> {
    let instance = files::read_instance(&args.instance)?;
    let schedule = files::read_schedule(&args.schedule)?;
    let breakdown = Objective::new(&instance)?.breakdown(&schedule)?;

    if let Some(path) = &args.breakdown {
        let mut rows = Vec::new();
        for (j, f) in instance.followers.iter().enumerate() {
            for view in timeline_view(&schedule, f)? {
                rows.push(ClusterRow {
                    follower: &f.id,
                    position: view.position,
                    source_slot: view.source_slot,
                    producer_count: view.producer_count,
                    depth_offset: view.depth_offset,
                    attention: breakdown.per_cluster[view.position][j],
                });
            }
        }
        write_rows(files::create(path)?, &rows).map_err(|e| CliError::file(path, e))?;
    }
    if let Some(path) = &args.heatmap {
        let cells = heatmap(&schedule, &instance, args.mean_center)?;
        let mut header = vec!["broadcast_slot".to_string()];
        header.extend((0..instance.slots).map(|s| format!("login_{s}")));
        let rows = cells
            .into_iter()
            .enumerate()
            .map(|(s, row)| (vec![s.to_string()], row));
        write_matrix(files::create(path)?, &header, rows).map_err(|e| CliError::file(path, e))?;
    }

    let report = EvaluateReport {
        total: breakdown.total,
        posts: schedule.total(),
        budget: instance.budget,
        followers: instance
            .followers
            .iter()
            .zip(&breakdown.per_follower)
            .map(|(f, &a)| FollowerAttention {
                id: &f.id,
                attention: a,
                weighted: f.gamma * a,
            })
            .collect(),
        per_source_slot: &breakdown.per_source_slot,
    };
    let mut text = format!("attention potential: {:.6}\n", report.total);
    let _ = writeln!(text, "posts: {} of budget {}", report.posts, report.budget);
    for f in &report.followers {
        let _ = writeln!(text, "  {:<16} {:.6}", f.id, f.weighted);
    }
    emit(json, &report, text);
    Ok(())
}
