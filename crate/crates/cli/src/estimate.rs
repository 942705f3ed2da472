use std::collections::BTreeSet;
use std::fmt::Write as _;

use attnsched_core::estimate::activity_histogram;
use attnsched_core::io::{to_json_pretty, write_matrix};
use attnsched_core::{build_instance, FollowerProfile, ProblemInstance, RunConfig};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::{emit, files, EstimateArgs};

#[derive(Serialize)]
struct FollowerSummary<'a> {
    id: &'a str,
    sigma: usize,
    rho: f64,
    delta: f64,
    gamma: f64,
    daily_competitor_posts: f64,
}

#[derive(Serialize)]
struct EstimateReport<'a> {
    producer: &'a str,
    slots: usize,
    budget: u64,
    followers: Vec<FollowerSummary<'a>>,
    skipped: &'a [String],
    depth_fallbacks: &'a [String],
}

fn apply_flags(args: &EstimateArgs, config: &mut RunConfig) {
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = args.$field { config.$field = v; })*
        };
    }
    set!(slots, tz_offset_minutes, gap_hours, delta_fallback, gamma);
    set!(
        follower_survival_family,
        cluster_survival_family,
        cluster_exponent
    );
    if args.budget.is_some() {
        config.budget = args.budget;
    }
    if args.mu_fallback.is_some() {
        config.mu_fallback = args.mu_fallback;
    }
}

pub fn run(args: EstimateArgs, mut config: RunConfig, json: bool) -> CliResult<()> {
    apply_flags(&args, &mut config);
    config.validate()?;
    let budget = config
        .budget
        .ok_or_else(|| CliError::Usage("a post budget is required (--budget or config)".into()))?;
    let trace = files::read_trace(&args.trace, config.tz_offset_minutes)?;
    let graph = files::read_graph(&args.graph)?;
    let estimation = build_instance(
        &args.producer,
        &graph,
        &trace,
        config.slots,
        budget,
        &config.estimate_config(),
    )?;
    let instance = &estimation.instance;

    if let Some(path) = &args.histogram {
        let followers: Vec<&str> = instance.followers.iter().map(|f| f.id.as_str()).collect();
        let competitors: BTreeSet<&str> = followers
            .iter()
            .flat_map(|f| graph.followees_of(f))
            .filter(|c| *c != args.producer)
            .collect();
        let users: Vec<&str> = followers
            .iter()
            .copied()
            .chain(competitors.iter().copied())
            .collect();
        let rows = activity_histogram(&users, &trace, config.slots, args.mean_center)?;
        let mut header = vec!["user".to_string(), "role".to_string()];
        header.extend((0..config.slots).map(|s| format!("slot_{s}")));
        let labelled = users.iter().zip(rows).enumerate().map(|(k, (user, row))| {
            let role = if k < followers.len() {
                "follower"
            } else {
                "competitor"
            };
            (vec![user.to_string(), role.to_string()], row)
        });
        write_matrix(files::create(path)?, &header, labelled)
            .map_err(|e| CliError::file(path, e))?;
    }

    fn summary(f: &FollowerProfile) -> FollowerSummary<'_> {
        FollowerSummary {
            id: &f.id,
            sigma: f.sigma,
            rho: f.rho,
            delta: f.delta,
            gamma: f.gamma,
            daily_competitor_posts: f.competitor_load.iter().sum(),
        }
    }
    let report = EstimateReport {
        producer: &args.producer,
        slots: instance.slots,
        budget: instance.budget,
        followers: instance.followers.iter().map(summary).collect(),
        skipped: &estimation.skipped,
        depth_fallbacks: &estimation.depth_fallbacks,
    };

    let mut text = format!(
        "producer {}: {} followers estimated, {} skipped without activity\n",
        args.producer,
        report.followers.len(),
        report.skipped.len()
    );
    for f in &report.followers {
        let _ = writeln!(
            text,
            "  {:<16} sigma {:>3}  rho {:.6}  delta {:.6}  gamma {:.6}  competitor posts/day {:.6}",
            f.id, f.sigma, f.rho, f.delta, f.gamma, f.daily_competitor_posts
        );
    }
    if !report.depth_fallbacks.is_empty() {
        let _ = writeln!(
            text,
            "population depth used for: {}",
            report.depth_fallbacks.join(", ")
        );
    }
    match (&args.out, json) {
        (Some(path), _) => {
            files::write_json(path, instance)?;
            emit(json, &report, text);
        }
        (None, false) => {
            eprint!("{text}");
            print!("{}", to_json_pretty(instance));
        }
        (None, true) => emit(
            true,
            &WithInstance {
                report: &report,
                instance,
            },
            String::new(),
        ),
    }
    Ok(())
}

#[derive(Serialize)]
struct WithInstance<'a> {
    #[serde(flatten)]
    report: &'a EstimateReport<'a>,
    instance: &'a ProblemInstance,
}
