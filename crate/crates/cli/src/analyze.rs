use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use attnsched_core::analyze::{
    expand_counts, interevent_histogram, interevent_times, observations, permutation_test,
    reaction_prob_by_size, reaction_prob_by_size_position, RateCell,
};
use attnsched_core::io::{read_counts, write_matrix, write_rows};
use attnsched_core::{
    extract_clusters, powerlaw_alpha, reconstruct_timeline, RunConfig, SizeBucket, TweetObservation,
};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::{emit, files, AnalyzeArgs};

const HISTOGRAM_HOURS: usize = 48;

#[derive(Serialize)]
struct SizeRow {
    size: String,
    clusters: Option<u64>,
    reactions: u64,
    tweets: u64,
    probability: f64,
}

#[derive(Serialize)]
struct PositionRow {
    size: usize,
    position: usize,
    reactions: u64,
    tweets: u64,
    probability: f64,
}

#[derive(Serialize)]
struct PairRow {
    i: usize,
    j: usize,
    t_obs: f64,
    p_value: f64,
}

#[derive(Serialize)]
struct AnalyzeReport {
    tweets: usize,
    by_size: Vec<SizeRow>,
    pairs: Vec<PairRow>,
    permutations: usize,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    interevent_gaps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
}

/// Observations plus, for traces, cluster counts and inter-event gaps.
struct Inputs {
    obs: Vec<TweetObservation>,
    clusters: Option<BTreeMap<SizeBucket, u64>>,
    taus: Option<Vec<f64>>,
}

fn load(args: &AnalyzeArgs, config: &RunConfig) -> CliResult<Inputs> {
    if let Some(path) = &args.counts {
        let rows = read_counts(files::open(path)?).map_err(|e| CliError::file(path, e))?;
        return Ok(Inputs {
            obs: expand_counts(&rows)?,
            clusters: None,
            taus: None,
        });
    }
    let (Some(trace_path), Some(graph_path)) = (&args.trace, &args.graph) else {
        return Err(CliError::Usage(
            "pass --counts, or --trace with --graph".into(),
        ));
    };
    let tz = args.tz_offset_minutes.unwrap_or(config.tz_offset_minutes);
    let trace = files::read_trace(trace_path, tz)?;
    let graph = files::read_graph(graph_path)?;
    let users: Vec<String> = match (&args.user, args.all) {
        (Some(user), _) => vec![user.clone()],
        (None, true) => graph.readers().map(str::to_owned).collect(),
        (None, false) => return Err(CliError::Usage("pass --user or --all".into())),
    };
    let mut obs = Vec::new();
    let mut clusters: BTreeMap<SizeBucket, u64> = BTreeMap::new();
    let mut taus = Vec::new();
    for user in &users {
        let records = extract_clusters(&reconstruct_timeline(user, &graph, &trace)?);
        for r in &records {
            *clusters.entry(SizeBucket::of(r.size)).or_default() += 1;
        }
        obs.extend(observations(&records));
        let stamps: Vec<i64> = trace.user_events(user).map(|e| e.ts).collect();
        if stamps.len() >= 2 {
            taus.extend(interevent_times(&stamps)?);
        }
    }
    Ok(Inputs {
        obs,
        clusters: Some(clusters),
        taus: Some(taus),
    })
}

fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> CliResult<()> {
    let path = dir.join(name);
    write_rows(files::create(&path)?, rows).map_err(|e| CliError::file(&path, e))
}

fn write_square(dir: &Path, name: &str, cells: &[Vec<f64>]) -> CliResult<()> {
    let path = dir.join(name);
    let mut header = vec!["size".to_string()];
    header.extend((1..=cells.len()).map(|j| j.to_string()));
    let rows = cells
        .iter()
        .enumerate()
        .map(|(i, row)| (vec![(i + 1).to_string()], row.clone()));
    write_matrix(files::create(&path)?, &header, rows).map_err(|e| CliError::file(&path, e))
}

pub fn run(args: AnalyzeArgs, config: RunConfig, json: bool) -> CliResult<()> {
    if args.max_size < 2 {
        return Err(CliError::Usage("--max-size must be at least 2".into()));
    }
    let permutations = args.permutations.unwrap_or(config.permutations);
    let seed = args.seed.unwrap_or(config.seed);
    let inputs = load(&args, &config)?;
    let obs = &inputs.obs;

    let by_size: Vec<SizeRow> = reaction_prob_by_size(obs)
        .into_iter()
        .map(|(bucket, cell)| SizeRow {
            size: bucket.to_string(),
            clusters: inputs
                .clusters
                .as_ref()
                .map(|c| c.get(&bucket).copied().unwrap_or(0)),
            reactions: cell.reactions,
            tweets: cell.total,
            probability: cell.probability(),
        })
        .collect();
    let rate = reaction_prob_by_size(obs);
    let present = |s: usize| {
        rate.get(&SizeBucket::Size(s))
            .is_some_and(|c: &RateCell| c.total > 0)
    };

    let n = args.max_size;
    let mut t_matrix = vec![vec![f64::NAN; n]; n];
    let mut p_matrix = vec![vec![f64::NAN; n]; n];
    let mut pairs = Vec::new();
    for i in 1..=n {
        for j in (i + 1)..=n {
            if !(present(i) && present(j)) {
                continue;
            }
            let result = permutation_test(obs, i, j, permutations, seed)?;
            t_matrix[i - 1][j - 1] = result.t_obs;
            t_matrix[j - 1][i - 1] = -result.t_obs;
            p_matrix[i - 1][j - 1] = result.p_value;
            pairs.push(PairRow {
                i,
                j,
                t_obs: result.t_obs,
                p_value: result.p_value,
            });
        }
    }
    for (i, row) in t_matrix.iter_mut().enumerate() {
        if present(i + 1) {
            row[i] = 0.0;
        }
    }

    let alpha = inputs
        .taus
        .as_ref()
        .and_then(|taus| powerlaw_alpha(taus, args.tau_min).ok());

    if let Some(dir) = &args.out_dir {
        write_csv(dir, "reaction_by_size.csv", &by_size)?;
        let positions: Vec<PositionRow> = reaction_prob_by_size_position(obs)
            .into_iter()
            .map(|((size, position), cell)| PositionRow {
                size,
                position,
                reactions: cell.reactions,
                tweets: cell.total,
                probability: cell.probability(),
            })
            .collect();
        write_csv(dir, "reaction_by_size_position.csv", &positions)?;
        write_square(dir, "t_obs.csv", &t_matrix)?;
        write_square(dir, "p_values.csv", &p_matrix)?;
        if let Some(taus) = &inputs.taus {
            #[derive(Serialize)]
            struct Bin {
                hours: String,
                gaps: u64,
            }
            let bins: Vec<Bin> = interevent_histogram(taus, HISTOGRAM_HOURS)
                .into_iter()
                .enumerate()
                .map(|(h, gaps)| Bin {
                    hours: if h == HISTOGRAM_HOURS {
                        format!(">={h}")
                    } else {
                        h.to_string()
                    },
                    gaps,
                })
                .collect();
            write_csv(dir, "interevent_hours.csv", &bins)?;
        }
    }

    let report = AnalyzeReport {
        tweets: obs.len(),
        by_size,
        pairs,
        permutations,
        seed,
        interevent_gaps: inputs.taus.as_ref().map(Vec::len),
        alpha,
    };
    emit(json, &report, render(&report, &t_matrix, &p_matrix));
    Ok(())
}

fn render(report: &AnalyzeReport, t_matrix: &[Vec<f64>], p_matrix: &[Vec<f64>]) -> String {
    let mut text = format!("tweets: {}\n\nP(R | C = c)\n", report.tweets);
    for row in &report.by_size {
        let _ = writeln!(
            text,
            "  {:>4}  {:>10} / {:<10} {:.6}",
            row.size, row.reactions, row.tweets, row.probability
        );
    }
    let matrix = |text: &mut String, title: &str, cells: &[Vec<f64>], digits: usize| {
        let _ = writeln!(text, "\n{title}");
        let _ = write!(text, "{:>6}", "");
        for j in 1..=cells.len() {
            let _ = write!(text, "{j:>12}");
        }
        text.push('\n');
        for (i, row) in cells.iter().enumerate() {
            let _ = write!(text, "{:>6}", i + 1);
            for v in row {
                if v.is_nan() {
                    let _ = write!(text, "{:>12}", "-");
                } else {
                    let _ = write!(text, "{v:>12.digits$}");
                }
            }
            text.push('\n');
        }
    };
    matrix(
        &mut text,
        "T_obs(i, j) = P(R | C = i) - P(R | C = j)",
        t_matrix,
        6,
    );
    let title = format!(
        "one-sided p-values, {} permutations, seed {}",
        report.permutations, report.seed
    );
    matrix(&mut text, &title, p_matrix, 4);
    if let Some(gaps) = report.interevent_gaps {
        let alpha = report
            .alpha
            .map_or_else(|| "not enough gaps".to_string(), |a| format!("{a:.6}"));
        let _ = writeln!(text, "\ninter-event gaps: {gaps}\npower-law alpha: {alpha}");
    }
    text
}
