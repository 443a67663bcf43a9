use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use glycosim_core::analysis::{group_stats, significance, GroupStats, Grouping, Metric, SignificanceResult, Spread};
use serde::Serialize;

use super::classify::GroupsFile;
use super::{mean_spread, read_json};
use crate::config::{set, Config};
use crate::error::CliError;
use crate::output::{sibling, to_json, Run};

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Groups JSON written by `classify`.
    #[arg(long)]
    pub groups: PathBuf,
    /// peak_time, peak_value, t_bio, g_bio, kabs, kgri or b.
    #[arg(long)]
    pub metric: Option<Metric>,
    /// sd or sem.
    #[arg(long)]
    pub spread: Option<Spread>,
    /// Compare Group 1 subjects split by biological peak value instead of the groups.
    #[arg(long)]
    pub split: bool,
    /// Split threshold, mg/dL.
    #[arg(long)]
    pub split_threshold: Option<f64>,
    /// Stats JSON; a `.significance.txt` sibling holds the readable report.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct StatsFile {
    metric: Metric,
    unit: String,
    spread: Spread,
    grouping: Grouping,
    groups: Vec<GroupStats>,
    significance: Option<SignificanceResult>,
    significance_error: Option<String>,
}

pub fn run(args: StatsArgs, mut config: Config) -> Result<(), CliError> {
    let mut run = Run::start("stats");
    let s = &mut config.stats;
    set(&mut s.metric, args.metric);
    set(&mut s.spread, args.spread);
    s.split |= args.split;
    set(&mut s.split_threshold, args.split_threshold);

    run.input(&args.groups);
    let groups: GroupsFile = read_json(&args.groups)?;
    let subjects = &groups.classification.subjects;
    let s = &config.stats;
    let grouping = if s.split {
        Grouping::Group1Split {
            threshold: s.split_threshold,
        }
    } else {
        Grouping::Groups
    };
    let rows = group_stats(subjects, grouping, &[s.metric], s.spread);
    let (sig, sig_error) = match significance(subjects, grouping, s.metric) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let file = StatsFile {
        metric: s.metric,
        unit: s.metric.unit().to_string(),
        spread: s.spread,
        grouping,
        groups: rows,
        significance: sig,
        significance_error: sig_error,
    };
    let report = render(&file);
    print!("{report}");
    run.write(&args.out, &to_json(&file))?;
    run.write(&sibling(&args.out, "significance.txt"), report.as_bytes())?;
    run.finish(&args.out, &config)?;
    Ok(())
}

fn render(f: &StatsFile) -> String {
    let spread = match f.spread {
        Spread::Sd => "sd",
        Spread::Sem => "sem",
    };
    let mut out = String::new();
    let _ = writeln!(out, "{} ({}), mean ± {spread}", f.metric.as_str(), f.unit);
    for row in &f.groups {
        let m = &row.metrics[0];
        let _ = writeln!(out, "  {:<24} n = {:<3} {}", row.group, row.n, mean_spread(m.mean, m.spread));
    }
    match (&f.significance, &f.significance_error) {
        (Some(sig), _) => {
            let a = &sig.anova;
            let _ = writeln!(
                out,
                "one-way ANOVA: F({}, {}) = {:.4}, p = {:.4e}",
                a.df_between, a.df_within, a.f, a.p
            );
            let _ = writeln!(out, "pairwise t-tests, Bonferroni over {} comparisons:", sig.pairwise.len());
            for c in &sig.pairwise {
                let _ = writeln!(
                    out,
                    "  {} vs {}: difference {:.4}, p = {:.4e} {}",
                    c.first, c.second, c.mean_difference, c.p_adjusted, c.stars
                );
            }
        }
        (None, Some(e)) => {
            let _ = writeln!(out, "no significance test: {e}");
        }
        (None, None) => {}
    }
    out
}
