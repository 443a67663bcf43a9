use std::path::PathBuf;

use clap::Args;
use glycosim_core::analysis::{
    classify_subjects, group_stats, Classification, ClassifyOptions, GlucoseCurve, GroupStats, Grouping, Metric,
};
use glycosim_core::estimation::{BatchEntry, EstimationResult};
use glycosim_core::integrator::{integrate, TimeGrid};
use glycosim_core::model::{DoseProfile, Model};
use serde::{Deserialize, Serialize};

use super::{mean_spread, read_json};
use crate::config::{set, Config};
use crate::error::CliError;
use crate::output::{sibling, to_json, Run};

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Results JSON written by `fit`.
    #[arg(long)]
    pub results: PathBuf,
    /// Biological peak tolerance, mg/dL.
    #[arg(long)]
    pub tolg: Option<f64>,
    /// Outlier Kabs threshold, 1/min; defaults to the midpoint of the Group 1
    /// and Group 2 means.
    #[arg(long)]
    pub kabs_threshold: Option<f64>,
    /// Re-simulation horizon for peak detection, min.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Groups JSON; a `.csv` sibling holds the flat table.
    #[arg(long)]
    pub out: PathBuf,
}

/// On-disk groups file.
#[derive(Debug, Serialize, Deserialize)]
pub struct GroupsFile {
    #[serde(flatten)]
    pub classification: Classification,
    #[serde(default)]
    pub summary: Vec<GroupStats>,
    /// Subjects whose fit failed.
    #[serde(default)]
    pub skipped: Vec<String>,
}

pub const SUMMARY_METRICS: [Metric; 3] = [Metric::PeakTime, Metric::Kabs, Metric::Kgri];

fn fitted_curve(r: &EstimationResult, config: &Config, grid: &TimeGrid<f64>) -> Result<GlucoseCurve, CliError> {
    let fixed = config.parameters.fixed;
    let dose = DoseProfile {
        mode: config.fit.dose_mode,
        ..DoseProfile::instantaneous(fixed.dose)
    };
    let model = Model::new(fixed, r.theta, r.gb, dose, config.fit.model_options())
        .map_err(|e| CliError::Validation(format!("{}: {e}", r.subject)))?;
    let traj = integrate(&model, grid).map_err(|e| CliError::Numerical(format!("{}: {e}", r.subject)))?;
    Ok(GlucoseCurve::from(&traj))
}

pub fn run(args: ClassifyArgs, mut config: Config) -> Result<(), CliError> {
    let mut run = Run::start("classify");
    set(&mut config.classify.tol_g, args.tolg);
    if args.kabs_threshold.is_some() {
        config.classify.kabs_threshold = args.kabs_threshold;
    }
    set(&mut config.classify.horizon, args.horizon);

    run.input(&args.results);
    let entries: Vec<BatchEntry> = read_json(&args.results)?;
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for e in entries {
        match e {
            BatchEntry::Ok(r) => results.push(r),
            BatchEntry::Failed { subject, .. } => skipped.push(subject),
        }
    }
    if results.is_empty() {
        return Err(CliError::Validation(format!("{}: no fitted subjects", args.results.display())));
    }
    let grid = TimeGrid::new(0.0, config.classify.horizon, config.fit.dt).map_err(CliError::validation)?;
    let curves = results
        .iter()
        .map(|r| fitted_curve(r, &config, &grid))
        .collect::<Result<Vec<_>, _>>()?;
    let options = ClassifyOptions {
        tol_g: config.classify.tol_g,
        kabs_threshold: config.classify.kabs_threshold,
    };
    let classification = classify_subjects(&results, &curves, &options).map_err(CliError::validation)?;
    let summary = group_stats(&classification.subjects, Grouping::Groups, &SUMMARY_METRICS, config.stats.spread);

    print_summary(&classification, &summary);
    let mut csv = Vec::new();
    classification.write_csv(&mut csv).map_err(CliError::validation)?;
    let file = GroupsFile {
        classification,
        summary,
        skipped,
    };
    run.write(&args.out, &to_json(&file))?;
    run.write(&sibling(&args.out, "csv"), &csv)?;
    run.finish(&args.out, &config)?;
    Ok(())
}

fn print_summary(c: &Classification, summary: &[GroupStats]) {
    let flagged = c.flagged_counts();
    println!(
        "tol_G {} mg/dL, Kabs threshold {:.4} 1/min, {} reclassified",
        c.tol_g,
        c.kabs_threshold,
        c.subjects.iter().filter(|s| s.reclassified).count()
    );
    println!(
        "{:<8} {:>4} {:>6}  {:<20} {:<20} {:<20}",
        "group", "n", "before", "peak time (min)", "Kabs (1/min)", "Kgri (1/min)"
    );
    for row in summary {
        let before = flagged.iter().find(|(g, _)| g.to_string() == row.group).map_or(0, |(_, n)| *n);
        let cells: Vec<String> = row.metrics.iter().map(|m| mean_spread(m.mean, m.spread)).collect();
        println!(
            "{:<8} {:>4} {:>6}  {:<20} {:<20} {:<20}",
            row.group, row.n, before, cells[0], cells[1], cells[2]
        );
    }
}
