use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::peaks::{GlucoseCurve, PeakInfo};
use super::stats::{self, SignificanceResult, StatsError};
use crate::estimation::EstimationResult;

/// Group-1 upper peak-time bound (exclusive), min.
pub const GROUP1_END: f64 = 30.0;
/// Group-2 upper peak-time bound (inclusive), min.
pub const GROUP2_END: f64 = 50.0;
/// Kabs threshold used when the corpus cannot supply one, 1/min.
pub const FALLBACK_KABS_THRESHOLD: f64 = 0.21;
/// G_bio threshold of the Group-1 sub-split, mg/dL.
pub const GBIO_SPLIT: f64 = 155.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("no results to classify")]
    Empty,
    #[error("{results} results but {curves} curves")]
    LengthMismatch { results: usize, curves: usize },
    #[error("tol_G must be finite and non-negative, got {0}")]
    InvalidTolerance(f64),
    #[error("Kabs threshold must be finite, got {0}")]
    InvalidThreshold(f64),
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("unknown spread {0:?}")]
    UnknownSpread(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupLabel {
    Group1,
    Group2,
    Group3,
    Outlier,
}

impl GroupLabel {
    pub const ALL: [GroupLabel; 4] = [GroupLabel::Group1, GroupLabel::Group2, GroupLabel::Group3, GroupLabel::Outlier];

    pub fn as_str(self) -> &'static str {
        match self {
            GroupLabel::Group1 => "group1",
            GroupLabel::Group2 => "group2",
            GroupLabel::Group3 => "group3",
            GroupLabel::Outlier => "outlier",
        }
    }
}

impl fmt::Display for GroupLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Peak-time class: `[0, 30)` Group1, `[30, 50]` Group2, above 50 Group3.
pub fn classify(peak_time: f64) -> GroupLabel {
    if peak_time < GROUP1_END {
        GroupLabel::Group1
    } else if peak_time <= GROUP2_END {
        GroupLabel::Group2
    } else {
        GroupLabel::Group3
    }
}

fn is_outlier(peak_time: f64, kabs: f64, kabs_threshold: f64) -> bool {
    peak_time >= GROUP1_END && kabs >= kabs_threshold
}

/// Flags late-peaking subjects whose absorption rate looks like Group 1.
/// Results without a peak are never flagged.
pub fn flag_outliers(results: &[EstimationResult], kabs_threshold: f64) -> Vec<bool> {
    results
        .iter()
        .map(|r| r.peak.is_some_and(|p| is_outlier(p.t_peak, r.theta.k_abs, kabs_threshold)))
        .collect()
}

fn midpoint_threshold(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut g1, mut g2) = (Vec::new(), Vec::new());
    for (t_peak, kabs) in pairs {
        match classify(t_peak) {
            GroupLabel::Group1 => g1.push(kabs),
            GroupLabel::Group2 => g2.push(kabs),
            _ => {}
        }
    }
    if g1.len() < 2 || g2.len() < 2 {
        return FALLBACK_KABS_THRESHOLD;
    }
    0.5 * (stats::mean(&g1).unwrap() + stats::mean(&g2).unwrap())
}

/// Midpoint of the mean Kabs of the Group-1 and Group-2 subjects (by peak
/// time), or 0.21/min when either group has fewer than two members.
pub fn default_kabs_threshold(results: &[EstimationResult]) -> f64 {
    midpoint_threshold(results.iter().filter_map(|r| r.peak.map(|p| (p.t_peak, r.theta.k_abs))))
}

/// Moves outliers whose biological peak comes before 30 min into Group1.
pub fn reclassify_outliers(labels: &[GroupLabel], curves: &[GlucoseCurve], tol_g: f64) -> Vec<GroupLabel> {
    labels
        .iter()
        .zip(curves)
        .map(|(&label, curve)| {
            if label == GroupLabel::Outlier && super::biological_peak(curve, tol_g).0 < GROUP1_END {
                GroupLabel::Group1
            } else {
                label
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedSubject {
    pub subject: String,
    /// Label after outlier flagging, before reclassification.
    pub flagged: GroupLabel,
    /// Final label.
    pub group: GroupLabel,
    pub reclassified: bool,
    pub peak: PeakInfo,
    /// Biological peak time for reclassified subjects, `t_peak` otherwise, min.
    pub peak_time: f64,
    /// mg/dL, paired with `peak_time`.
    pub peak_value: f64,
    pub kabs: f64,
    pub kgri: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyOptions {
    /// mg/dL.
    pub tol_g: f64,
    /// 1/min; `None` derives it from the corpus.
    pub kabs_threshold: Option<f64>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            tol_g: super::DEFAULT_TOL_G,
            kabs_threshold: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub tol_g: f64,
    pub kabs_threshold: f64,
    pub subjects: Vec<ClassifiedSubject>,
}

impl Classification {
    fn count(labels: impl Iterator<Item = GroupLabel>) -> BTreeMap<GroupLabel, usize> {
        let mut out: BTreeMap<GroupLabel, usize> = GroupLabel::ALL.iter().map(|&g| (g, 0)).collect();
        for l in labels {
            *out.entry(l).or_default() += 1;
        }
        out
    }

    /// Group sizes after flagging, before reclassification.
    pub fn flagged_counts(&self) -> BTreeMap<GroupLabel, usize> {
        Self::count(self.subjects.iter().map(|s| s.flagged))
    }

    pub fn counts(&self) -> BTreeMap<GroupLabel, usize> {
        Self::count(self.subjects.iter().map(|s| s.group))
    }

    /// Flat CSV `subject,group,peak_time,peak_value,t_bio,kabs,kgri,b`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["subject", "group", "peak_time", "peak_value", "t_bio", "kabs", "kgri", "b"])?;
        for s in &self.subjects {
            w.write_record([
                s.subject.clone(),
                s.group.to_string(),
                s.peak_time.to_string(),
                s.peak_value.to_string(),
                s.peak.t_bio.to_string(),
                s.kabs.to_string(),
                s.kgri.to_string(),
                s.b.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Full pipeline: peaks from `curves` (the fitted trajectories, in result
/// order), peak-time classes, outlier flags, then plateau reclassification.
pub fn classify_subjects(
    results: &[EstimationResult],
    curves: &[GlucoseCurve],
    options: &ClassifyOptions,
) -> Result<Classification, AnalysisError> {
    if results.is_empty() {
        return Err(AnalysisError::Empty);
    }
    if results.len() != curves.len() {
        return Err(AnalysisError::LengthMismatch {
            results: results.len(),
            curves: curves.len(),
        });
    }
    if !(options.tol_g >= 0.0 && options.tol_g.is_finite()) {
        return Err(AnalysisError::InvalidTolerance(options.tol_g));
    }
    let peaks: Vec<PeakInfo> = curves.iter().map(|c| PeakInfo::of(c, options.tol_g)).collect();
    let threshold = match options.kabs_threshold {
        Some(t) if !t.is_finite() => return Err(AnalysisError::InvalidThreshold(t)),
        Some(t) => t,
        None => midpoint_threshold(peaks.iter().zip(results).map(|(p, r)| (p.t_peak, r.theta.k_abs))),
    };
    let flagged: Vec<GroupLabel> = peaks
        .iter()
        .zip(results)
        .map(|(p, r)| {
            if is_outlier(p.t_peak, r.theta.k_abs, threshold) {
                GroupLabel::Outlier
            } else {
                classify(p.t_peak)
            }
        })
        .collect();
    let labels = reclassify_outliers(&flagged, curves, options.tol_g);
    let subjects = results
        .iter()
        .zip(peaks)
        .zip(flagged.iter().zip(labels))
        .map(|((r, peak), (&flagged, group))| {
            let reclassified = flagged != group;
            let (peak_time, peak_value) = if reclassified {
                (peak.t_bio, peak.g_bio)
            } else {
                (peak.t_peak, peak.g_peak)
            };
            ClassifiedSubject {
                subject: r.subject.clone(),
                flagged,
                group,
                reclassified,
                peak,
                peak_time,
                peak_value,
                kabs: r.theta.k_abs,
                kgri: r.theta.k_gri,
                b: r.theta.b,
            }
        })
        .collect();
    Ok(Classification {
        tol_g: options.tol_g,
        kabs_threshold: threshold,
        subjects,
    })
}

/// Per-subject quantity summarized by group statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    PeakTime,
    PeakValue,
    TBio,
    GBio,
    Kabs,
    Kgri,
    B,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::PeakTime,
        Metric::PeakValue,
        Metric::TBio,
        Metric::GBio,
        Metric::Kabs,
        Metric::Kgri,
        Metric::B,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::PeakTime => "peak_time",
            Metric::PeakValue => "peak_value",
            Metric::TBio => "t_bio",
            Metric::GBio => "g_bio",
            Metric::Kabs => "kabs",
            Metric::Kgri => "kgri",
            Metric::B => "b",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Metric::PeakTime | Metric::TBio => "min",
            Metric::PeakValue | Metric::GBio => "mg/dL",
            Metric::Kabs | Metric::Kgri => "1/min",
            Metric::B => "dimensionless",
        }
    }

    pub fn value(self, s: &ClassifiedSubject) -> f64 {
        match self {
            Metric::PeakTime => s.peak_time,
            Metric::PeakValue => s.peak_value,
            Metric::TBio => s.peak.t_bio,
            Metric::GBio => s.peak.g_bio,
            Metric::Kabs => s.kabs,
            Metric::Kgri => s.kgri,
            Metric::B => s.b,
        }
    }
}

impl FromStr for Metric {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| AnalysisError::UnknownMetric(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spread {
    /// Sample standard deviation.
    #[default]
    Sd,
    /// Standard error of the mean.
    Sem,
}

impl FromStr for Spread {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sd" => Ok(Spread::Sd),
            "sem" => Ok(Spread::Sem),
            _ => Err(AnalysisError::UnknownSpread(s.to_string())),
        }
    }
}

/// How subjects are partitioned into rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    /// Group1..Group3, plus remaining outliers when there are any.
    Groups,
    /// Group 1 only, split by `G_bio ≤ threshold` vs above.
    Group1Split { threshold: f64 },
}

impl Grouping {
    pub fn group1_split() -> Self {
        Grouping::Group1Split { threshold: GBIO_SPLIT }
    }

    /// Row names with their members, in report order.
    pub fn partition<'a>(&self, subjects: &'a [ClassifiedSubject]) -> Vec<(String, Vec<&'a ClassifiedSubject>)> {
        match *self {
            Grouping::Groups => {
                let mut rows: Vec<(String, Vec<&ClassifiedSubject>)> = GroupLabel::ALL
                    .iter()
                    .map(|g| (g.to_string(), subjects.iter().filter(|s| s.group == *g).collect()))
                    .collect();
                if rows[3].1.is_empty() {
                    rows.pop();
                }
                rows
            }
            Grouping::Group1Split { threshold } => {
                let g1 = subjects.iter().filter(|s| s.group == GroupLabel::Group1);
                let (low, high): (Vec<_>, Vec<_>) = g1.partition(|s| s.peak.g_bio <= threshold);
                vec![
                    (format!("group1_gbio_le_{threshold}"), low),
                    (format!("group1_gbio_gt_{threshold}"), high),
                ]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: Metric,
    pub unit: String,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub sem: Option<f64>,
    /// `sd` or `sem` per the requested spread.
    pub spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub group: String,
    pub n: usize,
    pub metrics: Vec<MetricSummary>,
}

pub fn group_stats(subjects: &[ClassifiedSubject], grouping: Grouping, metrics: &[Metric], spread: Spread) -> Vec<GroupStats> {
    grouping
        .partition(subjects)
        .into_iter()
        .map(|(group, members)| {
            let metrics = metrics
                .iter()
                .map(|&m| {
                    let values: Vec<f64> = members.iter().map(|s| m.value(s)).collect();
                    let sd = stats::sample_sd(&values);
                    let sem = stats::standard_error(&values);
                    MetricSummary {
                        metric: m,
                        unit: m.unit().to_string(),
                        mean: stats::mean(&values),
                        sd,
                        sem,
                        spread: match spread {
                            Spread::Sd => sd,
                            Spread::Sem => sem,
                        },
                    }
                })
                .collect();
            GroupStats {
                group,
                n: members.len(),
                metrics,
            }
        })
        .collect()
}

/// ANOVA and Bonferroni pairwise tests of `metric` across the non-empty rows.
pub fn significance(subjects: &[ClassifiedSubject], grouping: Grouping, metric: Metric) -> Result<SignificanceResult, AnalysisError> {
    let (names, values): (Vec<String>, Vec<Vec<f64>>) = grouping
        .partition(subjects)
        .into_iter()
        .filter(|(_, members)| !members.is_empty())
        .map(|(name, members)| (name, members.iter().map(|s| metric.value(s)).collect()))
        .unzip();
    Ok(stats::anova_with_posthoc(&names, &values)?)
}
