//! Peak detection, peak-time classification with outlier handling, group
//! statistics and significance tests.

mod groups;
mod peaks;
pub mod stats;

pub use groups::{
    classify, classify_subjects, default_kabs_threshold, flag_outliers, group_stats, reclassify_outliers, significance,
    AnalysisError, Classification, ClassifiedSubject, ClassifyOptions, GroupLabel, GroupStats, Grouping, Metric,
    MetricSummary, Spread, FALLBACK_KABS_THRESHOLD, GBIO_SPLIT, GROUP1_END, GROUP2_END,
};
pub use peaks::{biological_peak, detect_peak, GlucoseCurve, PeakInfo, DEFAULT_TOL_G};
pub use stats::{anova_oneway, bonferroni, stars, Anova, PairwiseComparison, SignificanceResult, StatsError};
