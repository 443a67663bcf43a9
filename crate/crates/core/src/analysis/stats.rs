//! One-way ANOVA, Bonferroni-adjusted pairwise tests and the special
//! functions behind their p-values.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need at least two groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("degenerate degrees of freedom: between {between}, within {within}")]
    DegenerateDf { between: usize, within: usize },
    #[error("non-finite value in group {0}")]
    NonFinite(usize),
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Sample standard deviation (n − 1 denominator); 0 for a single value.
pub fn sample_sd(values: &[f64]) -> Option<f64> {
    let m = mean(values)?;
    if values.len() < 2 {
        return Some(0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

pub fn standard_error(values: &[f64]) -> Option<f64> {
    Some(sample_sd(values)? / (values.len() as f64).sqrt())
}

/// ln Γ(x) for x > 0 (Lanczos, g = 7, nine terms).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Upper tail `P(F > f)` of the F distribution with `(d1, d2)` degrees of freedom.
pub fn f_upper_tail(f: f64, d1: f64, d2: f64) -> f64 {
    if f.is_nan() {
        return f64::NAN;
    }
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(d2 / (d2 + d1 * f), 0.5 * d2, 0.5 * d1)
}

/// Two-sided p-value of Student's t with `df` degrees of freedom.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(df / (df + t * t), 0.5 * df, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anova {
    pub f: f64,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ss_between: f64,
    pub ss_within: f64,
    /// Pooled within-group mean square.
    pub ms_within: f64,
}

/// Size of the rounding error in a mean of these values.
fn rounding_noise(groups: &[Vec<f64>]) -> f64 {
    let scale = groups.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
    8.0 * f64::EPSILON * scale
}

/// One-way ANOVA over `groups`.
///
/// When both sums of squares vanish (all groups constant and equal) `F = 0`
/// and `p = 1`; a zero within-group variance with distinct means gives
/// `F = ∞`, `p = 0`.
pub fn anova_oneway(groups: &[Vec<f64>]) -> Result<Anova, StatsError> {
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::TooFewGroups(k));
    }
    for (i, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(StatsError::EmptyGroup(i));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite(i));
        }
    }
    let n: usize = groups.iter().map(Vec::len).sum();
    let (df_between, df_within) = (k - 1, n - k);
    if df_within == 0 {
        return Err(StatsError::DegenerateDf {
            between: df_between,
            within: df_within,
        });
    }
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let floor = n as f64 * rounding_noise(groups).powi(2);
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (m - grand) * (m - grand);
        ss_within += g.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    }
    // sums of squares at rounding level are exact zeros in disguise
    if ss_between <= floor {
        ss_between = 0.0;
    }
    if ss_within <= floor {
        ss_within = 0.0;
    }
    let ms_between = ss_between / df_between as f64;
    let ms_within = ss_within / df_within as f64;
    let f = if ss_between == 0.0 {
        0.0
    } else if ms_within == 0.0 {
        f64::INFINITY
    } else {
        ms_between / ms_within
    };
    let p = f_upper_tail(f, df_between as f64, df_within as f64);
    Ok(Anova {
        f,
        p,
        df_between,
        df_within,
        ss_between,
        ss_within,
        ms_within,
    })
}

/// Significance stars on an adjusted p-value: `*` < 0.05, `**` < 0.01,
/// `***` < 0.001, `****` < 0.0001; empty otherwise.
pub fn stars(p: f64) -> &'static str {
    if p < 1e-4 {
        "****"
    } else if p < 1e-3 {
        "***"
    } else if p < 1e-2 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Bonferroni adjustment `min(1, m·p)` with stars for each adjusted value.
pub fn bonferroni(pvalues: &[f64], m: usize) -> Vec<(f64, &'static str)> {
    pvalues
        .iter()
        .map(|&p| {
            let adj = (m as f64 * p).min(1.0);
            (adj, stars(adj))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub first: String,
    pub second: String,
    pub mean_difference: f64,
    pub t: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub anova: Anova,
    pub pairwise: Vec<PairwiseComparison>,
}

/// ANOVA followed by all pairwise t-tests on the pooled within-group
/// variance, Bonferroni-adjusted over the `k(k−1)/2` comparisons.
pub fn anova_with_posthoc(names: &[String], groups: &[Vec<f64>]) -> Result<SignificanceResult, StatsError> {
    let anova = anova_oneway(groups)?;
    let k = groups.len();
    let m = k * (k - 1) / 2;
    let df = anova.df_within as f64;
    let noise = rounding_noise(groups);
    let mut raw = Vec::with_capacity(m);
    let mut pairs = Vec::with_capacity(m);
    for i in 0..k {
        for j in i + 1..k {
            let (mi, mj) = (mean(&groups[i]).unwrap(), mean(&groups[j]).unwrap());
            let diff = if (mi - mj).abs() <= noise { 0.0 } else { mi - mj };
            let se = (anova.ms_within * (1.0 / groups[i].len() as f64 + 1.0 / groups[j].len() as f64)).sqrt();
            let t = if diff == 0.0 {
                0.0
            } else if se == 0.0 {
                f64::INFINITY
            } else {
                diff.abs() / se
            };
            let p = t_two_sided(t, df);
            raw.push(p);
            pairs.push((i, j, diff, t, p));
        }
    }
    let adjusted = bonferroni(&raw, m);
    let pairwise = pairs
        .into_iter()
        .zip(adjusted)
        .map(|((i, j, diff, t, p), (adj, s))| PairwiseComparison {
            first: names[i].clone(),
            second: names[j].clone(),
            mean_difference: diff,
            t,
            p_raw: p,
            p_adjusted: adj,
            stars: s.to_string(),
        })
        .collect();
    Ok(SignificanceResult { anova, pairwise })
}
