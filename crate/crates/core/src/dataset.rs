//! Per-subject oral glucose test samples and corpus loading.
//!
//! Subject files are CSV with header `t_min,glucose_mg_dl` and an optional
//! third column `id`. Times are minutes after ingestion, glucose in mg/dL; the
//! first row must be the fasting sample at t = 0.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Malformed(String),
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("no sample at t = 0 (fasting glucose)")]
    MissingBasal,
    #[error("time {t} at row {row} does not follow {previous}")]
    NonMonotoneTime { row: usize, previous: f64, t: f64 },
    #[error("time {t} appears more than once")]
    DuplicateTime { t: f64 },
    #[error("glucose {value} at row {row} is not positive")]
    NonPositiveGlucose { row: usize, value: f64 },
    #[error("non-finite value at row {row}")]
    NonFinite { row: usize },
    #[error("{n} samples; at least 2 required")]
    TooFewSamples { n: usize },
    #[error("rows disagree on subject id ({first} vs {other})")]
    InconsistentId { first: String, other: String },
    #[error("duplicate subject id `{0}`")]
    DuplicateId(String),
    #[error("no subject files in {0}")]
    EmptyDirectory(PathBuf),
    #[error("corpus manifest: {0}")]
    Manifest(String),
}

impl DatasetError {
    /// Stable snake_case code for reports.
    pub fn code(&self) -> &'static str {
        match self {
            DatasetError::Io { .. } => "io",
            DatasetError::Malformed(_) => "malformed",
            DatasetError::MissingColumn(_) => "missing_column",
            DatasetError::MissingBasal => "missing_basal",
            DatasetError::NonMonotoneTime { .. } => "non_monotone_time",
            DatasetError::DuplicateTime { .. } => "duplicate_time",
            DatasetError::NonPositiveGlucose { .. } => "non_positive_glucose",
            DatasetError::NonFinite { .. } => "non_finite",
            DatasetError::TooFewSamples { .. } => "too_few_samples",
            DatasetError::InconsistentId { .. } => "inconsistent_id",
            DatasetError::DuplicateId(_) => "duplicate_id",
            DatasetError::EmptyDirectory(_) => "empty_directory",
            DatasetError::Manifest(_) => "manifest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Minutes after ingestion.
    pub t: f64,
    /// Plasma glucose, mg/dL.
    pub glucose: f64,
}

/// Validated glucose curve of one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub id: String,
    pub samples: Vec<Sample>,
}

impl SubjectRecord {
    pub fn new(id: impl Into<String>, samples: Vec<Sample>) -> Result<Self, DatasetError> {
        validate_samples(&samples)?;
        Ok(Self {
            id: id.into(),
            samples,
        })
    }

    /// Fasting glucose: the t = 0 sample.
    pub fn gb(&self) -> f64 {
        self.samples[0].glucose
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn glucose(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.glucose).collect()
    }

    pub fn last_time(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| DatasetError::Malformed(e.to_string());
        w.write_record(["t_min", "glucose_mg_dl", "id"]).map_err(err)?;
        for s in &self.samples {
            w.write_record([s.t.to_string(), s.glucose.to_string(), self.id.clone()])
                .map_err(err)?;
        }
        w.flush().map_err(|e| DatasetError::Malformed(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        let file = File::create(path).map_err(|source| DatasetError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_csv(file)
    }
}

fn validate_samples(samples: &[Sample]) -> Result<(), DatasetError> {
    for (row, s) in samples.iter().enumerate() {
        if !s.t.is_finite() || !s.glucose.is_finite() {
            return Err(DatasetError::NonFinite { row: row + 1 });
        }
    }
    if !samples.iter().any(|s| s.t == 0.0) {
        return Err(DatasetError::MissingBasal);
    }
    for (row, pair) in samples.windows(2).enumerate() {
        let (prev, t) = (pair[0].t, pair[1].t);
        if t == prev {
            return Err(DatasetError::DuplicateTime { t });
        }
        if t < prev {
            return Err(DatasetError::NonMonotoneTime {
                row: row + 2,
                previous: prev,
                t,
            });
        }
    }
    if samples[0].t != 0.0 {
        // t = 0 exists but negative times precede it
        return Err(DatasetError::MissingBasal);
    }
    for (row, s) in samples.iter().enumerate() {
        if s.glucose <= 0.0 {
            return Err(DatasetError::NonPositiveGlucose {
                row: row + 1,
                value: s.glucose,
            });
        }
    }
    if samples.len() < 2 {
        return Err(DatasetError::TooFewSamples { n: samples.len() });
    }
    Ok(())
}

/// Parses one subject from CSV text; `default_id` is used when the file has
/// no `id` column.
pub fn parse_subject<R: Read>(reader: R, default_id: &str) -> Result<SubjectRecord, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| DatasetError::Malformed(e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let t_col = col("t_min").ok_or(DatasetError::MissingColumn("t_min"))?;
    let g_col = col("glucose_mg_dl").ok_or(DatasetError::MissingColumn("glucose_mg_dl"))?;
    let id_col = col("id");

    let mut samples = Vec::new();
    let mut id: Option<String> = None;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| DatasetError::Malformed(e.to_string()))?;
        let field = |i: usize| -> Result<f64, DatasetError> {
            let raw = rec.get(i).unwrap_or("");
            raw.parse::<f64>()
                .map_err(|_| DatasetError::Malformed(format!("row {}: cannot parse `{raw}` as a number", row + 1)))
        };
        samples.push(Sample {
            t: field(t_col)?,
            glucose: field(g_col)?,
        });
        if let Some(i) = id_col {
            let this = rec.get(i).unwrap_or("").to_string();
            match &id {
                None => id = Some(this),
                Some(first) if *first != this => {
                    return Err(DatasetError::InconsistentId {
                        first: first.clone(),
                        other: this,
                    })
                }
                _ => {}
            }
        }
    }
    let id = id.filter(|s| !s.is_empty()).unwrap_or_else(|| default_id.to_string());
    SubjectRecord::new(id, samples)
}

/// Loads and validates one subject file. The id defaults to the file stem.
pub fn load_subject(path: &Path) -> Result<SubjectRecord, DatasetError> {
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_subject(file, &stem)
}

/// A file that could not be loaded into the corpus.
#[derive(Debug)]
pub struct LoadFailure {
    pub path: PathBuf,
    pub error: DatasetError,
}

/// Validated subjects of one study, plus per-file failures.
#[derive(Debug)]
pub struct Corpus {
    pub subjects: Vec<SubjectRecord>,
    pub failures: Vec<LoadFailure>,
    pub source: PathBuf,
    /// Seconds since the Unix epoch.
    pub loaded_at: u64,
}

/// Optional `manifest.json` in a corpus directory: file name → subject id.
pub const CORPUS_MANIFEST: &str = "manifest.json";

/// Loads every `*.csv` file in `dir` in file-name order. Invalid files are
/// collected in [`Corpus::failures`]; only a directory with no subject files
/// is an error.
pub fn load_corpus(dir: &Path) -> Result<Corpus, DatasetError> {
    let io_err = |source| DatasetError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(DatasetError::EmptyDirectory(dir.to_path_buf()));
    }

    let manifest_path = dir.join(CORPUS_MANIFEST);
    let ids: BTreeMap<String, String> = if manifest_path.is_file() {
        let text = std::fs::read_to_string(&manifest_path).map_err(|source| DatasetError::Io {
            path: manifest_path.clone(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| DatasetError::Manifest(e.to_string()))?
    } else {
        BTreeMap::new()
    };

    let mut subjects = Vec::new();
    let mut failures = Vec::new();
    let mut seen = HashSet::new();
    for path in files {
        let loaded = load_subject(&path).and_then(|mut rec| {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned());
            if let Some(id) = name.and_then(|n| ids.get(&n)) {
                rec.id = id.clone();
            }
            if seen.insert(rec.id.clone()) {
                Ok(rec)
            } else {
                Err(DatasetError::DuplicateId(rec.id))
            }
        });
        match loaded {
            Ok(rec) => subjects.push(rec),
            Err(error) => failures.push(LoadFailure { path, error }),
        }
    }
    let loaded_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(Corpus {
        subjects,
        failures,
        source: dir.to_path_buf(),
        loaded_at,
    })
}
