use std::path::PathBuf;

use clap::Args;
use glycosim_core::dataset::{load_corpus, load_subject};
use glycosim_core::estimation::{batch_fit, BatchEntry, FailureKind};
use glycosim_core::schemas;

use super::simulate::DoseModeArg;
use crate::config::{set, Config};
use crate::error::CliError;
use crate::output::{sibling, Run};

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["subject", "dir"]))]
pub struct FitArgs {
    /// One subject CSV (`t_min,glucose_mg_dl[,id]`).
    #[arg(long)]
    pub subject: Option<PathBuf>,
    /// Directory of subject CSVs, optionally with a `manifest.json` of ids.
    #[arg(long)]
    pub dir: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub max_evals: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// min
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_enum)]
    pub dose_mode: Option<DoseModeArg>,
    #[arg(long)]
    pub basal_consistency: bool,
    /// Results JSON; a `.schema.json` sibling describes it.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: FitArgs, mut config: Config) -> Result<(), CliError> {
    let mut run = Run::start("fit");
    let f = &mut config.fit;
    set(&mut f.max_evals, args.max_evals);
    set(&mut f.tol, args.tol);
    set(&mut f.dt, args.dt);
    set(&mut f.dose_mode, args.dose_mode.map(Into::into));
    f.basal_consistency |= args.basal_consistency;
    if args.jobs.is_some() {
        config.jobs = args.jobs;
    }
    config.fit.validate().map_err(CliError::validation)?;
    config.parameters.fixed.validate().map_err(CliError::validation)?;
    let jobs = config
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(CliError::Validation("jobs must be at least 1".into()));
    }

    let (subjects, load_failures) = if let Some(path) = &args.subject {
        run.input(path);
        (vec![load_subject(path).map_err(CliError::validation)?], Vec::new())
    } else {
        let dir = args.dir.as_ref().expect("clap enforces one input");
        run.input(dir);
        let corpus = load_corpus(dir).map_err(CliError::validation)?;
        let failures: Vec<BatchEntry> = corpus
            .failures
            .iter()
            .map(|f| BatchEntry::Failed {
                subject: f.path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                kind: FailureKind::Validation,
                error: f.error.to_string(),
            })
            .collect();
        (corpus.subjects, failures)
    };

    let mut entries =
        batch_fit(&subjects, &config.parameters.fixed, &config.fit, jobs).map_err(CliError::validation)?;
    entries.extend(load_failures);

    run.write(&args.out, &crate::output::to_json(&entries))?;
    run.write(&sibling(&args.out, "schema.json"), schemas::ESTIMATION_RESULTS.as_bytes())?;
    run.finish(&args.out, &config)?;

    let mut numerical = false;
    let mut failed = 0;
    for e in &entries {
        match e {
            BatchEntry::Ok(r) => eprintln!("{}: loss {:.4e} after {} evaluations", r.subject, r.loss, r.evals),
            BatchEntry::Failed { subject, kind, error } => {
                eprintln!("{subject}: failed: {error}");
                failed += 1;
                numerical |= *kind == FailureKind::Numerical;
            }
        }
    }
    match failed {
        0 => Ok(()),
        n if numerical => Err(CliError::Numerical(format!("{n} of {} subjects failed", entries.len()))),
        n => Err(CliError::Validation(format!("{n} of {} subjects failed", entries.len()))),
    }
}
