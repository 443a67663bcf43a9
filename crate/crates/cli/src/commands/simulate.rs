use std::path::PathBuf;

use clap::Args;
use glycosim_core::integrator::{integrate, IntegrationError, TimeGrid};
use glycosim_core::model::{DoseMode, DoseProfile, Model, ModelOptions, ParameterSet};

use super::read_json;
use crate::config::{set, Config};
use crate::error::CliError;
use crate::output::Run;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Parameter file (`fixed`, `theta`, `Gb`); replaces the config's parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Ingested glucose, mg.
    #[arg(long)]
    pub dose: Option<f64>,
    /// Body weight, kg.
    #[arg(long)]
    pub bw: Option<f64>,
    /// Fasting glucose, mg/dL.
    #[arg(long)]
    pub gb: Option<f64>,
    /// min
    #[arg(long)]
    pub horizon: Option<f64>,
    /// min
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_enum)]
    pub dose_mode: Option<DoseModeArg>,
    /// Recompute Vm0 so the fasting state is an exact fixed point.
    #[arg(long)]
    pub basal_consistency: bool,
    /// Floor endogenous production at zero.
    #[arg(long)]
    pub clamp_egp: bool,
    /// Trajectory CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum DoseModeArg {
    Instantaneous,
    Gaussian,
}

impl From<DoseModeArg> for DoseMode {
    fn from(m: DoseModeArg) -> Self {
        match m {
            DoseModeArg::Instantaneous => DoseMode::Instantaneous,
            DoseModeArg::Gaussian => DoseMode::Gaussian,
        }
    }
}

pub fn run(args: SimulateArgs, mut config: Config) -> Result<(), CliError> {
    let mut run = Run::start("simulate");
    if let Some(path) = &args.params {
        config.parameters = read_json::<ParameterSet<f64>>(path)?;
        run.input(path);
    }
    let p = &mut config.parameters;
    set(&mut p.fixed.dose, args.dose);
    set(&mut p.fixed.bw, args.bw);
    set(&mut p.gb, args.gb);
    let s = &mut config.simulate;
    set(&mut s.horizon, args.horizon);
    set(&mut s.dt, args.dt);
    set(&mut s.dose_mode, args.dose_mode.map(Into::into));
    s.basal_consistency |= args.basal_consistency;
    s.clamp_egp |= args.clamp_egp;

    let p = &config.parameters;
    let s = &config.simulate;
    p.theta.validate().map_err(CliError::validation)?;
    let dose = DoseProfile {
        mode: s.dose_mode,
        ..DoseProfile::instantaneous(p.fixed.dose)
    };
    let options = ModelOptions {
        basal_consistency: s.basal_consistency,
        clamp_egp: s.clamp_egp,
    };
    let model = Model::new(p.fixed, p.theta, p.gb, dose, options).map_err(CliError::validation)?;
    let grid = TimeGrid::new(0.0, s.horizon, s.dt).map_err(CliError::validation)?;
    let traj = integrate(&model, &grid).map_err(|e| match e {
        IntegrationError::InvalidGrid(_) => CliError::validation(e),
        _ => CliError::numerical(e),
    })?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv).map_err(CliError::io(&args.out))?;
    run.write(&args.out, &csv)?;
    run.finish(&args.out, &config)?;
    eprintln!("wrote {} rows to {}", traj.len(), args.out.display());
    Ok(())
}
