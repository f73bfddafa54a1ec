use std::path::PathBuf;
use std::process::ExitCode;

use alphacore::{load_instance, solve, DriverParams, InstanceF64, Preset, Profile, SolveReport};
use clap::Args;
use log::info;

use crate::output::{emit, sig9, stream_seed, Failure};

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance JSON file.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// `submodular` (independent rounding) or `additive` (dependent rounding).
    #[arg(long, default_value = "submodular")]
    pub preset: Preset,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `practical` or `proof`.
    #[arg(long, default_value = "practical")]
    pub profile: Profile,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Overrides the instance's epsilon.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Committees sampled per multilinear estimate.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Report destination; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Per-swap objective and cost trace as CSV.
    #[arg(long = "phi-trace", value_name = "FILE")]
    pub phi_trace: Option<PathBuf>,
}

pub fn params(a: &SolveArgs, seed: u64) -> DriverParams {
    let mut p = DriverParams::for_preset(a.preset, seed);
    p.profile = a.profile;
    p.eps = a.eps;
    p.samples = a.samples;
    if let Some(v) = a.omega {
        p.omega = v;
    }
    if let Some(v) = a.gamma {
        p.gamma = v;
    }
    if let Some(v) = a.kappa {
        p.kappa = v;
    }
    p
}

fn write_trace(path: &PathBuf, report: &SolveReport) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["round", "swap", "phi", "cost_large"])?;
    for r in &report.rounds {
        for (k, (phi, cost)) in r.phi_trace.iter().zip(&r.cost_trace).enumerate() {
            w.write_record([r.t.to_string(), k.to_string(), sig9(*phi), sig9(*cost)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run(a: SolveArgs) -> Result<ExitCode, Failure> {
    let inst: InstanceF64 = load_instance(&a.input)?;
    let p = params(&a, stream_seed(a.seed)?);
    p.validate(a.eps.unwrap_or(inst.epsilon))?;
    let sol = solve(&inst, &p)?;
    info!(
        "committee of {} candidates, cost {} of {}, {} rounds",
        sol.report.committee.len(),
        sol.report.total_cost,
        sol.report.budget,
        sol.report.rounds.len()
    );
    if let Some(path) = &a.phi_trace {
        write_trace(path, &sol.report)?;
    }
    emit(a.out.as_deref(), &sol.report.to_json_pretty())?;
    Ok(ExitCode::SUCCESS)
}
