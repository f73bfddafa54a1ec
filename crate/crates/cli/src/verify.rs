use std::path::PathBuf;
use std::process::ExitCode;

use alphacore::multilinear::EstimatorConfig;
use alphacore::verify::check_fractional_core;
use alphacore::{load_instance, min_alpha, Enumeration, InstanceF64, Multilinear, VerifyOptions};
use clap::{Args, ValueEnum};
use log::warn;

use crate::committee::{self, CommitteeInput};
use crate::output::{emit, stream_seed, Failure, EXIT_ABOVE_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Every deviating committee within the budget.
    Full,
    /// Per-gadget count profiles (gadget instances with unit sizes).
    Profile,
    /// Randomized search for fractional core violations.
    Probe,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Instance JSON file.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Committee file: a JSON list of ids, a solve report, or `{"x": {...}}`.
    #[arg(long, value_name = "FILE")]
    pub committee: PathBuf,
    #[arg(long, value_enum, default_value = "full")]
    pub mode: Mode,
    /// Exit with status 4 when min_alpha exceeds this (or, in probe mode,
    /// when a violation at this alpha is found).
    #[arg(long, default_value_t = 1.0)]
    pub threshold: f64,
    /// Draw additaments only from the deviating committee.
    #[arg(long = "strict-additament")]
    pub strict_additament: bool,
    /// Probe mode: number of random coalitions.
    #[arg(long, default_value_t = 1000)]
    pub probes: usize,
    /// Probe mode: estimator accuracy for sampled voters.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

fn probe(a: &VerifyArgs, inst: &InstanceF64, input: &CommitteeInput) -> Result<ExitCode, Failure> {
    let seed = stream_seed(a.seed)?;
    let cfg = EstimatorConfig::auto(inst.m(), a.delta, 0.01, seed);
    let eval = Multilinear::new(inst, cfg)?;
    let w: Vec<usize> = (0..inst.n()).collect();
    let x = input.as_vector(inst.m());
    let report = check_fractional_core(&eval, &x, &w, inst.budget, a.threshold, a.probes, seed)?;
    emit(a.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    match &report.violation {
        Some(v) => {
            eprintln!(
                "violation at alpha {} after {} probes: coalition {:?}",
                a.threshold, report.probes, v.voters
            );
            Ok(ExitCode::from(EXIT_ABOVE_THRESHOLD))
        }
        None => {
            eprintln!(
                "no violation at alpha {} in {} probes",
                a.threshold, report.probes
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

pub fn run(a: VerifyArgs) -> Result<ExitCode, Failure> {
    let inst: InstanceF64 = load_instance(&a.input)?;
    let input = committee::load(&inst, &a.committee)?;
    if a.mode == Mode::Probe {
        return probe(&a, &inst, &input);
    }
    let CommitteeInput::Integral(o) = input else {
        return Err(Failure::usage(
            "full and profile modes need an integral committee",
        ));
    };
    if inst.cost(&o) > inst.budget + 1e-9 {
        warn!(
            "committee cost {} exceeds budget {}",
            inst.cost(&o),
            inst.budget
        );
    }
    let enumeration = match a.mode {
        Mode::Profile => Enumeration::Profile,
        _ => Enumeration::Full,
    };
    let opts = VerifyOptions {
        strict_additament: a.strict_additament,
    };
    let report = min_alpha(&inst, &o, enumeration, opts)?;
    emit(a.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    eprintln!("min_alpha = {}", report.min_alpha);
    if report.min_alpha > a.threshold {
        Ok(ExitCode::from(EXIT_ABOVE_THRESHOLD))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
