use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use alphacore::verify::{gadget_structure, MAX_FULL_CANDIDATES};
use alphacore::{
    min_alpha, solve, DriverParams, Enumeration, Instance, InstanceF64, Preset, Profile,
    VerifyOptions,
};
use clap::Args;
use log::warn;
use rayon::prelude::*;

use crate::gen::{generate, Family};
use crate::output::{sig9, stream_seed, Failure, EXIT_FAILURE};

pub const COLUMNS: [&str; 10] = [
    "seed",
    "n",
    "m",
    "rounds",
    "nw_iterations",
    "rounding_attempts",
    "wall_time_s",
    "min_alpha",
    "guarantee",
    "status",
];

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(subcommand)]
    pub family: Family,
    /// Number of runs; run `k` uses seed `seed-start + k` for both the
    /// instance and the solver.
    #[arg(long, default_value_t = 10)]
    pub runs: u64,
    #[arg(long = "seed-start", default_value_t = 0)]
    pub seed_start: u64,
    /// Defaults to `additive` for additive families, `submodular` otherwise.
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long, default_value = "practical")]
    pub profile: Profile,
    /// Skip verification.
    #[arg(long = "no-verify")]
    pub no_verify: bool,
    /// CSV destination; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

struct Row {
    fields: Vec<String>,
    ok: bool,
}

/// Exact min-alpha when some enumerator applies, `None` otherwise.
fn verify(inst: &InstanceF64, committee: &alphacore::CandidateSet) -> Option<f64> {
    let enumeration = if inst.m() <= MAX_FULL_CANDIDATES {
        Enumeration::Full
    } else if gadget_structure(inst).is_ok() {
        Enumeration::Profile
    } else {
        return None;
    };
    min_alpha(inst, committee, enumeration, VerifyOptions::default())
        .ok()
        .map(|r| r.min_alpha)
}

fn run_one(a: &BenchArgs, preset: Preset, seed: u64) -> Row {
    let mut fields = vec![seed.to_string()];
    let fail = |mut fields: Vec<String>, msg: String| {
        fields.resize(COLUMNS.len() - 1, String::new());
        fields.push(msg);
        Row { fields, ok: false }
    };
    let inst = match generate(&a.family, Some(seed))
        .and_then(|f| Instance::from_file(&f).map_err(Failure::from))
    {
        Ok(i) => i,
        Err(e) => return fail(fields, e.message),
    };
    fields.push(inst.n().to_string());
    fields.push(inst.m().to_string());
    let mut params = DriverParams::for_preset(preset, seed);
    params.profile = a.profile;
    let start = Instant::now();
    let sol = match stream_seed(seed).and_then(|s| {
        params.seed = s;
        solve(&inst, &params).map_err(Failure::from)
    }) {
        Ok(s) => s,
        Err(e) => return fail(fields, e.message),
    };
    let wall = start.elapsed().as_secs_f64();
    let r = &sol.report;
    let alpha = if a.no_verify {
        None
    } else {
        verify(&inst, &sol.committee)
    };
    fields.extend([
        r.rounds.len().to_string(),
        r.rounds
            .iter()
            .map(|x| x.nw_iterations)
            .sum::<usize>()
            .to_string(),
        r.rounds
            .iter()
            .map(|x| x.accepted_attempt + 1)
            .sum::<usize>()
            .to_string(),
        sig9(wall),
        alpha.map(sig9).unwrap_or_default(),
        sig9(r.alpha_guarantee),
        "ok".to_string(),
    ]);
    Row { fields, ok: true }
}

pub fn run(a: BenchArgs) -> Result<ExitCode, Failure> {
    let preset = a.preset.unwrap_or(match a.family {
        Family::RandomAdditive { .. } => Preset::Additive,
        _ => Preset::Submodular,
    });
    let seeds: Vec<u64> = (0..a.runs).map(|k| a.seed_start + k).collect();
    let rows: Vec<Row> = seeds.par_iter().map(|&s| run_one(&a, preset, s)).collect();

    let mut w = match &a.out {
        Some(p) => {
            csv::Writer::from_writer(Box::new(std::fs::File::create(p)?) as Box<dyn std::io::Write>)
        }
        None => csv::Writer::from_writer(Box::new(std::io::stdout()) as Box<dyn std::io::Write>),
    };
    w.write_record(COLUMNS)?;
    for r in &rows {
        w.write_record(&r.fields)?;
    }
    w.flush()?;

    let ok = rows.iter().filter(|r| r.ok).count();
    if ok < rows.len() {
        warn!("{} of {} runs failed", rows.len() - ok, rows.len());
    }
    if ok == 0 {
        Ok(ExitCode::from(EXIT_FAILURE))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
