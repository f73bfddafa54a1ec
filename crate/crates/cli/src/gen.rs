use std::path::PathBuf;
use std::process::ExitCode;

use alphacore::generators::{
    lb_default_z, lb_general, lb_submodular, random_additive, random_coverage, SizeDist,
    WeightDist, LB_DEFAULT_GADGET_SIZE,
};
use alphacore::InstanceFile;
use clap::{Args, Subcommand};

use crate::output::{emit, stream_seed, Failure};

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub family: Family,
    /// Destination file; stdout when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Family {
    /// Six cyclic gadget voters with non-submodular utilities.
    LbGeneral {
        #[arg(long = "alpha-lb")]
        alpha_lb: f64,
        #[arg(long = "gadget-size", default_value_t = LB_DEFAULT_GADGET_SIZE)]
        gadget_size: usize,
    },
    /// Six cyclic gadget voters with submodular utilities.
    LbSubmodular {
        #[arg(long = "gadget-size", default_value_t = LB_DEFAULT_GADGET_SIZE)]
        gadget_size: usize,
        /// Defaults to (sqrt(689) - 17) / 10.
        #[arg(long)]
        z: Option<f64>,
    },
    /// Random additive voters.
    RandomAdditive {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        b: f64,
        /// `uniform`, `exponential` or `sparse`.
        #[arg(long, default_value = "uniform")]
        weights: WeightDist,
        /// Integer sizes drawn from 1..=max-size.
        #[arg(long = "max-size", default_value_t = 1)]
        max_size: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random coverage voters over a shared cover structure.
    RandomCoverage {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 10)]
        universe: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Builds the instance for `family`, with `seed` replacing the family's own
/// seed for the random families.
pub fn generate(family: &Family, seed: Option<u64>) -> Result<InstanceFile, Failure> {
    let f = match family.clone() {
        Family::LbGeneral {
            alpha_lb,
            gadget_size,
        } => lb_general(alpha_lb, gadget_size)?,
        Family::LbSubmodular { gadget_size, z } => {
            lb_submodular(z.unwrap_or_else(lb_default_z), gadget_size)?
        }
        Family::RandomAdditive {
            n,
            m,
            b,
            weights,
            max_size,
            seed: own,
        } => {
            let sizes = if max_size <= 1 {
                SizeDist::Unit
            } else {
                SizeDist::Integer { max: max_size }
            };
            random_additive(n, m, b, weights, sizes, stream_seed(seed.unwrap_or(own))?)?
        }
        Family::RandomCoverage {
            n,
            m,
            b,
            universe,
            density,
            seed: own,
        } => random_coverage(
            n,
            m,
            universe,
            density,
            b,
            stream_seed(seed.unwrap_or(own))?,
        )?,
    };
    Ok(f)
}

pub fn run(a: GenArgs) -> Result<ExitCode, Failure> {
    let f = generate(&a.family, None)?;
    emit(a.out.as_deref(), &f.to_json_pretty())?;
    Ok(ExitCode::SUCCESS)
}
