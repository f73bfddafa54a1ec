//! Exit codes, seed handling and output helpers shared by the subcommands.

use std::fs;
use std::io::Write;
use std::path::Path;

use alphacore::rng::derive_seed;
use alphacore::Error;

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_ROUNDING_CAP: u8 = 3;
pub const EXIT_ABOVE_THRESHOLD: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FAILURE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
            Error::RoundingCapExhausted { .. } => EXIT_ROUNDING_CAP,
            _ => EXIT_FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(format!("io error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::usage(format!("json error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Self::usage(format!("csv error: {e}"))
    }
}

/// Applies `ALPHACORE_RNG_STREAM`, when set, as a child stream of `seed`.
pub fn stream_seed(seed: u64) -> Result<u64, Failure> {
    match std::env::var("ALPHACORE_RNG_STREAM") {
        Err(_) => Ok(seed),
        Ok(raw) => raw
            .trim()
            .parse::<u64>()
            .map(|stream| derive_seed(seed, stream))
            .map_err(|_| {
                Failure::usage(format!(
                    "ALPHACORE_RNG_STREAM must be an unsigned integer, got `{raw}`"
                ))
            }),
    }
}

/// Writes `text` plus a trailing newline to `path`, or to stdout when no
/// path is given.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            std::io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Nine significant digits; fixed notation for moderate magnitudes.
pub fn sig9(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..9).contains(&mag) {
        let decimals = (8 - mag).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.8e}")
    }
}
