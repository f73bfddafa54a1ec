use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("schema violation: {0}")]
    Schema(String),

    #[error("candidate `{id}` has non-positive size {size}")]
    NonPositiveSize { id: String, size: f64 },

    #[error("unknown candidate `{0}`")]
    UnknownCandidate(String),

    #[error("no voters after filtering")]
    NoVoters,

    #[error("no candidates after filtering")]
    NoCandidates,

    #[error("infeasible bounds: {0}")]
    Infeasible(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("local search did not converge in round {round} after {iterations} iterations")]
    NotConverged { round: usize, iterations: usize },

    #[error(
        "rounding cap exhausted in round {round}: {attempts} attempts, best {best_satisfied} satisfied of {required} required"
    )]
    RoundingCapExhausted {
        round: usize,
        attempts: usize,
        best_satisfied: usize,
        required: usize,
    },

    #[error("enumeration too large: about {estimate} {unit} (limit {limit})")]
    EnumerationTooLarge {
        estimate: String,
        unit: &'static str,
        limit: String,
    },

    #[error("profile enumeration precondition violated: {0}")]
    ProfilePrecondition(String),

    #[error("budget violated: committee cost {cost} exceeds {budget}")]
    BudgetViolation { cost: f64, budget: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
