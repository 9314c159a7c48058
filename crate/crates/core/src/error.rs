use thiserror::Error;

use crate::model::WeightedSample;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter interval ({lo}, {hi}): need lo < hi")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("seed {seed} lies outside the parameter interval")]
    SeedOutsideDomain { seed: f64 },

    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),

    #[error("replication count must be at least 1")]
    ZeroReplication,

    #[error("sample is empty")]
    EmptySample,

    #[error("observation {observation} lies outside the domain of `{family}`")]
    ObservationOutOfDomain { family: String, observation: String },

    #[error("no sign change bracketed for sample {sample} after {probes} probes (last probe t = {last_probe})")]
    NoBracket {
        sample: WeightedSample,
        probes: usize,
        last_probe: f64,
    },

    #[error("score sum vanishes on [{lo}, {hi}] for sample {sample}: no strict sign change")]
    Plateau {
        sample: WeightedSample,
        lo: f64,
        hi: f64,
    },

    #[error("invalid generator `{name}`: {reason}")]
    InvalidGenerator { name: String, reason: String },

    #[error("score sum of the denominator block is {value} at t = {t}, within the zero tolerance")]
    DenominatorNearZero { t: f64, value: f64 },

    #[error("blocks have indistinguishable estimates {x_estimate} and {y_estimate}")]
    BlocksEqualEstimate { x_estimate: f64, y_estimate: f64 },

    #[error("anchor observations have indistinguishable single-point estimates {u_estimate} and {v_estimate}")]
    AnchorsIndistinguishable { u_estimate: f64, v_estimate: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration would produce {count} multisets, above the cap of {cap}")]
    EnumerationCap { count: u128, cap: u128 },

    #[error("simplex solver exceeded {0} pivots")]
    SolverIterationCap(usize),

    #[error("psi table invalid: {0}")]
    InvalidTable(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
