use thiserror::Error;

use crate::alphabet::GaussianLetter;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid letter {m}{n:+}i: the real part must be at least 1")]
    InvalidLetter { m: i64, n: i64 },

    #[error("cannot parse letter {0:?}")]
    ParseLetter(String),

    #[error("letter {0} is not part of this system")]
    LetterNotInSystem(GaussianLetter),

    #[error("word {0:?} is not admissible")]
    InadmissibleWord(Vec<GaussianLetter>),

    #[error("alphabet exhausted: requested {requested} letters, only {available} exist")]
    AlphabetExhausted { requested: usize, available: usize },

    #[error("empty letter set")]
    EmptySet,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid system descriptor: {0}")]
    InvalidSystem(String),

    #[error("operation not supported for {system}: {what}")]
    Unsupported { system: String, what: String },

    #[error("budget exceeded: {required} units of work requested, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("bisection endpoints do not bracket a zero: upper P({t_hi}) = {upper_at_hi}, lower P({t_lo}) = {lower_at_lo}")]
    InvalidBisectionSigns {
        t_lo: f64,
        t_hi: f64,
        lower_at_lo: f64,
        upper_at_hi: f64,
    },

    #[error("letter {0} is already in the set")]
    LetterAlreadyPresent(GaussianLetter),

    #[error("graph-directed system requires Lambda data for this bound")]
    MissingLambda,

    #[error("tail ratio seed region contains no letter after the first")]
    EmptySeedRegion,

    #[error("tail ratio lower bound became negative at k = {k}; enlarge the seed box")]
    EnlargeSeedBox { k: usize },

    #[error("tail radius {radius} does not cover excluded letter {letter}")]
    TailRadiusTooSmall { radius: u64, letter: GaussianLetter },

    #[error("the tail series diverges at t = {t}")]
    DivergentTail { t: f64 },

    #[error("dimension bracket lower end {h_lower} does not exceed the finiteness threshold {theta}")]
    BelowFinitenessThreshold { h_lower: f64, theta: f64 },

    #[error("no admissible letter found before exhausting the search window of {window} candidates")]
    SearchWindowExhausted { window: usize },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
