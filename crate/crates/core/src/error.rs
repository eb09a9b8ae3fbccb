use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("line {line}: undeclared variable `{name}`")]
    UndeclaredVariable { name: String, line: usize },

    #[error("line {line}: duplicate target `{name}`")]
    DuplicateTarget { name: String, line: usize },

    #[error("model declares no component")]
    EmptyModel,

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("{n} components exceed the supported maximum of {max}")]
    TooManyComponents { n: usize, max: usize },

    #[error("fan-in too large: component {component} depends on {support} variables (cap {cap})")]
    FanInTooLarge {
        component: String,
        support: usize,
        cap: usize,
    },

    #[error("local function of `{0}` is not unate")]
    NotUnate(String),

    #[error(
        "space explosion: more than {cap} spaces (largest irreversible set has {max_irreversible} components; most frequent: {hot_components:?})"
    )]
    SpaceExplosion {
        cap: usize,
        max_irreversible: usize,
        hot_components: Vec<String>,
    },

    #[error("enumeration budget of {budget} nodes exceeded")]
    BudgetExceeded { budget: usize },

    #[error("{n} components exceed the brute-force cap of {cap}")]
    OracleCap { n: usize, cap: usize },

    #[error("binomial coefficient C({n}, {k}) overflows 64 bits")]
    BinomialOverflow { n: usize, k: usize },

    #[error("{0}")]
    Usage(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by a configured budget or cap rather than by bad input.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::FanInTooLarge { .. }
                | Error::SpaceExplosion { .. }
                | Error::BudgetExceeded { .. }
                | Error::OracleCap { .. }
                | Error::BinomialOverflow { .. }
        )
    }
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
