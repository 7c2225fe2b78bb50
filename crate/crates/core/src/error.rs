use thiserror::Error;

/// Errors raised by the exact, mean-field and Monte Carlo engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported subgraph pattern `{0}` (supported: edge, wedge, triangle)")]
    UnsupportedPattern(String),

    #[error("invalid pattern `{name}`: {reason}")]
    InvalidPattern { name: String, reason: String },

    #[error(
        "{active} active edges exceed the enumeration cap of {cap}; use the mcmc module for larger systems"
    )]
    EnumerationCap { active: usize, cap: usize },

    #[error("{what} needs at most {cap} edges, got {got}")]
    SizeCap {
        what: &'static str,
        got: usize,
        cap: usize,
    },

    #[error("configuration has edge {edge} present outside the active edge set")]
    UnsupportedConfig { edge: usize },

    #[error("edge {edge} is not in the active edge set")]
    InactiveEdge { edge: usize },

    #[error("edge id {edge} out of range for {m} edges")]
    EdgeOutOfRange { edge: usize, m: usize },

    #[error("configuration has {got} bits but the graph has {expected} edges")]
    ConfigLength { expected: usize, got: usize },

    #[error("subsets are not nested: {0}")]
    NotNested(String),

    #[error("Ursell functions of order {0} are not supported (max 3)")]
    UrsellOrder(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{0} is only defined for pairwise (scalar or generalized) couplings")]
    NeedsPairwise(&'static str),

    #[error("functional `{name}` is not increasing: f({lower}) = {f_lower} > f({upper}) = {f_upper}")]
    NotMonotone {
        name: String,
        lower: String,
        upper: String,
        f_lower: f64,
        f_upper: f64,
    },

    #[error("u = {0} lies outside [0, 1]")]
    OutOfUnitInterval(f64),

    #[error("critical curve is only defined for alpha > 2, got alpha = {0}")]
    CurveUndefined(f64),

    #[error("limiting variance undefined at ({alpha}, {h}): point is {class}")]
    VarianceUndefined { alpha: f64, h: f64, class: String },

    #[error("invalid chain spec: {0}")]
    ChainSpec(String),

    #[error("invalid grid `{spec}`: {reason}")]
    Grid { spec: String, reason: String },

    #[error("cannot write `{path}`: {reason}")]
    Output { path: String, reason: String },

    #[error("malformed report: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
