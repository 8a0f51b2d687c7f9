use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("function index {index} out of range (family has {len} functions)")]
    FunctionIndex { index: usize, len: usize },

    #[error("variable index {index} out of range (n = {n})")]
    VariableIndex { index: usize, n: usize },

    #[error("symbol {symbol} out of range (q = {q})")]
    Symbol { symbol: usize, q: usize },

    #[error("constraint uses variable {0} more than once")]
    RepeatedVariable(usize),

    #[error("empty instance")]
    EmptyInstance,

    #[error("invalid weight {0}")]
    InvalidWeight(f64),

    #[error("exact enumeration needs {needed} assignments, budget is {budget}; use heuristic mode")]
    EnumerationBudget { needed: f64, budget: u64 },

    #[error("family is not constant-satisfiable")]
    NotConstantSatisfiable,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("zero function has no satisfying patterns")]
    ZeroFunction,

    #[error("subset enumeration budget exceeded: |F| = {0} > 8")]
    SubsetBudget(usize),

    #[error("points are comparable; polarization needs an incomparable pair")]
    ComparablePoints,

    #[error("polarize budget exceeded: sum of box sides {0} > 16")]
    PolarizeBudget(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("marginals do not match (max deviation {0:e})")]
    MarginalMismatch(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("problem too large: |F|*q^k = {0} exceeds 512")]
    SizeBudget(usize),

    #[error("linear program solver failed: {0}")]
    Lp(String),

    #[error("separation requires a DISJOINT verdict, got {0}")]
    NotDisjoint(String),

    #[error("separation not certified (margin {0:e})")]
    SeparationNotCertified(f64),

    #[error("sketch configuration mismatch: {0}")]
    SketchMismatch(String),

    #[error("stream violates end-of-stream non-negativity (W = {0})")]
    NegativeWeight(f64),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
