use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown atom id `{0}`")]
    UnknownAtom(String),
    #[error("unknown set id `{0}`")]
    UnknownSet(String),
    #[error("duplicate atom id `{0}`")]
    DuplicateAtom(String),
    #[error("duplicate set id `{0}`")]
    DuplicateSet(String),
    #[error("atom `{id}` has invalid mass {mass} (must be finite and >= 0)")]
    InvalidMass { id: String, mass: f64 },
    #[error("set `{id}` has invalid coefficient {value} (must be finite and >= 0)")]
    InvalidCoefficient { id: String, value: f64 },
    #[error("value {value} at `{id}` is invalid (must be finite and >= 0)")]
    InvalidValue { id: String, value: f64 },
    #[error("set `{set}` references missing atom `{atom}`")]
    MissingAtom { set: String, atom: String },
    #[error("set `{set}` lists atom `{atom}` twice")]
    RepeatedMember { set: String, atom: String },
    #[error("family has {got} entries but the system has {expected} sets")]
    LengthMismatch { expected: usize, got: usize },
    #[error("subcollection is empty")]
    EmptySubcollection,
    #[error("set system has no sets")]
    EmptySystem,
    #[error(
        "{what}: {count} exceeds the enumeration budget of {budget}; use the flow-based method"
    )]
    BudgetExceeded {
        what: &'static str,
        count: usize,
        budget: usize,
    },
    #[error("grid would have {count} atoms, above the limit of {limit}")]
    GridTooLarge { count: u128, limit: usize },
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("sets `{0}` and `{1}` overlap without nesting; not a dyadic-cube system")]
    NotDyadic(String, String),
    #[error("cube `{0}` has zero mass")]
    ZeroMassCube(String),
    #[error("fractional witnesses need a divisible measure; use the integral variant")]
    IndivisibleMeasure,
    #[error("constant must be positive and finite, got {0}")]
    InvalidConstant(f64),
    #[error("flow network admits an unbounded source-sink path")]
    UnboundedFlow,
    #[error("node {node} is out of range for a network with {count} nodes")]
    InvalidNode { node: usize, count: usize },
    #[error("source and sink coincide")]
    SourceIsSink,
    #[error("flow saturates every source arc; no violating subcollection exists")]
    NoViolation,
    #[error("ratio search did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("numerical inconsistency: {0}")]
    Numerical(String),
    #[error("invalid instance document: {0}")]
    Schema(#[from] serde_json::Error),
}
