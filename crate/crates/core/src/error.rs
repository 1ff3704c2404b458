use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Budget,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Blaschke product: {0}")]
    InvalidProduct(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("derivative order {order} out of range 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("no derivative up to order {max_order} exceeds the threshold at xi = {xi}")]
    MultiplicityOverflow { xi: f64, max_order: usize },

    #[error("critical points {first} and {second} are closer than 4 grid steps ({step})")]
    GridTooCoarse { first: f64, second: f64, step: f64 },

    #[error("psi'' has no zeros on the circle")]
    EmptyPortrait,

    #[error("sample count {required} exceeds the cap {cap}")]
    BudgetExceeded { required: usize, cap: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("phase derivative vanishes at an endpoint")]
    ZeroDerivative,

    #[error("non-positive input: {0}")]
    NonPositiveInput(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("condition violated: {condition} (residual {residual:e})")]
    ConditionViolated { condition: String, residual: f64 },

    #[error("basis truncation at length {length} too short (Gram residual {residual:e})")]
    TruncationTooShort { length: usize, residual: f64 },
}

impl Error {
    /// Short stable name, printed by the CLI on failure.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidProduct(_) => "InvalidProduct",
            Error::InvalidInput(_) => "InvalidInput",
            Error::OrderOutOfRange { .. } => "OrderOutOfRange",
            Error::MultiplicityOverflow { .. } => "MultiplicityOverflow",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::EmptyPortrait => "EmptyPortrait",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::DegenerateFit(_) => "DegenerateFit",
            Error::ZeroDerivative => "ZeroDerivative",
            Error::NonPositiveInput(_) => "NonPositiveInput",
            Error::ParameterOutOfRange(_) => "ParameterOutOfRange",
            Error::ConditionViolated { .. } => "ConditionViolated",
            Error::TruncationTooShort { .. } => "TruncationTooShort",
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidProduct(_)
            | Error::InvalidInput(_)
            | Error::OrderOutOfRange { .. }
            | Error::ZeroDerivative
            | Error::NonPositiveInput(_)
            | Error::ParameterOutOfRange(_)
            | Error::ConditionViolated { .. } => ErrorKind::Validation,
            Error::BudgetExceeded { .. } => ErrorKind::Budget,
            Error::MultiplicityOverflow { .. }
            | Error::GridTooCoarse { .. }
            | Error::EmptyPortrait
            | Error::DegenerateFit(_)
            | Error::TruncationTooShort { .. } => ErrorKind::Numerical,
        }
    }
}
