use thiserror::Error;

/// Errors raised by the exact and numeric pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed number: {0}")]
    MalformedNumber(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("points not distinct: {0}")]
    PointsNotDistinct(String),
    #[error("order mismatch: order {order} but {coeffs} coefficient polynomials")]
    OrderMismatch { order: usize, coeffs: usize },
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("expansion centre {0} is a pole")]
    PoleAtCentre(String),
    #[error("zero polynomial has no roots")]
    ZeroPolynomial,
    #[error("connection is not logarithmic at {0}")]
    NotLogarithmic(String),
    #[error("matrix is singular")]
    Singular,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("combinatorial bound exceeded: {selections} selections > {limit}")]
    TooManySelections { selections: u128, limit: u128 },
    #[error("exponents are not special: {0}")]
    NotSpecial(String),
    #[error("cyclic vector search exhausted after {0} candidates")]
    NoCyclicVector(usize),
    #[error("solution basis is linearly dependent")]
    DependentBasis,
    #[error("non-integer value {0}")]
    NonInteger(String),
    #[error("integration failed: {0}")]
    Integration(String),
}

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedNumber(_) => "malformed_number",
            Error::Parse(_) => "parse",
            Error::PointsNotDistinct(_) => "points_not_distinct",
            Error::OrderMismatch { .. } => "order_mismatch",
            Error::InvalidOperator(_) => "invalid_operator",
            Error::NotSquare { .. } => "not_square",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::DivisionByZero => "division_by_zero",
            Error::PoleAtCentre(_) => "pole_at_centre",
            Error::ZeroPolynomial => "zero_polynomial",
            Error::NotLogarithmic(_) => "not_logarithmic",
            Error::Singular => "singular",
            Error::Precondition(_) => "precondition",
            Error::TooManySelections { .. } => "too_many_selections",
            Error::NotSpecial(_) => "not_special",
            Error::NoCyclicVector(_) => "no_cyclic_vector",
            Error::DependentBasis => "dependent_basis",
            Error::NonInteger(_) => "non_integer",
            Error::Integration(_) => "integration",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
