//! Fuchsian differential operators on the projective line: exact local
//! analysis, companion connections, apparent singularities, accessory
//! parameter counting and a numeric monodromy cross-check.

pub mod algebra;
pub mod connection;
pub mod cyclic;
pub mod error;
pub mod frobenius;
pub mod moduli;
pub mod monodromy;
pub mod operator;
pub mod sample;

pub use algebra::{Matrix, Poly, RatFunc, Scalar, TruncatedSeries};
pub use error::{Error, Result};
pub use operator::FuchsianOperator;
