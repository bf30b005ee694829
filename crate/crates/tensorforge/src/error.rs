// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("no support: tensor is zero")]
    NoSupport,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("non-reduced fraction \"{0}\"")]
    NonReducedFraction(String),
    #[error("zero entry at {0}")]
    ZeroEntry(String),
    #[error("duplicate entry at {0}")]
    DuplicateEntry(String),
    #[error("invalid rational \"{0}\"")]
    InvalidRational(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{0}")]
    NotInFlatteningImage(String),
    #[error("family size {count} exceeds budget {budget}")]
    BudgetExceeded { count: String, budget: String },
}

pub type Result<T> = std::result::Result<T, Error>;
