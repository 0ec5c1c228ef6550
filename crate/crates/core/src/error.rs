use thiserror::Error;

use crate::decider::ExistenceVerdict;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed group spec `{0}`")]
    MalformedSpec(String),
    #[error("cyclic factor must be at least 2, got {0}")]
    FactorTooSmall(u64),
    #[error("moduli {0:?} are not in canonical primary form")]
    NotCanonical(Vec<u64>),
    #[error("element has {got} coordinates, group has {expected} factors")]
    LengthMismatch { expected: usize, got: usize },
    #[error("element {0:?} is not reduced for this group")]
    NotReduced(Vec<u64>),
    #[error("{divisor} does not divide the group order {order}")]
    NotADivisor { divisor: u64, order: u64 },
    #[error("no subgroup of shape {shape} inside {group}")]
    ShapeUnavailable { shape: String, group: String },
    #[error("subgroup does not belong to this group")]
    ForeignSubgroup,
    #[error("no {rows}-row Kotzig array over {group}")]
    KotzigMissing { rows: usize, group: String },
    #[error("malformed shape `{0}`, expected AxBxC")]
    MalformedShape(String),
    #[error("a*b*c = {product} but the group has order {order}")]
    OrderMismatch { product: u64, order: u64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no construction: verdict is {}", .0.status)]
    NotConstructible(ExistenceVerdict),
    #[error("classical search for a {a}x{b} magic rectangle exhausted its budget")]
    SearchBudget { a: usize, b: usize },
    #[error("constructed instance failed verification: {0}")]
    Unverified(String),
    #[error("construction gave up: {0}")]
    SearchExhausted(String),
    #[error("document error: {0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;
