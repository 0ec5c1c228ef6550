//! Magic rectangle sets over finite Abelian groups: constructions, a
//! verifier, an existence decider and an exhaustive search oracle.

pub mod cli;
pub mod constructions;
pub mod decider;
pub mod error;
pub mod group;
pub mod kotzig;
pub mod oracle;

pub use constructions::{construct, verify_mrs, MagicRectangle, MagicRectangleSet, MrsReport};
pub use decider::{decide, open_case_catalog, ExistenceVerdict, Route, Status};
pub use error::{Error, Result};
pub use group::{AbelianGroup, GroupElement};
