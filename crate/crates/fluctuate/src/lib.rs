//! Exact and asymptotic mutant-count distributions for the Luria–Delbrück
//! model with exponentially growing wild type and birth–death mutant clones.

// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exact;
pub mod identities;
pub mod limits;
pub mod lpsm;
pub mod model;
pub mod oracle;
pub mod par;
pub mod quad;
pub mod sim;
pub mod specfun;
pub mod tail;

pub use error::{Error, Result};
pub use model::{LpsmParams, ModelParams, ParamSet};
pub use par::Exec;
