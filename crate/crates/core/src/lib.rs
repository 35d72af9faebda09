// Negated float comparisons are used on purpose: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cgo;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod forward;
pub mod geometry;
pub mod grid;
pub mod identities;
pub mod krylov;
pub mod medium;
mod mp;
pub mod poly;
pub mod quad;
pub mod special;
pub mod suites;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
