//! Approximate maximin-share allocation of indivisible goods.
//!
//! All quantities are exact rationals ([`Value`]). Solvers return an
//! [`Allocation`] covering every item; [`verify`] checks it against exact
//! maximin shares.

pub mod additive;
pub mod bipartite;
pub mod error;
pub mod extremal;
pub mod four;
pub mod generate;
pub mod instance;
pub mod mms;
pub mod potential;
pub mod reduction;
pub mod solver;
pub mod submodular;
pub mod valuation;
pub mod value;
pub mod verify;
pub mod xos;

pub use error::{Error, Result};
pub use instance::{Allocation, Bundle, Instance, SubInstance};
pub use valuation::{Class, Valuation};
pub use value::Value;
