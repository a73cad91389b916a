//! Simplicial and Čech–Deligne models of gerbes, fibre integration and
//! Chern–Weil type invariants of families.

pub mod cech;
pub mod chern_weil;
pub mod covers;
pub mod error;
pub mod exterior;
pub mod families;
pub mod fibre;
pub mod scalar;
pub mod scenarios;
pub mod simplicial;

pub use error::{Error, Result};
