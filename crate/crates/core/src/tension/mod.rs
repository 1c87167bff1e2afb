//! Killed self-avoiding walks and surface-tension estimators.

mod estimate;
pub mod walk;

pub use estimate::*;
pub use walk::*;
