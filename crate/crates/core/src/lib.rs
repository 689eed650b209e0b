//! Multi-modal traffic assignment with boundedly rational non-compliant
//! drivers, and the mobility index / mobility equity metric computed from it.

pub mod assignment;
pub mod bilevel;
pub mod equity;
pub mod error;
pub mod geodata;
pub mod network;
pub mod scenario;
pub mod shortest_path;

pub use error::{Error, Result};
