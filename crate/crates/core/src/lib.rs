//! Planning, simulation and converse-bound checking for hybrid coded
//! distributed computing, where a fraction of the input files is handled by
//! symmetric coded shuffling among the reduce nodes and the rest with the help
//! of nodes that only map.

pub mod bounds;
pub mod cli;
pub mod codec;
pub mod error;
pub mod loads;
pub mod math;
pub mod model;
pub mod planner;
pub mod simulator;

pub use error::{Error, Result};
pub use math::Rational;
pub use model::{Allocation, Placement, ReduceAssignment, SystemParams, TaskParams};
