//! Exact tools for the fixed-charge transportation problem: a dynamic
//! program for trees, model builders for the integer and extended
//! formulations, constructive liftings between them, instance generators,
//! a brute-force oracle, and file formats.

pub mod error;
pub mod formulations;
pub mod generators;
pub mod instance;
pub mod io;
pub mod liftings;
pub mod oracle;
pub mod rational;
pub mod tree_dp;
pub mod verify;

pub use error::{Error, Result};
pub use instance::{validate_solution, Instance, NodeId, NodeSense, RootedTree, Solution, Variant, Violation};
pub use rational::Rational;
