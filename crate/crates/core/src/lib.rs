//! Lattice-parametric model checking for multi-valued concurrent dynamic logic.

pub mod axioms;
pub mod checker;
pub mod cli;
pub mod lattice;
pub mod matrix;
pub mod mrel;
pub mod sample;
pub mod syntax;
