//! Schmidt decompositions and normalized entanglement measures for bipartite
//! pure states, with a two-qutrit Heisenberg toy model and state-dependent
//! operator statistics.

pub mod cli;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod operators;
pub mod order;
pub mod qutrit;
pub mod schmidt;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
