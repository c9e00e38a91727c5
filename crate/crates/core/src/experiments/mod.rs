//! Benchmark problems, error measures and sweeps.

pub mod bench;
pub mod cantilever;
pub mod cases;
pub mod convergence;
pub mod norms;
pub mod output;
pub mod reference;
