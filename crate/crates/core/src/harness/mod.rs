//! Fuzzing, statistics and benchmarking used by the command line tool.

pub mod bench;
pub mod fuzz;
pub mod gen;
pub mod stats;

pub use bench::{bench, live_word, BenchRow, LiveWord};
pub use fuzz::{check_case, fuzz, FuzzCase, FuzzFailure, FuzzReport};
pub use gen::GenBounds;
pub use stats::CircuitStats;
