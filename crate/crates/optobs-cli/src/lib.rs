//! Solver front end for observability synthesis: explicit-model files, SMT
//! solver sessions, the synthesis drivers, and the benchmark harness behind
//! the `optobs` binary.

pub mod bench;
pub mod cli;
pub mod format;
pub mod inputs;
pub mod oracle;
pub mod record;
pub mod smt;
pub mod solve;
