//! Experiment harness and runtime helpers behind the `causal-dist` binary,
//! exposed as a library so integration tests can drive the same code paths.

pub mod experiments;
pub mod pool;
pub mod run;
