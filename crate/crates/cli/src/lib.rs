//! Library surface of the command-line driver, exposed for integration
//! tests: configuration resolution, the runner, and the synthetic-scene
//! generator.

pub mod config;
pub mod runner;
pub mod synthetic;
