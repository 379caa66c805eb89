//! Command-queue simulation and event profiling toolkit.
//!
//! The library models platforms, devices, contexts, queues, buffers, kernels
//! and events on top of a virtual clock, profiles the resulting traces, and
//! ships a double-buffered random number generator pipeline as a reference
//! workload. The `cclsim` binary exposes `devinfo`, `plot-events` and `rng`.

pub mod chart;
pub mod cli;
pub mod device;
pub mod error;
pub mod prng;
pub mod profiler;
pub mod selector;
pub mod sim;
pub mod worksize;

pub use error::{error_string, Error, ErrorInfo, Result};
