//! Experiment runner library behind the `pathstab` binary: configs,
//! registered examples, artifact writers, SVG plots, orchestration, and the
//! verification suites.

// Validation guards use `!(x > y)` so NaN inputs fail them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod config;
pub mod examples;
pub mod runner;
pub mod svg;
pub mod verify;
