//! Experiment harness around the completion-and-stability library: scenario
//! configuration, deterministic seed derivation, the attack/recovery
//! simulation sweeps, the inequality-verification suites, CSV reporting, and
//! minimal SVG plotting.
//!
//! Every run is reproducible byte-for-byte from its configuration: all
//! randomness flows through [`seeding::derive_seed`] and results never depend
//! on thread count or scheduling (see the `parallel` feature).

pub mod config;
pub mod fit;
pub mod plot;
pub mod report;
pub mod scenarios;
pub mod seeding;
