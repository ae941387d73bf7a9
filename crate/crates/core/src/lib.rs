//! Core algorithms for a desk-scale hand-orthosis workbench.
//!
//! The crate is `no_std` and only needs an allocator. Everything that touches
//! files, clocks or the terminal lives in the companion `exo` crate.
//!
//! ```text
//! signals ──► intent ──► controller ──► protocol
//!  (EMG / load cell)  (OPEN/RELAX/CLOSE)  (PID + tendon plant)  (sessions)
//!
//! outcomes: cohort scores ──► gains ──► normality gate ──► t / Wilcoxon ──► BH
//! ```
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod controller;
pub mod intent;
pub mod math;
pub mod outcomes;
pub mod protocol;
pub mod signals;

pub use intent::Intent;
pub use signals::{EmgFrame, LoadCellSample, SignalTrace};
