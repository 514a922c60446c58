//! Deterministic tooling for benchmarking point cloud classifiers under
//! corruption: a seven-kind corruption engine with five severity levels, a
//! WOLFMix-style training augmentation, bit-exact dataset containers, and
//! the CE/mCE/RCE/RmCE robustness metrics.
//!
//! Corruptions are strictly test-time transforms (the OOD evaluation rule):
//! the augmentation module has no dependency on the corruption engine, and a
//! static test keeps it that way.
//!
//! See the crate examples for one runnable program per capability, and the
//! `pccorrupt` binary for the file-level workflow.

pub mod augment;
pub mod cli;
pub mod corrupt;
pub mod dataset;
pub mod geom;
pub mod metrics;
pub mod render;
pub mod rng;

#[cfg(test)]
pub(crate) mod test_stubs;
