//! Single-ended fault location for multi-terminal HVdc networks.
//!
//! The crate covers the full experiment loop for locating dc-line faults from
//! post-fault current or voltage traces recorded at one terminal:
//!
//! * [`dataset`] — trace data model, CSV persistence, and a traveling-wave
//!   surrogate generator producing physics-inspired fault transients.
//! * [`preprocess`] — composable signal-conditioning stages (decimating FIR
//!   low-pass, FFT magnitude, ℓ²-normalization, PCA, signed square root,
//!   standard scaling) fitted on training folds only.
//! * [`regress`] — Bayesian ridge regression with predictive intervals, plus
//!   k-nearest-neighbor and decision-tree baselines behind one trait.
//! * [`evaluate`] — MAPE/MAE/PRR/PP goodness-of-fit measures and seeded
//!   k-fold cross-validation.
//! * [`search`] — exhaustive enumeration of valid preprocessing pipelines and
//!   a (optionally rayon-parallel) sweep over every (channel, pipeline,
//!   model) combination.
//!
//! With the default `parallel` feature, dataset generation and the search
//! sweep run as data-parallel rayon maps; `*_serial` variants of both entry
//! points are always available and produce bit-identical results.

pub mod dataset;
pub mod evaluate;
pub mod preprocess;
pub mod regress;
pub mod search;

pub use nalgebra;
