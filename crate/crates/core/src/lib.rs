//! Offline handwritten-word recognition with discrete Bayesian networks.
//!
//! Two classifier families share one feature pipeline:
//!
//! * block classifiers: a word image is cut into vertical blocks, each block
//!   is described by Hu and Zernike moments, discretized with k-means, and
//!   classified by a naive Bayes, tree-augmented (TAN) or forest-augmented
//!   (FAN) network. Block posteriors are averaged into a word decision.
//! * coupled hidden Markov models: horizontal and vertical sliding-window
//!   scans give two symbol streams modelled by two coupled hidden chains,
//!   trained per class with EM and scored by exact inference.
//!
//! The crate is `no_std` and needs only `alloc`; file formats, the command
//! line and parallel orchestration live in the `bayeswords` crate.
#![no_std]

extern crate alloc;

pub mod dbn;
pub mod error;
pub mod eval;
pub mod imaging;
pub mod moments;
pub mod quantize;
pub mod staticbn;
pub mod synth;

pub use error::{Error, Result};
