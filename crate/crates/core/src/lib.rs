//! Real-time segmentation and classification with two-tier hierarchical
//! Markov random fields.
//!
//! Two hierarchy methods are provided on top of a common set of building blocks:
//!
//! * **Method I (fully structured)**: a binary lattice MRF denoises the
//!   foreground mask, then a second lattice MRF over the foreground assigns an
//!   object-class bit from grayscale data.
//! * **Method II (partially structured)**: a lattice MRF assigns the class bit
//!   directly; connected components then become nodes of a k-nearest-neighbor
//!   graph whose own MRF merges over-segmented pieces.
//!
//! Both lattice layers are optimized with iterated conditional modes (ICM).
//! The smoothness weight can be estimated against labeled images
//! ([`estimate`]) and resulting segments are labeled by a small Bayesian
//! decision tree ([`classify`]).

pub mod classify;
pub mod error;
pub mod estimate;
pub mod fixture;
pub mod imgcore;
pub mod mrf;
pub mod pipeline;
pub mod segraph;

pub use error::{Error, Result};
