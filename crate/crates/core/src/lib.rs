//! Exact generalization bounds and simulations for nearest-neighbour
//! classification on rare sentence structures.
//!
//! Sentences are length-`L` word strings whose words fall into `n_c`
//! equal-size concepts. Each category is defined by a sequence of concepts,
//! and training data is long-tailed: most categories appear only once.
//! The crate computes the optimal kernel `K*`, exact upper bounds on the
//! success rate of any fixed feature map, and Monte Carlo estimates of
//! actual nearest-neighbour performance.

pub mod bounds;
pub mod cli;
pub mod combinatorics;
pub mod datamodel;
pub mod error;
pub mod evaluator;
pub mod graphkernel;
pub mod moment;
pub mod neuralnet;
pub mod oracle;

pub use error::{Error, Result};

#[cfg(feature = "openblas")]
extern crate blas_src;
