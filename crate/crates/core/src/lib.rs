//! Stochastic-geometry laboratory: uniform random polytopes in balls and
//! ellipsoids, their intrinsic volumes, cap geometry of the ball and
//! replicated scaling experiments.

pub mod caps;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod hull;
pub mod intrinsic;
pub mod sampling;
pub mod stats;

pub use error::{Error, Result};
