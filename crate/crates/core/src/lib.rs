//! Adaptive influence maximization under the dynamic independent cascade model.
//!
//! Seeds activate only with some probability and may be re-seeded, and each edge's
//! propagation probability is itself drawn from a known finite distribution, revealed once
//! the edge's source becomes active.

pub mod data;
pub mod diffusion;
pub mod estimator;
pub mod fixtures;
pub mod model;
pub mod oracle;
pub mod realization;
pub mod strategies;
pub mod streams;
