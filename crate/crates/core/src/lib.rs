//! Greedy equivalence search for Bayesian-network structure learning.
//!
//! The crate is organised around five pieces:
//!
//! - [`graph`]: DAGs, d-separation, CPDAG completion and consistent extensions.
//! - [`scoring`]: BDeu, BIC and an exact large-sample oracle score, with caching.
//! - [`search`]: forward, backward, two-phase and unrestricted greedy search over
//!   equivalence classes.
//! - [`datagen`]: parametric networks, the shifted-Dirichlet parameter sampler,
//!   forward and selection-biased sampling, and the two gold-standard models.
//! - [`oracle`]: exact joint tables, independence testing and brute-force
//!   identification of inclusion- and parameter-optimal classes.
//!
//! [`experiment`] ties these together into a reproducible sweep.

pub mod datagen;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod oracle;
pub mod scoring;
pub mod search;

pub use error::{Error, Result};
