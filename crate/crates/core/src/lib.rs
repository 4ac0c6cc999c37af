//! Shannon entropy of random geometric graph ensembles.
//!
//! Ensembles of `n` labelled nodes with i.i.d. coordinates on the unit cube
//! or the unit torus, connected either by a hard threshold or by a Rayleigh
//! fading connection function. The crate provides
//!
//! * closed-form graph probabilities for three nodes on the line and circle
//!   ([`exact_small`]),
//! * Monte-Carlo ensemble sampling with bias and variance corrections
//!   ([`sampling`], [`mc_entropy`]),
//! * the high-dimensional Gaussian limit ([`limit`]) and its third-order
//!   Edgeworth correction ([`edgeworth`]),
//! * an entropy-maximising connection-range optimiser ([`optimize`]).
//!
//! All entropies are reported in bits.

pub mod counts;
pub mod edgeworth;
pub mod error;
pub mod exact_small;
pub mod export;
pub mod geometry;
pub mod graphs;
pub mod limit;
pub mod mc_entropy;
pub mod optimize;
pub mod quadrature;
pub mod rng;
pub mod sampling;
pub mod special;

pub use error::{Error, Result};
