//! Exact compression of noisy mechanisms over a shared randomness channel.
//!
//! The central primitive is an importance-ordered Poisson process scan: a
//! sender holding a target distribution `P` and a receiver holding a proposal
//! `Q` (plus a shared seed) agree on an infinite sequence of candidate points;
//! the sender transmits only the *index* of a randomly selected candidate, and
//! the receiver reconstructs the point by replaying the shared stream. The
//! selected point is distributed exactly according to `P`, the index admits an
//! `H(K) = D(P ‖ Q) + O(1)` description length, and the selection rule leaks
//! only a bounded amount of extra privacy on top of the mechanism itself.
//!
//! Modules:
//!
//! - [`rng`]: seedable, jump-ahead sample streams (the shared channel).
//! - [`special`]: the handful of special functions the bounds need.
//! - [`encoder`]: the exact encoder/decoder, a truncated variant, and the
//!   greedy (argmin) special case.
//! - [`bounds`]: index-entropy and compressed-size bounds.
//! - [`codec`]: self-delimiting integer codes and a byte container.
//! - [`mechanisms`]: ready-made target/proposal pairs (Gaussian, multivariate
//!   Laplace, spherical caps) plus slicing and a quantized baseline.
//! - [`privacy`]: budget bookkeeping for the compressed mechanisms.
//! - [`experiments`]: distributed mean estimation and metric-privacy
//!   harnesses with CSV output.

// `!(x > 0.0)` is the NaN-rejecting form of every domain check in this crate,
// and the frozen reference constants keep their full generated precision.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod bounds;
pub mod codec;
pub mod encoder;
pub mod experiments;
pub mod mechanisms;
pub mod privacy;
pub mod rng;
pub mod special;

pub use encoder::{
    decode, encode, encode_truncated, pfr_encode, EncodeError, EncodeResult, PprParams, Proposal,
    Target,
};
pub use rng::{SampleStream, SharedSeed};
