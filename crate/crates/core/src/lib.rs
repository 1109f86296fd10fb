//! Sum-moment statistics for vectors of random variables.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`specfun`]: the lower real branch of the Lambert W function and Γ(x).
//! * [`processes`]: seeded white, Markov and covariance-shaped Gaussian
//!   generators, covariance kernels, Toeplitz assembly, eigen factorization,
//!   pairwise cross-correlated generation and linear-filter covariance
//!   propagation.
//! * [`moments`]: method-of-moments estimators, cosine similarity and
//!   Minkowski distance with their ensemble-mean forms, joint central moments
//!   and the mean total variation.
//! * [`summoments`]: polynomial fields of the centered component sum, central
//!   sum-moments for one or several vectors, the Gaussian closed form and the
//!   supporting polynomial utilities.
//! * [`regression`]: exact least squares, polynomial fits and the split-data
//!   approximation with its gradient bounds.
//! * [`applications`]: MA-filtered Markov covariance, 2nd-order Markov fits,
//!   one-step LMMSE prediction and time alignment of two processes.
//!
//! All randomness flows through [`rng::GaussianStream`], a ChaCha8 stream keyed
//! by `(seed, stream)`, so every generator is a pure function of its inputs.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::excessive_precision)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod math;
mod optimize;

pub mod applications;
pub mod linalg;
pub mod moments;
pub mod processes;
pub mod regression;
pub mod rng;
pub mod specfun;
pub mod summoments;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use moments::{Ensemble, MomentOrder};
pub use processes::{CovMatrix, Kernel, MarkovOrder, MarkovParams, PairSpec, TimeSeries};
