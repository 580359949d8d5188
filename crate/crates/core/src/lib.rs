//! Simulation and Bayesian inference for randomly shifted curves observed in
//! Gaussian white noise, worked entirely in the Fourier domain.
//!
//! A curve `f` is carried by its coefficients `θ_k`, a random shift `τ` acts
//! on them as the rotation `θ_k e^{−i2πkτ}`, and an observation is that
//! rotated vector plus standard complex Gaussian noise. The observation law
//! is therefore a location mixture of complex Gaussians, `P_{θ,g}`, whose
//! mixing measure is the push-forward of the shift distribution `g`.
//!
//! The crate is `no_std` with `alloc`; the default `std` feature only swaps
//! the float intrinsics and error plumbing. File formats and the command line
//! live in the companion `shiftsim` crate.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod distances;
pub mod fourier;
pub mod mixture;
pub mod model;
pub mod nets;
pub mod posterior;
pub mod priors;
pub mod rng;
pub mod shift;
pub mod special;

mod error;
mod numeric;

pub use error::{Error, Result};
pub use fourier::FourierSeries;
pub use mixture::MixtureLaw;
pub use model::ObservationSet;
pub use num_complex::Complex64;
pub use posterior::PosteriorEnsemble;
pub use shift::ShiftDistribution;
