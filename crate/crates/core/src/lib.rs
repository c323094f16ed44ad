//! Cone-field dynamics on flat tori.
//!
//! A library for numerical experiments with non-singular endomorphisms of
//! `T^d` that carry a uniformly contracted stable direction and a positively
//! invariant expansion cone. It provides:
//!
//! - flat-torus arithmetic and small fixed-dimension linear algebra
//!   ([`torus`], [`linalg`], [`subspace`]),
//! - built-in endomorphism models: hyperbolic toral endomorphisms and a
//!   locally perturbed ("derived") variant with a partially contracted
//!   direction at a fixed point ([`model`]),
//! - cone fields, the graph metric between cone subspaces, restricted
//!   inverse norms and determinant distortion along orbits ([`cone`]),
//! - detection and statistics of cone-hyperbolic times ([`hyptime`]),
//! - empirical invariant measures, Birkhoff averages, Lyapunov spectra and
//!   maximal cone volume growth ([`measure`]),
//! - Monte Carlo estimators for dynamic-ball measures and the associated
//!   bounded-ratio diagnostics ([`volume`]),
//! - large-deviation curves for Birkhoff averages ([`deviation`]).
//!
//! The crate is `no_std` + `alloc`; every operation is a pure function of its
//! inputs, and all randomized routines take explicit seeded streams, so
//! results are reproducible bit-for-bit and safe to evaluate from concurrent
//! workers.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cone;
pub mod deviation;
pub mod error;
pub mod hyptime;
pub mod linalg;
pub mod measure;
pub mod model;
pub mod rng;
pub mod stats;
pub mod subspace;
pub mod torus;
pub mod volume;

pub use cone::ConeSpec;
pub use error::{Error, Result};
pub use model::Model;
pub use rng::Streams;
pub use subspace::Subspace;
pub use torus::{TangentVector, TorusPoint, MAX_DIM};
