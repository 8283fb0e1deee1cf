//! Constructive rectifier (ReLU) approximation networks.
//!
//! This crate builds explicit feed-forward networks of rectifier units —
//! computation graphs with cross-layer connections — that approximate
//! concrete function classes with *proved* accuracy budgets, and ships the
//! measurement harness used to check those budgets against independent
//! oracles:
//!
//! * [`graph`] — the network intermediate representation: layers of
//!   `max(0, w·x + b)` units, affine output functionals, combinators
//!   (compose / parallel / linear combination / affine precomposition) and a
//!   bit-faithful JSON serialization.
//! * [`product`] — sawtooth and squaring gadgets, pairwise multiplication on
//!   a box via the polarization identity, and chained d-ary products.
//! * [`chebyshev`] — Chebyshev recurrence chains, truncated Chebyshev series
//!   networks, monomial polynomials, and the Clenshaw oracle.
//! * [`analytic`] — ellipse certificates for analytic targets, truncation
//!   degrees, and end-to-end series networks for certified functions.
//! * [`quadrature`] — Gauss–Legendre tensor quadrature used as the ground
//!   truth for integral-defined targets.
//! * [`bandlimited`] — random-feature sampling of spectral densities and the
//!   assembled networks for bandlimited targets.
//! * [`harness`] — grid / Monte-Carlo error reports, parameter sweeps with
//!   scaling fits, and deterministic CSV/JSON output.
//! * [`catalog`] — the string catalog of build targets, kernels, densities
//!   and oracles shared by the sweep runner and the command-line tool.

pub mod error;
pub mod graph;
mod serialize;
pub mod product;
pub mod chebyshev;
pub mod analytic;
pub mod quadrature;
pub mod bandlimited;
pub mod harness;
pub mod catalog;

pub use error::{Error, Result};
pub use graph::{
    compose, identity, linear_combine, parallel, precompose_affine, NetworkGraph, SourceRef,
};
