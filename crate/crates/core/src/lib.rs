//! K-quantum nonlinear coherent states (KNCS) in a truncated Fock basis.
//!
//! A KNCS `|xi; Kj, f>` is a right eigenstate of `a^K f(n)` with eigenvalue
//! `xi`, supported on the number lattice `n = mK + j`. This crate builds such
//! states from their power-series coefficients, decides whether the series
//! converges (the existence domain), evaluates photon statistics, and provides
//! an independent route to the same states through the dark-state condition
//! of a laser-driven trapped ion.
//!
//! Module map:
//!
//! - [`numerics`]: signed log-domain scalars, log-factorials, generalized
//!   Laguerre polynomials.
//! - [`states`]: nonlinearity functions, state specifications, coefficient
//!   profiles, normalized Fock vectors, overlaps and the K-branch
//!   decomposition.
//! - [`existence`]: convergence classification, critical eigenvalue search,
//!   phase diagrams.
//! - [`observables`]: number distributions, moments, Mandel parameter,
//!   quadrature squeezing, mixed-state distributions.
//! - [`ion`]: the trapped-ion dark-state linear system and its null vectors.

pub mod error;
pub mod existence;
pub mod ion;
pub mod numerics;
pub mod observables;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64;
