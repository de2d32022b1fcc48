//! Construction of K-quantum nonlinear coherent states.
//!
//! In the Fock basis the state `|ξ; Kj, f⟩` has amplitudes
//!
//! ```text
//! c_{mK+j} = c_Kj ξ^m / (√((mK+j)!) f(mK+j)(!)^K)
//! ```
//!
//! where `f(l)(!)^K = f(l) f(l-K) f(l-2K) ...` and `c_Kj` normalizes the
//! state. Every other amplitude vanishes.

mod build;
mod decompose;
mod nonlinearity;
mod profile;
mod spec;

pub use build::{
    build_state, build_state_with, eigen_residual, g_coefficient, normalization, overlap, FockVector, LogComplex,
    StateSeries,
};
pub use decompose::{branch_spec, decompose, recompose, Branch};
pub use nonlinearity::{f_superfactorial, f_value, FRatio, FSeq, Nonlinearity};
pub use profile::CoefficientProfile;
pub use spec::StateSpec;
