use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Nonlinearity;
use crate::error::{Error, Result};

/// One K-quantum nonlinear coherent state `|ξ; Kj, f⟩`: the eigenstate of
/// `a^K f(n̂)` with eigenvalue `ξ` supported on the Fock lattice `n ≡ j (mod K)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    k: u32,
    j: u32,
    xi: Complex64,
    f: Nonlinearity,
}

impl StateSpec {
    pub fn new(k: u32, j: u32, xi: Complex64, f: Nonlinearity) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("K must be >= 1".into()));
        }
        if j >= k {
            return Err(Error::InvalidArgument(format!("j must be < K, got j={j}, K={k}")));
        }
        if !xi.re.is_finite() || !xi.im.is_finite() {
            return Err(Error::InvalidArgument("xi must be finite".into()));
        }
        f.validate()?;
        Ok(Self { k, j, xi, f })
    }

    /// Trapped-ion state whose nonlinearity order matches `k`.
    pub fn trapped_ion(k: u32, j: u32, xi: Complex64, eta: f64) -> Result<Self> {
        Self::new(k, j, xi, Nonlinearity::trapped_ion(eta, k))
    }

    pub fn identity(k: u32, j: u32, xi: Complex64) -> Result<Self> {
        Self::new(k, j, xi, Nonlinearity::Identity)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn xi(&self) -> Complex64 {
        self.xi
    }

    pub fn f(&self) -> &Nonlinearity {
        &self.f
    }

    pub fn with_xi(&self, xi: Complex64) -> Result<Self> {
        Self::new(self.k, self.j, xi, self.f.clone())
    }

    pub fn with_j(&self, j: u32) -> Result<Self> {
        Self::new(self.k, j, self.xi, self.f.clone())
    }

    /// Fock index of lattice site `m`.
    pub fn fock_index(&self, m: usize) -> usize {
        m * self.k as usize + self.j as usize
    }

    /// `arg ξ` in `[0, 2π)`, which makes `ξ^{1/K}` the principal branch with
    /// argument in `[0, 2π/K)`.
    pub fn xi_arg(&self) -> f64 {
        let a = self.xi.arg();
        if a < 0.0 {
            a + std::f64::consts::TAU
        } else {
            a
        }
    }
}
