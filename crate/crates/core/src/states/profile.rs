use crate::error::{Error, Result};
use crate::numerics::log_factorial;

use super::{FSeq, Nonlinearity};

/// The `ξ`-independent part of the series terms on one parity lattice.
///
/// For lattice site `m` (Fock index `mK + j`) this stores
/// `h_m = -ln((mK+j)!) - 2 ln|SF(mK+j)|` together with the sign of the
/// superfactorial, so `ln|g(m,0)|² = h_m + 2m ln|ξ|` for every `ξ`. The
/// profile grows on demand and is reused across bisection steps and sweeps.
#[derive(Debug, Clone)]
pub struct CoefficientProfile {
    k: u32,
    j: u32,
    f: Nonlinearity,
    seq: FSeq,
    h: Vec<f64>,
    sf_sign: Vec<i8>,
    f_sign: Vec<i8>,
    terminated_at: Option<usize>,
    max_len: Option<usize>,
}

impl CoefficientProfile {
    pub fn new(k: u32, j: u32, f: &Nonlinearity) -> Result<Self> {
        if k == 0 || j >= k {
            return Err(Error::InvalidArgument(format!("need 0 <= j < K, got K={k}, j={j}")));
        }
        f.validate()?;
        let max_len = f.table_len().map(|len| {
            let (k, j) = (k as usize, j as usize);
            if len <= j {
                1
            } else {
                (len - 1 - j) / k + 1
            }
        });
        Ok(Self {
            k,
            j,
            f: f.clone(),
            seq: f.seq(),
            h: vec![-log_factorial(u64::from(j))],
            sf_sign: vec![1],
            f_sign: vec![1],
            terminated_at: None,
            max_len,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn f(&self) -> &Nonlinearity {
        &self.f
    }

    /// Number of lattice sites computed so far.
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// First lattice site whose amplitude vanishes identically because `f`
    /// has a pole on the lattice; every later site vanishes too.
    pub fn terminated_at(&self) -> Option<usize> {
        self.terminated_at
    }

    /// Largest number of sites a finite table can supply.
    pub fn max_len(&self) -> Option<usize> {
        self.max_len
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn sf_sign(&self) -> &[i8] {
        &self.sf_sign
    }

    /// Sign of `f(mK+j)`; site 0 reports `+1`.
    pub fn f_sign(&self) -> &[i8] {
        &self.f_sign
    }

    pub fn min_log_laguerre(&self) -> f64 {
        self.seq.min_log_laguerre()
    }

    /// `ln|g(m,0)|²` at `ln|ξ| = ln_abs_xi` for a computed site `m`.
    pub fn log_term(&self, m: usize, ln_abs_xi: f64) -> f64 {
        if m == 0 {
            return self.h[0];
        }
        self.h[m] + 2.0 * m as f64 * ln_abs_xi
    }

    /// Grows the profile to `len` sites, or as far as a termination allows.
    pub fn ensure(&mut self, len: usize) -> Result<()> {
        if let Some(cap) = self.max_len {
            if len > cap {
                return Err(Error::TableIndexOutOfRange {
                    index: (len - 1) * self.k as usize + self.j as usize,
                    len: (cap - 1) * self.k as usize + self.j as usize + 1,
                });
            }
        }
        self.h.reserve(len.saturating_sub(self.h.len()));
        let k = self.k as usize;
        while self.h.len() < len && self.terminated_at.is_none() {
            let m = self.h.len();
            let l = m * k + self.j as usize;
            let skip = l - self.seq.position() as usize;
            let f = self.seq.nth(skip).expect("infinite sequence")?;
            if f.is_pole() {
                self.terminated_at = Some(m);
                break;
            }
            if f.num.is_zero() {
                return Err(Error::SingularNonlinearity { index: l });
            }
            let ln_rising: f64 = (l - k + 1..=l).map(|i| (i as f64).ln()).sum();
            let prev = self.h[m - 1];
            self.h.push(prev - ln_rising - 2.0 * f.ln_abs());
            self.sf_sign.push(self.sf_sign[m - 1] * f.sign());
            self.f_sign.push(f.sign());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::f_superfactorial;
    use approx::assert_relative_eq;

    #[test]
    fn matches_direct_superfactorial() {
        let f = Nonlinearity::trapped_ion(0.3, 3);
        let mut p = CoefficientProfile::new(3, 2, &f).unwrap();
        p.ensure(25).unwrap();
        for m in 0..25usize {
            let l = (3 * m + 2) as u64;
            let sf = f_superfactorial(&f, l, 3).unwrap();
            let want = -log_factorial(l) - 2.0 * sf.logmag();
            assert_relative_eq!(p.h()[m], want, max_relative = 1e-12);
            assert_eq!(p.sf_sign()[m], sf.sign());
        }
    }

    #[test]
    fn identity_profile_is_inverse_factorial() {
        let mut p = CoefficientProfile::new(2, 1, &Nonlinearity::Identity).unwrap();
        p.ensure(100).unwrap();
        for m in 0..100 {
            assert_relative_eq!(p.h()[m], -log_factorial((2 * m + 1) as u64), max_relative = 1e-12);
        }
    }

    #[test]
    fn pole_terminates() {
        // f(2) has a pole for eta = 1, K = 1
        let mut p = CoefficientProfile::new(1, 0, &Nonlinearity::trapped_ion(1.0, 1)).unwrap();
        p.ensure(50).unwrap();
        assert_eq!(p.terminated_at(), Some(2));
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn zero_is_singular() {
        let f = Nonlinearity::Tabulated { table: vec![1.0, 2.0, 0.0, 1.0] };
        let mut p = CoefficientProfile::new(1, 0, &f).unwrap();
        assert_eq!(p.ensure(4), Err(Error::SingularNonlinearity { index: 2 }));
    }

    #[test]
    fn table_caps_length() {
        let f = Nonlinearity::Tabulated { table: vec![1.0; 10] };
        let mut p = CoefficientProfile::new(3, 1, &f).unwrap();
        // sites at Fock indices 1, 4, 7
        assert_eq!(p.max_len(), Some(3));
        assert!(p.ensure(3).is_ok());
        assert!(p.ensure(4).is_err());
    }
}
