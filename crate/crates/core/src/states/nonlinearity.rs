//! The deformation function `f(n)` and the superfactorial products built
//! from it.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{LaguerreSeq, SignedLogScalar};

/// The function `f(n̂)` deforming the annihilation operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `f ≡ 1`.
    Identity,
    /// The vibrational nonlinearity of a trapped ion driven on the `k`-th red
    /// sideband: `f(n+k) = n! L_n^k(η²) / ((n+k)! L_n^0(η²))`, and `f(l) = 1`
    /// for `l < k`.
    TrappedIon { eta: f64, k: u32 },
    /// User-supplied values `f(0), f(1), ...`.
    Tabulated { table: Vec<f64> },
    /// The single-quantum function whose superfactorial reproduces the
    /// `stride`-step superfactorial of `base`:
    /// `f(l) = SF_stride(l) / SF_stride(l-1)`.
    ///
    /// This is the nonlinearity carried by the branch states of the
    /// K-branch decomposition.
    Strided { base: Box<Nonlinearity>, stride: u32 },
}

impl Nonlinearity {
    pub fn trapped_ion(eta: f64, k: u32) -> Self {
        Self::TrappedIon { eta, k }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Identity => Ok(()),
            Self::TrappedIon { eta, k } => {
                if !eta.is_finite() || *eta < 0.0 {
                    return Err(Error::InvalidArgument(format!("eta must be finite and >= 0, got {eta}")));
                }
                if *k == 0 {
                    return Err(Error::InvalidArgument("trapped-ion order must be >= 1".into()));
                }
                Ok(())
            }
            Self::Tabulated { table } => match table.iter().position(|v| !v.is_finite()) {
                Some(i) => Err(Error::InvalidArgument(format!("tabulated f({i}) is not finite"))),
                None => Ok(()),
            },
            Self::Strided { base, stride } => {
                if *stride == 0 {
                    return Err(Error::InvalidArgument("stride must be >= 1".into()));
                }
                base.validate()
            }
        }
    }

    /// The nonlinearity of the single-quantum branch states that a
    /// `k`-quantum state built on `self` decomposes into.
    pub fn induced(&self, k: u32) -> Self {
        match self {
            Self::Identity => Self::Identity,
            _ if k == 1 => self.clone(),
            _ => Self::Strided {
                base: Box::new(self.clone()),
                stride: k,
            },
        }
    }

    /// Number of leading values available, `None` when unbounded.
    pub fn table_len(&self) -> Option<usize> {
        match self {
            Self::Tabulated { table } => Some(table.len()),
            Self::Strided { base, .. } => base.table_len(),
            _ => None,
        }
    }

    pub fn seq(&self) -> FSeq {
        FSeq::new(self)
    }
}

/// `f(l)` as an exact quotient, so poles (`den = 0`) and zeros (`num = 0`)
/// survive until a caller decides what they mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FRatio {
    pub num: SignedLogScalar,
    pub den: SignedLogScalar,
}

impl FRatio {
    pub const ONE: Self = Self {
        num: SignedLogScalar::ONE,
        den: SignedLogScalar::ONE,
    };

    pub fn from_value(v: SignedLogScalar) -> Self {
        Self {
            num: v,
            den: SignedLogScalar::ONE,
        }
    }

    pub fn is_pole(self) -> bool {
        self.den.is_zero()
    }

    pub fn is_zero(self) -> bool {
        self.num.is_zero() && !self.den.is_zero()
    }

    pub fn sign(self) -> i8 {
        self.num.sign() * self.den.sign()
    }

    /// `ln|f|`; meaningless for poles and zeros.
    pub fn ln_abs(self) -> f64 {
        self.num.logmag() - self.den.logmag()
    }

    pub fn value(self, index: u64) -> Result<SignedLogScalar> {
        self.num.checked_div(self.den).map_err(|_| Error::Pole { index: index as usize })
    }
}

/// Streams `f(0), f(1), f(2), ...` in a single pass.
///
/// Laguerre-based kinds cost O(1) per step, so sweeping a lattice is linear
/// in its extent.
#[derive(Debug, Clone)]
pub struct FSeq {
    l: u64,
    inner: Inner,
}

#[derive(Debug, Clone)]
enum Inner {
    Identity,
    TrappedIon {
        k: u32,
        upper: LaguerreSeq,
        lower: LaguerreSeq,
    },
    Tabulated(Vec<f64>),
    Strided {
        base: Box<FSeq>,
        stride: usize,
        // SF(l-stride) .. SF(l-1), oldest first
        history: VecDeque<FRatio>,
    },
}

impl FSeq {
    pub fn new(f: &Nonlinearity) -> Self {
        let inner = match f {
            Nonlinearity::Identity => Inner::Identity,
            Nonlinearity::TrappedIon { eta, k } => Inner::TrappedIon {
                k: *k,
                upper: LaguerreSeq::new(*k, eta * eta),
                lower: LaguerreSeq::new(0, eta * eta),
            },
            Nonlinearity::Tabulated { table } => Inner::Tabulated(table.clone()),
            Nonlinearity::Strided { base, stride } => Inner::Strided {
                base: Box::new(FSeq::new(base)),
                stride: *stride as usize,
                history: VecDeque::new(),
            },
        };
        Self { l: 0, inner }
    }

    /// Index of the next value to be yielded.
    pub fn position(&self) -> u64 {
        self.l
    }

    /// Smallest `ln|L|` met so far by the Laguerre kernels, `+inf` if none.
    pub fn min_log_laguerre(&self) -> f64 {
        match &self.inner {
            Inner::TrappedIon { upper, lower, .. } => upper.min_log_abs().min(lower.min_log_abs()),
            Inner::Strided { base, .. } => base.min_log_laguerre(),
            _ => f64::INFINITY,
        }
    }

    fn step(&mut self) -> Result<FRatio> {
        let l = self.l;
        match &mut self.inner {
            Inner::Identity => Ok(FRatio::ONE),
            Inner::TrappedIon { k, upper, lower } => {
                if l < u64::from(*k) {
                    return Ok(FRatio::ONE);
                }
                let n = l - u64::from(*k);
                let lk = upper.next().expect("infinite sequence");
                let l0 = lower.next().expect("infinite sequence");
                // n!/(n+k)! summed directly: ln-factorial differences lose digits
                let ln_rising: f64 = (1..=u64::from(*k)).map(|i| ((n + i) as f64).ln()).sum();
                Ok(FRatio {
                    num: SignedLogScalar::new(lk.sign(), lk.logmag() - ln_rising),
                    den: l0,
                })
            }
            Inner::Tabulated(table) => table
                .get(l as usize)
                .map(|&v| FRatio::from_value(SignedLogScalar::from_f64(v)))
                .ok_or(Error::TableIndexOutOfRange {
                    index: l as usize,
                    len: table.len(),
                }),
            Inner::Strided {
                base,
                stride,
                history,
            } => {
                let f = base.next().expect("infinite sequence")?;
                let sf = if (l as usize) < *stride {
                    FRatio::ONE
                } else {
                    let back = history[0];
                    FRatio {
                        num: f.num * back.num,
                        den: f.den * back.den,
                    }
                };
                let prev = history.back().copied();
                history.push_back(sf);
                if history.len() > *stride {
                    history.pop_front();
                }
                Ok(match prev {
                    None => FRatio::ONE,
                    Some(p) => FRatio {
                        num: sf.num * p.den,
                        den: sf.den * p.num,
                    },
                })
            }
        }
    }
}

impl Iterator for FSeq {
    type Item = Result<FRatio>;

    fn next(&mut self) -> Option<Self::Item> {
        let out = self.step();
        self.l += 1;
        Some(out)
    }
}

/// `f(l)`.
pub fn f_value(f: &Nonlinearity, l: u64) -> Result<SignedLogScalar> {
    if let Nonlinearity::Tabulated { table } = f {
        return table
            .get(l as usize)
            .map(|&v| SignedLogScalar::from_f64(v))
            .ok_or(Error::TableIndexOutOfRange {
                index: l as usize,
                len: table.len(),
            });
    }
    let r = f.seq().nth(l as usize).expect("infinite sequence")?;
    r.value(l)
}

/// `f(l) f(l-k) f(l-2k) ...` over the factors with index `>= k`; equal to
/// one for `l < k`.
pub fn f_superfactorial(f: &Nonlinearity, l: u64, k: u32) -> Result<SignedLogScalar> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let k = u64::from(k);
    let mut acc = SignedLogScalar::ONE;
    for (i, r) in f.seq().enumerate().take(l as usize + 1) {
        let i = i as u64;
        if i >= k && i % k == l % k {
            acc = acc * r?.value(i)?;
        }
    }
    Ok(acc)
}
