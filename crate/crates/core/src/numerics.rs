//! Overflow-proof scalar arithmetic and the special-function kernels shared by
//! every other module.
//!
//! Factorials of the Fock index and products of the nonlinearity overflow an
//! `f64` long before the series they feed have converged, so magnitudes are
//! carried as natural logarithms with an explicit sign.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Mul, Neg};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest natural log that still converts to a finite `f64`.
pub const LN_F64_MAX: f64 = 709.782_712_893_384;

/// A real number stored as `sign * exp(logmag)`.
///
/// `sign == 0` is the exact zero; its `logmag` is `-inf`. Products and
/// quotients are exact in sign and only add or subtract log-magnitudes, so no
/// finite chain of multiplications can overflow.
#[derive(Clone, Copy, PartialEq)]
pub struct SignedLogScalar {
    sign: i8,
    logmag: f64,
}

impl SignedLogScalar {
    pub const ZERO: Self = Self {
        sign: 0,
        logmag: f64::NEG_INFINITY,
    };
    pub const ONE: Self = Self {
        sign: 1,
        logmag: 0.0,
    };

    /// Builds a value from a sign and a log-magnitude. Any sign other than
    /// `-1`, `0`, `1` is reduced to its signum; a `-inf` log-magnitude is zero.
    pub fn new(sign: i8, logmag: f64) -> Self {
        if sign == 0 || logmag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                sign: sign.signum(),
                logmag,
            }
        }
    }

    /// `exp(logmag)`, always positive.
    pub fn from_ln(logmag: f64) -> Self {
        Self::new(1, logmag)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn logmag(self) -> f64 {
        self.logmag
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        Self::new(self.sign.abs(), self.logmag)
    }

    /// Converts to an `f64`, failing instead of returning infinity.
    /// Magnitudes below the subnormal range round to zero.
    pub fn to_f64(self) -> Result<f64> {
        if self.sign == 0 {
            return Ok(0.0);
        }
        if self.logmag > LN_F64_MAX {
            return Err(Error::Overflow {
                logmag: self.logmag,
            });
        }
        let v = self.logmag.exp();
        if !v.is_finite() {
            return Err(Error::Overflow {
                logmag: self.logmag,
            });
        }
        Ok(f64::from(self.sign) * v)
    }

    pub fn recip(self) -> Result<Self> {
        if self.sign == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::new(self.sign, -self.logmag))
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self> {
        Ok(self * rhs.recip()?)
    }

    /// Integer power. `0^0` is one.
    pub fn powi(self, p: i64) -> Self {
        if p == 0 {
            return Self::ONE;
        }
        if self.sign == 0 {
            return if p > 0 { Self::ZERO } else { Self::new(1, f64::INFINITY) };
        }
        let sign = if self.sign < 0 && p % 2 != 0 { -1 } else { 1 };
        Self::new(sign, self.logmag * p as f64)
    }

    pub fn sqrt(self) -> Result<Self> {
        match self.sign {
            0 => Ok(Self::ZERO),
            s if s < 0 => Err(Error::NegativeSqrt),
            _ => Ok(Self::new(1, 0.5 * self.logmag)),
        }
    }

    /// Sum of two signed values, evaluated without leaving the log domain.
    pub fn add(self, rhs: Self) -> Self {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = if self.logmag >= rhs.logmag {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let d = (small.logmag - big.logmag).exp();
        if big.sign == small.sign {
            Self::new(big.sign, big.logmag + d.ln_1p())
        } else if d == 1.0 {
            Self::ZERO
        } else {
            Self::new(big.sign, big.logmag + (-d).ln_1p())
        }
    }

    pub fn sub(self, rhs: Self) -> Self {
        self.add(-rhs)
    }
}

impl Default for SignedLogScalar {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Debug for SignedLogScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => write!(f, "{}exp({})", if s < 0 { "-" } else { "+" }, self.logmag),
        }
    }
}

impl Mul for SignedLogScalar {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        Self::new(self.sign * rhs.sign, self.logmag + rhs.logmag)
    }
}

impl Neg for SignedLogScalar {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-self.sign, self.logmag)
    }
}

impl PartialOrd for SignedLogScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.logmag.partial_cmp(&other.logmag),
                _ => other.logmag.partial_cmp(&self.logmag),
            },
            o => Some(o),
        }
    }
}

const TABLE_LEN: usize = 256;

fn log_factorial_table() -> &'static [f64; TABLE_LEN] {
    static TABLE: OnceLock<[f64; TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; TABLE_LEN];
        for n in 2..TABLE_LEN {
            t[n] = t[n - 1] + (n as f64).ln();
        }
        t
    })
}

/// `ln(n!)`.
///
/// Exact summation below 256, Stirling's series with four correction terms
/// above (truncation error under 1e-25 there).
pub fn log_factorial(n: u64) -> f64 {
    if (n as usize) < TABLE_LEN {
        return log_factorial_table()[n as usize];
    }
    let z = n as f64 + 1.0;
    let z2 = z * z;
    let series = (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z;
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// Streams the generalized Laguerre polynomials `L_0^m(x), L_1^m(x), ...`
/// through the three-term recurrence in the degree.
///
/// The running pair is rescaled by powers of two whenever it drifts far from
/// unity, so the scaled arithmetic is bit-identical to the unscaled one and
/// never overflows.
#[derive(Debug, Clone)]
pub struct LaguerreSeq {
    order: f64,
    x: f64,
    n: u64,
    prev: f64,
    cur: f64,
    log_scale: f64,
    min_log_abs: f64,
}

impl LaguerreSeq {
    pub fn new(order: u32, x: f64) -> Self {
        Self {
            order: f64::from(order),
            x,
            n: 0,
            prev: 0.0,
            cur: 1.0,
            log_scale: 0.0,
            min_log_abs: f64::INFINITY,
        }
    }

    /// Smallest `ln|L_n|` yielded so far (`-inf` after an exact zero).
    pub fn min_log_abs(&self) -> f64 {
        self.min_log_abs
    }

    fn rescale(&mut self) {
        let big = self.cur.abs().max(self.prev.abs());
        if big == 0.0 || (1e-150..=1e150).contains(&big) {
            return;
        }
        let e = big.log2().floor() as i32;
        let factor = 2f64.powi(-e);
        self.cur *= factor;
        self.prev *= factor;
        self.log_scale += f64::from(e) * std::f64::consts::LN_2;
    }
}

impl Iterator for LaguerreSeq {
    type Item = SignedLogScalar;

    fn next(&mut self) -> Option<SignedLogScalar> {
        let value = SignedLogScalar::from_f64(self.cur);
        let value = SignedLogScalar::new(value.sign(), value.logmag() + self.log_scale);
        self.min_log_abs = self.min_log_abs.min(value.logmag());

        let n = self.n as f64;
        let next = ((2.0 * n + 1.0 + self.order - self.x) * self.cur - (n + self.order) * self.prev)
            / (n + 1.0);
        self.prev = self.cur;
        self.cur = next;
        self.n += 1;
        self.rescale();
        Some(value)
    }
}

/// `L_n^m(x)` as a signed-log value.
pub fn laguerre(n: u64, m: u32, x: f64) -> SignedLogScalar {
    LaguerreSeq::new(m, x)
        .nth(n as usize)
        .expect("Laguerre sequence is infinite")
}
