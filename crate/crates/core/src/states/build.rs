use num_complex::Complex64;
use serde::Serialize;

use super::{f_superfactorial, CoefficientProfile, StateSpec};
use crate::error::{Error, Result};
use crate::existence::{classify_profile, ExistenceConfig};
use crate::numerics::{log_factorial, SignedLogScalar};

/// A complex number `magnitude * exp(i phase)` whose real factor lives in the
/// log domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub magnitude: SignedLogScalar,
    pub phase: f64,
}

impl LogComplex {
    pub fn to_complex(self) -> Result<Complex64> {
        Ok(Complex64::from_polar(self.magnitude.to_f64()?, self.phase))
    }
}

/// Truncated Fock-space amplitudes `c_0 .. c_N` of a normalized state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FockVector {
    pub amplitudes: Vec<Complex64>,
    /// Index of the last stored amplitude.
    pub cutoff: usize,
    /// Bound on the probability mass beyond `cutoff`.
    pub tail_bound: f64,
    /// Smallest `ln|L|` met while evaluating `f`; `+inf` when `f` has no
    /// Laguerre factors.
    pub min_log_laguerre: f64,
    /// Series terms summed to normalize the state.
    pub terms_summed: usize,
}

impl FockVector {
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `⟨self|other⟩` over the common truncated basis.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }
}

/// Result of summing the normalization series on one lattice.
#[derive(Debug, Clone)]
pub(crate) struct Scan {
    /// `ln|g(m,0)|²` for the sites summed.
    pub log_terms: Vec<f64>,
    pub log_sum: f64,
    /// Last lattice site kept; its normalized term is at most `tol²`.
    pub cutoff: usize,
    pub tail_bound: f64,
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Sums the series at `|ξ| = exp(ln_xi)` from `start` sites onwards until
/// every later normalized term stays below `tol²` and the estimated mass
/// past the scan is below `tol`.
pub(crate) fn scan(
    profile: &mut CoefficientProfile,
    ln_xi: f64,
    start: usize,
    tol: f64,
    cfg: &ExistenceConfig,
) -> Result<Scan> {
    if ln_xi == f64::NEG_INFINITY {
        let h0 = profile.h()[0];
        return Ok(Scan {
            log_terms: vec![h0],
            log_sum: h0,
            cutoff: 0,
            tail_bound: 0.0,
        });
    }
    let limit = match profile.max_len() {
        Some(cap) => cap.min(cfg.n_max + 1),
        None => cfg.n_max + 1,
    };
    let threshold = 2.0 * tol.ln();
    let w = cfg.window.max(2);
    let mut len = start.max(4 * w).min(limit);
    loop {
        profile.ensure(len)?;
        let avail = profile.len().min(len);
        let terminated = profile.terminated_at().is_some_and(|t| t <= len);
        let log_terms: Vec<f64> = (0..avail).map(|m| profile.log_term(m, ln_xi)).collect();
        let log_sum = log_sum_exp(&log_terms);
        let last_big = log_terms.iter().rposition(|&t| t - log_sum > threshold).unwrap_or(0);

        let cutoff = if terminated {
            Some(avail - 1)
        } else if last_big + 1 < avail {
            Some(last_big + 1)
        } else {
            None
        };
        if let Some(cutoff) = cutoff {
            let in_scan: f64 = log_terms[cutoff + 1..].iter().map(|&t| (t - log_sum).exp()).sum();
            let beyond = if terminated {
                0.0
            } else {
                beyond_scan(&log_terms, log_sum, w)
            };
            let tail_bound = in_scan + beyond;
            if tail_bound <= tol {
                return Ok(Scan {
                    log_terms,
                    log_sum,
                    cutoff,
                    tail_bound,
                });
            }
        }
        if len >= limit {
            return Err(Error::TruncationFailure { terms: len });
        }
        len = (2 * len).min(limit);
    }
}

/// Mass estimate past the end of a scan, from either a geometric bound on
/// the last `w` ratios or the decay of the oscillation envelope.
fn beyond_scan(log_terms: &[f64], log_sum: f64, w: usize) -> f64 {
    let n = log_terms.len();
    if n < w + 2 {
        return f64::INFINITY;
    }
    let last = log_terms[n - 1] - log_sum;
    let rmax = log_terms[n - 1 - w..]
        .windows(2)
        .map(|p| p[1] - p[0])
        .fold(f64::NEG_INFINITY, f64::max);
    if rmax < 0.0 {
        let r = rmax.exp();
        return last.exp() * r / (1.0 - r);
    }
    let half = n / 2;
    let q = (n - half) / 4;
    if q == 0 {
        return f64::INFINITY;
    }
    let block_max = |i: usize| {
        log_terms[half + i * q..half + (i + 1) * q]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (b3, b4) = (block_max(2), block_max(3));
    if b4 >= b3 {
        return f64::INFINITY;
    }
    let ratio = (b4 - b3).exp();
    q as f64 * (b4 - log_sum).exp() * ratio / (1.0 - ratio)
}

/// A normalized KNCS held as log-domain lattice terms.
///
/// This is the shared source for the Fock vector and for every observable,
/// so moments never lose range to `f64` amplitudes.
#[derive(Debug, Clone)]
pub struct StateSeries {
    spec: StateSpec,
    /// Normalized `ln|c_{mK+j}|²` for `m = 0..=cutoff`.
    log_probs: Vec<f64>,
    signs: Vec<i8>,
    tail_bound: f64,
    min_log_laguerre: f64,
    terms_summed: usize,
}

impl StateSeries {
    pub fn new(spec: &StateSpec, tol: f64) -> Result<Self> {
        Self::new_with(spec, tol, &ExistenceConfig::default())
    }

    pub fn new_with(spec: &StateSpec, tol: f64, cfg: &ExistenceConfig) -> Result<Self> {
        let mut profile = CoefficientProfile::new(spec.k(), spec.j(), spec.f())?;
        Self::with_profile(spec, &mut profile, tol, cfg)
    }

    /// Builds on a profile shared across calls with the same `(K, j, f)`.
    pub fn with_profile(
        spec: &StateSpec,
        profile: &mut CoefficientProfile,
        tol: f64,
        cfg: &ExistenceConfig,
    ) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidArgument(format!("tol must lie in (0, 1), got {tol}")));
        }
        if profile.k() != spec.k() || profile.j() != spec.j() || profile.f() != spec.f() {
            return Err(Error::DomainMismatch("profile was built for a different (K, j, f)".into()));
        }
        let abs_xi = spec.xi().norm();
        let verdict = classify_profile(profile, abs_xi, cfg.n_max, cfg.window)?;
        if !verdict.exists {
            return Err(Error::NonexistentState {
                diagnostic: verdict.diagnostic,
            });
        }
        let s = scan(profile, abs_xi.ln(), verdict.terms_examined, tol, cfg)?;
        let log_probs = s.log_terms[..=s.cutoff].iter().map(|&t| t - s.log_sum).collect();
        Ok(Self {
            spec: spec.clone(),
            log_probs,
            signs: profile.sf_sign()[..=s.cutoff].to_vec(),
            tail_bound: s.tail_bound,
            min_log_laguerre: profile.min_log_laguerre(),
            terms_summed: s.log_terms.len(),
        })
    }

    pub fn spec(&self) -> &StateSpec {
        &self.spec
    }

    /// Last lattice site kept.
    pub fn cutoff(&self) -> usize {
        self.log_probs.len() - 1
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Normalized `ln P(mK+j)`.
    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    /// Sign of the real factor of each lattice amplitude.
    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// `c_{mK+j}`.
    pub fn amplitude(&self, m: usize) -> Complex64 {
        let mag = (0.5 * self.log_probs[m]).exp() * f64::from(self.signs[m]);
        Complex64::from_polar(mag, m as f64 * self.spec.xi_arg())
    }

    pub fn fock_vector(&self) -> FockVector {
        let cutoff = self.spec.fock_index(self.cutoff());
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); cutoff + 1];
        for m in 0..self.log_probs.len() {
            amplitudes[self.spec.fock_index(m)] = self.amplitude(m);
        }
        FockVector {
            amplitudes,
            cutoff,
            tail_bound: self.tail_bound,
            min_log_laguerre: self.min_log_laguerre,
            terms_summed: self.terms_summed,
        }
    }
}

/// The normalized state `|ξ; Kj, f⟩`, truncated so the dropped mass is below
/// `tol` and the last stored amplitude is at most `tol` in modulus.
pub fn build_state(spec: &StateSpec, tol: f64) -> Result<FockVector> {
    Ok(StateSeries::new(spec, tol)?.fock_vector())
}

pub fn build_state_with(spec: &StateSpec, tol: f64, cfg: &ExistenceConfig) -> Result<FockVector> {
    Ok(StateSeries::new_with(spec, tol, cfg)?.fock_vector())
}

/// `g_Kj(n, l) = ξ^{n+l/K} / (√((nK+j+l)!) f(nK+j+l)(!)^K)` on the principal
/// branch of `ξ^{1/K}`.
pub fn g_coefficient(spec: &StateSpec, n: u64, l: u64) -> Result<LogComplex> {
    let k = u64::from(spec.k());
    let idx = n * k + u64::from(spec.j()) + l;
    let power = n as f64 + l as f64 / k as f64;
    let abs_xi = spec.xi().norm();
    let xi_pow = if power == 0.0 {
        SignedLogScalar::ONE
    } else if abs_xi == 0.0 {
        SignedLogScalar::ZERO
    } else {
        SignedLogScalar::from_ln(power * abs_xi.ln())
    };
    let sf = f_superfactorial(spec.f(), idx, spec.k())?;
    let root_fact = SignedLogScalar::from_ln(0.5 * log_factorial(idx));
    let magnitude = xi_pow.checked_div(root_fact * sf)?;
    Ok(LogComplex {
        magnitude,
        phase: power * spec.xi_arg(),
    })
}

/// `ln Σ_m z^m / ((mK+j)! |SF(mK+j)|²)` as `(ln|S|, arg S)`.
fn log_series(profile: &mut CoefficientProfile, z: Complex64, tol: f64, cfg: &ExistenceConfig) -> Result<(f64, f64)> {
    let z_abs = z.norm();
    let v = classify_profile(profile, z_abs.sqrt(), cfg.n_max, cfg.window)?;
    if !v.exists {
        return Err(Error::Divergent { z_abs });
    }
    let s = scan(profile, 0.5 * z_abs.ln(), v.terms_examined, tol, cfg)?;
    let theta = z.arg();
    let top = s.log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: Complex64 = s
        .log_terms
        .iter()
        .enumerate()
        .map(|(m, &t)| Complex64::from_polar((t - top).exp(), m as f64 * theta))
        .sum();
    Ok((top + sum.norm().ln(), sum.arg()))
}

/// `(ln|S|, arg S)` for the normalization series `S(z)` of `spec`'s lattice.
pub(crate) fn log_series_at(spec: &StateSpec, z: Complex64, tol: f64) -> Result<(f64, f64)> {
    let mut profile = CoefficientProfile::new(spec.k(), spec.j(), spec.f())?;
    log_series(&mut profile, z, tol, &ExistenceConfig::default())
}

/// `c_Kj(z)`: the normalization constant as a function of `z`, real and
/// positive for real positive `z`.
pub fn normalization(spec: &StateSpec, z: Complex64) -> Result<Complex64> {
    let (ln_abs, arg) = log_series_at(spec, z, 1e-16)?;
    Ok(Complex64::from_polar((-0.5 * ln_abs).exp(), -0.5 * arg))
}

/// `⟨a|b⟩`, evaluated from the closed form
/// `c(|ξ_a|²) c(|ξ_b|²) / c(ξ_a* ξ_b)²`.
pub fn overlap(a: &StateSpec, b: &StateSpec, tol: f64) -> Result<Complex64> {
    if a.k() != b.k() {
        return Err(Error::DomainMismatch(format!("K differs: {} vs {}", a.k(), b.k())));
    }
    if a.f() != b.f() {
        return Err(Error::DomainMismatch("nonlinearities differ".into()));
    }
    if a.j() != b.j() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let cfg = ExistenceConfig::default();
    let mut profile = CoefficientProfile::new(a.k(), a.j(), a.f())?;
    let (la, _) = log_series(&mut profile, Complex64::new(a.xi().norm_sqr(), 0.0), tol, &cfg)?;
    let (lb, _) = log_series(&mut profile, Complex64::new(b.xi().norm_sqr(), 0.0), tol, &cfg)?;
    let (lab, arg) = log_series(&mut profile, a.xi().conj() * b.xi(), tol, &cfg)?;
    Ok(Complex64::from_polar((lab - 0.5 * (la + lb)).exp(), arg))
}

/// `‖a^K f(n̂) v − ξ v‖` on the truncated basis of `v`.
///
/// Where `f(n+K)` has a pole the amplitude `c_{n+K}` vanishes and the product
/// is taken at its limit, which satisfies the eigenvalue equation exactly.
pub fn eigen_residual(v: &FockVector, spec: &StateSpec) -> Result<f64> {
    let k = spec.k() as usize;
    let xi = spec.xi();
    let len = v.amplitudes.len();
    let mut fseq = spec.f().seq();
    let mut fvals = Vec::with_capacity(len + k);
    for _ in 0..len + k {
        fvals.push(fseq.next().expect("infinite sequence")?);
    }
    let mut acc = 0.0;
    for n in 0..len {
        let upper = n + k;
        let lowered = if upper < len {
            let f = fvals[upper];
            if f.is_pole() {
                continue;
            }
            let ln_rising: f64 = (n + 1..=upper).map(|i| (i as f64).ln()).sum();
            let coef = SignedLogScalar::new(f.sign(), 0.5 * ln_rising + f.ln_abs());
            v.amplitudes[upper] * coef.to_f64()?
        } else {
            Complex64::new(0.0, 0.0)
        };
        acc += (lowered - xi * v.amplitudes[n]).norm_sqr();
    }
    Ok(acc.sqrt())
}
