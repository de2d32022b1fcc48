//! Photon statistics of a KNCS.
//!
//! Moments are evaluated from the log-domain lattice terms of a
//! [`StateSeries`]. The `direct_*` functions recompute the same quantities
//! from the complex amplitudes of a [`FockVector`] and serve as an
//! independent cross-check.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::existence::ExistenceConfig;
use crate::numerics::log_factorial;
use crate::states::{CoefficientProfile, FockVector, Nonlinearity, StateSeries, StateSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatisticsReport {
    pub mean_n: f64,
    pub mean_n2: f64,
    /// `⟨n̂²⟩/⟨n̂⟩ − ⟨n̂⟩`; below one for sub-Poissonian light.
    pub mandel: f64,
    /// `⟨n̂⟩ + Re⟨a²⟩ − 2 Re²⟨a⟩`; negative when `x = a + a†` is squeezed.
    pub squeeze_s: f64,
    /// Variance of `x = a + a†`, equal to `1 + 2S`.
    pub variance_x: f64,
}

impl StatisticsReport {
    fn from_moments(mean_n: f64, mean_n2: f64, a1: Complex64, a2: Complex64) -> Result<Self> {
        if mean_n == 0.0 {
            return Err(Error::ZeroMeanOccupation);
        }
        let squeeze_s = mean_n + a2.re - 2.0 * a1.re * a1.re;
        Ok(Self {
            mean_n,
            mean_n2,
            mandel: mean_n2 / mean_n - mean_n,
            squeeze_s,
            variance_x: 1.0 + 2.0 * squeeze_s,
        })
    }
}

/// `(n, P(n))` on the occupied lattice `n = mK + j`, in increasing `n`.
pub fn number_distribution(spec: &StateSpec, tol: f64) -> Result<Vec<(usize, f64)>> {
    Ok(series_distribution(&StateSeries::new(spec, tol)?))
}

pub fn series_distribution(s: &StateSeries) -> Vec<(usize, f64)> {
    s.log_probs()
        .iter()
        .enumerate()
        .map(|(m, &t)| (s.spec().fock_index(m), t.exp()))
        .collect()
}

/// `⟨a^l⟩`. Exactly zero unless `K` divides `l`.
pub fn moment_a(spec: &StateSpec, l: u32, tol: f64) -> Result<Complex64> {
    Ok(series_moment_a(&StateSeries::new(spec, tol)?, l))
}

/// `⟨n̂^l⟩`.
pub fn moment_n(spec: &StateSpec, l: u32, tol: f64) -> Result<f64> {
    Ok(series_moment_n(&StateSeries::new(spec, tol)?, l))
}

pub fn mandel(spec: &StateSpec, tol: f64) -> Result<f64> {
    Ok(statistics(spec, tol)?.mandel)
}

pub fn squeezing(spec: &StateSpec, tol: f64) -> Result<f64> {
    let s = StateSeries::new(spec, tol)?;
    let mean_n = series_moment_n(&s, 1);
    let a1 = series_moment_a(&s, 1);
    let a2 = series_moment_a(&s, 2);
    Ok(mean_n + a2.re - 2.0 * a1.re * a1.re)
}

pub fn statistics(spec: &StateSpec, tol: f64) -> Result<StatisticsReport> {
    series_statistics(&StateSeries::new(spec, tol)?)
}

pub fn series_statistics(s: &StateSeries) -> Result<StatisticsReport> {
    StatisticsReport::from_moments(
        series_moment_n(s, 1),
        series_moment_n(s, 2),
        series_moment_a(s, 1),
        series_moment_a(s, 2),
    )
}

/// Statistics of `base` with `|ξ|` replaced by each entry of `mags`, keeping
/// `arg ξ`. One coefficient profile is shared by the whole sweep.
pub fn statistics_sweep(base: &StateSpec, mags: &[f64], tol: f64) -> Result<Vec<Result<StatisticsReport>>> {
    let mut profile = CoefficientProfile::new(base.k(), base.j(), base.f())?;
    let cfg = ExistenceConfig::default();
    let arg = base.xi_arg();
    mags.iter()
        .map(|&r| {
            let spec = base.with_xi(Complex64::from_polar(r, arg))?;
            Ok(StateSeries::with_profile(&spec, &mut profile, tol, &cfg).and_then(|s| series_statistics(&s)))
        })
        .collect()
}

pub fn series_moment_n(s: &StateSeries, l: u32) -> f64 {
    s.log_probs()
        .iter()
        .enumerate()
        .map(|(m, &t)| (s.spec().fock_index(m) as f64).powi(l as i32) * t.exp())
        .sum()
}

/// `Σ_m √((mK+j+l)!/(mK+j)!) g*(m,0) g(m,l)` over the normalized terms.
pub fn series_moment_a(s: &StateSeries, l: u32) -> Complex64 {
    let spec = s.spec();
    if l % spec.k() != 0 {
        return Complex64::new(0.0, 0.0);
    }
    let p = (l / spec.k()) as usize;
    let t = s.log_probs();
    let sg = s.signs();
    if p >= t.len() {
        return Complex64::new(0.0, 0.0);
    }
    let sum: f64 = (0..t.len() - p)
        .map(|m| {
            let lo = spec.fock_index(m);
            let ln_rising: f64 = (lo + 1..=lo + l as usize).map(|i| (i as f64).ln()).sum();
            let sign = f64::from(sg[m] * sg[m + p]);
            sign * (0.5 * (ln_rising + t[m] + t[m + p])).exp()
        })
        .sum();
    Complex64::from_polar(sum, p as f64 * spec.xi_arg())
}

/// `⟨a^l⟩` summed over the amplitudes of `v`.
pub fn direct_moment_a(v: &FockVector, l: u32) -> Complex64 {
    let l = l as usize;
    let c = &v.amplitudes;
    if l >= c.len() {
        return Complex64::new(0.0, 0.0);
    }
    (0..c.len() - l)
        .map(|n| {
            let w = (0.5 * (log_factorial((n + l) as u64) - log_factorial(n as u64))).exp();
            c[n].conj() * c[n + l] * w
        })
        .sum()
}

pub fn direct_moment_n(v: &FockVector, l: u32) -> f64 {
    v.amplitudes
        .iter()
        .enumerate()
        .map(|(n, c)| (n as f64).powi(l as i32) * c.norm_sqr())
        .sum()
}

pub fn direct_statistics(v: &FockVector) -> Result<StatisticsReport> {
    StatisticsReport::from_moments(
        direct_moment_n(v, 1),
        direct_moment_n(v, 2),
        direct_moment_a(v, 1),
        direct_moment_a(v, 2),
    )
}

/// The K components `|ξ; Kj, f⟩` weighted by the number-parity content of an
/// initial coherent state `|α⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedSpec {
    pub k: u32,
    pub alpha_mag: f64,
    pub xi: Complex64,
    pub f: Nonlinearity,
}

impl MixedSpec {
    pub fn component(&self, j: u32) -> Result<StateSpec> {
        StateSpec::new(self.k, j, self.xi, self.f.clone())
    }
}

/// `β_Kj = e^{−|α|²/2} √(Σ_m |α|^{2(mK+j)} / (mK+j)!)` for `j = 0..K`.
pub fn mixed_weights(mix: &MixedSpec) -> Result<Vec<f64>> {
    let a = mix.alpha_mag;
    if !a.is_finite() || a < 0.0 {
        return Err(Error::InvalidArgument(format!("|alpha| must be finite and >= 0, got {a}")));
    }
    if mix.k == 0 {
        return Err(Error::InvalidArgument("K must be >= 1".into()));
    }
    let k = mix.k as usize;
    if a == 0.0 {
        let mut b = vec![0.0; k];
        b[0] = 1.0;
        return Ok(b);
    }
    // Poisson(|α|²) mass beyond this point is far below 1e-17
    let n_end = (a * a + 12.0 * a + 60.0).ceil() as usize;
    let ln_a2 = 2.0 * a.ln();
    let mut by_class = vec![Vec::new(); k];
    for n in 0..=n_end {
        by_class[n % k].push(n as f64 * ln_a2 - log_factorial(n as u64) - a * a);
    }
    Ok(by_class
        .iter()
        .map(|terms| {
            let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = top + terms.iter().map(|&t| (t - top).exp()).sum::<f64>().ln();
            (0.5 * lse).exp()
        })
        .collect())
}

/// `P(n) = (Σ_j β_Kj √P_Kj(n))²`, which reduces to
/// `β²_{K,n mod K} P_{K,n mod K}(n)` because the component supports are
/// disjoint.
pub fn mixed_distribution(mix: &MixedSpec, tol: f64) -> Result<Vec<(usize, f64)>> {
    let beta = mixed_weights(mix)?;
    combine(mix, tol, |j, p| beta[j as usize] * beta[j as usize] * p)
}

/// [`mixed_distribution`] with all weights equal to `1/√K`.
pub fn mixed_distribution_equal(mix: &MixedSpec, tol: f64) -> Result<Vec<(usize, f64)>> {
    let k = f64::from(mix.k);
    combine(mix, tol, |_, p| p / k)
}

fn combine(mix: &MixedSpec, tol: f64, weigh: impl Fn(u32, f64) -> f64) -> Result<Vec<(usize, f64)>> {
    let mut rows = Vec::new();
    for j in 0..mix.k {
        rows.extend(number_distribution(&mix.component(j)?, tol)?.into_iter().map(|(n, p)| (n, weigh(j, p))));
    }
    rows.sort_by_key(|&(n, _)| n);
    Ok(rows)
}
