//! Existence of a KNCS: whether its normalization series converges, where the
//! critical eigenvalue magnitude lies, and phase diagrams over `η`.
//!
//! The series terms `|g(m,0)|²` of the trapped-ion states oscillate wildly
//! because the Laguerre ratio in `f` changes sign near every zero of
//! `L_n^0(η²)`. On top of an exponential trend the log-terms carry a power
//! law, a `√m` burst envelope and correlated noise. Once oscillation has set
//! in, the classifier fits all four over `[n/8, n]` at doubling scales `n`
//! and reads the sign of the exponential rate, which must clear zero with
//! 3σ confidence at two consecutive scales. Series without sign changes fall
//! back to a monotone test on the trailing half.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::states::{CoefficientProfile, Nonlinearity, StateSpec};

/// Tuning for [`classify`] and the critical-value search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExistenceConfig {
    /// Minimum run of lattice sites a verdict is based on. The first scale
    /// examined is `8 * window`.
    pub window: usize,
    /// Last lattice site the classifier may examine.
    pub n_max: usize,
    /// Upper limit for the bracket search of [`critical_xi`].
    pub ceiling: f64,
}

impl Default for ExistenceConfig {
    fn default() -> Self {
        Self {
            window: 16,
            n_max: 1 << 20,
            ceiling: 1e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceVerdict {
    pub exists: bool,
    /// Lattice sites inspected before the verdict was reached.
    pub terms_examined: usize,
    /// `|g(N,0)|² / |g(N-1,0)|²` at the last site inspected.
    pub last_ratio: f64,
    pub diagnostic: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Local {
    Exists,
    Diverges,
    Undecided,
}

/// Verdict at one scale. `rate` is the fitted growth rate per site; it is
/// `None` for the monotone test.
struct Scale {
    verdict: Local,
    rate: Option<f64>,
    diagnostic: String,
}

/// Sign changes of `f` over `[n/8, n]` needed before a fit is trusted.
const MIN_SIGN_CHANGES: usize = 12;
/// One-sided tail probability of the normal distribution beyond 3σ. The
/// fitted rate must clear zero by the Student-t quantile of this level.
const TAIL: f64 = 1.35e-3;
/// Consecutive agreeing scales needed by the fitted test.
const FIT_RUN: usize = 2;

/// Classifies `spec` by inspecting at most `n_max` lattice sites.
pub fn classify(spec: &StateSpec, n_max: usize, window: usize) -> Result<ExistenceVerdict> {
    let mut profile = CoefficientProfile::new(spec.k(), spec.j(), spec.f())?;
    classify_profile(&mut profile, spec.xi().norm(), n_max, window)
}

/// [`classify`] on a precomputed profile, which is grown as needed.
pub fn classify_profile(
    profile: &mut CoefficientProfile,
    abs_xi: f64,
    n_max: usize,
    window: usize,
) -> Result<ExistenceVerdict> {
    if window == 0 || n_max < 10 * window {
        return Err(Error::InvalidArgument(format!(
            "need n_max >= 10 * window, got n_max={n_max}, window={window}"
        )));
    }
    if !abs_xi.is_finite() || abs_xi < 0.0 {
        return Err(Error::InvalidArgument(format!("|xi| must be finite and >= 0, got {abs_xi}")));
    }
    if abs_xi == 0.0 {
        return Ok(ExistenceVerdict {
            exists: true,
            terms_examined: 1,
            last_ratio: 0.0,
            diagnostic: "xi = 0: a single Fock state".into(),
        });
    }
    let n_max = match profile.max_len() {
        Some(cap) => n_max.min(cap - 1),
        None => n_max,
    };
    let ln_xi = abs_xi.ln();

    let mut scales = Vec::new();
    let mut s = 8 * window;
    while s < n_max {
        scales.push(s);
        s *= 2;
    }
    scales.push(n_max);

    let mut history: Vec<Scale> = Vec::new();
    for &n in &scales {
        profile.ensure(n + 1)?;
        if let Some(t) = profile.terminated_at() {
            return Ok(ExistenceVerdict {
                exists: true,
                terms_examined: t,
                last_ratio: 0.0,
                diagnostic: format!("series terminates at lattice site {t} (pole of f)"),
            });
        }
        history.push(scale_verdict(profile, ln_xi, n));
        if let Some(v) = settled(&history) {
            let last = history.pop().expect("just pushed");
            let last_ratio = (profile.log_term(n, ln_xi) - profile.log_term(n - 1, ln_xi)).exp();
            return Ok(ExistenceVerdict {
                exists: v == Local::Exists,
                terms_examined: n + 1,
                last_ratio,
                diagnostic: last.diagnostic,
            });
        }
    }
    Err(Error::Indeterminate {
        terms_examined: n_max + 1,
        diagnostic: format!("no stable decay or growth pattern at |xi| = {abs_xi}"),
    })
}

/// The verdict once the latest scales agree: two for the monotone test,
/// [`FIT_RUN`] fitted rates of one sign and spread below their mean otherwise.
fn settled(history: &[Scale]) -> Option<Local> {
    let last = history.last()?;
    if last.verdict == Local::Undecided {
        return None;
    }
    if last.rate.is_none() {
        let prev = history.len().checked_sub(2).map(|i| &history[i])?;
        return (prev.verdict == last.verdict).then_some(last.verdict);
    }
    let run = history.get(history.len().checked_sub(FIT_RUN)?..)?;
    let mut rates = Vec::with_capacity(FIT_RUN);
    for s in run {
        if s.verdict != last.verdict {
            return None;
        }
        rates.push(s.rate?);
    }
    let mean = rates.iter().sum::<f64>() / FIT_RUN as f64;
    let spread = rates.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - rates.iter().copied().fold(f64::INFINITY, f64::min);
    (spread < mean.abs()).then_some(last.verdict)
}

fn scale_verdict(p: &CoefficientProfile, ln_xi: f64, n: usize) -> Scale {
    let undecided = Scale {
        verdict: Local::Undecided,
        rate: None,
        diagnostic: String::new(),
    };
    let lo = n / 8;
    let sign_changes = p.f_sign()[lo..=n].windows(2).filter(|w| w[0] != w[1]).count();
    if sign_changes == 0 {
        return monotone_verdict(p, ln_xi, n).unwrap_or(undecided);
    }
    if sign_changes < MIN_SIGN_CHANGES {
        return undecided;
    }
    let Some((rate, se, dof)) = growth_rate(p, ln_xi, lo, n) else {
        return undecided;
    };
    let Ok(t) = StudentsT::new(0.0, 1.0, dof as f64) else {
        return undecided;
    };
    let margin = t.inverse_cdf(1.0 - TAIL) * se;
    let verdict = if rate < -margin {
        Local::Exists
    } else if rate > margin {
        Local::Diverges
    } else {
        Local::Undecided
    };
    Scale {
        verdict,
        rate: Some(rate),
        diagnostic: format!("growth rate {rate:+.3e} ± {se:.1e} per site over sites {lo}..{n}"),
    }
}

/// Decay or growth of a non-oscillating series over `[n/2, n]`.
fn monotone_verdict(p: &CoefficientProfile, ln_xi: f64, n: usize) -> Option<Scale> {
    let half = n / 2;
    let r: Vec<f64> = (half..n).map(|m| p.log_term(m + 1, ln_xi) - p.log_term(m, ln_xi)).collect();
    let scale = |verdict, diagnostic| {
        Some(Scale {
            verdict,
            rate: None,
            diagnostic,
        })
    };
    if r.iter().all(|&x| x < 0.0) {
        return scale(Local::Exists, format!("monotone decay over sites {half}..{n}"));
    }
    let q = (r.len() / 4).max(1);
    let head = r[..q].iter().sum::<f64>() / q as f64;
    let tail = r[r.len() - q..].iter().sum::<f64>() / q as f64;
    if r.iter().all(|&x| x >= 0.0) && tail >= head - 1e-12 * (1.0 + head.abs()) {
        return scale(Local::Diverges, format!("non-decaying terms over sites {half}..{n}"));
    }
    None
}

/// Least-squares growth rate per site of the log-terms over `[lo, n]`, with
/// its standard error and the residual degrees of freedom.
///
/// Away from its sign changes `f` behaves like a ratio of Bessel functions of
/// a slowly advancing phase, which adds a sawtooth one oscillation period
/// wide to the log-terms. Sampling them just before every sign change of one
/// direction fixes the phase, so the increments between samples are the trend
/// plus nearly independent noise. The increments are regressed on the
/// increments of `t, ln t, √t` with `t = m/n`.
fn growth_rate(p: &CoefficientProfile, ln_xi: f64, lo: usize, n: usize) -> Option<(f64, f64, usize)> {
    let fs = &p.f_sign()[lo..=n];
    let first = fs.windows(2).position(|w| w[0] != w[1])?;
    let dir = fs[first + 1];
    let sites: Vec<usize> = fs
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1] && w[1] == dir)
        .map(|(i, _)| lo + i)
        .collect();
    let rows = sites.len().checked_sub(1)?;
    if rows < 5 {
        return None;
    }
    let nf = n as f64;
    let basis = |m: usize| {
        let t = m as f64 / nf;
        [t, t.ln(), t.sqrt()]
    };
    let mut a = DMatrix::zeros(rows, 3);
    let mut y = DVector::zeros(rows);
    for (i, w) in sites.windows(2).enumerate() {
        let (b0, b1) = (basis(w[0]), basis(w[1]));
        for c in 0..3 {
            a[(i, c)] = b1[c] - b0[c];
        }
        y[i] = p.log_term(w[1], ln_xi) - p.log_term(w[0], ln_xi);
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let coef = r.solve_upper_triangular(&(qr.q().transpose() * &y))?;
    let resid = &y - &a * &coef;
    let s2 = resid.norm_squared() / (rows - 3) as f64;
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(3, 3))?;
    let var = r_inv.row(0).norm_squared() * s2;
    Some((coef[0] / nf, var.sqrt() / nf, rows - 3))
}

/// How far [`critical_xi`] may raise `n_max` when the bracket midpoint and
/// both quarter points are indeterminate.
const ESCALATION: usize = 16;

/// Critical `|ξ|` of the trapped-ion state `(K, j, η)`: the midpoint of a
/// bracket narrower than `tol`.
pub fn critical_xi(k: u32, j: u32, eta: f64, tol: f64) -> Result<f64> {
    critical_xi_with(k, j, eta, tol, &ExistenceConfig::default())
}

pub fn critical_xi_with(k: u32, j: u32, eta: f64, tol: f64, cfg: &ExistenceConfig) -> Result<f64> {
    check_tol(tol)?;
    search(k, j, eta, tol, cfg, |lo, hi| hi - lo <= tol)
}

/// [`critical_xi`] with a bracket narrower than `rel_tol` times its lower end.
pub fn critical_xi_relative(k: u32, j: u32, eta: f64, rel_tol: f64) -> Result<f64> {
    critical_xi_relative_with(k, j, eta, rel_tol, &ExistenceConfig::default())
}

pub fn critical_xi_relative_with(k: u32, j: u32, eta: f64, rel_tol: f64, cfg: &ExistenceConfig) -> Result<f64> {
    check_tol(rel_tol)?;
    search(k, j, eta, rel_tol, cfg, |lo, hi| hi - lo <= rel_tol * lo)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tol must be finite and > 0, got {tol}")))
    }
}

/// Doubles from `start` until a diverging `|ξ|` is found, then bisects until
/// `narrow(lo, hi)`.
fn search(
    k: u32,
    j: u32,
    eta: f64,
    start: f64,
    cfg: &ExistenceConfig,
    narrow: impl Fn(f64, f64) -> bool,
) -> Result<f64> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!("eta must be > 0, got {eta}")));
    }
    let mut profile = CoefficientProfile::new(k, j, &Nonlinearity::trapped_ion(eta, k))?;
    let mut n_max = cfg.n_max;
    let mut probe_at = |x: f64, n_max: usize| -> Result<Option<bool>> {
        match classify_profile(&mut profile, x, n_max, cfg.window) {
            Ok(v) => Ok(Some(v.exists)),
            Err(Error::Indeterminate { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };

    let mut lo = 0.0;
    let mut hi = start;
    loop {
        match probe_at(hi, n_max)? {
            Some(false) => break,
            Some(true) => lo = hi,
            None => {}
        }
        hi *= 2.0;
        if hi > cfg.ceiling {
            return Err(Error::BracketFailure { ceiling: cfg.ceiling });
        }
    }

    while !narrow(lo, hi) {
        let mid = 0.5 * (lo + hi);
        match probe_at(mid, n_max)? {
            Some(true) => lo = mid,
            Some(false) => hi = mid,
            None => {
                let left = 0.5 * (lo + mid);
                let right = 0.5 * (mid + hi);
                match (probe_at(left, n_max)?, probe_at(right, n_max)?) {
                    (Some(false), _) => hi = left,
                    (_, Some(true)) => lo = right,
                    (Some(true), Some(false)) => {
                        lo = left;
                        hi = right;
                    }
                    (Some(true), None) => lo = left,
                    (None, Some(false)) => hi = right,
                    (None, None) if n_max < cfg.n_max * ESCALATION => n_max *= 4,
                    (None, None) => return Err(Error::Unresolved { lo, hi }),
                }
            }
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePoint {
    pub eta: f64,
    /// `None` where the search failed; `error` says why.
    pub xi_critical: Option<f64>,
    pub error: Option<String>,
}

/// Critical `|ξ|` against `η` for the `j = 0` trapped-ion states of order
/// `K`. `tolerance` is relative to each critical value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCurve {
    pub k: u32,
    pub points: Vec<PhasePoint>,
    pub tolerance: f64,
}

pub fn phase_diagram(k: u32, eta_grid: &[f64], tol: f64) -> Result<PhaseCurve> {
    phase_diagram_with(k, eta_grid, tol, &ExistenceConfig::default())
}

pub fn phase_diagram_with(k: u32, eta_grid: &[f64], tol: f64, cfg: &ExistenceConfig) -> Result<PhaseCurve> {
    check_tol(tol)?;
    if let Some(bad) = eta_grid.iter().find(|&&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidArgument(format!("eta grid values must be > 0, got {bad}")));
    }
    let points = eta_grid
        .par_iter()
        .map(|&eta| match critical_xi_relative_with(k, 0, eta, tol, cfg) {
            Ok(x) => PhasePoint {
                eta,
                xi_critical: Some(x),
                error: None,
            },
            Err(e) => PhasePoint {
                eta,
                xi_critical: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    Ok(PhaseCurve {
        k,
        points,
        tolerance: tol,
    })
}
