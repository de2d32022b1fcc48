//! Dark states of a laser-driven trapped ion.
//!
//! The vibrational state `Σ C_l |l⟩` decouples from the electronic levels when
//! every row of the laser-coupling recurrence vanishes:
//!
//! ```text
//! Σ_p (iη)^{|n_p|} Ω_p e^{-iφ_p} √(l!/(l+|n_p|)!) L_l^{|n_p|}(η²) C_{l+|n_p|}
//!   + Σ_q θ(l-n_q) (iη)^{n_q} Ω_q e^{-iφ_q} √((l-n_q)!/l!) L_{l-n_q}^{n_q}(η²) C_{l-n_q}
//!   + Ω_0 e^{-iφ_0} L_l^0(η²) C_l = 0
//! ```
//!
//! with red-detuned lasers `p` (`n_p < 0`), blue-detuned lasers `q`
//! (`n_q > 0`) and one resonant laser. This module assembles that system on
//! a truncated Fock space and extracts its null vectors. For a single red
//! laser at `n = -K` the null vectors are KNCS with the trapped-ion
//! nonlinearity, which gives an independent check of [`crate::states`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{LaguerreSeq, SignedLogScalar};
use crate::states::{build_state, FockVector, StateSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Laser {
    /// Sideband index: negative for red, positive for blue, zero for the
    /// resonant carrier.
    pub detuning: i32,
    pub rabi: f64,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserConfig {
    eta: f64,
    lasers: Vec<Laser>,
}

impl LaserConfig {
    /// Requires `η > 0`, at least two lasers, exactly one resonant laser, and
    /// positive Rabi amplitudes on the sidebands. The resonant amplitude may
    /// be zero.
    pub fn new(eta: f64, lasers: Vec<Laser>) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidConfig(format!("eta must be > 0, got {eta}")));
        }
        if lasers.len() < 2 {
            return Err(Error::InvalidConfig("a dark state needs at least two driving lasers".into()));
        }
        let resonant = lasers.iter().filter(|l| l.detuning == 0).count();
        if resonant != 1 {
            return Err(Error::InvalidConfig(format!("need exactly one resonant laser, got {resonant}")));
        }
        for l in &lasers {
            if !l.rabi.is_finite() || !l.phase.is_finite() || l.rabi < 0.0 {
                return Err(Error::InvalidConfig(format!("bad laser parameters {l:?}")));
            }
            if l.detuning != 0 && l.rabi == 0.0 {
                return Err(Error::InvalidConfig(format!("sideband laser {} has zero amplitude", l.detuning)));
            }
        }
        Ok(Self { eta, lasers })
    }

    /// The resonant carrier plus one red laser on the `k`-th sideband.
    pub fn red_sideband(k: u32, eta: f64, omega0: f64, phi0: f64, omega1: f64, phi1: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("sideband order must be >= 1".into()));
        }
        Self::new(
            eta,
            vec![
                Laser {
                    detuning: 0,
                    rabi: omega0,
                    phase: phi0,
                },
                Laser {
                    detuning: -(k as i32),
                    rabi: omega1,
                    phase: phi1,
                },
            ],
        )
    }

    /// The red-sideband configuration whose dark states are the trapped-ion
    /// KNCS `spec` (up to the choice of `j`), with `Ω_1 = 1` and `φ_0 = 0`.
    pub fn for_state(spec: &StateSpec, eta: f64) -> Result<Self> {
        let k = spec.k();
        // ξ = −e^{iφ} Ω₀ / ((iη)^K Ω₁)  ⇒  Ω₀ e^{iφ} = −ξ (iη)^K
        let drive = -spec.xi() * Complex64::new(0.0, eta).powu(k);
        Self::red_sideband(k, eta, drive.norm(), 0.0, 1.0, drive.arg())
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn lasers(&self) -> &[Laser] {
        &self.lasers
    }

    fn resonant(&self) -> Laser {
        *self.lasers.iter().find(|l| l.detuning == 0).expect("validated")
    }

    /// Greatest common divisor of the sideband indices. Rows and columns of
    /// the dark-state system split into this many independent residue
    /// classes.
    pub fn modulus(&self) -> usize {
        self.lasers
            .iter()
            .filter(|l| l.detuning != 0)
            .fold(0usize, |g, l| gcd(g, l.detuning.unsigned_abs() as usize))
    }

    /// For the single-red-sideband setup, the KNCS its dark state on lattice
    /// `j` should equal; `None` for any other setup.
    pub fn kncs_spec(&self, j: u32) -> Option<Result<StateSpec>> {
        let red: Vec<&Laser> = self.lasers.iter().filter(|l| l.detuning < 0).collect();
        let blue = self.lasers.iter().any(|l| l.detuning > 0);
        if red.len() != 1 || blue {
            return None;
        }
        let k = red[0].detuning.unsigned_abs();
        let res = self.resonant();
        let xi = xi_from_lasers(res.rabi, red[0].rabi, red[0].phase - res.phase, self.eta, k);
        Some(StateSpec::trapped_ion(k, j, xi, self.eta))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `ξ = −e^{iφ} Ω₀ / ((iη)^K Ω₁)`.
pub fn xi_from_lasers(omega0: f64, omega1: f64, phi: f64, eta: f64, k: u32) -> Complex64 {
    -Complex64::from_polar(omega0, phi) / (Complex64::new(0.0, eta).powu(k) * omega1)
}

/// Nonzero coefficients of one row of the dark-state system.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    pub entries: Vec<(usize, Complex64)>,
    /// Set when a coupling fell outside the truncated space and was dropped.
    pub truncated: bool,
}

/// Laguerre values `L_n^m(η²)` for `n < len`, per sideband order `m`.
struct LaguerreTables {
    orders: Vec<u32>,
    values: Vec<Vec<SignedLogScalar>>,
    min_log_abs: f64,
}

impl LaguerreTables {
    fn new(config: &LaserConfig, len: usize) -> Self {
        let mut orders: Vec<u32> = config.lasers.iter().map(|l| l.detuning.unsigned_abs()).collect();
        orders.sort_unstable();
        orders.dedup();
        let x = config.eta * config.eta;
        let mut min_log_abs = f64::INFINITY;
        let values = orders
            .iter()
            .map(|&m| {
                let mut seq = LaguerreSeq::new(m, x);
                let v: Vec<SignedLogScalar> = seq.by_ref().take(len).collect();
                min_log_abs = min_log_abs.min(seq.min_log_abs());
                v
            })
            .collect();
        Self {
            orders,
            values,
            min_log_abs,
        }
    }

    fn get(&self, n: usize, m: u32) -> SignedLogScalar {
        let i = self.orders.binary_search(&m).expect("order tabulated");
        self.values[i][n]
    }
}

fn row_with(config: &LaserConfig, tables: &LaguerreTables, l: usize, dim: usize) -> Result<SparseRow> {
    let mut entries = Vec::new();
    let mut truncated = false;
    let eta = config.eta;
    for laser in &config.lasers {
        let phase = Complex64::from_polar(1.0, -laser.phase);
        let m = laser.detuning.unsigned_abs();
        let (col, lag, ln_ratio) = match laser.detuning {
            0 => (l, tables.get(l, 0), 0.0),
            d if d < 0 => {
                let col = l + m as usize;
                // √(l!/(l+m)!)
                let ln_ratio = -0.5 * (l + 1..=col).map(|i| (i as f64).ln()).sum::<f64>();
                (col, tables.get(l, m), ln_ratio)
            }
            _ => {
                if l < m as usize {
                    continue;
                }
                let col = l - m as usize;
                // √((l-m)!/l!)
                let ln_ratio = -0.5 * (col + 1..=l).map(|i| (i as f64).ln()).sum::<f64>();
                (col, tables.get(col, m), ln_ratio)
            }
        };
        if col >= dim {
            truncated = true;
            continue;
        }
        let mag = SignedLogScalar::new(lag.sign(), lag.logmag() + ln_ratio + f64::from(m) * eta.ln());
        let value = Complex64::new(0.0, 1.0).powu(m) * phase * (laser.rabi * mag.to_f64()?);
        if value != Complex64::new(0.0, 0.0) {
            entries.push((col, value));
        }
    }
    Ok(SparseRow { entries, truncated })
}

/// Row `l` of the dark-state system on a space of dimension `dim`.
pub fn dark_system_row(config: &LaserConfig, l: usize, dim: usize) -> Result<SparseRow> {
    if l >= dim {
        return Err(Error::InvalidArgument(format!("row {l} outside dimension {dim}")));
    }
    let max_order = config.lasers.iter().map(|x| x.detuning.unsigned_abs() as usize).max().unwrap_or(0);
    let tables = LaguerreTables::new(config, l + max_order + 1);
    row_with(config, &tables, l, dim)
}

/// The null direction of one residue class of the system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DarkStateResult {
    /// Fock indices `n ≡ residue (mod modulus)` carry the state.
    pub residue: usize,
    /// Unit vector on the full truncated space, zero off its residue class.
    /// `tail_bound` holds the mass in the top quarter of the class, a
    /// truncation indicator rather than a bound.
    pub vector: FockVector,
    /// `‖M v‖`, the smallest singular value of the class block.
    pub residual: f64,
    /// The smallest singular value above the rounding-level null space, for
    /// judging how well `v` is isolated.
    pub sigma_next: f64,
    /// Singular values of the class block at rounding level. Above one, the
    /// returned vector is the null direction anchored on the lowest Fock level
    /// of the class.
    pub null_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DarkStateSet {
    pub dim: usize,
    pub modulus: usize,
    /// Whether any coupling was dropped at the edge of the truncated space.
    pub truncated: bool,
    pub components: Vec<DarkStateResult>,
}

impl DarkStateSet {
    pub fn component(&self, residue: usize) -> Option<&DarkStateResult> {
        self.components.iter().find(|c| c.residue == residue)
    }
}

/// Multiple of `ε · d · σ_max` below which a singular value counts as zero.
const NOISE_ULPS: f64 = 64.0;

/// Null vectors of the dark-state system truncated to `dim` Fock levels,
/// one per residue class modulo [`LaserConfig::modulus`].
pub fn dark_state(config: &LaserConfig, dim: usize) -> Result<DarkStateSet> {
    let modulus = config.modulus();
    if modulus == 0 {
        return Err(Error::InvalidConfig("no sideband laser".into()));
    }
    if dim < 2 * modulus {
        return Err(Error::InvalidArgument(format!("dimension {dim} too small for {modulus} residue classes")));
    }
    let max_order = config.lasers.iter().map(|x| x.detuning.unsigned_abs() as usize).max().unwrap_or(0);
    let tables = LaguerreTables::new(config, dim + max_order);
    let mut truncated = false;
    let mut components = Vec::with_capacity(modulus);
    for residue in 0..modulus {
        let idx: Vec<usize> = (residue..dim).step_by(modulus).collect();
        let d = idx.len();
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for (r, &l) in idx.iter().enumerate() {
            let row = row_with(config, &tables, l, dim)?;
            truncated |= row.truncated;
            for (col, v) in row.entries {
                m[(r, (col - residue) / modulus)] += v;
            }
        }
        let svd = m.clone().svd_unordered(false, true);
        let s = &svd.singular_values;
        let mut order: Vec<usize> = (0..s.len()).collect();
        order.sort_by(|&a, &b| s[a].partial_cmp(&s[b]).expect("finite singular values"));
        let v_t = svd.v_t.expect("requested V^H");
        let column = |i: usize| -> Vec<Complex64> { v_t.row(i).iter().map(|z| z.conj()).collect() };

        // Singular values at rounding level are indistinguishable from zero.
        let noise = NOISE_ULPS * f64::EPSILON * d as f64 * s[order[d - 1]];
        let null_dim = order.iter().take_while(|&&i| s[i] <= noise).count();
        let next = s[order[null_dim.max(1).min(d - 1)]];
        let mut v = if null_dim <= 1 {
            let lo = s[order[0]];
            if (next - lo).abs() <= 1e-8 * next {
                return Err(Error::DegenerateNullspace {
                    sigma_min: lo,
                    sigma_next: next,
                });
            }
            column(order[0])
        } else {
            // Several numerically null directions: keep the one reaching the
            // lowest Fock level of the class.
            let mut anchored = vec![Complex64::new(0.0, 0.0); d];
            for &i in &order[..null_dim] {
                let u = column(i);
                let w = u[0].conj();
                for (a, b) in anchored.iter_mut().zip(&u) {
                    *a += w * b;
                }
            }
            let norm = anchored.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                return Err(Error::DegenerateNullspace {
                    sigma_min: s[order[0]],
                    sigma_next: s[order[1]],
                });
            }
            anchored.iter().map(|z| z / norm).collect()
        };

        let top = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if let Some(first) = v.iter().find(|z| z.norm() > 1e-10 * top) {
            let rot = first.conj() / first.norm();
            for z in &mut v {
                *z *= rot;
            }
        }
        let mv = &m * nalgebra::DVector::from_column_slice(&v);
        let residual = mv.norm();

        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        for (r, &l) in idx.iter().enumerate() {
            amplitudes[l] = v[r];
        }
        let tail: f64 = v[d - d / 4..].iter().map(|z| z.norm_sqr()).sum();
        components.push(DarkStateResult {
            residue,
            vector: FockVector {
                amplitudes,
                cutoff: dim - 1,
                tail_bound: tail,
                min_log_laguerre: tables.min_log_abs,
                terms_summed: d,
            },
            residual,
            sigma_next: next,
            null_dim,
        });
    }
    Ok(DarkStateSet {
        dim,
        modulus,
        truncated,
        components,
    })
}

/// A truncation for [`dark_state`] that comfortably contains `spec`: twice
/// its Fock extent and at least 200, rounded up to a multiple of `K` so the
/// residue classes have equal size.
pub fn suggested_dim(spec: &StateSpec, tol: f64) -> Result<usize> {
    let v = build_state(spec, tol)?;
    let k = spec.k() as usize;
    Ok((2 * (v.cutoff + 1)).max(200).div_ceil(k) * k)
}
