use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::build::log_series_at;
use super::{build_state, FockVector, StateSpec};
use crate::error::{Error, Result};

/// One term `ζ |ξ_branch; 10, f̃⟩` of the K-branch decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branch {
    pub xi: Complex64,
    pub zeta: Complex64,
}

/// Writes `|ξ; Kj, f⟩` as `Σ_j' ζ_jj' |ξ_j'; 10, f̃⟩` with
/// `ξ_j' = ξ^{1/K} e^{2πij'/K}` on the principal root.
///
/// The single-quantum branch states carry the induced nonlinearity
/// [`Nonlinearity::induced`](super::Nonlinearity::induced), which equals `f`
/// only for `f ≡ 1` or `K = 1`. Use [`branch_spec`] to build them.
pub fn decompose(spec: &StateSpec) -> Result<Vec<Branch>> {
    let k = spec.k();
    let kf = f64::from(k);
    let j = f64::from(spec.j());
    let abs_xi = spec.xi().norm();
    if abs_xi == 0.0 {
        if spec.j() > 0 {
            return Err(Error::InvalidArgument("xi = 0 has no branch decomposition for j > 0".into()));
        }
        let zeta = Complex64::new(1.0 / kf, 0.0);
        return Ok(vec![Branch { xi: Complex64::new(0.0, 0.0), zeta }; k as usize]);
    }
    let root = Complex64::from_polar(abs_xi.powf(1.0 / kf), spec.xi_arg() / kf);

    let (ln_s_kj, _) = log_series_at(spec, Complex64::new(abs_xi * abs_xi, 0.0), 1e-16)?;
    let one = branch_spec(spec, root)?;
    let (ln_s_10, _) = log_series_at(&one, Complex64::new(root.norm_sqr(), 0.0), 1e-16)?;
    // ξ^{-j/K} c_Kj / c_10 / K
    let common = Complex64::from_polar(
        (-j * root.norm().ln() + 0.5 * (ln_s_10 - ln_s_kj)).exp() / kf,
        -j * root.arg(),
    );
    Ok((0..k)
        .map(|jp| {
            let jp = f64::from(jp);
            Branch {
                xi: root * Complex64::from_polar(1.0, TAU * jp / kf),
                zeta: common * Complex64::from_polar(1.0, -TAU * j * jp / kf),
            }
        })
        .collect())
}

/// The single-quantum state `|ξ_branch; 10, f̃⟩` for a branch of `spec`.
pub fn branch_spec(spec: &StateSpec, xi_branch: Complex64) -> Result<StateSpec> {
    StateSpec::new(1, 0, xi_branch, spec.f().induced(spec.k()))
}

/// Sums `branches` back into a Fock vector.
pub fn recompose(spec: &StateSpec, branches: &[Branch], tol: f64) -> Result<FockVector> {
    let mut amplitudes: Vec<Complex64> = Vec::new();
    let mut tail = 0.0;
    let mut terms = 0;
    let mut min_log_laguerre = f64::INFINITY;
    for b in branches {
        let v = build_state(&branch_spec(spec, b.xi)?, tol)?;
        if v.len() > amplitudes.len() {
            amplitudes.resize(v.len(), Complex64::new(0.0, 0.0));
        }
        for (a, c) in amplitudes.iter_mut().zip(&v.amplitudes) {
            *a += b.zeta * c;
        }
        tail += b.zeta.norm() * v.tail_bound.sqrt();
        terms += v.terms_summed;
        min_log_laguerre = min_log_laguerre.min(v.min_log_laguerre);
    }
    Ok(FockVector {
        cutoff: amplitudes.len().saturating_sub(1),
        amplitudes,
        tail_bound: tail * tail,
        min_log_laguerre,
        terms_summed: terms,
    })
}
