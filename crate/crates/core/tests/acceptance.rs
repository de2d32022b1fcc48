//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use kncs::existence::{classify, critical_xi, critical_xi_relative, phase_diagram, ExistenceConfig, PhaseCurve};
use kncs::ion::{dark_state, suggested_dim, LaserConfig};
use kncs::observables::{
    mixed_distribution, mixed_distribution_equal, mixed_weights, moment_a, number_distribution, statistics,
    statistics_sweep, MixedSpec, StatisticsReport,
};
use kncs::states::{build_state, decompose, eigen_residual, overlap, recompose, Nonlinearity, StateSpec};
use kncs::Complex64;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

type Outcome = std::result::Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ensure(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: f64) -> std::result::Result<(), String> {
    ensure(
        elapsed.as_secs_f64() < limit,
        format!("took {:.2}s, limit {limit}s", elapsed.as_secs_f64()),
    )
}

/// Plain forward three-term recurrence for `L_n^a(x)` in `f64`.
fn laguerre_plain(n: u64, a: u32, x: f64) -> f64 {
    let a = f64::from(a);
    let (mut prev, mut cur) = (1.0, 1.0 + a - x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `f(l)` of the trapped ion, `f(n+K) = L_n^K(η²) / (L_n^0(η²) Π_{i=1..K}(n+i))`.
fn ion_f_plain(l: u64, k: u32, eta: f64) -> f64 {
    if l < u64::from(k) {
        return 1.0;
    }
    let n = l - u64::from(k);
    let x = eta * eta;
    let rising: f64 = (n + 1..=l).map(|i| i as f64).product();
    laguerre_plain(n, k, x) / (laguerre_plain(n, 0, x) * rising)
}

fn ln_fact(n: u64) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

fn grid(max: f64, points: usize) -> Vec<f64> {
    (1..=points).map(|i| max * i as f64 / points as f64).collect()
}

fn sweep(spec: &StateSpec, max: f64) -> std::result::Result<Vec<StatisticsReport>, String> {
    statistics_sweep(spec, &grid(max, 256), 1e-14)
        .map_err(|e| e.to_string())?
        .into_iter()
        .collect::<kncs::Result<Vec<_>>>()
        .map_err(|e| e.to_string())
}

fn crossings(values: &[f64], level: f64) -> usize {
    values.windows(2).filter(|w| (w[0] < level) != (w[1] < level)).count()
}

fn random_specs(count: usize) -> Vec<StateSpec> {
    let strategy = (1u32..=6, 0u32..6, 0.05f64..1.0, 0.0f64..TAU, prop::option::of(0.05f64..0.5)).prop_map(
        |(k, j, r, phase, eta)| {
            let j = j % k;
            let xi = Complex64::from_polar(r, phase);
            match eta {
                Some(eta) => StateSpec::trapped_ion(k, j, xi, eta).unwrap(),
                None => StateSpec::identity(k, j, xi * 4.0).unwrap(),
            }
        },
    );
    let mut runner = TestRunner::deterministic();
    (0..count)
        .map(|_| strategy.new_tree(&mut runner).unwrap().current())
        .collect()
}

fn coherent_limit() -> Outcome {
    let t = Instant::now();
    let mut worst_p: f64 = 0.0;
    let mut worst_ms: f64 = 0.0;
    for xi in [c(0.5, 0.0), c(1.0, 0.0), c(2.0, 1.0)] {
        let spec = StateSpec::identity(1, 0, xi).map_err(|e| e.to_string())?;
        let p = number_distribution(&spec, 1e-14).map_err(|e| e.to_string())?;
        let x2 = xi.norm_sqr();
        for n in 0..=40u64 {
            let want = (-x2 + n as f64 * x2.ln() - ln_fact(n)).exp();
            let got = p.get(n as usize).map_or(0.0, |&(_, q)| q);
            worst_p = worst_p.max((got - want).abs());
        }
        let s = statistics(&spec, 1e-14).map_err(|e| e.to_string())?;
        worst_ms = worst_ms.max((s.mandel - 1.0).abs()).max(s.squeeze_s.abs());
    }
    ensure(worst_p <= 1e-12, format!("max |dP| = {worst_p:.2e}"))?;
    ensure(worst_ms <= 1e-9, format!("max |M-1|,|S| = {worst_ms:.2e}"))?;
    within(t.elapsed(), 1.0)?;
    Ok(format!("max |dP| {worst_p:.1e}, max |M-1|,|S| {worst_ms:.1e}, {:.2}s", t.elapsed().as_secs_f64()))
}

fn parity(specs: &[StateSpec]) -> Outcome {
    let mut moments = 0;
    for spec in specs {
        let v = build_state(spec, 1e-12).map_err(|e| format!("{spec:?}: {e}"))?;
        let k = spec.k() as usize;
        let j = spec.j() as usize;
        for (n, a) in v.amplitudes.iter().enumerate() {
            if n % k != j && (a.re != 0.0 || a.im != 0.0) {
                return Err(format!("nonzero amplitude at n={n} for {spec:?}"));
            }
        }
        for l in 1..=12u32 {
            if l % spec.k() != 0 {
                let m = moment_a(spec, l, 1e-12).map_err(|e| e.to_string())?;
                ensure(m.re == 0.0 && m.im == 0.0, format!("<a^{l}> = {m} for {spec:?}"))?;
                moments += 1;
            }
        }
    }
    Ok(format!("{} specs, {moments} vanishing moments", specs.len()))
}

fn eigenvector(specs: &[StateSpec]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut built = 0;
    for spec in specs {
        let Ok(v) = build_state(spec, 1e-14) else { continue };
        built += 1;
        let r = eigen_residual(&v, spec).map_err(|e| e.to_string())?;
        let scaled = r / (1.0 + spec.xi().norm());
        worst = worst.max(scaled);
    }
    ensure(worst <= 1e-8, format!("max residual/(1+|xi|) = {worst:.2e}"))?;
    Ok(format!("{built} builds, max residual/(1+|xi|) {worst:.1e}"))
}

fn recurrence(specs: &[StateSpec]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for spec in specs {
        let eta = match spec.f() {
            Nonlinearity::TrappedIon { eta, .. } => Some(*eta),
            _ => None,
        };
        let v = build_state(spec, 1e-14).map_err(|e| e.to_string())?;
        let k = spec.k() as usize;
        let xi = spec.xi();
        for m in (spec.j() as usize..v.len().saturating_sub(k)).step_by(k) {
            let (cm, cmk) = (v.amplitudes[m], v.amplitudes[m + k]);
            if cm.norm() < 1e-280 || cmk.norm() < 1e-280 {
                continue;
            }
            let f = eta.map_or(1.0, |eta| ion_f_plain((m + k) as u64, spec.k(), eta));
            let ratio = (0.5 * (ln_fact(m as u64) - ln_fact((m + k) as u64))).exp() / f;
            let want = xi * ratio * cm;
            worst = worst.max((cmk - want).norm() / cmk.norm());
            checked += 1;
        }
    }
    ensure(worst <= 1e-10, format!("max relative error {worst:.2e}"))?;
    Ok(format!("{checked} occupied steps, max relative error {worst:.1e}"))
}

/// Half the critical `|ξ|` of the `j = 0` trapped-ion state, resolved to
/// one percent.
fn half_critical(k: u32, eta: f64) -> std::result::Result<f64, String> {
    let x = critical_xi_relative(k, 0, eta, 1e-2).map_err(|e| format!("K={k} eta={eta}: {e}"))?;
    Ok(0.5 * x)
}

fn decomposition() -> Outcome {
    let mut cases = Vec::new();
    for k in 1..=5u32 {
        let half = half_critical(k, 0.3)?;
        for j in 0..k {
            cases.push(StateSpec::identity(k, j, Complex64::from_polar(3.0, 0.7)).unwrap());
            cases.push(StateSpec::trapped_ion(k, j, Complex64::from_polar(half, 1.9), 0.3).unwrap());
        }
    }
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for spec in &cases {
        let direct = build_state(spec, 1e-15).map_err(|e| e.to_string())?;
        let branches = decompose(spec).map_err(|e| e.to_string())?;
        let back = recompose(spec, &branches, 1e-15).map_err(|e| e.to_string())?;
        let len = direct.len().max(back.len());
        for n in 0..len {
            let a = direct.amplitudes.get(n).copied().unwrap_or_default();
            let b = back.amplitudes.get(n).copied().unwrap_or_default();
            worst = worst.max((a - b).norm());
        }
    }
    ensure(worst <= 1e-9, format!("max-norm difference {worst:.2e}"))?;
    within(t.elapsed(), 5.0)?;
    Ok(format!(
        "{} states, max-norm difference {worst:.1e}, {:.2}s",
        cases.len(),
        t.elapsed().as_secs_f64()
    ))
}

fn overlaps() -> Outcome {
    let mut pairs = Vec::new();
    for k in 1..=4u32 {
        for j in 0..k {
            let a = StateSpec::identity(k, j, c(1.3, -0.4)).unwrap();
            pairs.push((a.clone(), a.with_xi(c(0.9, 0.6)).unwrap()));
        }
    }
    for k in 1..=3u32 {
        for j in 0..k {
            let a = StateSpec::trapped_ion(k, j, c(0.8, 0.3), 0.3).unwrap();
            pairs.push((a.clone(), a.with_xi(c(-0.2, 1.1)).unwrap()));
        }
    }
    let mut worst: f64 = 0.0;
    for (a, b) in &pairs {
        let closed = overlap(a, b, 1e-16).map_err(|e| e.to_string())?;
        let direct = build_state(a, 1e-16)
            .and_then(|va| Ok(va.inner(&build_state(b, 1e-16)?)))
            .map_err(|e| e.to_string())?;
        worst = worst.max((closed - direct).norm() / direct.norm());
    }
    ensure(worst <= 1e-9, format!("max relative difference {worst:.2e}"))?;

    let mut orth = 0;
    for k in 2..=4u32 {
        for j in 0..k {
            for jp in 0..k {
                if j == jp {
                    continue;
                }
                let a = StateSpec::trapped_ion(k, j, c(0.7, 0.2), 0.3).unwrap();
                let b = StateSpec::trapped_ion(k, jp, c(0.4, -0.5), 0.3).unwrap();
                let closed = overlap(&a, &b, 1e-16).map_err(|e| e.to_string())?;
                let direct = build_state(&a, 1e-16).unwrap().inner(&build_state(&b, 1e-16).unwrap());
                ensure(
                    closed == c(0.0, 0.0) && direct == c(0.0, 0.0),
                    format!("j={j}, j'={jp}: {closed}, {direct}"),
                )?;
                orth += 1;
            }
        }
    }
    Ok(format!(
        "{} pairs, max relative difference {worst:.1e}; {orth} orthogonal pairs exact",
        pairs.len()
    ))
}

fn golden_path(k: u32) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("tests/golden/phase_k{k}.json"))
}

/// Compares against the frozen curve, writing it on the first run.
fn check_golden(curve: &PhaseCurve) -> std::result::Result<&'static str, String> {
    let path = golden_path(curve.k);
    let fresh = serde_json::to_value(curve).map_err(|e| e.to_string())?;
    if !path.exists() {
        std::fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
        let text = serde_json::to_string_pretty(&fresh).map_err(|e| e.to_string())?;
        std::fs::write(&path, text + "\n").map_err(|e| e.to_string())?;
        return Ok("written");
    }
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let frozen: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let pts = |v: &serde_json::Value| v["points"].as_array().cloned().unwrap_or_default();
    let (old, new) = (pts(&frozen), pts(&fresh));
    ensure(old.len() == new.len(), format!("K={}: point count changed", curve.k))?;
    for (o, n) in old.iter().zip(&new) {
        match (o["xi_critical"].as_f64(), n["xi_critical"].as_f64()) {
            (Some(a), Some(b)) => ensure(
                (a - b).abs() <= curve.tolerance * a.min(b),
                format!("K={} eta={}: {a} vs {b}", curve.k, n["eta"]),
            )?,
            (None, None) => {}
            _ => return Err(format!("K={} eta={}: success changed", curve.k, n["eta"])),
        }
    }
    Ok("matched")
}

fn existence() -> Outcome {
    let d = ExistenceConfig::default();
    let at = |x: f64| classify(&StateSpec::trapped_ion(1, 0, c(x, 0.0), 0.5).unwrap(), d.n_max, d.window);
    ensure(at(1.2).map_err(|e| e.to_string())?.exists, "|xi|=1.2 should exist")?;
    ensure(!at(3.2).map_err(|e| e.to_string())?.exists, "|xi|=3.2 should not exist")?;

    let tol = 1e-2;
    let x0 = critical_xi(2, 0, 0.5, tol).map_err(|e| e.to_string())?;
    let x1 = critical_xi(2, 1, 0.5, tol).map_err(|e| e.to_string())?;
    ensure((x0 - x1).abs() <= 2.0 * tol, format!("K=2 critical: j=0 {x0}, j=1 {x1}"))?;

    let rel = 1e-2;
    let etas: Vec<f64> = (1..=20).map(|i| 0.05 * f64::from(i)).collect();
    let t = Instant::now();
    let curves: Vec<PhaseCurve> = (1..=3)
        .map(|k| phase_diagram(k, &etas, rel))
        .collect::<kncs::Result<_>>()
        .map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    within(elapsed, 60.0)?;
    let mut status = Vec::new();
    let (mut found, mut poles, mut worst) = (0, 0, 0.0f64);
    for curve in &curves {
        for p in &curve.points {
            let k = curve.k as i32;
            match p.xi_critical {
                // The series ratio tends to |ξ|² η^{2K}, so |ξ_c| = η^-K.
                Some(x) => {
                    let err = (x * p.eta.powi(k) - 1.0).abs();
                    ensure(err <= rel, format!("K={k} eta={}: {x} vs {}", p.eta, p.eta.powi(-k)))?;
                    worst = worst.max(err);
                    found += 1;
                }
                // A gap is only right where f has a pole and every state exists.
                None => {
                    let spec = StateSpec::trapped_ion(curve.k, 0, c(1e6, 0.0), p.eta).unwrap();
                    let v = classify(&spec, 4096, 16).map_err(|e| e.to_string())?;
                    ensure(
                        v.exists && v.diagnostic.contains("terminates"),
                        format!("K={k} eta={}: {}", p.eta, p.error.clone().unwrap_or_default()),
                    )?;
                    poles += 1;
                }
            }
        }
        status.push(format!("K={} {}", curve.k, check_golden(curve)?));
    }
    Ok(format!(
        "eta=0.5 cases at |xi|=1.2, 3.2 ok; K=2 critical j=0 {x0:.4}, j=1 {x1:.4}; \
         {found}/60 critical points within {worst:.1e} of eta^-K, {poles} pole gaps, in {:.1}s; golden {}",
        elapsed.as_secs_f64(),
        status.join(", ")
    ))
}

fn local_maxima(p: &[f64]) -> usize {
    (0..p.len())
        .filter(|&i| {
            let left = i == 0 || p[i] > p[i - 1];
            let right = i + 1 == p.len() || p[i] > p[i + 1];
            left && right
        })
        .count()
}

fn two_peaks() -> Outcome {
    let mut found = Vec::new();
    for x in [1.5, 1.8] {
        let spec = StateSpec::trapped_ion(1, 0, c(x, 0.0), 0.5).unwrap();
        let p: Vec<f64> = number_distribution(&spec, 1e-14)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|(_, q)| q)
            .collect();
        let peaks = local_maxima(&p);
        ensure(peaks >= 2, format!("|xi|={x}: {peaks} local maxima"))?;
        found.push(format!("|xi|={x}: {peaks} maxima"));
    }
    Ok(found.join(", "))
}

fn antibunching() -> Outcome {
    let spec = StateSpec::trapped_ion(1, 0, c(1.0, 0.0), 0.05).unwrap();
    let m: Vec<f64> = sweep(&spec, 10.0)?.iter().map(|s| s.mandel).collect();
    ensure(m.iter().all(|&v| v < 1.0), "M >= 1 somewhere")?;
    ensure(m.windows(2).all(|w| w[1] < w[0]), "M not strictly decreasing")?;
    Ok(format!("256 points on (0, 10], M from {:.6} to {:.4}", m[0], m[255]))
}

fn k2_behaviour() -> Outcome {
    let xi = Complex64::from_polar(1.0, PI);
    let even = sweep(&StateSpec::trapped_ion(2, 0, xi, 0.05).unwrap(), 10.0)?;
    let s: Vec<f64> = even.iter().map(|r| r.squeeze_s).collect();
    let m: Vec<f64> = even.iter().map(|r| r.mandel).collect();
    let first_ok = s.iter().position(|&v| v >= 0.0).ok_or("S never turns non-negative")?;
    ensure(first_ok > 0, "j=0: no squeezed interval")?;
    ensure(s[first_ok..].iter().all(|&v| v >= 0.0), "j=0: S negative again after the transition")?;
    let mc = crossings(&m, 1.0);
    ensure(mc == 1, format!("j=0: M crosses 1 {mc} times"))?;

    let odd = sweep(&StateSpec::trapped_ion(2, 1, xi, 0.05).unwrap(), 10.0)?;
    ensure(odd.iter().all(|r| r.squeeze_s > 0.0), "j=1: S <= 0 somewhere")?;
    ensure(odd.iter().all(|r| r.mandel < 1.0), "j=1: M >= 1 somewhere")?;
    let g = grid(10.0, 256);
    Ok(format!(
        "j=0 squeezed up to |xi|={:.3}, M crosses once; j=1 S>0, M<1 on (0, 10], arg xi = pi",
        g[first_ok - 1]
    ))
}

fn k3_double_crossing() -> Outcome {
    let spec = StateSpec::trapped_ion(3, 1, c(1.0, 0.0), 0.05).unwrap();
    let m: Vec<f64> = sweep(&spec, 20.0)?.iter().map(|s| s.mandel).collect();
    let n = crossings(&m, 1.0);
    ensure(n == 2, format!("M crosses 1 {n} times"))?;
    let top = m.iter().copied().fold(f64::MIN, f64::max);
    Ok(format!("256 points on (0, 20], 2 crossings, max M {top:.4}"))
}

fn dark_states() -> Outcome {
    let mut setups = Vec::new();
    for k in 1..=4u32 {
        for eta in [0.05, 0.3, 0.5] {
            setups.push((k, eta, half_critical(k, eta)?));
        }
    }
    let t = Instant::now();
    let mut worst_overlap: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let mut largest = 0;
    for &(k, eta, half) in &setups {
        let spec = StateSpec::trapped_ion(k, 0, Complex64::from_polar(half, 0.4), eta).unwrap();
        let config = LaserConfig::for_state(&spec, eta).map_err(|e| e.to_string())?;
        let dim = suggested_dim(&spec, 1e-14).map_err(|e| e.to_string())?;
        largest = largest.max(dim);
        let set = dark_state(&config, dim).map_err(|e| format!("K={k} eta={eta}: {e}"))?;
        for j in 0..k {
            let comp = set.component(j as usize).ok_or("missing residue class")?;
            let oracle = build_state(&spec.with_j(j).unwrap(), 1e-14).map_err(|e| e.to_string())?;
            let ov = comp.vector.inner(&oracle).norm();
            worst_overlap = worst_overlap.max(1.0 - ov);
            worst_residual = worst_residual.max(comp.residual);
        }
    }
    ensure(
        worst_overlap <= 1e-7,
        format!("min overlap 1 - {worst_overlap:.2e}"),
    )?;
    ensure(worst_residual <= 1e-7, format!("max residual {worst_residual:.2e}"))?;
    within(t.elapsed(), 30.0)?;
    Ok(format!(
        "12 setups, min overlap 1 - {worst_overlap:.1e}, max residual {worst_residual:.1e}, dim <= {largest}, {:.1}s",
        t.elapsed().as_secs_f64()
    ))
}

fn mixed() -> Outcome {
    let f = Nonlinearity::trapped_ion(0.05, 6);
    let mix = |k: u32, a: f64| MixedSpec {
        k,
        alpha_mag: a,
        xi: c(100.0, 0.0),
        f: f.clone(),
    };
    let mut worst_sum: f64 = 0.0;
    for k in 1..=6 {
        for a in [0.0, 0.3, 1.0, 2.5, 6.0, 8.0, 20.0] {
            let b = mixed_weights(&mix(k, a)).map_err(|e| e.to_string())?;
            worst_sum = worst_sum.max((b.iter().map(|x| x * x).sum::<f64>() - 1.0).abs());
        }
    }
    ensure(worst_sum <= 1e-12, format!("|sum beta^2 - 1| = {worst_sum:.2e}"))?;

    let (m6, m8) = (mix(6, 6.0), mix(6, 8.0));
    let dev = |m: &MixedSpec| -> std::result::Result<f64, String> {
        let b = mixed_weights(m).map_err(|e| e.to_string())?;
        Ok(b.iter().map(|x| (x * x - 1.0 / 6.0).abs()).fold(0.0, f64::max))
    };
    let bound = dev(&m6)? + dev(&m8)?;
    let p6 = mixed_distribution(&m6, 1e-14).map_err(|e| e.to_string())?;
    let p8 = mixed_distribution(&m8, 1e-14).map_err(|e| e.to_string())?;
    let eq = mixed_distribution_equal(&m6, 1e-14).map_err(|e| e.to_string())?;
    ensure(p6.len() == p8.len() && p6.len() == eq.len(), "distribution supports differ")?;
    let mut components = Vec::new();
    for j in 0..6 {
        components.push(number_distribution(&m6.component(j).unwrap(), 1e-14).map_err(|e| e.to_string())?);
    }
    let mut worst_gap: f64 = 0.0;
    for (i, ((n, a), (_, b))) in p6.iter().zip(&p8).enumerate() {
        let comp = &components[n % 6];
        let pj = comp.iter().find(|(m, _)| m == n).map(|&(_, q)| q).ok_or("row missing in component")?;
        ensure((a - b).abs() <= bound * pj, format!("n={n}: |dP| {} > {}", (a - b).abs(), bound * pj))?;
        worst_gap = worst_gap.max((a - b).abs());
        let (ne, pe) = eq[i];
        ensure(ne == *n && pe == pj / 6.0, format!("equal-weight row n={n} differs"))?;
    }
    Ok(format!(
        "|sum beta^2 - 1| <= {worst_sum:.1e}; alpha 6 vs 8 max |dP| {worst_gap:.1e} within (d6+d8)P_j, d6+d8 = {bound:.1e}; equal weight exact"
    ))
}

fn resolution_of_unity() -> Outcome {
    let levels = 9;
    let (radius, radial, angular) = (6.0, 600usize, 32usize);
    let h = radius / radial as f64;
    let mut acc = vec![vec![Complex64::new(0.0, 0.0); levels]; levels];
    for i in 0..=radial {
        let r = i as f64 * h;
        let w_r = if i == 0 || i == radial {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        } * h
            / 3.0;
        if r == 0.0 {
            continue;
        }
        for a in 0..angular {
            let theta = TAU * a as f64 / angular as f64;
            let spec = StateSpec::identity(1, 0, Complex64::from_polar(r, theta)).unwrap();
            let v = build_state(&spec, 1e-16).map_err(|e| e.to_string())?;
            let w = w_r * r * (TAU / angular as f64) / PI;
            for m in 0..levels {
                let cm = v.amplitudes.get(m).copied().unwrap_or_default();
                for n in 0..levels {
                    let cn = v.amplitudes.get(n).copied().unwrap_or_default();
                    acc[m][n] += cm * cn.conj() * w;
                }
            }
        }
    }
    let mut diag: f64 = 0.0;
    let mut off: f64 = 0.0;
    for (m, row) in acc.iter().enumerate() {
        for (n, z) in row.iter().enumerate() {
            if m == n {
                diag = diag.max((z - 1.0).norm());
            } else {
                off = off.max(z.norm());
            }
        }
    }
    ensure(diag <= 1e-4, format!("max |diag - 1| = {diag:.2e}"))?;
    ensure(off <= 1e-4, format!("max |off-diagonal| = {off:.2e}"))?;
    Ok(format!("n <= 8: max |diag - 1| {diag:.1e}, max |off| {off:.1e}"))
}

fn main() -> ExitCode {
    let specs = random_specs(500);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("coherent-state limit", Box::new(coherent_limit)),
        ("lattice parity", Box::new(|| parity(&specs))),
        ("eigenvector residual", Box::new(|| eigenvector(&specs))),
        ("coefficient recurrence", Box::new(|| recurrence(&specs))),
        ("branch decomposition round trip", Box::new(decomposition)),
        ("overlap closed form and orthogonality", Box::new(overlaps)),
        ("existence classification and phase curves", Box::new(existence)),
        ("two-peaked distributions", Box::new(two_peaks)),
        ("K=1 antibunching", Box::new(antibunching)),
        ("K=2 squeezing and Mandel transition", Box::new(k2_behaviour)),
        ("K=3 j=1 double crossing", Box::new(k3_double_crossing)),
        ("dark state matches closed form", Box::new(dark_states)),
        ("mixed-state distributions", Box::new(mixed)),
        ("coherent-state resolution of unity", Box::new(resolution_of_unity)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
