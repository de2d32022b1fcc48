use std::fmt;
use std::io;
use std::path::PathBuf;

use kncs::existence::phase_diagram;
use kncs::ion::{dark_state, suggested_dim, LaserConfig};
use kncs::observables::{mixed_distribution, mixed_distribution_equal, mixed_weights, statistics_sweep, MixedSpec};
use kncs::states::{
    build_state, decompose, overlap, recompose, CoefficientProfile, Nonlinearity, StateSeries, StateSpec,
};
use kncs::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::args::{
    CoeffsArgs, Command, DarkArgs, FKind, MixedArgs, OutputArgs, OverlapArgs, PhaseArgs, StateArgs, StateRun,
    SweepArgs,
};
use crate::table::{int, num, Table};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Model(kncs::Error),
    Io(io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        use kncs::Error as E;
        match self {
            Self::Usage(_) => 2,
            Self::Model(E::InvalidArgument(_) | E::InvalidConfig(_) | E::DomainMismatch(_)) => 2,
            Self::Model(E::NonexistentState { .. } | E::Indeterminate { .. } | E::Divergent { .. }) => 3,
            Self::Model(_) => 4,
            Self::Io(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Model(e) => write!(f, "{e}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<kncs::Error> for Failure {
    fn from(e: kncs::Error) -> Self {
        Self::Model(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::Io(e)
    }
}

type Run<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Run<T> {
    Err(Failure::Usage(msg.into()))
}

fn check_tol(tol: f64) -> Run<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        usage(format!("--tol must lie in (0, 1), got {tol}"))
    }
}

fn read_table(path: &PathBuf) -> Run<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read --f-table {}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.parse::<f64>()
                .map_err(|_| Failure::Usage(format!("--f-table: not a number: {l:?}")))
        })
        .collect()
}

impl StateArgs {
    fn nonlinearity(&self) -> Run<Nonlinearity> {
        match self.f_kind {
            FKind::Identity => Ok(Nonlinearity::Identity),
            FKind::TrappedIon => match self.eta {
                Some(eta) if eta > 0.0 && eta.is_finite() => Ok(Nonlinearity::trapped_ion(eta, self.k)),
                Some(eta) => usage(format!("--eta must be > 0, got {eta}")),
                None => usage("--eta is required for the trapped-ion nonlinearity"),
            },
            FKind::Tabulated => match &self.f_table {
                Some(p) => Ok(Nonlinearity::Tabulated { table: read_table(p)? }),
                None => usage("--f-table is required for a tabulated nonlinearity"),
            },
        }
    }

    fn xi_with(&self, mag: f64) -> Run<Complex64> {
        if !(mag >= 0.0 && mag.is_finite()) || !self.xi_phase.is_finite() {
            return usage(format!("|xi| must be finite and >= 0, got {mag}"));
        }
        Ok(Complex64::from_polar(mag, self.xi_phase))
    }

    fn spec(&self) -> Run<StateSpec> {
        let mag = self.xi_mag.ok_or_else(|| Failure::Usage("--xi-mag is required".into()))?;
        Ok(StateSpec::new(self.k, self.j, self.xi_with(mag)?, self.nonlinearity()?)?)
    }
}

fn params(command: &str, args: &impl Serialize) -> Value {
    let mut v = serde_json::to_value(args).expect("arguments serialize");
    if let Value::Object(m) = &mut v {
        m.insert("command".into(), Value::from(command));
    }
    v
}

fn uniform_grid(max: f64, points: usize, flag: &str) -> Run<Vec<f64>> {
    if !(max > 0.0 && max.is_finite()) {
        return usage(format!("--{flag} must be > 0, got {max}"));
    }
    if points == 0 {
        return usage("--points must be >= 1");
    }
    Ok((1..=points).map(|i| max * i as f64 / points as f64).collect())
}

pub struct Written {
    pub path: Option<PathBuf>,
    pub rows: usize,
}

fn emit(table: Table, out: &OutputArgs, name: &str, params: Value) -> Run<Written> {
    let path = table.write(&out.output, name, out.format, &params)?;
    Ok(Written {
        path,
        rows: table.len(),
    })
}

pub fn run(command: &Command) -> Run<Written> {
    match command {
        Command::Coeffs(a) => coeffs(a),
        Command::Distribution(a) => distribution(a),
        Command::Mixed(a) => mixed(a),
        Command::PhaseDiagram(a) => phase(a),
        Command::MandelSweep(a) => sweep(a, false),
        Command::SqueezeSweep(a) => sweep(a, true),
        Command::DarkState(a) => dark(a),
        Command::Overlap(a) => overlaps(a),
        Command::Decompose(a) => decomposition(a),
    }
}

fn coeffs(a: &CoeffsArgs) -> Run<Written> {
    let spec = a.state.spec()?;
    let mut profile = CoefficientProfile::new(spec.k(), spec.j(), spec.f())?;
    let sites = profile.max_len().map_or(a.n_max, |cap| cap.min(a.n_max));
    profile.ensure(sites)?;
    let ln_xi = spec.xi().norm().ln();
    let mut t = Table::new(&[
        ("m", "lattice site"),
        ("n", "Fock index mK + j"),
        ("log_g2", "ln |g(m,0)|^2, unnormalized"),
        ("log_g_over_xi_m", "ln |g(m,0) / xi^m|"),
        ("sign", "sign of the f superfactorial"),
    ]);
    for m in 0..profile.len().min(sites) {
        t.push(vec![
            int(m),
            int(spec.fock_index(m)),
            num(profile.log_term(m, ln_xi)),
            num(0.5 * profile.h()[m]),
            Value::from(profile.sf_sign()[m]),
        ]);
    }
    if let Some(m) = profile.terminated_at() {
        eprintln!("lattice terminates at site {m}: f has a pole at n = {}", spec.fock_index(m));
    }
    emit(t, &a.out, "coeffs", params("coeffs", a))
}

fn distribution(a: &StateRun) -> Run<Written> {
    check_tol(a.tol)?;
    let spec = a.state.spec()?;
    let s = StateSeries::new(&spec, a.tol)?;
    let mut t = Table::new(&[("n", "Fock index"), ("p", "P(n)")]);
    for (m, &lp) in s.log_probs().iter().enumerate() {
        t.push(vec![int(spec.fock_index(m)), num(lp.exp())]);
    }
    eprintln!("tail mass beyond n = {}: <= {:e}", spec.fock_index(s.cutoff()), s.tail_bound());
    emit(t, &a.out, "distribution", params("distribution", a))
}

fn mixed(a: &MixedArgs) -> Run<Written> {
    check_tol(a.tol)?;
    if !(a.alpha_mag >= 0.0 && a.alpha_mag.is_finite()) {
        return usage(format!("--alpha-mag must be finite and >= 0, got {}", a.alpha_mag));
    }
    let mag = a.state.xi_mag.ok_or_else(|| Failure::Usage("--xi-mag is required".into()))?;
    let mix = MixedSpec {
        k: a.state.k,
        alpha_mag: a.alpha_mag,
        xi: a.state.xi_with(mag)?,
        f: a.state.nonlinearity()?,
    };
    let beta = mixed_weights(&mix)?;
    let weighted = mixed_distribution(&mix, a.tol)?;
    let equal = mixed_distribution_equal(&mix, a.tol)?;
    let mut t = Table::new(&[
        ("n", "Fock index"),
        ("j", "lattice n mod K"),
        ("beta", "weight beta_Kj of the lattice"),
        ("p_mix", "mixed-state P(n)"),
        ("p_equal", "P(n) with all weights 1/sqrt(K)"),
    ]);
    let k = mix.k as usize;
    for ((n, p), (_, q)) in weighted.iter().zip(&equal) {
        t.push(vec![int(*n), int(n % k), num(beta[n % k]), num(*p), num(*q)]);
    }
    emit(t, &a.out, "mixed", params("mixed", a))
}

fn phase(a: &PhaseArgs) -> Run<Written> {
    if !(a.tol > 0.0) {
        return usage(format!("--tol must be > 0, got {}", a.tol));
    }
    let etas = uniform_grid(a.eta_max, a.points, "eta-max")?;
    let curve = phase_diagram(a.k, &etas, a.tol)?;
    let mut t = Table::new(&[
        ("eta", "Lamb-Dicke parameter"),
        ("xi_critical", "critical |xi|, empty where the search failed"),
        ("error", "reason the search failed"),
    ]);
    for p in &curve.points {
        t.push(vec![
            num(p.eta),
            p.xi_critical.map_or(Value::Null, num),
            p.error.clone().map_or(Value::Null, Value::from),
        ]);
    }
    emit(t, &a.out, "phase-diagram", params("phase-diagram", a))
}

fn sweep(a: &SweepArgs, squeeze: bool) -> Run<Written> {
    check_tol(a.tol)?;
    let grid = uniform_grid(a.xi_max, a.points, "xi-max")?;
    let base = StateSpec::new(a.state.k, a.state.j, a.state.xi_with(1.0)?, a.state.nonlinearity()?)?;
    let reports = statistics_sweep(&base, &grid, a.tol)?;
    let (name, columns): (&str, &[(&'static str, &'static str)]) = if squeeze {
        (
            "squeeze-sweep",
            &[
                ("xi_mag", "|xi|"),
                ("squeeze_s", "<n> + Re<a^2> - 2 Re^2<a>; negative when squeezed"),
                ("variance_x", "variance of a + a^dagger, 1 + 2S"),
            ],
        )
    } else {
        (
            "mandel-sweep",
            &[
                ("xi_mag", "|xi|"),
                ("mandel", "<n^2>/<n> - <n>; below 1 when sub-Poissonian"),
                ("mean_n", "<n>"),
            ],
        )
    };
    let mut t = Table::new(columns);
    for (x, r) in grid.iter().zip(reports) {
        let r = r.map_err(|e| {
            eprintln!("at |xi| = {x}:");
            Failure::Model(e)
        })?;
        let row = if squeeze {
            vec![num(*x), num(r.squeeze_s), num(r.variance_x)]
        } else {
            vec![num(*x), num(r.mandel), num(r.mean_n)]
        };
        t.push(row);
    }
    emit(t, &a.out, name, params(name, a))
}

fn dark(a: &DarkArgs) -> Run<Written> {
    check_tol(a.tol)?;
    if a.state.f_kind != FKind::TrappedIon {
        return usage("dark-state needs the trapped-ion nonlinearity");
    }
    let spec = a.state.spec()?;
    let eta = a.state.eta.expect("checked by spec()");
    let config = LaserConfig::for_state(&spec, eta)?;
    let dim = match a.dim {
        Some(d) => d,
        None => suggested_dim(&spec, a.tol)?,
    };
    let set = dark_state(&config, dim)?;
    let mut t = Table::new(&[
        ("n", "Fock index"),
        ("residue", "lattice n mod K of the null vector"),
        ("re", "Re C_n"),
        ("im", "Im C_n"),
        ("closed_re", "Re c_n of the closed-form state on the same lattice"),
        ("closed_im", "Im c_n of the closed-form state on the same lattice"),
        ("residual", "|M v| of the null vector"),
        ("overlap", "|<dark|closed form>|, empty if the closed form failed"),
    ]);
    for comp in &set.components {
        let oracle = config
            .kncs_spec(comp.residue as u32)
            .expect("single red sideband")
            .and_then(|s| build_state(&s, a.tol));
        if let Err(e) = &oracle {
            eprintln!("closed form on lattice {} unavailable: {e}", comp.residue);
        }
        let ov = oracle.as_ref().map(|o| comp.vector.inner(o).norm()).ok();
        for n in (comp.residue..dim).step_by(set.modulus) {
            let c = comp.vector.amplitudes[n];
            let closed = oracle
                .as_ref()
                .ok()
                .map(|o| o.amplitudes.get(n).copied().unwrap_or_default());
            t.push(vec![
                int(n),
                int(comp.residue),
                num(c.re),
                num(c.im),
                closed.map_or(Value::Null, |z| num(z.re)),
                closed.map_or(Value::Null, |z| num(z.im)),
                num(comp.residual),
                ov.map_or(Value::Null, num),
            ]);
        }
    }
    emit(t, &a.out, "dark-state", params("dark-state", a))
}

fn overlaps(a: &OverlapArgs) -> Run<Written> {
    check_tol(a.tol)?;
    let first = a.state.spec()?;
    let second = StateSpec::new(
        first.k(),
        a.j2.unwrap_or(first.j()),
        StateArgs {
            xi_phase: a.xi2_phase,
            ..a.state.clone()
        }
        .xi_with(a.xi2_mag)?,
        first.f().clone(),
    )?;
    let closed = overlap(&first, &second, a.tol)?;
    let direct = build_state(&first, a.tol)?.inner(&build_state(&second, a.tol)?);
    let mut t = Table::new(&[
        ("re", "Re <a|b>, closed form"),
        ("im", "Im <a|b>, closed form"),
        ("abs", "|<a|b>|, closed form"),
        ("direct_re", "Re <a|b> from truncated amplitudes"),
        ("direct_im", "Im <a|b> from truncated amplitudes"),
        ("direct_abs", "|<a|b>| from truncated amplitudes"),
    ]);
    t.push(vec![
        num(closed.re),
        num(closed.im),
        num(closed.norm()),
        num(direct.re),
        num(direct.im),
        num(direct.norm()),
    ]);
    emit(t, &a.out, "overlap", params("overlap", a))
}

fn decomposition(a: &StateRun) -> Run<Written> {
    check_tol(a.tol)?;
    let spec = a.state.spec()?;
    let branches = decompose(&spec)?;
    let direct = build_state(&spec, a.tol)?;
    let back = recompose(&spec, &branches, a.tol)?;
    let err = (0..direct.len().max(back.len()))
        .map(|n| {
            let x = direct.amplitudes.get(n).copied().unwrap_or_default();
            let y = back.amplitudes.get(n).copied().unwrap_or_default();
            (x - y).norm()
        })
        .fold(0.0, f64::max);
    let mut t = Table::new(&[
        ("branch", "branch index j'"),
        ("xi_re", "Re of the branch eigenvalue"),
        ("xi_im", "Im of the branch eigenvalue"),
        ("zeta_re", "Re of the branch weight"),
        ("zeta_im", "Im of the branch weight"),
        ("roundtrip_error", "max |c_n| difference between recomposed and direct amplitudes"),
    ]);
    for (i, b) in branches.iter().enumerate() {
        t.push(vec![
            int(i),
            num(b.xi.re),
            num(b.xi.im),
            num(b.zeta.re),
            num(b.zeta.im),
            num(err),
        ]);
    }
    emit(t, &a.out, "decompose", params("decompose", a))
}
