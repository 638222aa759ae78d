use serde_json::{json, Value};

use super::config::Resolver;
use super::output::{csv, g12};
use super::{Cli, CliError, Command, CompareMode, Format, ParamArgs};
use crate::algebra::{parse_mpoly, parse_rat, parse_upoly, rat_to_f64, rat_to_string, Axis, ParseError, Rat};
use crate::cascade::{self, CascadeError, ChainOptions};
use crate::charform::{master_system, to_characteristic, verhulst_polys, CharFormError, CharacteristicSystem};
use crate::dini::{self, DiniError};
use crate::telegraph::{self, McConfig, TelegraphError};
use crate::upwind::{self, Grid1D, UpwindError};
use crate::verhulst::{self, InitialDensity, InitialKind, UserParams, VerhulstError, VerhulstParams};

const DEFAULT_P1: &str = "1";
const DEFAULT_P2: &str = "-2";
const DEFAULT_Q2: &str = "1/2";
const DEFAULT_SMOOTH_INIT: &str = "smooth:a=0.1,b=0.3";
const DEFAULT_DELTA_INIT: &str = "delta:x=0.5";
const DEFAULT_SEED: u64 = 0;

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<VerhulstError> for CliError {
    fn from(e: VerhulstError) -> Self {
        match e {
            VerhulstError::Quad(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<TelegraphError> for CliError {
    fn from(e: TelegraphError) -> Self {
        match e {
            TelegraphError::InvalidConfig(_) => CliError::Validation(e.to_string()),
            TelegraphError::Initial(inner) => inner.into(),
            TelegraphError::BlowUp { .. } | TelegraphError::Flagged { .. } | TelegraphError::Quad(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<UpwindError> for CliError {
    fn from(e: UpwindError) -> Self {
        match e {
            UpwindError::Quad(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<CascadeError> for CliError {
    fn from(e: CascadeError) -> Self {
        match e {
            CascadeError::CharForm(CharFormError::IrrationalSpeeds(_) | CharFormError::NotStrictlyHyperbolic) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<CharFormError> for CliError {
    fn from(e: CharFormError) -> Self {
        CascadeError::from(e).into()
    }
}

impl From<DiniError> for CliError {
    fn from(e: DiniError) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Parameters as exact rationals, validated.
struct ExactParams {
    p1: Rat,
    p2: Rat,
    q2: Rat,
    nu: Rat,
}

impl ExactParams {
    fn resolve(cfg: &mut Resolver, args: &ParamArgs) -> Result<Self, CliError> {
        let p1 = parse_rat(&cfg.text("p1", args.p1.clone(), Some(DEFAULT_P1))?.unwrap_or_default())?;
        let p2 = parse_rat(&cfg.text("p2", args.p2.clone(), Some(DEFAULT_P2))?.unwrap_or_default())?;
        let q2 = parse_rat(&cfg.text("q2", args.q2.clone(), Some(DEFAULT_Q2))?.unwrap_or_default())?;
        // ν defaults to p1, the case with a closed-form solution
        let nu = match cfg.text("nu", args.nu.clone(), None)? {
            Some(s) => parse_rat(&s)?,
            None => {
                cfg.resolved.insert("nu".into(), Value::String(rat_to_string(&p1)));
                p1.clone()
            }
        };
        let out = Self { p1, p2, q2, nu };
        out.user().validate()?;
        Ok(out)
    }

    fn user(&self) -> UserParams {
        UserParams {
            p1: rat_to_f64(&self.p1),
            p2: rat_to_f64(&self.p2),
            q2: rat_to_f64(&self.q2),
            nu: rat_to_f64(&self.nu),
        }
    }

    fn system(&self) -> Result<CharacteristicSystem, CliError> {
        let (p, q) = verhulst_polys(&self.p1, &self.p2, &self.q2);
        Ok(to_characteristic(&master_system(&p, &q, &self.nu))?)
    }

    /// Dimensionless parameters and `ν/p1`, logged once.
    fn dimensionless(&self, cfg: &mut Resolver) -> Result<(VerhulstParams, f64), CliError> {
        let (params, ratio) = self.user().dimensionless()?;
        cfg.resolved.insert("dimensionless".into(), json!({"p2": params.p2(), "q2": params.q2(), "nu_ratio": ratio}));
        Ok((params, ratio))
    }

    fn require_closed_form(&self, what: &str) -> Result<(), CliError> {
        if self.nu != self.p1 {
            return Err(CliError::Validation(format!(
                "{what} needs nu = p1 (got nu = {}, p1 = {}); use `pde` for other switching rates",
                rat_to_string(&self.nu),
                rat_to_string(&self.p1)
            )));
        }
        Ok(())
    }
}

fn parse_init(spec: &str) -> Result<InitialDensity, CliError> {
    let bad = || {
        CliError::Validation(format!(
            "cannot parse --init {spec:?}; expected delta:x=.. | smooth:a=..,b=.. | bump:a=..,b=.. | uniform:a=..,b=.."
        ))
    };
    let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
    let mut fields = std::collections::BTreeMap::new();
    for part in rest.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(bad)?;
        let v: f64 = v.trim().parse().map_err(|_| bad())?;
        fields.insert(k.trim(), v);
    }
    let get = |k: &str| fields.get(k).copied().ok_or_else(bad);
    let expect = |n: usize| if fields.len() == n { Ok(()) } else { Err(bad()) };
    Ok(match kind.trim() {
        "delta" => {
            expect(1)?;
            InitialDensity::delta(get("x")?)?
        }
        "smooth" => {
            expect(2)?;
            InitialDensity::smooth_bump(get("a")?, get("b")?)?
        }
        "bump" => {
            expect(2)?;
            InitialDensity::bump(get("a")?, get("b")?)?
        }
        "uniform" => {
            expect(2)?;
            InitialDensity::uniform(get("a")?, get("b")?)?
        }
        _ => return Err(bad()),
    })
}

fn taus(cfg: &mut Resolver, flag: Vec<f64>) -> Result<Vec<f64>, CliError> {
    let t = cfg.f64_list("tau", flag, &[1.0])?;
    if t.is_empty() || t.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(CliError::Validation("--tau values must be finite and nonnegative".into()));
    }
    Ok(t)
}

fn ascending(t: &[f64]) -> Result<(), CliError> {
    if t.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(CliError::Validation("--tau checkpoints must be strictly ascending".into()))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn json_lines(items: impl IntoIterator<Item = Value>) -> String {
    items.into_iter().map(|v| v.to_string() + "\n").collect()
}

fn only_json(format: Format, command: &str) -> Result<(), CliError> {
    if format == Format::Csv {
        return Err(CliError::Validation(format!("`{command}` only produces JSON")));
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Result<String, CliError> {
    let mut cfg = Resolver::new(cli.config.as_deref())?;
    let seed = cfg.u64("seed", cli.seed, DEFAULT_SEED)?;
    let default_format = match cli.command {
        Command::Exact { .. } | Command::Mc { .. } | Command::Pde { .. } => "csv",
        _ => "json",
    };
    let format =
        match cfg.text("format", cli.format.map(|f| format!("{f:?}").to_lowercase()), Some(default_format))?.as_deref()
        {
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            other => return Err(CliError::Validation(format!("unknown format {other:?}"))),
        };
    if let Some(n) = cli.threads {
        cfg.resolved.insert("threads".into(), Value::from(n));
    }
    if let Some(p) = &cli.out {
        cfg.resolved.insert("out".into(), Value::from(p.display().to_string()));
    }

    let (name, text) = match &cli.command {
        Command::Invariants { params } => ("invariants", invariants(&mut cfg, params, format)?),
        Command::Chain { params, steps, degree_cap } => {
            ("chain", chain(&mut cfg, params, *steps, *degree_cap, format)?)
        }
        Command::Exact { params, init, tau, x_min, x_max, points } => {
            ("exact", exact(&mut cfg, params, init, tau, *x_min, *x_max, *points, format)?)
        }
        Command::Delta { params, x_star, tau, points } => {
            ("delta", delta(&mut cfg, params, *x_star, tau, *points, format)?)
        }
        Command::Mc { params, init, paths, tau, batch_size, bins } => {
            ("mc", mc(&mut cfg, params, init, *paths, tau, *batch_size, *bins, seed, format)?)
        }
        Command::Pde { params, init, cells, cfl, nu_ratio, margin, tau } => {
            ("pde", pde(&mut cfg, params, init, *cells, *cfl, *nu_ratio, *margin, tau, format)?)
        }
        Command::Compare { params, mode, init, tau, paths, cells, cfl } => {
            ("compare", compare(&mut cfg, params, *mode, init, tau, *paths, *cells, *cfl, seed, format)?)
        }
        Command::Dini { demo, trials, max_degree, phi, psi, theta } => {
            ("dini", dini(&mut cfg, *demo, *trials, *max_degree, phi, psi, theta, seed, format)?)
        }
    };
    let mut resolved = std::mem::take(&mut cfg.resolved);
    resolved.insert("command".into(), Value::from(name));
    eprintln!("config: {}", Value::Object(resolved));
    Ok(text)
}

fn invariants(cfg: &mut Resolver, args: &ParamArgs, format: Format) -> Result<String, CliError> {
    only_json(format, "invariants")?;
    let ps = ExactParams::resolve(cfg, args)?;
    let cs = ps.system()?;
    let k = cascade::k_invariant(&cs)?;
    let h = match cascade::invariants(&cs) {
        Ok(pair) => pair.h.to_string(),
        Err(CascadeError::HUndefined) => "undefined".into(),
        Err(e) => return Err(e.into()),
    };
    let out = json!({"h": h, "k": k.to_string(), "system": cs.to_json()});
    Ok(out.to_string() + "\n")
}

fn chain(
    cfg: &mut Resolver,
    args: &ParamArgs,
    steps: Option<usize>,
    degree_cap: Option<usize>,
    format: Format,
) -> Result<String, CliError> {
    only_json(format, "chain")?;
    let ps = ExactParams::resolve(cfg, args)?;
    let defaults = ChainOptions::default();
    let opts = ChainOptions {
        max_steps: cfg.usize("steps", steps, defaults.max_steps)?,
        degree_cap: cfg.usize("degree_cap", degree_cap, defaults.degree_cap)?,
    };
    let chain = cascade::build_chain(&ps.system()?, &opts)?;
    Ok(chain.to_json().to_string() + "\n")
}

fn beyond_outer(xs: &[f64], params: &VerhulstParams) {
    let outer = params.outer_equilibrium();
    let n = xs.iter().filter(|&&x| x > outer).count();
    if n > 0 {
        eprintln!(
            "warning: {n} grid points lie beyond the outer equilibrium x = {}; not reachable from data inside it",
            g12(outer)
        );
    }
}

#[allow(clippy::too_many_arguments)]
fn exact(
    cfg: &mut Resolver,
    args: &ParamArgs,
    init: &Option<String>,
    tau: &[f64],
    x_min: Option<f64>,
    x_max: Option<f64>,
    points: Option<usize>,
    format: Format,
) -> Result<String, CliError> {
    let ps = ExactParams::resolve(cfg, args)?;
    ps.require_closed_form("`exact`")?;
    let (params, _) = ps.dimensionless(cfg)?;
    let w0 = parse_init(&cfg.required_text("init", init.clone().or(Some(DEFAULT_SMOOTH_INIT.into())))?)?;
    if w0.is_delta() {
        return Err(CliError::Validation("delta data have no pointwise density; use `delta`".into()));
    }
    let taus = taus(cfg, tau.to_vec())?;
    let outer = params.outer_equilibrium();
    let lo = cfg.f64("x_min", x_min, 0.01 * outer)?;
    let hi = cfg.f64("x_max", x_max, outer)?;
    let n = cfg.usize("points", points, 200)?;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || n == 0 {
        return Err(CliError::Validation("need 0 < x-min <= x-max and points >= 1".into()));
    }
    let xs = linspace(lo, hi, n);
    beyond_outer(&xs, &params);
    let sols = taus.iter().map(|&t| verhulst::solve_grid(&w0, &xs, t, &params)).collect::<Result<Vec<_>, _>>()?;
    Ok(match format {
        Format::Csv if taus.len() == 1 => {
            csv(&["x", "W", "W1"], xs.iter().zip(&sols[0]).map(|(x, s)| vec![g12(*x), g12(s.w), g12(s.w1)]))
        }
        Format::Csv => csv(
            &["tau", "x", "W", "W1"],
            taus.iter()
                .zip(&sols)
                .flat_map(|(t, sol)| xs.iter().zip(sol).map(move |(x, s)| vec![g12(*t), g12(*x), g12(s.w), g12(s.w1)])),
        ),
        Format::Json => json_lines(taus.iter().zip(&sols).map(|(t, sol)| {
            let grid: Vec<Value> = xs.iter().zip(sol).map(|(x, s)| json!({"x": x, "W": s.w, "W1": s.w1})).collect();
            json!({"tau": t, "density_grid": grid})
        })),
    })
}

fn delta(
    cfg: &mut Resolver,
    args: &ParamArgs,
    x_star: Option<f64>,
    tau: &[f64],
    points: Option<usize>,
    format: Format,
) -> Result<String, CliError> {
    let ps = ExactParams::resolve(cfg, args)?;
    ps.require_closed_form("`delta`")?;
    let (params, _) = ps.dimensionless(cfg)?;
    let xstar = cfg.f64("x_star", x_star, 0.5)?;
    let taus = taus(cfg, tau.to_vec())?;
    let n = cfg.usize("points", points, 200)?;
    if n < 2 {
        return Err(CliError::Validation("--points must be at least 2".into()));
    }
    struct Slice {
        tau: f64,
        atoms: Vec<(f64, f64, f64)>,
        continuous: f64,
        grid: Vec<(f64, f64, f64)>,
    }
    let mut slices = Vec::new();
    for &t in &taus {
        let d = verhulst::solve_delta(xstar, t, &params)?;
        let atoms: Vec<(f64, f64, f64)> = match d.atoms() {
            [one] => vec![(one.x, one.mass, 0.0)],
            [a, b] => vec![(a.x, a.mass, -a.mass), (b.x, b.mass, b.mass)],
            _ => unreachable!("delta data produce one or two atoms"),
        };
        let grid = match d.support() {
            Some((lo, hi)) if t > 0.0 && hi > lo => {
                // interior points only; the endpoints carry the atoms
                let h = (hi - lo) / (n + 1) as f64;
                (1..=n)
                    .map(|i| {
                        let x = lo + h * i as f64;
                        (x, d.density_at(x), verhulst::delta_w1_density(x, xstar, t, &params))
                    })
                    .collect()
            }
            _ => Vec::new(),
        };
        slices.push(Slice { tau: t, atoms, continuous: d.continuous_mass().map_err(VerhulstError::from)?, grid });
    }
    Ok(match format {
        Format::Json => json_lines(slices.iter().map(|s| {
            json!({
                "tau": s.tau,
                "atoms": s.atoms.iter().map(|(x, m, m1)| json!({"x": x, "mass": m, "W1_mass": m1})).collect::<Vec<_>>(),
                "continuous_mass": s.continuous,
                "density_grid": s.grid.iter().map(|(x, w, w1)| json!({"x": x, "W": w, "W1": w1})).collect::<Vec<_>>(),
            })
        })),
        Format::Csv => {
            for s in &slices {
                for (x, m, m1) in &s.atoms {
                    eprintln!(
                        "atom: tau = {}, x = {}, mass = {}, W1 mass = {}",
                        g12(s.tau),
                        g12(*x),
                        g12(*m),
                        g12(*m1)
                    );
                }
            }
            if slices.len() == 1 {
                csv(&["x", "W", "W1"], slices[0].grid.iter().map(|(x, w, w1)| vec![g12(*x), g12(*w), g12(*w1)]))
            } else {
                csv(
                    &["tau", "x", "W", "W1"],
                    slices.iter().flat_map(|s| {
                        s.grid.iter().map(move |(x, w, w1)| vec![g12(s.tau), g12(*x), g12(*w), g12(*w1)])
                    }),
                )
            }
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn ensemble(
    cfg: &mut Resolver,
    params: VerhulstParams,
    flip_rate: f64,
    init: InitialDensity,
    paths: Option<usize>,
    taus: Vec<f64>,
    batch_size: Option<usize>,
    seed: u64,
) -> Result<telegraph::EmpiricalEnsemble, CliError> {
    let mut mc = McConfig::new(params, init, cfg.usize("paths", paths, 100_000)?, taus, seed);
    mc.batch_size = cfg.usize("batch_size", batch_size, telegraph::DEFAULT_BATCH_SIZE)?;
    mc.flip_rate = flip_rate;
    Ok(telegraph::simulate(&mc)?)
}

#[allow(clippy::too_many_arguments)]
fn mc(
    cfg: &mut Resolver,
    args: &ParamArgs,
    init: &Option<String>,
    paths: Option<usize>,
    tau: &[f64],
    batch_size: Option<usize>,
    bins: Option<usize>,
    seed: u64,
    format: Format,
) -> Result<String, CliError> {
    let ps = ExactParams::resolve(cfg, args)?;
    let (params, flip_rate) = ps.dimensionless(cfg)?;
    let w0 = parse_init(&cfg.required_text("init", init.clone().or(Some(DEFAULT_DELTA_INIT.into())))?)?;
    let taus = taus(cfg, tau.to_vec())?;
    ascending(&taus)?;
    let bins = cfg.opt_usize("bins", bins)?;
    let ens = ensemble(cfg, params, flip_rate, w0, paths, taus, batch_size, seed)?;
    let per_tau = ens.checkpoints.iter().enumerate().map(|(k, t)| (*t, ens.at(k)));
    Ok(match (bins, format) {
        (Some(0), _) => return Err(CliError::Validation("--bins must be positive".into())),
        (Some(nb), fmt) => {
            let hist: Vec<(f64, Vec<(f64, f64)>)> = per_tau.map(|(t, s)| (t, histogram(s, nb))).collect();
            match fmt {
                Format::Csv => csv(
                    &["tau", "x_mid", "density"],
                    hist.iter().flat_map(|(t, h)| h.iter().map(move |(x, d)| vec![g12(*t), g12(*x), g12(*d)])),
                ),
                Format::Json => json_lines(hist.iter().map(|(t, h)| {
                    let b: Vec<Value> = h.iter().map(|(x, d)| json!({"x_mid": x, "density": d})).collect();
                    json!({"tau": t, "paths": ens.paths, "bins": b})
                })),
            }
        }
        (None, Format::Csv) => {
            csv(&["tau", "sample"], per_tau.flat_map(|(t, s)| s.iter().map(move |x| vec![g12(t), g12(*x)])))
        }
        (None, Format::Json) => json_lines(per_tau.map(|(t, s)| json!({"tau": t, "paths": ens.paths, "samples": s}))),
    })
}

/// Equal-width histogram over the sample range, normalized to unit area.
fn histogram(sorted: &[f64], bins: usize) -> Vec<(f64, f64)> {
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &x in sorted {
        let i = (((x - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let n = sorted.len() as f64;
    counts.iter().enumerate().map(|(i, &c)| (lo + width * (i as f64 + 0.5), c as f64 / (n * width))).collect()
}

#[allow(clippy::too_many_arguments)]
fn pde(
    cfg: &mut Resolver,
    args: &ParamArgs,
    init: &Option<String>,
    cells: Option<usize>,
    cfl: Option<f64>,
    nu_ratio: Option<f64>,
    margin: Option<f64>,
    tau: &[f64],
    format: Format,
) -> Result<String, CliError> {
    let ps = ExactParams::resolve(cfg, args)?;
    let (params, implied) = ps.dimensionless(cfg)?;
    let nu_ratio = cfg.f64("nu_ratio", nu_ratio, implied)?;
    let w0 = parse_init(&cfg.required_text("init", init.clone().or(Some(DEFAULT_SMOOTH_INIT.into())))?)?;
    let grid = Grid1D::covering(
        &params,
        cfg.f64("margin", margin, upwind::DEFAULT_MARGIN)?,
        cfg.usize("cells", cells, 2000)?,
    )?;
    let cfl = cfg.f64("cfl", cfl, upwind::DEFAULT_CFL)?;
    let taus = taus(cfg, tau.to_vec())?;
    ascending(&taus)?;
    let sol = upwind::solve(&upwind::project(&w0, &grid)?, &grid, &taus, &params, nu_ratio, cfl)?;
    eprintln!("diagnostics: {}", serde_json::to_string(&sol.diagnostics).expect("serializable diagnostics"));
    let xs = grid.centers();
    Ok(match format {
        Format::Csv => csv(
            &["tau", "x", "W", "W1"],
            sol.states.iter().flat_map(|s| {
                xs.iter().enumerate().map(move |(i, x)| vec![g12(s.tau), g12(*x), g12(s.w[i]), g12(s.w1[i])])
            }),
        ),
        Format::Json => json_lines(sol.states.iter().map(|s| {
            let g: Vec<Value> =
                xs.iter().enumerate().map(|(i, x)| json!({"x": x, "W": s.w[i], "W1": s.w1[i]})).collect();
            json!({"tau": s.tau, "cells": grid.cells, "density_grid": g})
        })),
    })
}

#[allow(clippy::too_many_arguments)]
fn compare(
    cfg: &mut Resolver,
    args: &ParamArgs,
    mode: Option<CompareMode>,
    init: &Option<String>,
    tau: &[f64],
    paths: Option<usize>,
    cells: Option<usize>,
    cfl: Option<f64>,
    seed: u64,
    format: Format,
) -> Result<String, CliError> {
    let mode = match cfg.text("mode", mode.map(|m| m.name().to_string()), Some("exact-vs-mc"))?.as_deref() {
        Some("exact-vs-mc") => CompareMode::ExactVsMc,
        Some("exact-vs-pde") => CompareMode::ExactVsPde,
        other => return Err(CliError::Validation(format!("unknown compare mode {other:?}"))),
    };
    let ps = ExactParams::resolve(cfg, args)?;
    ps.require_closed_form("`compare`")?;
    let (params, flip_rate) = ps.dimensionless(cfg)?;
    let default_init = if mode == CompareMode::ExactVsMc { DEFAULT_DELTA_INIT } else { DEFAULT_SMOOTH_INIT };
    let w0 = parse_init(&cfg.required_text("init", init.clone().or(Some(default_init.into())))?)?;
    let taus = taus(cfg, tau.to_vec())?;
    ascending(&taus)?;
    let rows: Vec<(f64, &str, f64, &str, usize)> = match mode {
        CompareMode::ExactVsMc => {
            let ens = ensemble(cfg, params, flip_rate, w0.clone(), paths, taus.clone(), None, seed)?;
            let mut rows = Vec::new();
            for (k, &t) in taus.iter().enumerate() {
                let exact = verhulst::solution_distribution(&w0, t, &params)?;
                let ks = telegraph::kolmogorov_distance(ens.at(k), &exact).map_err(VerhulstError::from)?;
                rows.push((t, "kolmogorov", ks, "paths", ens.paths));
            }
            rows
        }
        CompareMode::ExactVsPde => {
            if let InitialKind::Delta(_) = w0.kind() {
                return Err(CliError::Validation("exact-vs-pde needs smooth initial data".into()));
            }
            let cells = cfg.usize("cells", cells, 2000)?;
            let cfl = cfg.f64("cfl", cfl, upwind::DEFAULT_CFL)?;
            let grid = Grid1D::covering(&params, upwind::DEFAULT_MARGIN, cells)?;
            let sol = upwind::solve(&upwind::project(&w0, &grid)?, &grid, &taus, &params, flip_rate, cfl)?;
            let xs = grid.centers();
            let mut rows = Vec::new();
            for s in &sol.states {
                let exact = verhulst::solve_grid(&w0, &xs, s.tau, &params)?;
                let l1 = exact.iter().zip(&s.w).map(|(e, w)| (e.w - w).abs()).sum::<f64>() * grid.dx();
                rows.push((s.tau, "l1", l1, "cells", cells));
            }
            rows
        }
    };
    Ok(match format {
        Format::Json => json_lines(rows.iter().map(|(t, mk, m, nk, n)| {
            let mut o = serde_json::Map::new();
            o.insert("tau".into(), json!(t));
            o.insert((*mk).into(), json!(m));
            o.insert((*nk).into(), json!(n));
            Value::Object(o)
        })),
        Format::Csv => {
            let (mk, nk) = (rows[0].1, rows[0].3);
            csv(&["tau", mk, nk], rows.iter().map(|(t, _, m, _, n)| vec![g12(*t), g12(*m), n.to_string()]))
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn dini(
    cfg: &mut Resolver,
    demo: bool,
    trials: Option<usize>,
    max_degree: Option<u32>,
    phi: &Option<String>,
    psi: &Option<String>,
    theta: &Option<String>,
    seed: u64,
    format: Format,
) -> Result<String, CliError> {
    only_json(format, "dini")?;
    let demo = cfg.flag("demo", demo)?;
    let report = if demo {
        let trials = cfg.usize("trials", trials, 50)?;
        let max_degree = cfg.u64("max_degree", max_degree.map(u64::from), 4)?;
        let max_degree =
            u32::try_from(max_degree).map_err(|_| CliError::Validation("--max-degree too large".into()))?;
        let r = dini::demo(seed, trials, max_degree)?;
        serde_json::to_value(&r).expect("serializable report")
    } else {
        let phi = cfg.text("phi", phi.clone(), Some("0"))?.unwrap_or_default();
        let psi = cfg.text("psi", psi.clone(), Some("0"))?.unwrap_or_default();
        let theta = cfg.text("theta", theta.clone(), Some("0"))?.unwrap_or_default();
        let phi = parse_mpoly(&phi, &[("a", Axis::X), ("b", Axis::Y)])?;
        let psi = parse_mpoly(&psi, &[("y", Axis::Y), ("z", Axis::Z)])?;
        let theta = parse_upoly(&theta, "y")?;
        let v = dini::dini_v(&phi, &psi)?;
        let u = dini::dini_u(&v, &theta)?;
        let trial = dini::run_trial(&phi, &psi, &theta)?;
        let all_zero = trial.residual_terms == 0 && trial.x1_defect_terms == 0 && trial.x3_defect_terms == 0;
        json!({"v": v.to_string(), "u": u.to_string(), "trials": [trial], "all_zero": all_zero})
    };
    if report["all_zero"] != Value::Bool(true) {
        return Err(CliError::Numerical(format!("nonzero residual in Dini report: {report}")));
    }
    Ok(report.to_string() + "\n")
}
