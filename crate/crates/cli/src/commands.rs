use std::collections::BTreeMap;
use std::path::Path;

use dfpep::model::{gamma_nonrelativistic, gamma_relativistic, recast_coeffs, Coupling, EtaBranch, RecastForm};
use dfpep::oracle::approximation_error_report;
use dfpep::spectrum::{coupled_residual, is_decaying, nonrelativistic_energy, solve_relativistic};
use dfpep::table1::{validate, Table1};
use dfpep::thermo::{
    free_energy, log_grid, log_partition, mean_energy, partition_closed_form, specific_heat, thermo_coeffs,
    Bounds, ThermoCoeffs, ZForm,
};
use dfpep::wavefunction::{count_nodes, eval_f, eval_r, normalize};
use dfpep::{ApproxScheme, PhysicalConstants, PotentialParams, RadialSolution, StateLabel};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ContextKind, FigureKind, FigureSpec, RunConfig};
use crate::output::{Cell, OutDir, Table};
use crate::CliError;

/// Command-line switches that take precedence over the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub branch_eta: Option<EtaBranch>,
    pub q1_mode: Option<RecastForm>,
    pub bounds: Option<Bounds>,
}

/// Number of items that failed; nonzero maps to exit code 3.
#[derive(Debug, Clone, Copy, Default)]
pub struct Outcome {
    pub failures: usize,
}

fn failure(state: &StateLabel, error: impl ToString) -> Value {
    json!({"n": state.n, "l": state.l, "d": state.d, "error": error.to_string()})
}

struct Model {
    params: PotentialParams,
    scheme: ApproxScheme,
    constants: PhysicalConstants,
}

fn model(cfg: &RunConfig) -> Result<Model, CliError> {
    let params = cfg.potential.build()?;
    let scheme = cfg.scheme.build(params.alpha)?;
    let constants = cfg.constants.build()?;
    Ok(Model { params, scheme, constants })
}

pub fn spectrum(cfg: &RunConfig, out: &mut OutDir, config: &Path) -> Result<Outcome, CliError> {
    let Model { params, scheme, constants } = model(cfg)?;
    let states = cfg.states.build()?;
    let window = cfg.window()?;
    let (m, hbar, mu) = (constants.m, constants.hbar, constants.mu);

    let results: Vec<Result<Vec<Vec<Cell>>, String>> = states
        .par_iter()
        .map(|st| {
            let label = |branch: &str, e: f64, f: f64, flags: String| {
                vec![st.n.into(), st.l.into(), st.d.into(), Cell::text(branch), e.into(), f.into(), Cell::Text(flags)]
            };
            match cfg.context {
                ContextKind::Relativistic => solve_relativistic(st, &params, &scheme, mu, &window)
                    .map(|o| {
                        o.roots
                            .iter()
                            .map(|r| label(r.branch.as_str(), r.energy, r.residual, r.validity.flags()))
                            .collect()
                    })
                    .map_err(|e| e.to_string()),
                ContextKind::Nonrelativistic => {
                    let e = nonrelativistic_energy(st, &params, &scheme, &constants).map_err(|e| e.to_string())?;
                    let coupling = Coupling::nonrelativistic(e, m, hbar);
                    let f = coupled_residual(&params, &scheme, st.kappa(), st.n, coupling)
                        .map_err(|e| e.to_string())?;
                    let g = gamma_nonrelativistic(&params, &scheme, st.kappa(), e, &constants);
                    let mut flags = if g.is_bound_valid() { "gamma1_le_0" } else { "gamma1_gt_0" }.to_string();
                    if !is_decaying(&g, &params, st.n) {
                        flags.push_str("|growing_tail");
                    }
                    Ok(vec![label("nonrelativistic", e, f, flags)])
                }
            }
        })
        .collect();

    let mut table = Table::new(&["n", "l", "D", "branch", "E", "residual", "validity_flags"]);
    let mut failures = Vec::new();
    for (st, res) in states.iter().zip(results) {
        match res {
            Ok(rows) => rows.into_iter().for_each(|r| table.push(r)),
            Err(e) => failures.push(failure(st, e)),
        }
    }
    out.csv("spectrum.csv", &table)?;
    let mut mirror = table.to_json();
    mirror["failures"] = json!(failures);
    out.json("spectrum.json", &mirror)?;
    out.meta(
        "spectrum",
        Some(config),
        json!({
            "name": cfg.name,
            "context": format!("{:?}", cfg.context).to_lowercase(),
            "states": states.len(),
            "window": {"lo": window.lo, "hi": window.hi, "grid": window.grid},
        }),
    )?;
    Ok(Outcome { failures: failures.len() })
}

/// Doubles `r_max` from `1/alpha` until `|F(r_max)| < 1e-8` of the sampled peak.
fn auto_r_max(sol: &RadialSolution) -> dfpep::Result<f64> {
    let r_lo = sol.r_min();
    let mut r_max = r_lo + 1.0 / sol.params.alpha;
    for _ in 0..40 {
        let mut peak: f64 = 0.0;
        for i in 1..=2000 {
            let r = r_lo + (r_max - r_lo) * f64::from(i) / 2000.0;
            peak = peak.max(eval_f(sol, r)?.abs());
        }
        if peak > 0.0 && eval_f(sol, r_max)?.abs() < 1e-8 * peak {
            return Ok(r_max);
        }
        r_max = r_lo + 2.0 * (r_max - r_lo);
    }
    Err(dfpep::Error::NonConvergence(format!("wavefunction has not decayed by r = {r_max}")))
}

struct Curve {
    table: Table,
    energy: f64,
    r_max: f64,
    nodes: u32,
    decayed: bool,
}

fn curve(cfg: &RunConfig, m: &Model, st: &StateLabel) -> dfpep::Result<Curve> {
    let w = &cfg.wavefunction;
    let energy = match (w.energy, cfg.context) {
        (Some(e), _) => e.0,
        (None, ContextKind::Nonrelativistic) => nonrelativistic_energy(st, &m.params, &m.scheme, &m.constants)?,
        (None, ContextKind::Relativistic) => {
            let window = cfg.window().map_err(|e| dfpep::Error::InvalidParameter(e.to_string()))?;
            let outcome = solve_relativistic(st, &m.params, &m.scheme, m.constants.mu, &window)?;
            let branch = w.branch.into();
            outcome
                .roots
                .iter()
                .find(|r| r.branch == branch)
                .map(|r| r.energy)
                .ok_or_else(|| dfpep::Error::Domain(format!("no {} root for this state", branch.as_str())))?
        }
    };
    let gamma = match cfg.context {
        ContextKind::Relativistic => gamma_relativistic(&m.params, &m.scheme, st, energy, m.constants.mu),
        ContextKind::Nonrelativistic => gamma_nonrelativistic(&m.params, &m.scheme, st.kappa(), energy, &m.constants),
    };
    let raw = RadialSolution::new(*st, energy, &gamma, &m.params, w.exponent.into())?;
    let r_max = match w.r_max {
        Some(r) => r.0,
        None => auto_r_max(&raw)?,
    };
    let sol = normalize(&raw, r_max)?;
    let count = count_nodes(&sol, r_max, 20_000)?;
    let r_lo = sol.r_min();
    let mut table = Table::new(&["r", "F", "R"]);
    let points = w.points.max(2);
    for i in 1..=points {
        let r = r_lo + (r_max - r_lo) * i as f64 / points as f64;
        table.push(vec![r.into(), eval_f(&sol, r)?.into(), eval_r(&sol, r)?.into()]);
    }
    Ok(Curve { table, energy, r_max, nodes: count.nodes, decayed: count.decayed })
}

pub fn wavefunction(cfg: &RunConfig, out: &mut OutDir, config: &Path) -> Result<Outcome, CliError> {
    let m = model(cfg)?;
    cfg.window()?;
    let states = cfg.states.build()?;
    let curves: Vec<dfpep::Result<Curve>> = states.par_iter().map(|st| curve(cfg, &m, st)).collect();
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (st, c) in states.iter().zip(curves) {
        match c {
            Ok(c) => {
                let name = format!("wavefunction_n{}_l{}_d{}.csv", st.n, st.l, st.d);
                out.csv(&name, &c.table)?;
                entries.push(json!({
                    "n": st.n, "l": st.l, "d": st.d, "file": name,
                    "energy": c.energy,
                    "reference_energy": cfg.wavefunction.reference_energy.map(|e| e.0),
                    "r_max": c.r_max, "nodes": c.nodes, "decayed": c.decayed,
                }));
            }
            Err(e) => failures.push(failure(st, e)),
        }
    }
    out.json("wavefunction.json", &json!({"curves": entries, "failures": failures}))?;
    out.meta(
        "wavefunction",
        Some(config),
        json!({"name": cfg.name, "reference_energy": cfg.wavefunction.reference_energy.map(|e| e.0), "points": cfg.wavefunction.points}),
    )?;
    Ok(Outcome { failures: failures.len() })
}

struct ThermoSetup<'a> {
    model: Model,
    state: StateLabel,
    form: RecastForm,
    branch: EtaBranch,
    bounds: Bounds,
    betas: Vec<f64>,
    cfg: &'a RunConfig,
}

impl ThermoSetup<'_> {
    fn coeffs(&self, params: &PotentialParams, state: &StateLabel, beta: f64) -> dfpep::Result<ThermoCoeffs> {
        let scheme = self.cfg.scheme.build(params.alpha).map_err(|e| dfpep::Error::InvalidParameter(e.to_string()))?;
        let rc = recast_coeffs(params, &scheme, state, &self.model.constants, self.form, self.branch)?;
        thermo_coeffs(&rc, params.alpha, self.model.constants.m, self.model.constants.hbar, beta)
    }
}

const THERMO_COLUMNS: [&str; 9] = ["eta", "x", "beta", "sum", "integral", "closed_form", "ln_sum", "ln_integral", "note"];

/// Sum, integral and closed-form values of one figure quantity, with notes for anything undefined.
fn thermo_row(kind: FigureKind, tc: &ThermoCoeffs, bounds: Bounds, kb: f64, x: f64) -> Vec<Cell> {
    let mut notes = Vec::new();
    let mut keep = |label: &str, r: dfpep::Result<f64>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{label}: {e}"));
            None
        }
    };
    let integral_form = ZForm::Integral(bounds);
    let (mut ln_sum, mut ln_int) = (None, None);
    let (sum, integral, closed) = match kind {
        FigureKind::ZBeta | FigureKind::ZDimension | FigureKind::ZP2 => {
            ln_sum = keep("sum", log_partition(tc, ZForm::Sum));
            ln_int = keep("integral", log_partition(tc, integral_form));
            let closed = keep("closed_form", partition_closed_form(tc, bounds).map(|c| c.value));
            (ln_sum.map(f64::exp), ln_int.map(f64::exp), closed)
        }
        FigureKind::UBeta => {
            let s = mean_energy(tc, ZForm::Sum);
            let i = mean_energy(tc, integral_form);
            let printed = i.as_ref().ok().and_then(|v| v.printed);
            (keep("sum", s.map(|v| v.value)), keep("integral", i.map(|v| v.value)), printed)
        }
        FigureKind::FBeta => {
            let closed = partition_closed_form(tc, bounds)
                .and_then(|c| {
                    if c.value > 0.0 {
                        Ok(-c.value.ln() / tc.beta)
                    } else {
                        Err(dfpep::Error::Domain(format!("closed-form Z = {:e} is not positive", c.value)))
                    }
                });
            (
                keep("sum", free_energy(tc, ZForm::Sum)),
                keep("integral", free_energy(tc, integral_form)),
                keep("closed_form", closed),
            )
        }
        FigureKind::CBeta => {
            let s = specific_heat(tc, ZForm::Sum, kb);
            let i = specific_heat(tc, integral_form, kb);
            let printed = i.as_ref().ok().and_then(|v| v.printed);
            (keep("sum", s.map(|v| v.value)), keep("integral", i.map(|v| v.value)), printed)
        }
    };
    vec![
        tc.eta.into(),
        x.into(),
        tc.beta.into(),
        Cell::opt(sum),
        Cell::opt(integral),
        Cell::opt(closed),
        Cell::opt(ln_sum),
        Cell::opt(ln_int),
        Cell::Text(notes.join("; ")),
    ]
}

fn figure_table(setup: &ThermoSetup, fig: &FigureSpec) -> Result<(Table, usize), CliError> {
    let base = &setup.model.params;
    let etas: Vec<Option<f64>> =
        if fig.etas.is_empty() { vec![None] } else { fig.etas.iter().map(|e| Some(e.0)).collect() };
    // (x, params, state, beta) for every sample point
    let points: Vec<(f64, PotentialParams, StateLabel, f64)> = match fig.kind {
        FigureKind::ZBeta | FigureKind::UBeta | FigureKind::FBeta | FigureKind::CBeta => {
            setup.betas.iter().map(|&b| (b, *base, setup.state, b)).collect()
        }
        FigureKind::ZDimension | FigureKind::ZP2 => {
            let beta = fig
                .beta
                .ok_or_else(|| CliError::Config(format!("figure {}: sweep needs a fixed beta", fig.name)))?
                .0;
            if fig.kind == FigureKind::ZDimension {
                fig.dimensions
                    .iter()
                    .map(|&d| {
                        let st = StateLabel::new(setup.state.n, setup.state.l, d)
                            .map_err(|e| CliError::Config(format!("figure {}: {e}", fig.name)))?;
                        Ok((f64::from(d), *base, st, beta))
                    })
                    .collect::<Result<_, CliError>>()?
            } else {
                fig.p2.iter().map(|p2| (p2.0, PotentialParams { p2: p2.0, ..*base }, setup.state, beta)).collect()
            }
        }
    };
    let rows: Vec<(Vec<Cell>, bool)> = etas
        .iter()
        .flat_map(|eta| points.iter().map(move |p| (*eta, *p)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(eta, (x, params, st, beta))| match setup.coeffs(params, st, *beta) {
            Ok(tc) => {
                let tc = eta.map_or(tc, |e| tc.with_eta(e));
                (thermo_row(fig.kind, &tc, setup.bounds, setup.model.constants.kb, *x), false)
            }
            Err(e) => {
                let mut row = vec![Cell::opt(*eta), (*x).into(), (*beta).into()];
                row.extend(std::iter::repeat_n(Cell::Empty, 5));
                row.push(Cell::Text(format!("recast: {e}")));
                (row, true)
            }
        })
        .collect();
    let mut table = Table::new(&THERMO_COLUMNS);
    let mut failures = 0;
    for (row, failed) in rows {
        failures += usize::from(failed);
        table.push(row);
    }
    Ok((table, failures))
}

pub fn thermo(cfg: &RunConfig, ov: Overrides, out: &mut OutDir, config: &Path) -> Result<Outcome, CliError> {
    let t = &cfg.thermo;
    let state = match t.state {
        Some(s) => s.build()?,
        None => StateLabel::new(0, 0, 3).map_err(|e| CliError::Config(e.to_string()))?,
    };
    let betas = log_grid(t.beta.lo.0, t.beta.hi.0, t.beta.per_decade)
        .map_err(|e| CliError::Config(format!("thermo.beta: {e}")))?;
    for fig in &t.figures {
        if fig.name.is_empty() || !fig.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(CliError::Config(format!("figure name {:?} must be [A-Za-z0-9_-]+", fig.name)));
        }
    }
    let setup = ThermoSetup {
        model: model(cfg)?,
        state,
        form: ov.q1_mode.or(t.q1_mode).unwrap_or_default(),
        branch: ov.branch_eta.or(t.branch_eta).unwrap_or_default(),
        bounds: ov.bounds.or(t.bounds).unwrap_or_default(),
        betas,
        cfg,
    };
    let mut failures = 0;
    let mut files = Vec::new();
    for fig in &t.figures {
        let (table, failed) = figure_table(&setup, fig)?;
        let name = format!("thermo_{}.csv", fig.name);
        out.csv(&name, &table)?;
        failures += failed;
        files.push(json!({"figure": fig.name, "file": name, "rows": table.rows.len(), "failed_rows": failed}));
    }
    out.meta(
        "thermo",
        Some(config),
        json!({
            "name": cfg.name,
            "beta_grid": {"lo": t.beta.lo.0, "hi": t.beta.hi.0, "per_decade": t.beta.per_decade, "points": setup.betas.len()},
            "q1_mode": format!("{:?}", setup.form).to_lowercase(),
            "branch_eta": format!("{:?}", setup.branch).to_lowercase(),
            "bounds": format!("{:?}", setup.bounds).to_lowercase(),
            "state": {"n": state.n, "l": state.l, "d": state.d},
            "figures": files,
        }),
    )?;
    Ok(Outcome { failures })
}

pub fn validate_table1(cfg: Option<&RunConfig>, out: &mut OutDir, config: Option<&Path>) -> Result<Outcome, CliError> {
    let table = Table1::load().map_err(|e| CliError::Io(anyhow::anyhow!(e)))?;
    let window = match cfg {
        Some(c) if c.window.is_some() => c.window()?,
        _ => dfpep::SolverWindow::default_for(table.parameters.mu),
    };
    let report = validate(&table, &window).map_err(|e| CliError::Io(anyhow::anyhow!(e)))?;
    let best = report
        .candidates
        .iter()
        .min_by(|a, b| {
            (b.reproduced_count, a.max_abs_delta.unwrap_or(f64::INFINITY))
                .partial_cmp(&(a.reproduced_count, b.max_abs_delta.unwrap_or(f64::INFINITY)))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|c| c.candidate);

    let mut csv = Table::new(&[
        "q", "c0", "n", "l", "D", "printed_positive", "printed_negative", "solver_positive", "solver_negative",
        "delta_positive", "delta_negative", "printed_residual_positive", "printed_residual_negative",
        "solver_residual_max", "reproduced",
    ]);
    for c in &report.candidates {
        for e in &c.entries {
            let solver_max = e.solver_residuals.iter().map(|r| r.abs()).fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
            csv.push(vec![
                c.candidate.q.into(),
                c.candidate.c0.into(),
                e.n.into(),
                e.l.into(),
                e.d.into(),
                e.printed_positive.into(),
                e.printed_negative.into(),
                Cell::opt(e.solver_positive),
                Cell::opt(e.solver_negative),
                Cell::opt(e.delta_positive),
                Cell::opt(e.delta_negative),
                Cell::opt(e.residual_positive),
                Cell::opt(e.residual_negative),
                Cell::opt(solver_max),
                Cell::text(if e.reproduced { "true" } else { "false" }),
            ]);
        }
    }
    out.csv("table1_report.csv", &csv)?;
    out.json("table1_report.json", &json!({"best_candidate": best, "report": report}))?;
    out.meta(
        "validate-table1",
        config,
        json!({
            "any_full_reproduction": report.any_full_reproduction,
            "pattern": report.pattern,
            "window": {"lo": window.lo, "hi": window.hi, "grid": window.grid},
        }),
    )?;
    Ok(Outcome::default())
}

pub fn oracle_compare(cfg: &RunConfig, out: &mut OutDir, config: &Path) -> Result<Outcome, CliError> {
    if cfg.context != ContextKind::Nonrelativistic {
        return Err(CliError::Config("oracle-compare needs \"context\": \"nonrelativistic\"".into()));
    }
    let Model { params, constants, .. } = model(cfg)?;
    let states = cfg.states.build()?;
    let alphas: Vec<f64> =
        if cfg.oracle.alpha_scan.is_empty() { vec![params.alpha] } else { cfg.oracle.alpha_scan.iter().map(|a| a.0).collect() };
    // highest n requested per (l, D)
    let mut groups: BTreeMap<(u32, u32), u32> = BTreeMap::new();
    for st in &states {
        let e = groups.entry((st.l, st.d)).or_insert(0);
        *e = (*e).max(st.n);
    }
    let mut jobs = Vec::new();
    for &alpha in &alphas {
        let p = PotentialParams::new(params.p1, params.p2, params.p3, params.q, alpha)
            .map_err(|e| CliError::Config(format!("oracle.alpha_scan: {e}")))?;
        let scheme = cfg.scheme.build(alpha)?;
        let grid = cfg.oracle.grid(alpha)?;
        for (&(l, d), &top) in &groups {
            let st = StateLabel::new(0, l, d).map_err(|e| CliError::Config(e.to_string()))?;
            jobs.push((alpha, p, scheme, grid, st, top));
        }
    }
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(alpha, p, scheme, grid, st, top)| {
            (*alpha, *st, approximation_error_report(p, scheme, st, &constants, grid, *top as usize + 1))
        })
        .collect();

    let mut table = Table::new(&[
        "alpha", "n", "l", "D", "E_analytic", "E_pekeris_numeric", "E_exact_numeric", "gap", "analytic_rel_gap",
    ]);
    let mut failures = Vec::new();
    for (alpha, st, res) in results {
        match res {
            Ok(rep) => {
                for row in rep.rows.iter().filter(|r| states.contains(&StateLabel { n: r.n, ..st })) {
                    table.push(vec![
                        alpha.into(),
                        row.n.into(),
                        st.l.into(),
                        st.d.into(),
                        Cell::opt(row.analytic),
                        row.pekeris_numeric.into(),
                        row.exact_numeric.into(),
                        row.approximation_gap.abs().into(),
                        Cell::opt(row.analytic_relative_gap),
                    ]);
                }
            }
            Err(e) => {
                let mut f = failure(&st, e);
                f["alpha"] = json!(alpha);
                failures.push(f);
            }
        }
    }
    out.csv("oracle_compare.csv", &table)?;
    let mut mirror = table.to_json();
    mirror["failures"] = json!(failures);
    out.json("oracle_compare.json", &mirror)?;
    out.meta("oracle-compare", Some(config), json!({"name": cfg.name, "alphas": alphas}))?;
    Ok(Outcome { failures: failures.len() })
}
