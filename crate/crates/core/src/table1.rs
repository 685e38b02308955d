//! Embedded reference dataset of printed relativistic energies and the
//! comparison against the solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ApproxScheme, PotentialParams, StateLabel};
use crate::spectrum::{relativistic_residual, solve_relativistic, Branch, SolverWindow};

pub const RAW: &str = include_str!("../data/table1.json");

/// Agreement required for a cell to count as reproduced.
pub const REPRODUCTION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableParameters {
    pub mu: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub lambda: f64,
    pub omega: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub n: u32,
    pub l: u32,
    pub d: u32,
    pub positive: f64,
    pub negative: f64,
}

impl TableEntry {
    pub fn state(&self) -> Result<StateLabel> {
        StateLabel::new(self.n, self.l, self.d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1 {
    pub version: u32,
    pub units: String,
    pub parameters: TableParameters,
    pub entries: Vec<TableEntry>,
}

impl Table1 {
    pub fn load() -> Result<Self> {
        let t: Table1 = serde_json::from_str(RAW)
            .map_err(|e| Error::InvalidParameter(format!("embedded table is malformed: {e}")))?;
        if t.entries.len() != 90 {
            return Err(Error::InvalidParameter(format!(
                "embedded table has {} entries, expected 90",
                t.entries.len()
            )));
        }
        Ok(t)
    }

    pub fn entry(&self, n: u32, l: u32, d: u32) -> Option<&TableEntry> {
        self.entries.iter().find(|e| e.n == n && e.l == l && e.d == d)
    }

    /// Potential for a given deformation `q`.
    pub fn potential(&self, q: f64) -> Result<PotentialParams> {
        let p = &self.parameters;
        PotentialParams::new(p.p1, p.p2, p.p3, q, p.alpha)
    }

    pub fn scheme(&self, c0: f64) -> ApproxScheme {
        ApproxScheme::new(c0, self.parameters.omega, self.parameters.lambda)
    }
}

/// `(q, c0)` pair tried against the table (neither is stated with it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub q: f64,
    pub c0: f64,
}

pub fn candidates() -> Vec<Candidate> {
    [0.0, 1.0 / 12.0, 2.0].iter().map(|&c0| Candidate { q: 1.0, c0 }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryComparison {
    pub n: u32,
    pub l: u32,
    pub d: u32,
    pub printed_positive: f64,
    pub printed_negative: f64,
    /// Residual at the printed value; `None` where the residual is undefined.
    pub residual_positive: Option<f64>,
    pub residual_negative: Option<f64>,
    pub solver_roots: Vec<f64>,
    /// Residual at each solver root.
    pub solver_residuals: Vec<f64>,
    pub solver_positive: Option<f64>,
    pub solver_negative: Option<f64>,
    pub delta_positive: Option<f64>,
    pub delta_negative: Option<f64>,
    pub reproduced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub candidate: Candidate,
    pub entries: Vec<EntryComparison>,
    pub reproduced_count: usize,
    pub max_abs_delta: Option<f64>,
    pub max_abs_printed_residual: Option<f64>,
    pub full_reproduction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub table_version: u32,
    pub candidates: Vec<CandidateReport>,
    pub any_full_reproduction: bool,
    /// Short summary of the deviations when nothing reproduces.
    pub pattern: String,
}

fn abs_max(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    values.flatten().map(f64::abs).fold(None, |m, x| Some(m.map_or(x, |m: f64| m.max(x))))
}

pub fn compare_candidate(table: &Table1, candidate: Candidate, window: &SolverWindow) -> Result<CandidateReport> {
    let params = table.potential(candidate.q)?;
    let scheme = table.scheme(candidate.c0);
    let mu = table.parameters.mu;
    let mut entries = Vec::with_capacity(table.entries.len());
    for e in &table.entries {
        let state = e.state()?;
        let residual = |x: f64| relativistic_residual(x, &state, &params, &scheme, mu).ok();
        let outcome = solve_relativistic(&state, &params, &scheme, mu, window)?;
        let pick = |b: Branch| outcome.roots.iter().find(|r| r.branch == b).map(|r| r.energy);
        let (sp, sn) = (pick(Branch::Positive), pick(Branch::Negative));
        let dp = sp.map(|x| x - e.positive);
        let dn = sn.map(|x| x - e.negative);
        let reproduced = matches!((dp, dn), (Some(a), Some(b)) if a.abs() < REPRODUCTION_TOL && b.abs() < REPRODUCTION_TOL);
        entries.push(EntryComparison {
            n: e.n,
            l: e.l,
            d: e.d,
            printed_positive: e.positive,
            printed_negative: e.negative,
            residual_positive: residual(e.positive),
            residual_negative: residual(e.negative),
            solver_roots: outcome.roots.iter().map(|r| r.energy).collect(),
            solver_residuals: outcome.roots.iter().map(|r| r.residual).collect(),
            solver_positive: sp,
            solver_negative: sn,
            delta_positive: dp,
            delta_negative: dn,
            reproduced,
        });
    }
    let reproduced_count = entries.iter().filter(|c| c.reproduced).count();
    Ok(CandidateReport {
        candidate,
        max_abs_delta: abs_max(entries.iter().flat_map(|c| [c.delta_positive, c.delta_negative])),
        max_abs_printed_residual: abs_max(
            entries.iter().flat_map(|c| [c.residual_positive, c.residual_negative]),
        ),
        full_reproduction: reproduced_count == entries.len(),
        reproduced_count,
        entries,
    })
}

pub fn validate(table: &Table1, window: &SolverWindow) -> Result<ValidationReport> {
    let reports = candidates()
        .into_iter()
        .map(|c| compare_candidate(table, c, window))
        .collect::<Result<Vec<_>>>()?;
    let any = reports.iter().any(|r| r.full_reproduction);
    let pattern = if any {
        "reproduced".to_string()
    } else {
        reports
            .iter()
            .map(|r| {
                let missing = r
                    .entries
                    .iter()
                    .filter(|c| c.solver_positive.is_none() || c.solver_negative.is_none())
                    .count();
                format!(
                    "q={} c0={:.6}: {}/{} cells within {REPRODUCTION_TOL:e}, max |delta| {}, max |printed residual| {}, {} cells missing a branch",
                    r.candidate.q,
                    r.candidate.c0,
                    r.reproduced_count,
                    r.entries.len(),
                    r.max_abs_delta.map_or("n/a".into(), |v| format!("{v:.6e}")),
                    r.max_abs_printed_residual.map_or("n/a".into(), |v| format!("{v:.6e}")),
                    missing
                )
            })
            .collect::<Vec<_>>()
            .join("; ")
    };
    Ok(ValidationReport {
        table_version: table.version,
        candidates: reports,
        any_full_reproduction: any,
        pattern,
    })
}
