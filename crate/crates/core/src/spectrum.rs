//! Bound-state energies.
//!
//! The relativistic quantization condition is implicit in `E`; it is
//! written as a residual `f(E)` whose zeros are the eigenvalues and solved
//! by scanning a fixed grid for sign changes and bisecting each bracket.
//! The non-relativistic limit is explicit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    gamma_coeffs, omega_coeffs, ApproxScheme, Coupling, GammaCoeffs, PhysicalConstants,
    PotentialParams, RecastCoeffs, StateLabel,
};
use crate::nu::signed_decay_exponent;

/// `E` interval and number of grid points scanned for sign changes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverWindow {
    pub lo: f64,
    pub hi: f64,
    pub grid: usize,
}

impl SolverWindow {
    pub const DEFAULT_GRID: usize = 200_001;

    pub fn new(lo: f64, hi: f64, grid: usize) -> Result<Self> {
        let w = Self { lo, hi, grid };
        w.validate()?;
        Ok(w)
    }

    /// `[-10 mu - 50, 10 mu + 50]` with 200,001 points.
    pub fn default_for(mu: f64) -> Self {
        Self { lo: -10.0 * mu - 50.0, hi: 10.0 * mu + 50.0, grid: Self::DEFAULT_GRID }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi && self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "solver window needs lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.grid < 100 {
            return Err(Error::InvalidParameter(format!(
                "solver grid needs at least 100 points, got {}",
                self.grid
            )));
        }
        Ok(())
    }
}

/// `|f|` local minima below this value without a sign change trigger a finer rescan.
const TANGENT_THRESHOLD: f64 = 1e-3;
const RESCAN_FACTOR: usize = 10;
const BISECTION_RTOL: f64 = 1e-12;

/// Result of a bracketing scan: the roots found and the sub-intervals on
/// which the residual is undefined.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanResult {
    pub roots: Vec<f64>,
    pub excluded: Vec<(f64, f64)>,
}

/// Finds every sign change of `f` on the window and refines it by bisection
/// to `|dE| < 1e-12 max(1, |E|)`. `f` returns `None` where it is undefined.
/// `extra_nodes` are inserted into the grid (e.g. exact domain boundaries).
pub fn scan_roots(
    f: impl Fn(f64) -> Option<f64>,
    window: &SolverWindow,
    extra_nodes: &[f64],
) -> ScanResult {
    let step = (window.hi - window.lo) / (window.grid - 1) as f64;
    let mut nodes: Vec<f64> =
        (0..window.grid).map(|i| window.lo + step * i as f64).collect();
    if let Some(last) = nodes.last_mut() {
        *last = window.hi;
    }
    let mut extras: Vec<f64> = extra_nodes
        .iter()
        .copied()
        .filter(|e| *e > window.lo && *e < window.hi)
        .collect();
    if !extras.is_empty() {
        extras.sort_by(f64::total_cmp);
        nodes.extend(extras);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
    }
    let values: Vec<Option<f64>> = nodes.iter().map(|&e| f(e)).collect();

    let mut brackets: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut roots = Vec::new();
    let mut excluded = Vec::new();
    let mut run_start: Option<usize> = None;

    for i in 0..nodes.len() {
        match values[i] {
            None => {
                run_start.get_or_insert(i);
            }
            Some(v) => {
                if let Some(s) = run_start.take() {
                    excluded.push((nodes[s], nodes[i - 1]));
                }
                if v == 0.0 {
                    roots.push(nodes[i]);
                    continue;
                }
                if let Some(Some(w)) = values.get(i + 1) {
                    if v * w < 0.0 {
                        brackets.push((nodes[i], v, nodes[i + 1], *w));
                    }
                }
                if i > 0 {
                    if let (Some(Some(prev)), Some(Some(next))) =
                        (values.get(i - 1), values.get(i + 1))
                    {
                        let tangent = v.abs() < TANGENT_THRESHOLD
                            && v.abs() <= prev.abs()
                            && v.abs() <= next.abs()
                            && v * prev > 0.0
                            && v * next > 0.0;
                        if tangent {
                            rescan(&f, nodes[i - 1], nodes[i + 1], &mut brackets, &mut roots);
                        }
                    }
                }
            }
        }
    }
    if let Some(s) = run_start {
        excluded.push((nodes[s], nodes[nodes.len() - 1]));
    }

    for (a, fa, b, fb) in brackets {
        if let Some(root) = bisect(&f, a, fa, b, fb) {
            roots.push(root);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 4.0 * BISECTION_RTOL * a.abs().max(1.0));
    ScanResult { roots, excluded }
}

fn rescan(
    f: &impl Fn(f64) -> Option<f64>,
    lo: f64,
    hi: f64,
    brackets: &mut Vec<(f64, f64, f64, f64)>,
    roots: &mut Vec<f64>,
) {
    let n = 2 * RESCAN_FACTOR;
    let h = (hi - lo) / n as f64;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=n {
        let e = if k == n { hi } else { lo + h * k as f64 };
        let Some(v) = f(e) else {
            prev = None;
            continue;
        };
        if v == 0.0 && k > 0 && k < n {
            roots.push(e);
        }
        if let Some((pe, pv)) = prev {
            if pv * v < 0.0 {
                brackets.push((pe, pv, e, v));
            }
        }
        prev = Some((e, v));
    }
}

fn bisect(f: &impl Fn(f64) -> Option<f64>, mut a: f64, mut fa: f64, mut b: f64, _fb: f64) -> Option<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() < BISECTION_RTOL * mid.abs().max(1.0) || mid == a || mid == b {
            return Some(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Some(mid);
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    Some(0.5 * (a + b))
}

/// `N / Dn` of the quantization condition, with `s = sqrt(1/4 + g3)`:
/// `N = n^2 + n + 1/2 + g2 + (2n+1) s`, `Dn = 2n + 1 + 2 s`.
fn level_ratio(n: u32, g2: f64, g3: f64) -> Option<f64> {
    let radicand = 0.25 + g3;
    if radicand < 0.0 {
        return None;
    }
    let s = radicand.sqrt();
    let nf = f64::from(n);
    let num = nf * nf + nf + 0.5 + g2 + (2.0 * nf + 1.0) * s;
    let den = 2.0 * nf + 1.0 + 2.0 * s;
    Some(num / den)
}

/// Quantization residual for an arbitrary coupling:
/// `kinetic + 4 alpha^2 (N/Dn)^2 - potential p1 - kappa c0 / 4`.
pub fn coupled_residual(
    params: &PotentialParams,
    scheme: &ApproxScheme,
    kappa: i64,
    n: u32,
    coupling: Coupling,
) -> Result<f64> {
    params.require_deformed()?;
    let gamma = gamma_coeffs(params, scheme, kappa, coupling);
    let a2x4 = 4.0 * params.alpha * params.alpha;
    let q = params.q;
    let g2 = gamma.gamma2 / (a2x4 * q);
    let g3 = gamma.gamma3 / (a2x4 * q * q);
    let ratio = level_ratio(n, g2, g3).ok_or_else(|| {
        Error::Domain(format!("radicand 1/4 + gamma3/(4 alpha^2 q^2) = {} < 0", 0.25 + g3))
    })?;
    Ok(coupling.kinetic + a2x4 * ratio * ratio
        - coupling.potential * params.p1
        - scheme.c0 * kappa as f64 / 4.0)
}

/// Relativistic residual `f(E)`; its zeros are the Klein-Gordon eigenvalues.
pub fn relativistic_residual(
    energy: f64,
    state: &StateLabel,
    params: &PotentialParams,
    scheme: &ApproxScheme,
    mu: f64,
) -> Result<f64> {
    coupled_residual(params, scheme, state.kappa(), state.n, Coupling::relativistic(energy, mu))
}

/// Energies at which the radicand `1/4 + gamma3/(4 alpha^2 q^2)` changes sign.
/// `gamma3` is affine in `E`, so there is at most one.
fn relativistic_domain_boundary(
    params: &PotentialParams,
    scheme: &ApproxScheme,
    kappa: i64,
    mu: f64,
) -> Option<f64> {
    // 2(E + mu) p3 + kappa lambda / 4 = -alpha^2 q^2
    if params.p3 == 0.0 {
        return None;
    }
    let aq = params.alpha * params.q;
    Some(-mu + (-aq * aq - kappa as f64 * scheme.lambda / 4.0) / (2.0 * params.p3))
}

/// Which of the two roots of a `(n, l, D)` cell a report belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Negative,
    Positive,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Negative => "negative",
            Branch::Positive => "positive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RootValidity {
    /// `gamma1 <= 0`: the wavefunction exponent is real.
    pub gamma1_nonpositive: bool,
    /// Both NU square-root radicands are non-negative.
    pub radicands_real: bool,
    /// More than two roots were found for this state.
    pub multiple_roots: bool,
    /// The unsquared condition holds with a non-negative decay exponent.
    /// Roots of the squared condition alone fail this.
    pub decaying: bool,
}

impl RootValidity {
    pub fn flags(&self) -> String {
        let mut parts = Vec::new();
        if self.gamma1_nonpositive {
            parts.push("gamma1_le_0");
        } else {
            parts.push("gamma1_gt_0");
        }
        if !self.radicands_real {
            parts.push("complex_radicand");
        }
        if self.multiple_roots {
            parts.push("multiple_roots");
        }
        if !self.decaying {
            parts.push("growing_tail");
        }
        parts.join("|")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub energy: f64,
    pub residual: f64,
    pub branch: Branch,
    pub state: StateLabel,
    pub validity: RootValidity,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveOutcome {
    /// Roots in ascending energy.
    pub roots: Vec<RootReport>,
    /// Sub-intervals of the window where the residual is undefined.
    pub excluded: Vec<(f64, f64)>,
}

/// Labels ascending roots: the lesser is the negative branch, the rest positive.
/// A lone root is labelled by the sign of its energy.
fn assign_branches(energies: &[f64]) -> Vec<Branch> {
    match energies.len() {
        0 => Vec::new(),
        1 => vec![if energies[0] < 0.0 { Branch::Negative } else { Branch::Positive }],
        k => (0..k).map(|i| if i == 0 { Branch::Negative } else { Branch::Positive }).collect(),
    }
}

/// Generic solve for any relativistic residual; `validity` classifies each root.
pub fn solve_with(
    residual: impl Fn(f64) -> Option<f64>,
    state: StateLabel,
    window: &SolverWindow,
    extra_nodes: &[f64],
    validity: impl Fn(f64) -> RootValidity,
) -> Result<SolveOutcome> {
    window.validate()?;
    let scan = scan_roots(&residual, window, extra_nodes);
    let branches = assign_branches(&scan.roots);
    let multiple = scan.roots.len() > 2;
    let roots = scan
        .roots
        .iter()
        .zip(branches)
        .map(|(&energy, branch)| {
            let mut v = validity(energy);
            v.multiple_roots = multiple;
            RootReport {
                energy,
                residual: residual(energy).unwrap_or(f64::NAN),
                branch,
                state,
                validity: v,
            }
        })
        .collect();
    Ok(SolveOutcome { roots, excluded: scan.excluded })
}

/// Klein-Gordon eigenvalues of `state` inside `window`.
pub fn solve_relativistic(
    state: &StateLabel,
    params: &PotentialParams,
    scheme: &ApproxScheme,
    mu: f64,
    window: &SolverWindow,
) -> Result<SolveOutcome> {
    params.require_deformed()?;
    let kappa = state.kappa();
    let boundary: Vec<f64> =
        relativistic_domain_boundary(params, scheme, kappa, mu).into_iter().collect();
    solve_with(
        |e| relativistic_residual(e, state, params, scheme, mu).ok(),
        *state,
        window,
        &boundary,
        |e| validity_for(params, scheme, state, e, mu),
    )
}

/// Non-relativistic energy for an explicit centrifugal factor:
/// `E = -(2 hbar^2 alpha^2 / m) (N/Dn)^2 + 2 p1 + hbar^2 kappa c0 / (8 m)`.
pub fn nonrelativistic_energy_kappa(
    kappa: i64,
    n: u32,
    params: &PotentialParams,
    scheme: &ApproxScheme,
    constants: &PhysicalConstants,
) -> Result<f64> {
    params.require_deformed()?;
    let (m, hbar) = (constants.m, constants.hbar);
    let gamma = crate::model::gamma_nonrelativistic(params, scheme, kappa, 0.0, constants);
    let a2x4 = 4.0 * params.alpha * params.alpha;
    let q = params.q;
    let g2 = gamma.gamma2 / (a2x4 * q);
    let g3 = gamma.gamma3 / (a2x4 * q * q);
    let ratio = level_ratio(n, g2, g3).ok_or_else(|| {
        Error::Domain(format!("radicand 1/4 + gamma3/(4 alpha^2 q^2) = {} < 0", 0.25 + g3))
    })?;
    let h2 = hbar * hbar;
    Ok(-2.0 * h2 * params.alpha * params.alpha / m * ratio * ratio
        + 2.0 * params.p1
        + h2 * kappa as f64 * scheme.c0 / (8.0 * m))
}

pub fn nonrelativistic_energy(
    state: &StateLabel,
    params: &PotentialParams,
    scheme: &ApproxScheme,
    constants: &PhysicalConstants,
) -> Result<f64> {
    nonrelativistic_energy_kappa(state.kappa(), state.n, params, scheme, constants)
}

/// Centrifugal factor used by the s-wave form: the constant `3 c0 / 4`
/// corresponds to `kappa = 3`, i.e. `D + 2l = 4`.
pub const SWAVE_KAPPA: i64 = 3;

pub fn swave_energy(
    n: u32,
    params: &PotentialParams,
    scheme: &ApproxScheme,
    constants: &PhysicalConstants,
) -> Result<f64> {
    nonrelativistic_energy_kappa(SWAVE_KAPPA, n, params, scheme, constants)
}

/// Number of levels `n = 0, 1, ..., floor(eta)`; zero when `eta < 0`.
pub fn bound_state_count(rc: &RecastCoeffs) -> u32 {
    if rc.eta.is_nan() || rc.eta < 0.0 {
        0
    } else {
        rc.eta.floor() as u32 + 1
    }
}

/// Relativistic or non-relativistic evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Context {
    Relativistic { mu: f64 },
    NonRelativistic { m: f64, hbar: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Levels {
    Relativistic(SolveOutcome),
    NonRelativistic(f64),
}

/// `V(r) = -(V0/b^2) e^{-r/b}/(1 - e^{-r/b}) + (beta(beta-1)/b^2) e^{-2r/b}/(1 - e^{-r/b})^2`.
/// `mr_beta` is the Manning-Rosen `beta`, not an inverse temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManningRosenParams {
    pub v0: f64,
    pub mr_beta: f64,
    pub b: f64,
}

impl ManningRosenParams {
    pub fn new(v0: f64, mr_beta: f64, b: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidParameter(format!("Manning-Rosen b must be positive, got {b}")));
        }
        Ok(Self { v0, mr_beta, b })
    }

    fn strength(&self) -> f64 {
        self.mr_beta * (self.mr_beta - 1.0)
    }

    /// `p1 = 0, p2 = -V0/b^2, p3 = beta(beta-1)/b^2, alpha = 1/2b, q = 1`.
    pub fn to_potential(&self) -> PotentialParams {
        let b2 = self.b * self.b;
        PotentialParams {
            p1: 0.0,
            p2: -self.v0 / b2,
            p3: self.strength() / b2,
            q: 1.0,
            alpha: 0.5 / self.b,
        }
    }

    fn lambda_sigma(&self, kappa: i64, scheme: &ApproxScheme, coupling: f64) -> Option<(f64, f64)> {
        let k = kappa as f64;
        let b2 = self.b * self.b;
        let big_lambda =
            b2 * (-coupling / b2 * (self.v0 + self.strength()) + k * (scheme.omega - scheme.lambda) / 4.0);
        let radicand = 1.0 + 4.0 * b2 * (coupling * self.strength() / b2 + k * scheme.lambda / 4.0);
        (radicand >= 0.0).then(|| (big_lambda, 0.5 * (1.0 + radicand.sqrt())))
    }

    /// Dedicated relativistic residual
    /// `E^2 - mu^2 + alpha^2 [Lambda/(n+sigma) + (n+sigma)]^2 - c0 kappa/4`.
    pub fn relativistic_residual(
        &self,
        energy: f64,
        state: &StateLabel,
        scheme: &ApproxScheme,
        mu: f64,
    ) -> Option<f64> {
        let kappa = state.kappa();
        let (big_lambda, sigma) = self.lambda_sigma(kappa, scheme, 2.0 * (energy + mu))?;
        let rho = f64::from(state.n) + sigma;
        let bracket = big_lambda / rho + rho;
        let alpha = 0.5 / self.b;
        Some((energy - mu) * (energy + mu) + alpha * alpha * bracket * bracket
            - scheme.c0 * kappa as f64 / 4.0)
    }

    /// Dedicated non-relativistic closed form
    /// `-(hbar^2 / 8 m b^2) [Lambda/(n+sigma) + (n+sigma)]^2 + hbar^2 c0 kappa / 8m`.
    pub fn nonrelativistic_energy(
        &self,
        state: &StateLabel,
        scheme: &ApproxScheme,
        m: f64,
        hbar: f64,
    ) -> Result<f64> {
        let kappa = state.kappa();
        let h2 = hbar * hbar;
        let (big_lambda, sigma) = self
            .lambda_sigma(kappa, scheme, 4.0 * m / h2)
            .ok_or_else(|| Error::Domain("Manning-Rosen sigma radicand < 0".into()))?;
        let rho = f64::from(state.n) + sigma;
        let bracket = big_lambda / rho + rho;
        Ok(-h2 / (8.0 * m * self.b * self.b) * bracket * bracket
            + h2 * scheme.c0 * kappa as f64 / (8.0 * m))
    }
}

/// `V(r) = -V0 delta e^{-delta r}/(1 - e^{-delta r})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HulthenParams {
    pub v0: f64,
    pub delta: f64,
}

impl HulthenParams {
    pub fn new(v0: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("Hulthen delta must be positive, got {delta}")));
        }
        Ok(Self { v0, delta })
    }

    /// `p1 = p3 = 0, p2 = -V0 delta, q = 1, alpha = delta/2`.
    pub fn to_potential(&self) -> PotentialParams {
        PotentialParams { p1: 0.0, p2: -self.v0 * self.delta, p3: 0.0, q: 1.0, alpha: 0.5 * self.delta }
    }

    /// `sigma^H = (1 + sqrt(1 + (4/delta^2) kappa lambda / 4)) / 2`.
    pub fn sigma(&self, kappa: i64, scheme: &ApproxScheme) -> Option<f64> {
        let radicand = 1.0 + 4.0 / (self.delta * self.delta) * (kappa as f64 * scheme.lambda / 4.0);
        (radicand >= 0.0).then(|| 0.5 * (1.0 + radicand.sqrt()))
    }

    fn big_lambda(&self, kappa: i64, scheme: &ApproxScheme, coupling: f64) -> f64 {
        let k = kappa as f64;
        (-coupling * self.v0 * self.delta + k * (scheme.omega - scheme.lambda) / 4.0)
            / (self.delta * self.delta)
    }

    /// Dedicated relativistic residual
    /// `E^2 - mu^2 + (delta^2/4) [Lambda/(n+sigma) + (n+sigma)]^2 - c0 kappa/4`.
    pub fn relativistic_residual(
        &self,
        energy: f64,
        state: &StateLabel,
        scheme: &ApproxScheme,
        mu: f64,
    ) -> Option<f64> {
        let kappa = state.kappa();
        let sigma = self.sigma(kappa, scheme)?;
        let big_lambda = self.big_lambda(kappa, scheme, 2.0 * (energy + mu));
        let rho = f64::from(state.n) + sigma;
        let bracket = big_lambda / rho + rho;
        Some((energy - mu) * (energy + mu) + self.delta * self.delta / 4.0 * bracket * bracket
            - scheme.c0 * kappa as f64 / 4.0)
    }

    /// Dedicated non-relativistic closed form
    /// `-(hbar^2 delta^2 / 8m) [Lambda/(n+sigma) + (n+sigma)]^2 + hbar^2 c0 kappa / 8m`.
    pub fn nonrelativistic_energy(
        &self,
        state: &StateLabel,
        scheme: &ApproxScheme,
        m: f64,
        hbar: f64,
    ) -> Result<f64> {
        let kappa = state.kappa();
        let h2 = hbar * hbar;
        let sigma = self
            .sigma(kappa, scheme)
            .ok_or_else(|| Error::Domain("Hulthen sigma radicand < 0".into()))?;
        let big_lambda = self.big_lambda(kappa, scheme, 4.0 * m / h2);
        let rho = f64::from(state.n) + sigma;
        let bracket = big_lambda / rho + rho;
        Ok(-h2 * self.delta * self.delta / (8.0 * m) * bracket * bracket
            + h2 * scheme.c0 * kappa as f64 / (8.0 * m))
    }
}

pub fn manning_rosen_energies(
    mp: &ManningRosenParams,
    state: &StateLabel,
    scheme: &ApproxScheme,
    context: Context,
    window: &SolverWindow,
) -> Result<Levels> {
    match context {
        Context::Relativistic { mu } => {
            let general = mp.to_potential();
            let kappa = state.kappa();
            let boundary: Vec<f64> =
                relativistic_domain_boundary(&general, scheme, kappa, mu).into_iter().collect();
            let outcome = solve_with(
                |e| mp.relativistic_residual(e, state, scheme, mu),
                *state,
                window,
                &boundary,
                |e| validity_for(&general, scheme, state, e, mu),
            )?;
            Ok(Levels::Relativistic(outcome))
        }
        Context::NonRelativistic { m, hbar } => {
            Ok(Levels::NonRelativistic(mp.nonrelativistic_energy(state, scheme, m, hbar)?))
        }
    }
}

pub fn hulthen_energies(
    hp: &HulthenParams,
    state: &StateLabel,
    scheme: &ApproxScheme,
    context: Context,
    window: &SolverWindow,
) -> Result<Levels> {
    match context {
        Context::Relativistic { mu } => {
            let general = hp.to_potential();
            let outcome = solve_with(
                |e| hp.relativistic_residual(e, state, scheme, mu),
                *state,
                window,
                &[],
                |e| validity_for(&general, scheme, state, e, mu),
            )?;
            Ok(Levels::Relativistic(outcome))
        }
        Context::NonRelativistic { m, hbar } => {
            Ok(Levels::NonRelativistic(hp.nonrelativistic_energy(state, scheme, m, hbar)?))
        }
    }
}

fn validity_for(
    params: &PotentialParams,
    scheme: &ApproxScheme,
    state: &StateLabel,
    energy: f64,
    mu: f64,
) -> RootValidity {
    let g = crate::model::gamma_relativistic(params, scheme, state, energy, mu);
    let aq = params.alpha * params.q;
    RootValidity {
        gamma1_nonpositive: g.is_bound_valid(),
        radicands_real: g.is_bound_valid() && 0.25 + g.gamma3 / (4.0 * aq * aq) >= 0.0,
        multiple_roots: false,
        decaying: is_decaying(&g, params, state.n),
    }
}

/// Slack on the sign of the decay exponent, which is `~0` at threshold.
const DECAY_SIGN_TOL: f64 = 1e-8;

/// Whether a root of the squared condition also satisfies the unsquared one,
/// i.e. its eigenfunction decays as `r -> infinity`.
pub fn is_decaying(gamma: &GammaCoeffs, params: &PotentialParams, n: u32) -> bool {
    let input = omega_coeffs(gamma, params.alpha, params.q).nu_input();
    signed_decay_exponent(&input, n).is_ok_and(|eps| eps >= -DECAY_SIGN_TOL)
}

/// Coulomb-limit formulas as printed for the Hulthen reduction
/// (`delta -> 0`, `omega = lambda = 1`, `c0 = 0`):
/// relativistic `E = -mu [(n+sigma)^2 + V0^2] / [(n+sigma)^2 - V0^2]`,
/// non-relativistic `E = -4 m hbar^2 V0^2 / (n+sigma)^2`.
pub fn coulomb_limit(context: Context, v0: f64, n: u32, sigma_h: f64) -> Result<f64> {
    let rho = f64::from(n) + sigma_h;
    let rho2 = rho * rho;
    match context {
        Context::Relativistic { mu } => {
            let den = rho2 - v0 * v0;
            if den == 0.0 {
                return Err(Error::Domain(format!(
                    "Coulomb limit pole: (n + sigma)^2 = V0^2 = {rho2}"
                )));
            }
            Ok(-mu * (rho2 + v0 * v0) / den)
        }
        Context::NonRelativistic { m, hbar } => {
            if rho2 == 0.0 {
                return Err(Error::Domain("Coulomb limit pole: n + sigma = 0".into()));
            }
            Ok(-4.0 * m * hbar * hbar * v0 * v0 / rho2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table1() -> (PotentialParams, ApproxScheme) {
        (PotentialParams::new(1.0, 2.0, 1.0, 1.0, 0.1).unwrap(), ApproxScheme::new(1.0 / 12.0, 2.0, 4.0))
    }

    #[test]
    fn decay_sign_separates_physical_levels() {
        let p = PotentialParams::new(0.0, -6.0, 0.5, 1.0, 0.3).unwrap();
        let s = ApproxScheme::greene_aldrich(0.3);
        let c = PhysicalConstants::default();
        let level = |n| {
            let st = StateLabel::new(n, 1, 3).unwrap();
            let e = nonrelativistic_energy(&st, &p, &s, &c).unwrap();
            (e, is_decaying(&crate::model::gamma_nonrelativistic(&p, &s, st.kappa(), e, &c), &p, n))
        };
        let last = (0..60).take_while(|&n| level(n).1).last().expect("ground state decays");
        assert!(last > 0 && last < 40, "last bound level {last}");
        for n in 0..last {
            assert!(level(n).0 < level(n + 1).0);
        }
        assert!((last + 1..60).all(|n| !level(n).1));
    }

    #[test]
    fn residual_at_negative_rest_energy() {
        let (p, s) = table1();
        let mu = 2.0;
        for n in 0..5 {
            let st = StateLabel::new(n, 0, 3).unwrap();
            let f = relativistic_residual(-mu, &st, &p, &s, mu).unwrap();
            let nf = f64::from(n) + 1.0;
            assert_relative_eq!(f, 0.01 * nf * nf, max_relative = 1e-13);
        }
    }

    #[test]
    fn residual_free_case() {
        // kappa = 0, p1 = p2 = p3 = 0, n = 0 -> f = E^2 - mu^2 + alpha^2
        let p = PotentialParams::new(0.0, 0.0, 0.0, 1.0, 0.3).unwrap();
        let s = ApproxScheme::new(0.2, 0.0, 0.0);
        let st = StateLabel::new(0, 0, 3).unwrap();
        for e in [-2.0, 0.4, 3.0] {
            let f = relativistic_residual(e, &st, &p, &s, 1.5).unwrap();
            assert_relative_eq!(f, e * e - 2.25 + 0.09, max_relative = 1e-14);
        }
    }

    #[test]
    fn quadratic_case_roots() {
        let p = PotentialParams::new(0.7, 0.0, 0.0, 1.0, 0.2).unwrap();
        let s = ApproxScheme::new(1.0 / 12.0, 0.0, 0.0);
        let mu = 1.3;
        let window = SolverWindow::new(-20.0, 20.0, 4001).unwrap();
        for n in 0..3 {
            let st = StateLabel::new(n, 0, 3).unwrap();
            let out = solve_relativistic(&st, &p, &s, mu, &window).unwrap();
            let nu = f64::from(n) + 1.0;
            let root = ((mu + p.p1).powi(2) - 0.04 * nu * nu).sqrt();
            assert_eq!(out.roots.len(), 2);
            assert_relative_eq!(out.roots[0].energy, p.p1 - root, max_relative = 1e-10);
            assert_relative_eq!(out.roots[1].energy, p.p1 + root, max_relative = 1e-10);
            assert_eq!(out.roots[0].branch, Branch::Negative);
            assert_eq!(out.roots[1].branch, Branch::Positive);
            assert!(out.excluded.is_empty());
        }
    }

    #[test]
    fn empty_window() {
        let p = PotentialParams::new(0.7, 0.0, 0.0, 1.0, 0.2).unwrap();
        let s = ApproxScheme::new(0.0, 0.0, 0.0);
        let st = StateLabel::new(0, 0, 3).unwrap();
        let window = SolverWindow::new(10.0, 20.0, 1000).unwrap();
        let out = solve_relativistic(&st, &p, &s, 1.0, &window).unwrap();
        assert!(out.roots.is_empty());
        assert!(SolverWindow::new(1.0, 0.0, 1000).is_err());
        assert!(SolverWindow::new(0.0, 1.0, 99).is_err());
    }

    #[test]
    fn table1_roots_have_small_residual_and_exclusions() {
        let (p, s) = table1();
        let st = StateLabel::new(0, 0, 3).unwrap();
        let window = SolverWindow::new(-70.0, 70.0, 20_001).unwrap();
        let out = solve_relativistic(&st, &p, &s, 2.0, &window).unwrap();
        assert!(!out.roots.is_empty());
        for r in &out.roots {
            assert!(r.residual.abs() < 1e-9, "{r:?}");
        }
        // gamma3 radicand is negative below E = -2 - 0.005.
        assert_eq!(out.excluded.len(), 1);
        assert!(out.excluded[0].1 < -2.005);
    }

    #[test]
    fn tangent_root_pair_is_found() {
        // f(E) = (E - 1)^2 - 1e-8 has two roots 2e-4 apart, invisible on a coarse grid.
        let window = SolverWindow::new(-5.0, 5.0, 101).unwrap();
        let scan = scan_roots(|e| Some((e - 1.0) * (e - 1.0) - 1e-8), &window, &[]);
        assert_eq!(scan.roots.len(), 2, "{:?}", scan.roots);
        assert_relative_eq!(scan.roots[0], 1.0 - 1e-4, max_relative = 1e-11);
        assert_relative_eq!(scan.roots[1], 1.0 + 1e-4, max_relative = 1e-11);
    }

    #[test]
    fn nonrel_all_zero_potential() {
        let p = PotentialParams::new(0.0, 0.0, 0.0, 1.0, 0.3).unwrap();
        let s = ApproxScheme::new(0.0, 0.0, 0.0);
        let c = PhysicalConstants { mu: 1.0, m: 1.7, hbar: 0.9, kb: 1.0 };
        for n in 0..4 {
            let e = nonrelativistic_energy(&StateLabel::new(n, 0, 3).unwrap(), &p, &s, &c).unwrap();
            let nu = f64::from(n) + 1.0;
            assert_relative_eq!(e, -0.81 * 0.09 * nu * nu / (2.0 * 1.7), max_relative = 1e-14);
        }
    }

    #[test]
    fn nonrel_mapping_consistency() {
        // Substituting E + mu -> 2m/hbar^2, E - mu -> E_nl in the relativistic residual
        // must make it vanish at the closed-form energy.
        let p = PotentialParams::new(0.3, -4.0, 0.5, 0.8, 0.25).unwrap();
        let s = ApproxScheme::new(1.0 / 12.0, 0.4, 0.2);
        let c = PhysicalConstants { mu: 1.0, m: 1.3, hbar: 1.1, kb: 1.0 };
        for (n, l, d) in [(0, 0, 3), (1, 2, 3), (2, 1, 5)] {
            let st = StateLabel::new(n, l, d).unwrap();
            let e = nonrelativistic_energy(&st, &p, &s, &c).unwrap();
            let f = coupled_residual(&p, &s, st.kappa(), n, Coupling::nonrelativistic(e, c.m, c.hbar))
                .unwrap();
            let scale = 2.0 * c.m / (c.hbar * c.hbar) * e.abs().max(1.0);
            assert!(f.abs() < 1e-10 * scale, "f = {f}");
        }
    }

    #[test]
    fn swave_equals_kappa_three() {
        let (p, s) = table1();
        let c = PhysicalConstants { mu: 2.0, m: 2.0, hbar: 1.0, kb: 1.0 };
        // D + 2l = 4 gives kappa = 3.
        let st = StateLabel::new(1, 1, 2).unwrap();
        assert_eq!(st.kappa(), SWAVE_KAPPA);
        assert_eq!(swave_energy(1, &p, &s, &c).unwrap(), nonrelativistic_energy(&st, &p, &s, &c).unwrap());
        // Without the centrifugal constants it equals the D = 3, l = 0 value.
        let bare = ApproxScheme::new(0.0, 0.0, 0.0);
        let st3 = StateLabel::new(1, 0, 3).unwrap();
        assert_eq!(
            swave_energy(1, &p, &bare, &c).unwrap(),
            nonrelativistic_energy(&st3, &p, &bare, &c).unwrap()
        );
    }

    #[test]
    fn tilde_gamma2_matches_swave_form() {
        let (p, s) = table1();
        let c = PhysicalConstants { mu: 2.0, m: 2.0, hbar: 1.0, kb: 1.0 };
        let g = crate::model::gamma_nonrelativistic(&p, &s, SWAVE_KAPPA, 0.0, &c);
        assert_relative_eq!(g.gamma2, 4.0 * c.m * p.p2 / (c.hbar * c.hbar) + 3.0 * s.omega / 4.0, max_relative = 1e-15);
    }

    #[test]
    fn bound_state_counting() {
        let rc = |eta: f64| RecastCoeffs { q1: 0.0, q2: 0.0, sigma: 1.0, eta };
        assert_eq!(bound_state_count(&rc(2.7)), 3);
        assert_eq!(bound_state_count(&rc(-0.1)), 0);
        assert_eq!(bound_state_count(&rc(0.0)), 1);
        let r = RecastCoeffs::from_parts(9.0, 9.0, 1.0, crate::model::EtaBranch::Plus).unwrap();
        assert_eq!(r.eta, 2.0);
        assert_eq!(bound_state_count(&r), 3);
    }

    #[test]
    fn manning_rosen_zero_strength() {
        for beta in [0.0, 1.0] {
            let mp = ManningRosenParams::new(1.0, beta, 2.0).unwrap();
            assert_eq!(mp.to_potential().p3, 0.0);
            let s = ApproxScheme::new(0.0, 0.0, 0.0);
            let (_, sigma) = mp.lambda_sigma(0, &s, 3.0).unwrap();
            assert_eq!(sigma, 1.0);
        }
        assert!(ManningRosenParams::new(1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn hulthen_sigma_without_centrifugal() {
        let hp = HulthenParams::new(1.0, 0.3).unwrap();
        assert_eq!(hp.sigma(0, &ApproxScheme::new(0.0, 1.0, 1.0)), Some(1.0));
        assert!(HulthenParams::new(1.0, -0.3).is_err());
    }

    #[test]
    fn coulomb_limit_formula() {
        let ctx = Context::Relativistic { mu: 1.7 };
        assert_eq!(coulomb_limit(ctx, 0.0, 2, 1.0).unwrap(), -1.7);
        assert!(coulomb_limit(ctx, 3.0, 2, 1.0).is_err());
        // second-order expansion: -mu (1 + 2 V0^2 / rho^2)
        let v0 = 1e-3;
        let e = coulomb_limit(ctx, v0, 1, 1.0).unwrap();
        let approx = -1.7 * (1.0 + 2.0 * v0 * v0 / 4.0);
        assert!((e - approx).abs() < 1.7 * 4.0 * v0.powi(4));
    }
}
