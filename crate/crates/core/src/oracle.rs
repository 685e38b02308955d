//! Finite-difference radial eigensolver used as an independent reference
//! for the non-relativistic energies.
//!
//! The operator is `-(hbar^2/2m) F'' + W(r) F` on a uniform grid
//! `r_i = i h`, `i = 1..N`, `h = r_max/(N+1)`, with `F(0) = F(r_max) = 0`.
//! For the potential the effective term is
//! `W = 2 V(r) + (hbar^2/2m) (kappa/4) u(r)` where `u = 1/r^2` (exact) or
//! its exponential surrogate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{approx_inv_r2, ApproxScheme, PhysicalConstants, PotentialParams, StateLabel};
use crate::spectrum::nonrelativistic_energy;

pub const MIN_GRID_POINTS: usize = 2000;
pub const DEFAULT_GRID_POINTS: usize = 20_000;
pub const MAX_EIGENVALUES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_max: f64,
    /// Interior points.
    pub n: usize,
}

impl GridSpec {
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("r_max must be positive, got {r_max}")));
        }
        if n < MIN_GRID_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {n}"
            )));
        }
        Ok(Self { r_max, n })
    }

    /// `r_max = max(6/alpha, 60)`, 20,000 points.
    pub fn default_for(alpha: f64) -> Self {
        Self { r_max: (6.0 / alpha).max(60.0), n: DEFAULT_GRID_POINTS }
    }

    pub fn h(&self) -> f64 {
        self.r_max / (self.n as f64 + 1.0)
    }

    pub fn r(&self, i: usize) -> f64 {
        self.h() * (i as f64 + 1.0)
    }

    /// Same interval with half the spacing.
    pub fn refined(&self) -> Self {
        Self { r_max: self.r_max, n: 2 * self.n + 1 }
    }
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i+1`.
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidParameter(format!(
                "tridiagonal needs off.len() = diag.len() - 1, got {} and {}",
                off.len(),
                diag.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence of the `LDL^T` pivots).
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.len() {
            let coupling = if i > 0 { self.off[i - 1] * self.off[i - 1] / d } else { 0.0 };
            d = self.diag[i] - x - coupling;
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }
}

/// Builds `-(kinetic) d^2/dr^2 + w(r)` on `grid`.
pub fn build_operator(
    grid: &GridSpec,
    kinetic: f64,
    w: impl Fn(f64) -> Result<f64>,
) -> Result<Tridiagonal> {
    let h = grid.h();
    let lap = kinetic / (h * h);
    let mut diag = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        let value = w(grid.r(i))?;
        if !value.is_finite() {
            return Err(Error::Domain(format!("effective potential not finite at r = {}", grid.r(i))));
        }
        diag.push(2.0 * lap + value);
    }
    Tridiagonal::new(diag, vec![-lap; grid.n - 1])
}

/// Treatment of the centrifugal term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CentrifugalMode {
    /// `1/r^2`.
    Exact,
    /// `c0 + omega z/(1-qz) + lambda z^2/(1-qz)^2`.
    Pekeris(ApproxScheme),
}

/// Radial operator of the non-relativistic problem whose closed-form
/// spectrum is the mapped relativistic condition: `2 V` plus the centrifugal term.
pub fn build_hamiltonian(
    params: &PotentialParams,
    state: &StateLabel,
    constants: &PhysicalConstants,
    grid: &GridSpec,
    mode: CentrifugalMode,
) -> Result<Tridiagonal> {
    if let Some(r_pole) = params.pole_radius() {
        if r_pole >= grid.r(0) {
            return Err(Error::Pole { r: r_pole });
        }
    }
    let kinetic = constants.hbar * constants.hbar / (2.0 * constants.m);
    let quarter_kappa = state.kappa() as f64 / 4.0;
    build_operator(grid, kinetic, |r| {
        let v = params.value(r)?;
        let inv_r2 = match mode {
            CentrifugalMode::Exact => 1.0 / (r * r),
            CentrifugalMode::Pekeris(scheme) => approx_inv_r2(&scheme, params, r)?,
        };
        Ok(2.0 * v + kinetic * quarter_kappa * inv_r2)
    })
}

/// The `k` smallest eigenvalues by bisection on the Sturm count, each to
/// `1e-12 max(1, |E|)`.
pub fn lowest_eigenvalues(op: &Tridiagonal, k: usize) -> Result<Vec<f64>> {
    if k > MAX_EIGENVALUES {
        return Err(Error::InvalidParameter(format!("at most {MAX_EIGENVALUES} eigenvalues, asked for {k}")));
    }
    let k = k.min(op.len());
    let (glo, ghi) = op.gershgorin();
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        // the (j+1)-th eigenvalue is the smallest x with count_below(x) > j
        let (mut lo, mut hi) = (glo, ghi);
        if let Some(&prev) = out.last() {
            lo = prev;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-12 * mid.abs().max(1.0) || mid == lo || mid == hi {
                break;
            }
            if op.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

/// Eigenvector for `eigenvalue` by inverse iteration, scaled so that
/// `sum v_i^2 h = 1` and its largest-magnitude entry is positive.
pub fn eigenvector(op: &Tridiagonal, eigenvalue: f64, h: f64) -> Result<Vec<f64>> {
    let n = op.len();
    let shift = eigenvalue + 1e-10 * eigenvalue.abs().max(1.0);
    let mut v = vec![1.0; n];
    for _ in 0..4 {
        v = solve_shifted(op, shift, &v)?;
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NonConvergence("inverse iteration produced a zero vector".into()));
        }
        v.iter_mut().for_each(|x| *x /= norm);
    }
    let scale = 1.0 / h.sqrt();
    let peak = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    let sign = if peak < 0.0 { -1.0 } else { 1.0 };
    v.iter_mut().for_each(|x| *x *= sign * scale);
    Ok(v)
}

/// Thomas algorithm for `(op - shift) x = rhs` with partial safeguarding of zero pivots.
fn solve_shifted(op: &Tridiagonal, shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = op.len();
    let tiny = 1e-300;
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = op.diag[0] - shift;
    if pivot == 0.0 {
        pivot = tiny;
    }
    if n > 1 {
        c[0] = op.off[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        let a = op.off[i - 1];
        pivot = op.diag[i] - shift - a * c[i - 1];
        if pivot == 0.0 {
            pivot = tiny;
        }
        if i + 1 < n {
            c[i] = op.off[i] / pivot;
        }
        d[i] = (rhs[i] - a * d[i - 1]) / pivot;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence("inverse iteration overflowed".into()));
    }
    Ok(x)
}

/// `(4 E_{h/2} - E_h) / 3`.
pub fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Lowest `k` eigenvalues on `grid` and on the refined grid, extrapolated.
pub fn extrapolated_eigenvalues(
    build: impl Fn(&GridSpec) -> Result<Tridiagonal>,
    grid: &GridSpec,
    k: usize,
) -> Result<Vec<f64>> {
    let coarse = lowest_eigenvalues(&build(grid)?, k)?;
    let fine = lowest_eigenvalues(&build(&grid.refined())?, k)?;
    Ok(coarse.iter().zip(&fine).map(|(c, f)| richardson(*c, *f)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationRow {
    pub n: u32,
    pub analytic: Option<f64>,
    pub pekeris_numeric: f64,
    pub exact_numeric: f64,
    /// `exact_numeric - pekeris_numeric`.
    pub approximation_gap: f64,
    /// `(analytic - pekeris_numeric) / |pekeris_numeric|`.
    pub analytic_relative_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationReport {
    pub state: StateLabel,
    pub grid: GridSpec,
    pub rows: Vec<ApproximationRow>,
}

/// Extrapolated eigenvalues with exact and approximated centrifugal terms,
/// alongside the closed-form energies for `n < levels`.
pub fn approximation_error_report(
    params: &PotentialParams,
    scheme: &ApproxScheme,
    state: &StateLabel,
    constants: &PhysicalConstants,
    grid: &GridSpec,
    levels: usize,
) -> Result<ApproximationReport> {
    let exact = extrapolated_eigenvalues(
        |g| build_hamiltonian(params, state, constants, g, CentrifugalMode::Exact),
        grid,
        levels,
    )?;
    let approx = extrapolated_eigenvalues(
        |g| build_hamiltonian(params, state, constants, g, CentrifugalMode::Pekeris(*scheme)),
        grid,
        levels,
    )?;
    let rows = exact
        .iter()
        .zip(&approx)
        .enumerate()
        .map(|(n, (&e, &p))| {
            let label = StateLabel { n: n as u32, ..*state };
            let analytic = nonrelativistic_energy(&label, params, scheme, constants).ok();
            ApproximationRow {
                n: n as u32,
                analytic,
                pekeris_numeric: p,
                exact_numeric: e,
                approximation_gap: e - p,
                analytic_relative_gap: analytic.map(|a| (a - p) / p.abs()),
            }
        })
        .collect();
    Ok(ApproximationReport { state: *state, grid: *grid, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two() {
        let op = Tridiagonal::new(vec![2.0, 2.0], vec![-1.0]).unwrap();
        let ev = lowest_eigenvalues(&op, 2).unwrap();
        assert_relative_eq!(ev[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(ev[1], 3.0, epsilon = 1e-12);
        assert_eq!(op.count_below(2.0), 1);
        assert_eq!(op.count_below(0.5), 0);
        assert_eq!(op.count_below(3.5), 2);
    }

    #[test]
    fn free_particle_box() {
        let grid = GridSpec::new(std::f64::consts::PI, 2000).unwrap();
        let op = build_operator(&grid, 0.5, |_| Ok(0.0)).unwrap();
        let lap = 0.5 / (grid.h() * grid.h());
        assert_eq!(op.diag[0], 2.0 * lap);
        assert_eq!(op.off[0], -lap);
        let ev = lowest_eigenvalues(&op, 3).unwrap();
        for (k, e) in ev.iter().enumerate() {
            let exact = 0.5 * ((k + 1) as f64).powi(2);
            assert!((e - exact).abs() < 10.0 * grid.h() * grid.h() * exact);
        }
    }

    #[test]
    fn sturm_count_matches_eigenvalues() {
        let grid = GridSpec::new(10.0, 2000).unwrap();
        let op = build_operator(&grid, 0.5, |r| Ok(0.5 * r * r)).unwrap();
        let ev = lowest_eigenvalues(&op, 5).unwrap();
        for (j, e) in ev.iter().enumerate() {
            assert_eq!(op.count_below(e - 1e-6), j);
            assert_eq!(op.count_below(e + 1e-6), j + 1);
        }
    }

    #[test]
    fn harmonic_oscillator() {
        // -F''/2 + r^2 F/2: odd oscillator states 1.5, 3.5, 5.5
        let grid = GridSpec::new(12.0, 4000).unwrap();
        let ev = extrapolated_eigenvalues(|g| build_operator(g, 0.5, |r| Ok(0.5 * r * r)), &grid, 3).unwrap();
        for (k, e) in ev.iter().enumerate() {
            assert!((e - (2.0 * k as f64 + 1.5)).abs() < 1e-5, "{e}");
        }
    }

    #[test]
    fn eigenvector_is_normalized_with_nodes() {
        let grid = GridSpec::new(12.0, 2000).unwrap();
        let op = build_operator(&grid, 0.5, |r| Ok(0.5 * r * r)).unwrap();
        let ev = lowest_eigenvalues(&op, 3).unwrap();
        for (k, e) in ev.iter().enumerate() {
            let v = eigenvector(&op, *e, grid.h()).unwrap();
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>() * grid.h();
            assert_relative_eq!(norm, 1.0, max_relative = 1e-12);
            let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let signs: Vec<f64> = v.iter().filter(|x| x.abs() > 1e-6 * peak).map(|x| x.signum()).collect();
            let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
            assert_eq!(changes, k);
        }
    }

    #[test]
    fn pole_on_grid_is_rejected() {
        let p = PotentialParams::new(0.0, -1.0, 0.0, 3.0, 0.5).unwrap();
        let st = StateLabel::new(0, 0, 3).unwrap();
        let grid = GridSpec::new(30.0, 2000).unwrap();
        assert!(matches!(
            build_hamiltonian(&p, &st, &PhysicalConstants::default(), &grid, CentrifugalMode::Exact),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn kappa_zero_modes_coincide() {
        let p = PotentialParams::new(0.0, -3.0, 0.2, 1.0, 0.4).unwrap();
        let st = StateLabel::new(0, 0, 3).unwrap();
        let c = PhysicalConstants::default();
        let grid = GridSpec::new(40.0, 2000).unwrap();
        let a = build_hamiltonian(&p, &st, &c, &grid, CentrifugalMode::Exact).unwrap();
        let b = build_hamiltonian(&p, &st, &c, &grid, CentrifugalMode::Pekeris(ApproxScheme::default()))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_rules() {
        assert!(GridSpec::new(10.0, 1999).is_err());
        let g = GridSpec::default_for(0.1);
        assert_eq!(g.r_max, 60.0);
        assert_eq!(GridSpec::default_for(0.05).r_max, 120.0);
        let f = g.refined();
        assert_relative_eq!(f.h(), g.h() / 2.0, max_relative = 1e-15);
    }
}
