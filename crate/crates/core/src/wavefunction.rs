//! Radial eigenfunctions `F(r)` and `R(r) = r^{-(D-1)/2} F(r)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GammaCoeffs, PotentialParams, StateLabel};
use crate::quadrature::adaptive_simpson;
use crate::specfun::{jacobi_eval, JacobiIndex};

/// Exponent of the `(1 - q z)` factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WExponent {
    /// `1/2 + s` with `s = sqrt(1/4 + gamma3 / (4 alpha^2 q^2))`.
    #[default]
    Generic,
    /// `(1 + s) / 2`.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub state: StateLabel,
    pub energy: f64,
    pub params: PotentialParams,
    /// `sqrt(-gamma1 / (4 alpha^2))`.
    pub exponent_z: f64,
    pub exponent_w: f64,
    pub jacobi: JacobiIndex,
    /// Multiplier applied to the raw expression.
    pub norm: f64,
}

impl RadialSolution {
    /// Builds the solution for a level with coefficients `gamma` at energy `energy`.
    pub fn new(
        state: StateLabel,
        energy: f64,
        gamma: &GammaCoeffs,
        params: &PotentialParams,
        form: WExponent,
    ) -> Result<Self> {
        params.require_deformed()?;
        if !gamma.is_bound_valid() {
            return Err(Error::Validity(format!(
                "gamma1 = {} > 0: no decaying solution",
                gamma.gamma1
            )));
        }
        let (alpha, q) = (params.alpha, params.q);
        let exponent_z = (-gamma.gamma1 / (4.0 * alpha * alpha)).sqrt();
        let radicand = 0.25 + gamma.gamma3 / (4.0 * alpha * alpha * q * q);
        if radicand < 0.0 {
            return Err(Error::Validity(format!("gamma3 radicand {radicand} < 0")));
        }
        let s = radicand.sqrt();
        let exponent_w = match form {
            WExponent::Generic => 0.5 + s,
            WExponent::Printed => 0.5 * (1.0 + s),
        };
        let jacobi = JacobiIndex::new(state.n, 2.0 * exponent_z, 2.0 * s)?;
        Ok(Self { state, energy, params: *params, exponent_z, exponent_w, jacobi, norm: 1.0 })
    }

    /// Same solution multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { norm: self.norm * c, ..*self }
    }

    /// Smallest admissible radius: the pole for `q >= 1`, otherwise zero.
    pub fn r_min(&self) -> f64 {
        self.params.pole_radius().unwrap_or(0.0).max(0.0)
    }
}

/// `norm * (q z)^a (1 - q z)^b P_n^{(2a, 2s)}(1 - 2 q z)` with `z = e^{-2 alpha r}`.
pub fn eval_f(sol: &RadialSolution, r: f64) -> Result<f64> {
    let p = &sol.params;
    if p.q < 0.0 {
        return Err(Error::Domain(format!("q = {} < 0 needs complex powers", p.q)));
    }
    if !(r > 0.0) {
        return Err(Error::Domain(format!("r = {r} must be positive")));
    }
    let log_qz = p.q.ln() - 2.0 * p.alpha * r;
    let qz = log_qz.exp();
    let w = 1.0 - qz;
    if w.abs() <= 4.0 * f64::EPSILON {
        return Err(Error::Pole { r });
    }
    if w < 0.0 {
        return Err(Error::Domain(format!("r = {r} lies inside the pole radius")));
    }
    let jac = jacobi_eval(&sol.jacobi, 1.0 - 2.0 * qz);
    let env = (sol.exponent_z * log_qz + sol.exponent_w * w.ln()).exp();
    Ok(sol.norm * env * jac)
}

/// `r^{-(D-1)/2} F(r)`.
pub fn eval_r(sol: &RadialSolution, r: f64) -> Result<f64> {
    let f = eval_f(sol, r)?;
    let power = -(f64::from(sol.state.d) - 1.0) / 2.0;
    Ok(if power == 0.0 { f } else { r.powf(power) * f })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCount {
    pub nodes: u32,
    /// `|F(r_max)| < 1e-8 max|F|`.
    pub decayed: bool,
}

/// Strict sign changes of `F` on `(r_min, r_max)`.
///
/// Half of the samples are uniform in `r`, half uniform in `q e^{-2 alpha r}`
/// so that nodes crowded near the origin are resolved.
pub fn count_nodes(sol: &RadialSolution, r_max: f64, samples: usize) -> Result<NodeCount> {
    if samples < 1000 {
        return Err(Error::InvalidParameter(format!("need at least 1000 samples, got {samples}")));
    }
    let r_lo = sol.r_min();
    if !(r_max > r_lo) {
        return Err(Error::InvalidParameter(format!("r_max = {r_max} must exceed {r_lo}")));
    }
    let p = &sol.params;
    let half = samples / 2;
    let mut radii: Vec<f64> = (1..half).map(|i| r_lo + (r_max - r_lo) * i as f64 / half as f64).collect();
    let w_hi = 1.0 - p.q * (-2.0 * p.alpha * r_lo).exp().min(1.0);
    let w_lo = 1.0 - p.q * (-2.0 * p.alpha * r_max).exp();
    for i in 1..half {
        // uniform in w = 1 - q z between its values at r_lo and r_max
        let w = w_hi + (w_lo - w_hi) * i as f64 / half as f64;
        let r = -((1.0 - w) / p.q).ln() / (2.0 * p.alpha);
        if r > r_lo && r < r_max {
            radii.push(r);
        }
    }
    radii.sort_by(f64::total_cmp);
    radii.dedup();

    let mut nodes = 0;
    let mut prev_sign = 0.0;
    let mut peak: f64 = 0.0;
    for &r in &radii {
        let v = eval_f(sol, r)?;
        peak = peak.max(v.abs());
        if v != 0.0 {
            let sign = v.signum();
            if prev_sign != 0.0 && sign != prev_sign {
                nodes += 1;
            }
            prev_sign = sign;
        }
    }
    let tail = eval_f(sol, r_max)?.abs();
    Ok(NodeCount { nodes, decayed: tail < 1e-8 * peak })
}

pub const NORMALIZE_RTOL: f64 = 1e-10;
pub const TAIL_TOL: f64 = 1e-12;
pub const MAX_EXTENSIONS: u32 = 20;

/// `\int F^2 dr` from the pole (or origin) to infinity, extending `r_max`
/// geometrically until the next window adds less than `1e-12` relative.
pub fn norm_integral(sol: &RadialSolution, r_max: f64) -> Result<f64> {
    let r_lo = sol.r_min();
    if !(r_max > r_lo) {
        return Err(Error::InvalidParameter(format!("r_max = {r_max} must exceed {r_lo}")));
    }
    let integrand = |r: f64| if r <= r_lo { 0.0 } else { eval_f(sol, r).map(|v| v * v).unwrap_or(0.0) };
    let integrate = |a: f64, b: f64| -> Result<f64> {
        let coarse = adaptive_simpson(&integrand, a, b, f64::INFINITY, 256)?;
        let tol = (NORMALIZE_RTOL * 1e-2 * coarse.abs()).max(f64::MIN_POSITIVE);
        adaptive_simpson(&integrand, a, b, tol, 256)
    };
    let mut total = integrate(r_lo, r_max)?;
    let mut hi = r_max;
    for _ in 0..MAX_EXTENSIONS {
        let next = r_lo + 2.0 * (hi - r_lo);
        let tail = integrate(hi, next)?;
        total += tail;
        hi = next;
        if tail <= TAIL_TOL * total {
            return Ok(total);
        }
    }
    Err(Error::NonConvergence(format!(
        "normalization tail still above {TAIL_TOL} after {MAX_EXTENSIONS} extensions (r = {hi})"
    )))
}

/// Returns a copy whose `\int F^2 dr = 1`.
pub fn normalize(sol: &RadialSolution, r_max: f64) -> Result<RadialSolution> {
    let integral = norm_integral(sol, r_max)?;
    if !(integral > 0.0) {
        return Err(Error::Validity(format!("norm integral {integral:e} is not positive")));
    }
    Ok(sol.scaled(1.0 / integral.sqrt()))
}
