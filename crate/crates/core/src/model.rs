//! Physical parameters of the deformed five-parameter exponential-type
//! potential and every coefficient derived from them.
//!
//! The potential is
//!
//! ```text
//! V(r) = p1 + p2 z / (1 - q z) + p3 z^2 / (1 - q z)^2,   z = exp(-2 alpha r)
//! ```
//!
//! and the centrifugal barrier `1/r^2` is replaced by the same rational
//! family, `c0 + omega z/(1 - q z) + lambda z^2/(1 - q z)^2`. Both the
//! relativistic (equal scalar and vector potential Klein-Gordon) and the
//! non-relativistic problems reduce to the same three coefficients
//! `gamma1..gamma3`; they differ only in the [`Coupling`] that multiplies the
//! energy and the potential.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nu::NuInput;

/// `|1 - q z|` at or below this value is treated as a pole.
const POLE_GUARD: f64 = 4.0 * f64::EPSILON;

/// The five parameters `(p1, p2, p3, q, alpha)` of the potential.
///
/// `q = 0` is only reachable through [`PotentialParams::product_form`]; the
/// energy formulas divide by `q` and refuse that form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub q: f64,
    pub alpha: f64,
}

impl PotentialParams {
    /// Rational (deformed) form. Requires `alpha > 0` and `q > 0` or `-1 <= q < 0`.
    pub fn new(p1: f64, p2: f64, p3: f64, q: f64, alpha: f64) -> Result<Self> {
        if q == 0.0 {
            return Err(Error::InvalidParameter(
                "q = 0 is not a valid deformation; use PotentialParams::product_form".into(),
            ));
        }
        let params = Self { p1, p2, p3, q, alpha };
        params.validate()?;
        Ok(params)
    }

    /// The `q -> 0` limit `V = p1 + p2 e^{-2 alpha r} + p3 e^{-4 alpha r}`.
    pub fn product_form(p1: f64, p2: f64, p3: f64, alpha: f64) -> Result<Self> {
        let params = Self { p1, p2, p3, q: 0.0, alpha };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p1", self.p1), ("p2", self.p2), ("p3", self.p3), ("q", self.q)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.q < -1.0 {
            return Err(Error::InvalidParameter(format!(
                "q must satisfy q > 0 or -1 <= q < 0, got {}",
                self.q
            )));
        }
        Ok(())
    }

    pub fn is_product_form(&self) -> bool {
        self.q == 0.0
    }

    /// Error unless the deformation is nonzero (energy formulas divide by `q`).
    pub fn require_deformed(&self) -> Result<()> {
        if self.is_product_form() {
            Err(Error::InvalidParameter(
                "q = 0 (product form) is not supported by the energy formulas".into(),
            ))
        } else {
            Ok(())
        }
    }

    /// Location of the pole `1 - q e^{-2 alpha r} = 0`, which exists only for `q >= 1`.
    pub fn pole_radius(&self) -> Option<f64> {
        (self.q >= 1.0).then(|| self.q.ln() / (2.0 * self.alpha))
    }

    /// The two screening factors `z/(1-qz)` and `z^2/(1-qz)^2` with `z = e^{-2 alpha r}`.
    pub fn screening_factors(&self, r: f64) -> Result<(f64, f64)> {
        let z = (-2.0 * self.alpha * r).exp();
        let denom = 1.0 - self.q * z;
        if denom.abs() <= POLE_GUARD {
            return Err(Error::Pole { r });
        }
        let t = z / denom;
        Ok((t, t * t))
    }

    /// `V(r)`.
    pub fn value(&self, r: f64) -> Result<f64> {
        potential_value(self, r)
    }
}

/// Evaluates the potential at `r`.
pub fn potential_value(params: &PotentialParams, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("r must be non-negative, got {r}")));
    }
    if r.is_infinite() {
        return Ok(params.p1);
    }
    let (t1, t2) = params.screening_factors(r)?;
    Ok(params.p1 + params.p2 * t1 + params.p3 * t2)
}

/// Constants `(c0, omega, lambda)` of the exponential surrogate for `1/r^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxScheme {
    pub c0: f64,
    pub omega: f64,
    pub lambda: f64,
}

impl Default for ApproxScheme {
    fn default() -> Self {
        Self { c0: 1.0 / 12.0, omega: 0.0, lambda: 0.0 }
    }
}

impl ApproxScheme {
    pub fn new(c0: f64, omega: f64, lambda: f64) -> Self {
        Self { c0, omega, lambda }
    }

    /// Greene-Aldrich scheme `1/r^2 ~ 4 alpha^2 e^{-4 alpha r} / (1 - e^{-2 alpha r})^2`.
    /// Only meaningful together with `q = 1`.
    pub fn greene_aldrich(alpha: f64) -> Self {
        Self { c0: 0.0, omega: 0.0, lambda: 4.0 * alpha * alpha }
    }
}

/// Approximation of `1/r^2` at `r` using the screening of `params`.
pub fn approx_inv_r2(scheme: &ApproxScheme, params: &PotentialParams, r: f64) -> Result<f64> {
    let (t1, t2) = params.screening_factors(r)?;
    Ok(scheme.c0 + scheme.omega * t1 + scheme.lambda * t2)
}

/// Quantum numbers of a radial state in `D` dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateLabel {
    pub n: u32,
    pub l: u32,
    #[serde(rename = "D")]
    pub d: u32,
}

impl StateLabel {
    pub fn new(n: u32, l: u32, d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension D must be positive".into()));
        }
        Ok(Self { n, l, d })
    }

    /// Centrifugal factor `(D + 2l - 1)(D + 2l - 3)`, exact.
    pub fn kappa(&self) -> i64 {
        centrifugal_factor(self.d, self.l)
    }
}

/// `(D + 2l - 1)(D + 2l - 3)` as an exact integer.
pub fn centrifugal_factor(d: u32, l: u32) -> i64 {
    let k = i64::from(d) + 2 * i64::from(l);
    (k - 1) * (k - 3)
}

/// Rest mass `mu` (relativistic), mass `m` (non-relativistic), `hbar` and `kB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub mu: f64,
    pub m: f64,
    pub hbar: f64,
    pub kb: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { mu: 1.0, m: 1.0, hbar: 1.0, kb: 1.0 }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("m", self.m), ("hbar", self.hbar), ("kB", self.kb)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// How the energy enters the radial equation.
///
/// Relativistically the equation carries `E^2 - mu^2` and `2(E + mu) V(r)`;
/// the non-relativistic limit replaces `E + mu -> 2m/hbar^2` and `E - mu -> E_nl`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    /// Coefficient standing alone in the equation (`E^2 - mu^2`).
    pub kinetic: f64,
    /// Coefficient multiplying the potential (`2(E + mu)`).
    pub potential: f64,
}

impl Coupling {
    pub fn relativistic(energy: f64, mu: f64) -> Self {
        Self { kinetic: (energy - mu) * (energy + mu), potential: 2.0 * (energy + mu) }
    }

    pub fn nonrelativistic(energy: f64, m: f64, hbar: f64) -> Self {
        let s = 2.0 * m / (hbar * hbar);
        Self { kinetic: s * energy, potential: 2.0 * s }
    }
}

/// The three coefficients `gamma1..gamma3` of the reduced equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaCoeffs {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
}

impl GammaCoeffs {
    /// `gamma1 <= 0`, required for the real exponent `sqrt(-gamma1 / 4 alpha^2)`.
    pub fn is_bound_valid(&self) -> bool {
        self.gamma1 <= 0.0
    }
}

/// Coefficients for an arbitrary coupling.
pub fn gamma_coeffs(
    params: &PotentialParams,
    scheme: &ApproxScheme,
    kappa: i64,
    coupling: Coupling,
) -> GammaCoeffs {
    let k = kappa as f64;
    GammaCoeffs {
        gamma1: coupling.kinetic - coupling.potential * params.p1 - scheme.c0 * k / 4.0,
        gamma2: coupling.potential * params.p2 + k * scheme.omega / 4.0,
        gamma3: coupling.potential * params.p3 + k * scheme.lambda / 4.0,
    }
}

pub fn gamma_relativistic(
    params: &PotentialParams,
    scheme: &ApproxScheme,
    state: &StateLabel,
    energy: f64,
    mu: f64,
) -> GammaCoeffs {
    gamma_coeffs(params, scheme, state.kappa(), Coupling::relativistic(energy, mu))
}

/// Non-relativistic (tilde) coefficients. Only `gamma1` depends on `energy`.
pub fn gamma_nonrelativistic(
    params: &PotentialParams,
    scheme: &ApproxScheme,
    kappa: i64,
    energy: f64,
    constants: &PhysicalConstants,
) -> GammaCoeffs {
    gamma_coeffs(
        params,
        scheme,
        kappa,
        Coupling::nonrelativistic(energy, constants.m, constants.hbar),
    )
}

/// `gamma_i` divided by `4 alpha^2 q^{i-1}`: the dimensionless combinations
/// that appear everywhere downstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledGamma {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
}

impl ScaledGamma {
    pub fn new(gamma: &GammaCoeffs, alpha: f64, q: f64) -> Self {
        let s = 4.0 * alpha * alpha;
        Self { g1: gamma.gamma1 / s, g2: gamma.gamma2 / (s * q), g3: gamma.gamma3 / (s * q * q) }
    }
}

/// Coefficients of `omega1 z^2 + omega2 z + omega3` in the hypergeometric form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaCoeffs {
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
}

impl OmegaCoeffs {
    /// Parametric input with `a1 = a2 = a3 = 1`, `xi1 = -omega1`, `xi2 = omega2`, `xi3 = -omega3`.
    pub fn nu_input(&self) -> NuInput {
        NuInput {
            a1: 1.0,
            a2: 1.0,
            a3: 1.0,
            xi1: -self.omega1,
            xi2: self.omega2,
            xi3: -self.omega3,
        }
    }
}

pub fn omega_coeffs(gamma: &GammaCoeffs, alpha: f64, q: f64) -> OmegaCoeffs {
    let g = ScaledGamma::new(gamma, alpha, q);
    OmegaCoeffs { omega1: g.g1 + g.g2 - g.g3, omega2: -(2.0 * g.g1 + g.g2), omega3: g.g1 }
}

/// Closed-form `alpha_4..alpha_13` written directly in terms of the gammas,
/// independent of the generic parametric derivation. Square roots are `None`
/// when their radicand is negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiteralNuCoefficients {
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    pub a7: f64,
    pub a8: f64,
    pub a9: f64,
    pub a10: Option<f64>,
    pub a11: Option<f64>,
    pub a12: Option<f64>,
    pub a13: Option<f64>,
}

pub fn literal_nu_coefficients(gamma: &GammaCoeffs, alpha: f64, q: f64) -> LiteralNuCoefficients {
    let g = ScaledGamma::new(gamma, alpha, q);
    let root_w3 = (-g.g1 >= 0.0).then(|| (-g.g1).sqrt());
    let root_s = (0.25 + g.g3 >= 0.0).then(|| (0.25 + g.g3).sqrt());
    let both = root_w3.zip(root_s);
    LiteralNuCoefficients {
        a4: 0.0,
        a5: -0.5,
        a6: 0.25 - g.g1 - g.g2 + g.g3,
        a7: 2.0 * g.g1 + g.g2,
        a8: -g.g1,
        a9: 0.25 + g.g3,
        a10: root_w3.map(|w| 1.0 + 2.0 * w),
        a11: both.map(|(w, s)| 2.0 + 2.0 * (s + w)),
        a12: root_w3,
        a13: both.map(|(w, s)| -0.5 - (s + w)),
    }
}

/// Sign in front of `sqrt(Q1 - Q2)` in the bound-state cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaBranch {
    #[default]
    Plus,
    Minus,
}

/// Which definition of `Q1, Q2` to use in the recast spectrum
/// `E = (2 hbar^2 alpha^2 / m) [Q1 - (Q2 / 2 rho + rho / 2)^2]`, `rho = n + sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecastForm {
    /// `Q1 = 2 m p1 / (hbar^2 alpha^2) + kappa c0 / (16 hbar alpha^2)`,
    /// `Q2 = -(g2 + g3)`.
    #[default]
    Printed,
    /// Coefficients for which the recast reproduces the closed-form
    /// non-relativistic energy exactly:
    /// `Q1 = m p1 / (hbar^2 alpha^2) + kappa c0 / (16 alpha^2)`, `Q2 = g2 - g3`.
    Hbar2,
}

/// `Q1, Q2, sigma, eta` of the recast non-relativistic spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecastCoeffs {
    pub q1: f64,
    pub q2: f64,
    pub sigma: f64,
    pub eta: f64,
}

impl RecastCoeffs {
    /// Builds the coefficients and the cap `eta = -sigma + sqrt(Q1) +- sqrt(Q1 - Q2)`.
    pub fn from_parts(q1: f64, q2: f64, sigma: f64, branch: EtaBranch) -> Result<Self> {
        if q1 < 0.0 {
            return Err(Error::Domain(format!(
                "Q1 = {q1} < 0: no bound states guaranteed by cap formula"
            )));
        }
        if q1 < q2 {
            return Err(Error::Domain(format!(
                "Q1 = {q1} < Q2 = {q2}: no bound states guaranteed by cap formula"
            )));
        }
        let tail = (q1 - q2).sqrt();
        let eta = match branch {
            EtaBranch::Plus => -sigma + q1.sqrt() + tail,
            EtaBranch::Minus => -sigma + q1.sqrt() - tail,
        };
        Ok(Self { q1, q2, sigma, eta })
    }

    /// `-E(n) / (2 hbar^2 alpha^2 / m)` written as the recast bracket.
    pub fn level_bracket(&self, n: u32) -> f64 {
        let rho = f64::from(n) + self.sigma;
        let inner = self.q2 / (2.0 * rho) + rho / 2.0;
        self.q1 - inner * inner
    }
}

pub fn recast_coeffs(
    params: &PotentialParams,
    scheme: &ApproxScheme,
    state: &StateLabel,
    constants: &PhysicalConstants,
    form: RecastForm,
    branch: EtaBranch,
) -> Result<RecastCoeffs> {
    params.require_deformed()?;
    let kappa = state.kappa();
    let k = kappa as f64;
    let (alpha, q) = (params.alpha, params.q);
    let (m, hbar) = (constants.m, constants.hbar);
    let gamma = gamma_nonrelativistic(params, scheme, kappa, 0.0, constants);
    let g = ScaledGamma::new(&gamma, alpha, q);

    let sigma_radicand = 1.0 + gamma.gamma3 / (alpha * alpha * q * q);
    if sigma_radicand < 0.0 {
        return Err(Error::Domain(format!(
            "sigma radicand {sigma_radicand} < 0: no bound states guaranteed by cap formula"
        )));
    }
    let sigma = 0.5 * (1.0 + sigma_radicand.sqrt());

    let a2 = alpha * alpha;
    let (q1, q2) = match form {
        RecastForm::Printed => (
            2.0 * m * params.p1 / (hbar * hbar * a2) + k * scheme.c0 / (16.0 * hbar * a2),
            -(g.g2 + g.g3),
        ),
        RecastForm::Hbar2 => {
            (m * params.p1 / (hbar * hbar * a2) + k * scheme.c0 / (16.0 * a2), g.g2 - g.g3)
        }
    };
    RecastCoeffs::from_parts(q1, q2, sigma, branch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table1() -> PotentialParams {
        PotentialParams::new(1.0, 2.0, 1.0, 1.0, 0.1).unwrap()
    }

    #[test]
    fn potential_tends_to_p1() {
        let p = table1();
        assert_eq!(potential_value(&p, f64::INFINITY).unwrap(), 1.0);
        assert_relative_eq!(potential_value(&p, 500.0).unwrap(), 1.0, epsilon = 1e-40);
    }

    #[test]
    fn potential_at_half() {
        // z = 1/2: 1 + 2 (1/2)/(1/2) + (1/4)/(1/4)
        let r = 2f64.ln() / 0.2;
        assert_relative_eq!(potential_value(&table1(), r).unwrap(), 4.0, max_relative = 1e-14);
    }

    #[test]
    fn pole_at_origin_for_unit_q() {
        assert!(matches!(potential_value(&table1(), 0.0), Err(Error::Pole { .. })));
        let p = PotentialParams::new(0.0, 1.0, 0.0, 2.0, 0.5).unwrap();
        let r = p.pole_radius().unwrap();
        assert!(matches!(p.value(r), Err(Error::Pole { .. })));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PotentialParams::new(0.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(PotentialParams::new(0.0, 0.0, 0.0, -1.5, 1.0).is_err());
        assert!(PotentialParams::new(0.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(PotentialParams::new(0.0, 0.0, 0.0, 1.0, -3.0).is_err());
        assert!(PotentialParams::new(0.0, 0.0, 0.0, -1.0, 1.0).is_ok());
    }

    #[test]
    fn product_form_limit() {
        let p = PotentialParams::product_form(1.0, 2.0, 3.0, 0.5).unwrap();
        let r: f64 = 0.7;
        let e = (-r).exp();
        assert_relative_eq!(p.value(r).unwrap(), 1.0 + 2.0 * e + 3.0 * e * e, max_relative = 1e-15);
        assert!(p.require_deformed().is_err());
        assert!(p.value(0.0).is_ok());
    }

    #[test]
    fn greene_aldrich_scheme() {
        let alpha = 0.05;
        let p = PotentialParams::new(0.0, 0.0, 0.0, 1.0, alpha).unwrap();
        let s = ApproxScheme::greene_aldrich(alpha);
        let r = 1.0;
        let expect = 4.0 * alpha * alpha * (-4.0 * alpha * r).exp()
            / (1.0 - (-2.0 * alpha * r).exp()).powi(2);
        assert_relative_eq!(approx_inv_r2(&s, &p, r).unwrap(), expect, max_relative = 1e-14);
    }

    #[test]
    fn constant_scheme() {
        let s = ApproxScheme::new(1.0 / 12.0, 0.0, 0.0);
        for r in [0.1, 1.0, 10.0] {
            assert_eq!(approx_inv_r2(&s, &table1(), r).unwrap(), 1.0 / 12.0);
        }
    }

    #[test]
    fn greene_aldrich_small_r_error() {
        // With omega = 0 the surrogate is (x e^{-x} / sinh x)^2 / r^2, x = alpha r,
        // so r^2 * approx - 1 ~ -2x: first order, about 18% at x = 0.1.
        let alpha = 0.1;
        let p = PotentialParams::new(0.0, 0.0, 0.0, 1.0, alpha).unwrap();
        let s = ApproxScheme::greene_aldrich(alpha);
        let r = 0.1 / alpha;
        let x: f64 = alpha * r;
        let err = r * r * approx_inv_r2(&s, &p, r).unwrap() - 1.0;
        let expect = (x * (-x).exp() / x.sinh()).powi(2) - 1.0;
        assert_relative_eq!(err, expect, max_relative = 1e-12);
        // Adding omega = 4 alpha^2 gives 4 alpha^2 z / (1 - z)^2 = (x / sinh x)^2 / r^2.
        let full = ApproxScheme::new(0.0, 4.0 * alpha * alpha, 4.0 * alpha * alpha);
        let err = (r * r * approx_inv_r2(&full, &p, r).unwrap() - 1.0).abs();
        assert!(err < 0.01, "err = {err}");
    }

    #[test]
    fn kappa_values() {
        assert_eq!(centrifugal_factor(3, 0), 0);
        assert_eq!(centrifugal_factor(1, 1), 0);
        assert_eq!(centrifugal_factor(2, 0), -1);
        assert_eq!(centrifugal_factor(3, 1), 8);
        assert_eq!(centrifugal_factor(1, 0), 0);
        for d in 1..8 {
            for l in 1..6 {
                assert_eq!(centrifugal_factor(d, l), centrifugal_factor(d + 2, l - 1));
            }
        }
    }

    #[test]
    fn gamma_at_negative_rest_energy() {
        let p = table1();
        let scheme = ApproxScheme::new(1.0 / 12.0, 2.0, 4.0);
        let g = gamma_relativistic(&p, &scheme, &StateLabel::new(0, 0, 3).unwrap(), -2.0, 2.0);
        assert_eq!(g.gamma2, 0.0);
        assert_eq!(g.gamma3, 0.0);
        let st = StateLabel::new(1, 2, 4).unwrap();
        let k = st.kappa() as f64;
        let g = gamma_relativistic(&p, &scheme, &st, -2.0, 2.0);
        assert_eq!(g.gamma2, k * 2.0 / 4.0);
        assert_eq!(g.gamma3, k * 4.0 / 4.0);
    }

    #[test]
    fn gamma_table1_hand_values() {
        // E = 0, mu = 2, kappa = 8: gamma2 = 2*2*2 + 8 omega/4, gamma3 = 2*2*1 + 8 lambda/4.
        let p = table1();
        for (omega, lambda) in [(2.0, 4.0), (0.3, -1.7)] {
            let scheme = ApproxScheme::new(1.0 / 12.0, omega, lambda);
            let g = gamma_relativistic(&p, &scheme, &StateLabel::new(0, 1, 3).unwrap(), 0.0, 2.0);
            assert_relative_eq!(g.gamma2, 8.0 + 2.0 * omega, max_relative = 1e-15);
            assert_relative_eq!(g.gamma3, 4.0 + 2.0 * lambda, max_relative = 1e-15);
        }
    }

    #[test]
    fn omega_direct_ratios() {
        let alpha = 0.3;
        let q = 0.7;
        let a = 4.0 * alpha * alpha;
        let w = omega_coeffs(&GammaCoeffs { gamma1: -a, gamma2: 0.0, gamma3: 0.0 }, alpha, q);
        assert_relative_eq!(w.omega3, -1.0, max_relative = 1e-15);
        assert_relative_eq!(w.nu_input().xi3, 1.0, max_relative = 1e-15);
        let w = omega_coeffs(&GammaCoeffs { gamma1: 0.0, gamma2: a * q, gamma3: 0.0 }, alpha, q);
        assert_relative_eq!(w.omega1, 1.0, max_relative = 1e-15);
        assert_relative_eq!(w.omega2, -1.0, max_relative = 1e-15);
        assert_eq!(w.omega3, 0.0);
    }

    #[test]
    fn gamma_is_affine_and_quadratic_in_energy() {
        let p = table1();
        let scheme = ApproxScheme::new(1.0 / 12.0, 2.0, 4.0);
        let st = StateLabel::new(0, 2, 3).unwrap();
        let mu = 2.0;
        let h = 1e-3;
        let g = |e: f64| gamma_relativistic(&p, &scheme, &st, e, mu);
        for e in [-3.0, 0.5, 4.0] {
            let (a, b, c) = (g(e - h), g(e), g(e + h));
            // gamma2, gamma3: slope 2 p_i, zero curvature
            assert_relative_eq!((c.gamma2 - a.gamma2) / (2.0 * h), 2.0 * p.p2, max_relative = 1e-9);
            assert_relative_eq!((c.gamma3 - a.gamma3) / (2.0 * h), 2.0 * p.p3, max_relative = 1e-9);
            assert!((c.gamma2 - 2.0 * b.gamma2 + a.gamma2).abs() < 1e-12);
            // gamma1: second difference = 2 h^2
            assert_relative_eq!(c.gamma1 - 2.0 * b.gamma1 + a.gamma1, 2.0 * h * h, max_relative = 1e-5);
        }
    }

    #[test]
    fn recast_edge_cases() {
        let r = RecastCoeffs::from_parts(4.0, 4.0, 0.7, EtaBranch::Plus).unwrap();
        assert_relative_eq!(r.eta, -0.7 + 2.0, max_relative = 1e-15);
        assert!(RecastCoeffs::from_parts(1.0, 2.0, 1.0, EtaBranch::Plus).is_err());

        // p1 = 0, kappa = 0 -> Q1 = 0; eta defined only for Q2 <= 0.
        let consts = PhysicalConstants::default();
        let st = StateLabel::new(0, 0, 3).unwrap();
        let scheme = ApproxScheme::default();
        let attractive = PotentialParams::new(0.0, -1.0, 0.0, 1.0, 0.2).unwrap();
        let rc = recast_coeffs(&attractive, &scheme, &st, &consts, RecastForm::Hbar2, EtaBranch::Plus)
            .unwrap();
        assert_eq!(rc.q1, 0.0);
        assert_eq!(rc.sigma, 1.0); // gamma3 = 0
        assert_relative_eq!(rc.q2, -25.0, max_relative = 1e-14);
        // The printed form flips the sign of Q2 = -(g2 + g3) = 25 > Q1.
        assert!(recast_coeffs(&attractive, &scheme, &st, &consts, RecastForm::Printed, EtaBranch::Plus)
            .is_err());
        // Hbar2: Q2 = g2 > 0 for repulsive p2 -> rejected.
        let repulsive = PotentialParams::new(0.0, 1.0, 0.0, 1.0, 0.2).unwrap();
        assert!(recast_coeffs(&repulsive, &scheme, &st, &consts, RecastForm::Hbar2, EtaBranch::Plus)
            .is_err());
    }

    #[test]
    fn recast_sigma_radicand_error() {
        let p = PotentialParams::new(0.0, 0.0, -10.0, 1.0, 0.1).unwrap();
        let err = recast_coeffs(
            &p,
            &ApproxScheme::default(),
            &StateLabel::new(0, 0, 3).unwrap(),
            &PhysicalConstants::default(),
            RecastForm::Printed,
            EtaBranch::Plus,
        );
        assert!(matches!(err, Err(Error::Domain(_))));
    }
}
