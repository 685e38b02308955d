//! Vibrational thermodynamics of the recast non-relativistic spectrum
//! `E(rho) = -(A + B/rho^2 + C rho^2)`, `rho = n + sigma`.
//!
//! The partition function is available as the discrete level sum, as the
//! classical-limit integral over `rho` (quadrature), and as the printed
//! closed form, which is only kept for comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RecastCoeffs;
use crate::quadrature::GaussLegendre;
use crate::specfun::erfi;

/// Largest Boltzmann exponent accepted by [`partition_sum`].
pub const EXPONENT_GUARD: f64 = 700.0;

/// Relative step of the finite-difference derivatives in `beta`.
pub const FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoCoeffs {
    pub a: f64,
    pub b: f64,
    pub c_coef: f64,
    pub sigma: f64,
    pub eta: f64,
    pub beta: f64,
}

impl ThermoCoeffs {
    pub fn new(a: f64, b: f64, c_coef: f64, sigma: f64, eta: f64, beta: f64) -> Result<Self> {
        let tc = Self { a, b, c_coef, sigma, eta, beta };
        tc.validate()?;
        Ok(tc)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c_coef, self.sigma, self.eta, self.beta];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite thermo coefficient in {self:?}")));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {}", self.beta)));
        }
        if self.c_coef < 0.0 {
            return Err(Error::InvalidParameter(format!("C must be non-negative, got {}", self.c_coef)));
        }
        Ok(())
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        Self { beta, ..*self }
    }

    pub fn with_eta(&self, eta: f64) -> Self {
        Self { eta, ..*self }
    }

    /// `B/rho^2 + C rho^2`.
    fn g(&self, rho: f64) -> f64 {
        self.b / (rho * rho) + self.c_coef * rho * rho
    }

    fn g_prime(&self, rho: f64) -> f64 {
        -2.0 * self.b / (rho * rho * rho) + 2.0 * self.c_coef * rho
    }

    /// `-E(rho) = A + B/rho^2 + C rho^2`.
    pub fn exponent_per_beta(&self, rho: f64) -> f64 {
        self.a + self.g(rho)
    }

    /// `E(rho)`.
    pub fn energy(&self, rho: f64) -> f64 {
        -self.exponent_per_beta(rho)
    }

    /// Number of levels `n = 0..=floor(eta)`; zero for negative `eta`.
    pub fn level_count(&self) -> u32 {
        if self.eta < 0.0 {
            0
        } else {
            self.eta.floor() as u32 + 1
        }
    }
}

/// `A = (2 hbar^2 alpha^2/m)(Q2/2 - Q1)`, `B = hbar^2 alpha^2 Q2^2 / 2m`, `C = hbar^2 alpha^2 / 2m`.
pub fn thermo_coeffs(rc: &RecastCoeffs, alpha: f64, m: f64, hbar: f64, beta: f64) -> Result<ThermoCoeffs> {
    let k = hbar * hbar * alpha * alpha / m;
    ThermoCoeffs::new(
        2.0 * k * (rc.q2 / 2.0 - rc.q1),
        k * rc.q2 * rc.q2 / 2.0,
        k / 2.0,
        rc.sigma,
        rc.eta,
        beta,
    )
}

/// Integration range of the classical-limit partition function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bounds {
    /// `[0, eta]`.
    #[default]
    Printed,
    /// `[sigma, eta + sigma]`.
    Shifted,
}

impl Bounds {
    pub fn range(&self, tc: &ThermoCoeffs) -> (f64, f64) {
        match self {
            Bounds::Printed => (0.0, tc.eta),
            Bounds::Shifted => (tc.sigma, tc.eta + tc.sigma),
        }
    }
}

/// Which partition function thermodynamic quantities are derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZForm {
    Sum,
    Integral(Bounds),
}

/// `sum_{n=0}^{levels-1} exp(beta (A + B/(n+sigma)^2 + C (n+sigma)^2))`.
pub fn partition_sum(tc: &ThermoCoeffs, levels: u32) -> Result<f64> {
    let mut z = 0.0;
    for n in 0..levels {
        let x = tc.beta * tc.exponent_per_beta(f64::from(n) + tc.sigma);
        if x > EXPONENT_GUARD {
            return Err(Error::Overflow(format!("Boltzmann exponent {x} at n = {n}")));
        }
        z += x.exp();
    }
    Ok(z)
}

/// Boltzmann statistics of the discrete levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumMoments {
    pub log_z: f64,
    pub mean: f64,
    pub variance: f64,
}

/// `ln Z`, `<E>` and `Var(E)` of the level sum, without overflow.
pub fn sum_moments(tc: &ThermoCoeffs, levels: u32) -> Result<SumMoments> {
    if levels == 0 {
        return Err(Error::Domain("empty spectrum: Z = 0".into()));
    }
    let energies: Vec<f64> = (0..levels).map(|n| tc.energy(f64::from(n) + tc.sigma)).collect();
    let top = energies.iter().map(|e| -tc.beta * e).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = energies.iter().map(|e| (-tc.beta * e - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mean = weights.iter().zip(&energies).map(|(w, e)| w * e).sum::<f64>() / total;
    let variance =
        weights.iter().zip(&energies).map(|(w, e)| w * (e - mean) * (e - mean)).sum::<f64>() / total;
    Ok(SumMoments { log_z: top + total.ln(), mean, variance })
}

const GL_ORDER: usize = 20;
const BASE_PANELS: usize = 64;

/// Panel breakpoints for the classical-limit integral, graded towards the
/// endpoints where the integrand varies on the scale `1/(beta |g'|)`.
/// Built once per `beta` neighbourhood so that `Z(beta)` is smooth.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralRule {
    edges: Vec<f64>,
    gl: GaussLegendre,
}

impl IntegralRule {
    pub fn new(tc: &ThermoCoeffs, bounds: Bounds) -> Result<Self> {
        let (lo, hi) = bounds.range(tc);
        check_integrable(tc, lo)?;
        let mut edges: Vec<f64> =
            (0..=BASE_PANELS).map(|k| lo + (hi - lo) * k as f64 / BASE_PANELS as f64).collect();
        if hi > lo {
            let base = (hi - lo) / BASE_PANELS as f64;
            for (end, dir) in [(lo, 1.0), (hi, -1.0)] {
                if end <= 0.0 {
                    continue;
                }
                let slope = tc.beta * tc.g_prime(end).abs();
                if slope * base <= 1.0 {
                    continue;
                }
                let mut w = 1.0 / slope;
                while w < base {
                    edges.push(end + dir * w);
                    w *= 2.0;
                }
            }
            *edges.last_mut().unwrap() = hi;
            edges.sort_by(f64::total_cmp);
            edges.dedup();
        }
        Ok(Self { edges, gl: GaussLegendre::new(GL_ORDER) })
    }

    /// `ln \int exp(beta (A + g(rho))) d rho` over the rule's range, evaluated at `tc.beta`.
    pub fn log_integral(&self, tc: &ThermoCoeffs) -> Result<f64> {
        Ok(tc.beta * tc.a + self.log_integral_g(tc)?)
    }

    /// `ln \int exp(beta g(rho)) d rho`.
    fn log_integral_g(&self, tc: &ThermoCoeffs) -> Result<f64> {
        let (lo, hi) = (self.edges[0], self.edges[self.edges.len() - 1]);
        if hi <= lo {
            return Err(Error::Domain(format!("empty integration range [{lo}, {hi}]: Z = 0")));
        }
        // g is convex for B >= 0 and increasing for B < 0, so its maximum is at an endpoint.
        let top = [lo, hi].iter().filter(|r| **r > 0.0).map(|&r| tc.g(r)).fold(f64::NEG_INFINITY, f64::max);
        let shift = if top.is_finite() { top } else { 0.0 };
        let mut total = 0.0;
        for pair in self.edges.windows(2) {
            total += self.gl.integrate(|rho| (tc.beta * (tc.g(rho) - shift)).exp(), pair[0], pair[1], 1);
        }
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::NonConvergence(format!("partition integral evaluated to {total}")));
        }
        Ok(tc.beta * shift + total.ln())
    }
}

fn check_integrable(tc: &ThermoCoeffs, lo: f64) -> Result<()> {
    if lo <= 0.0 && tc.beta * tc.b > 0.0 {
        return Err(Error::Divergence(format!(
            "exp(beta B / rho^2) with beta B = {} > 0 is not integrable at rho = 0",
            tc.beta * tc.b
        )));
    }
    Ok(())
}

pub fn log_partition_integral(tc: &ThermoCoeffs, bounds: Bounds) -> Result<f64> {
    IntegralRule::new(tc, bounds)?.log_integral(tc)
}

/// `\int exp(beta (A + B/rho^2 + C rho^2)) d rho` over `bounds`.
pub fn partition_integral(tc: &ThermoCoeffs, bounds: Bounds) -> Result<f64> {
    let log_z = log_partition_integral(tc, bounds)?;
    let z = log_z.exp();
    if !z.is_finite() {
        return Err(Error::Overflow(format!("partition integral exp({log_z}) exceeds the double range")));
    }
    Ok(z)
}

/// The printed closed form, evaluated with its free `rho` read as `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormReport {
    pub value: f64,
    /// `false` when the expression is negative or zero.
    pub positive: bool,
    /// `|Z_closed - Z_quad| / |Z_quad|` when the quadrature value exists.
    pub disagreement: Option<f64>,
}

/// `x`-independent pieces shared by the printed closed-form expressions.
struct PrintedTerms {
    sb: f64,
    e1: f64,
    eb: f64,
    er: f64,
    /// `ln exp(beta C eta^2 + beta A)`.
    log_p: f64,
}

fn printed_terms(tc: &ThermoCoeffs) -> Result<PrintedTerms> {
    let bb = tc.beta * tc.b;
    if bb < 0.0 {
        return Err(Error::Domain(format!(
            "beta B = {bb} < 0: erfi argument sqrt(beta B)/eta is imaginary"
        )));
    }
    if bb == 0.0 {
        return Err(Error::Domain("beta B = 0: closed form divides by sqrt(beta B)".into()));
    }
    if tc.eta == 0.0 {
        return Err(Error::Domain("eta = 0: closed form divides by eta".into()));
    }
    let sb = bb.sqrt();
    let eta2 = tc.eta * tc.eta;
    Ok(PrintedTerms {
        sb,
        e1: (tc.b / eta2).exp(),
        eb: (bb / eta2).exp(),
        er: erfi(sb / tc.eta)?,
        log_p: tc.beta * tc.c_coef * eta2 + tc.beta * tc.a,
    })
}

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// `1/2 e^{beta C rho^2 + beta A} sqrt(beta B) [2 eta e^{B/eta^2}/sqrt(beta B)
///  - 2 sqrt(beta B) sqrt(pi) erfi(sqrt(beta B)/eta)/sqrt(beta B) - 2 sqrt(pi)]`, `rho := eta`.
pub fn partition_closed_form(tc: &ThermoCoeffs, bounds: Bounds) -> Result<ClosedFormReport> {
    let t = printed_terms(tc)?;
    let bracket = 2.0 * tc.eta * t.e1 / t.sb - 2.0 * t.sb * SQRT_PI * t.er / t.sb - 2.0 * SQRT_PI;
    let scaled = 0.5 * t.sb * bracket;
    let value = if scaled > 0.0 { (t.log_p + scaled.ln()).exp() } else { t.log_p.exp() * scaled };
    let disagreement = partition_integral(tc, bounds)
        .ok()
        .map(|z| ((value - z) / z).abs());
    Ok(ClosedFormReport { value, positive: value > 0.0, disagreement })
}

/// `U` from the printed `delta_1..delta_4` expansion, `rho := eta`.
/// The common factor `exp(beta C rho^2 + beta A)` cancels and is omitted.
pub fn printed_mean_energy(tc: &ThermoCoeffs) -> Result<f64> {
    let PrintedTerms { sb, e1, er, .. } = printed_terms(tc)?;
    let (a, b, c, eta) = (tc.a, tc.b, tc.c_coef, tc.eta);
    let pi = std::f64::consts::PI;
    let d1 = 0.5 * (c * eta * eta + a) * sb * (2.0 * eta * e1 / sb - 2.0 * sb * SQRT_PI * er - 2.0 * pi);
    let d2 = (2.0 * eta * e1 / sb - 2.0 * sb * SQRT_PI * er / sb - 2.0 * SQRT_PI) * b / sb;
    let d3 = 0.5
        * sb
        * (eta * e1 / sb.powi(3) - SQRT_PI * er * b / (sb * sb) - 2.0 * b * e1 / (eta * sb)
            - sb * SQRT_PI * er * b / sb.powi(3));
    let d4 = sb * (2.0 * eta * e1 / sb - 2.0 * sb * SQRT_PI * er / sb - 2.0 * SQRT_PI);
    Ok(-(2.0 * d1 - 0.25 * d2 + d3) / d4)
}

/// `(2 Lambda_1 + Lambda_2 + Lambda_3) / Lambda_4` of the printed expansion, `rho := eta`.
fn printed_lambda_ratio(tc: &ThermoCoeffs) -> Result<f64> {
    let PrintedTerms { sb, eb, er, .. } = printed_terms(tc)?;
    let (a, b, c, eta, beta) = (tc.a, tc.b, tc.c_coef, tc.eta, tc.beta);
    let rb = b.sqrt();
    let l1 = 0.5 * (c * eta * eta + a) * sb * (2.0 * eta * eb / sb - 2.0 * rb * SQRT_PI * er / sb - 2.0 * SQRT_PI);
    let l2 = 0.25 * (2.0 * eta * eb / sb - 2.0 * rb * SQRT_PI * er / sb - 2.0 * SQRT_PI) * b / beta.sqrt();
    let l3 = 0.5
        * sb
        * (2.0 * b * eb / (eta * sb) - eta * b * eb / sb.powi(3) - 2.0 * rb * eb / (eta * beta)
            + b.powf(1.5) * SQRT_PI * er / sb.powi(3));
    let l4 = sb * (2.0 * eta * eb / sb - 2.0 * rb * SQRT_PI * er / sb - 2.0 * SQRT_PI);
    Ok((2.0 * l1 + l2 + l3) / l4)
}

/// `C` from the printed `Lambda_1..Lambda_4` expansion:
/// `kB beta^2 d/dbeta [(2 Lambda_1 + Lambda_2 + Lambda_3) / Lambda_4]`.
pub fn printed_specific_heat(tc: &ThermoCoeffs, kb: f64) -> Result<f64> {
    let d = richardson_first(|beta| printed_lambda_ratio(&tc.with_beta(beta)), tc.beta)?;
    Ok(kb * tc.beta * tc.beta * d)
}

/// A canonical value, the printed-expansion value and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoValue {
    pub value: f64,
    pub printed: Option<f64>,
    pub difference: Option<f64>,
}

impl ThermoValue {
    fn with_printed(value: f64, printed: Option<f64>) -> Self {
        Self { value, printed, difference: printed.map(|p| p - value) }
    }
}

fn five_point_first(f: &impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    // Differences first, so a constant f gives exactly zero.
    let near = f(x + h)? - f(x - h)?;
    let far = f(x + 2.0 * h)? - f(x - 2.0 * h)?;
    Ok((8.0 * near - far) / (12.0 * h))
}

fn five_point_second(f: &impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    let f0 = f(x)?;
    let near = (f(x + h)? - f0) + (f(x - h)? - f0);
    let far = (f(x + 2.0 * h)? - f0) + (f(x - 2.0 * h)? - f0);
    Ok((16.0 * near - far) / (12.0 * h * h))
}

/// Two Richardson levels on top of an `O(h^4)` stencil: `h`, `h/2`, `h/4`.
fn richardson(stencil: impl Fn(f64) -> Result<f64>, h: f64) -> Result<f64> {
    let (d0, d1, d2) = (stencil(h)?, stencil(h / 2.0)?, stencil(h / 4.0)?);
    let r1 = (16.0 * d1 - d0) / 15.0;
    let r2 = (16.0 * d2 - d1) / 15.0;
    Ok((64.0 * r2 - r1) / 63.0)
}

fn richardson_first(f: impl Fn(f64) -> Result<f64>, beta: f64) -> Result<f64> {
    richardson(|h| five_point_first(&f, beta, h), FD_STEP * beta)
}

fn richardson_second(f: impl Fn(f64) -> Result<f64>, beta: f64) -> Result<f64> {
    richardson(|h| five_point_second(&f, beta, h), FD_STEP * beta)
}

/// `ln \int exp(beta g) d rho` on a rule frozen at `tc.beta`, as a function of beta.
fn frozen_log_integral_g(tc: &ThermoCoeffs, bounds: Bounds) -> Result<impl Fn(f64) -> Result<f64>> {
    let rule = IntegralRule::new(tc, bounds)?;
    let tc = *tc;
    Ok(move |beta: f64| rule.log_integral_g(&tc.with_beta(beta)))
}

/// `ln Z` in the requested form.
pub fn log_partition(tc: &ThermoCoeffs, form: ZForm) -> Result<f64> {
    match form {
        ZForm::Sum => Ok(sum_moments(tc, tc.level_count())?.log_z),
        ZForm::Integral(bounds) => log_partition_integral(tc, bounds),
    }
}

/// `U = -d ln Z / d beta`.
///
/// Sum form: exact Boltzmann average. Integral form: `-A` plus the
/// finite-difference derivative of the remaining log-integral.
pub fn mean_energy(tc: &ThermoCoeffs, form: ZForm) -> Result<ThermoValue> {
    let value = match form {
        ZForm::Sum => sum_moments(tc, tc.level_count())?.mean,
        ZForm::Integral(bounds) => {
            let f = frozen_log_integral_g(tc, bounds)?;
            -tc.a - richardson_first(f, tc.beta)?
        }
    };
    Ok(ThermoValue::with_printed(value, printed_mean_energy(tc).ok()))
}

/// `F = -(1/beta) ln Z`.
pub fn free_energy(tc: &ThermoCoeffs, form: ZForm) -> Result<f64> {
    let log_z = log_partition(tc, form)?;
    if form == ZForm::Sum {
        let z = partition_sum(tc, tc.level_count());
        if let Ok(z) = z {
            if !(z > 0.0) {
                return Err(Error::Domain(format!("partition function Z = {z:e} is not positive")));
            }
        }
    }
    Ok(-log_z / tc.beta)
}

/// `C = kB beta^2 d^2 ln Z / d beta^2`.
pub fn specific_heat(tc: &ThermoCoeffs, form: ZForm, kb: f64) -> Result<ThermoValue> {
    let second = match form {
        ZForm::Sum => sum_moments(tc, tc.level_count())?.variance,
        ZForm::Integral(bounds) => {
            let f = frozen_log_integral_g(tc, bounds)?;
            richardson_second(f, tc.beta)?
        }
    };
    let value = kb * tc.beta * tc.beta * second;
    Ok(ThermoValue::with_printed(value, printed_specific_heat(tc, kb).ok()))
}

/// `points_per_decade` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points_per_decade: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!("log grid needs 0 < lo < hi, got [{lo}, {hi}]")));
    }
    let decades = (hi / lo).log10();
    let steps = ((decades * points_per_decade as f64).round() as usize).max(1);
    Ok((0..=steps)
        .map(|i| {
            if i == steps {
                hi
            } else {
                lo * 10f64.powf(decades * i as f64 / steps as f64)
            }
        })
        .collect())
}
