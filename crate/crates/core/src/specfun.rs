//! Jacobi polynomials, Dawson's integral and the imaginary error function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Degree and the two parameters of `P_n^{(a,b)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiIndex {
    pub n: u32,
    pub a: f64,
    pub b: f64,
}

impl JacobiIndex {
    pub fn new(n: u32, a: f64, b: f64) -> Result<Self> {
        if !(a > -1.0 && b > -1.0) {
            return Err(Error::InvalidParameter(format!(
                "Jacobi parameters must exceed -1, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { n, a, b })
    }
}

/// `P_n^{(a,b)}(x)` by the three-term recurrence in degree.
///
/// `x` is not restricted to `[-1, 1]`.
pub fn jacobi_eval(idx: &JacobiIndex, x: f64) -> f64 {
    let JacobiIndex { n, a, b } = *idx;
    if n == 0 {
        return 1.0;
    }
    let ab = a + b;
    let mut prev = 1.0;
    let mut cur = 0.5 * (a - b) + 0.5 * (ab + 2.0) * x;
    for k in 2..=n {
        let k = f64::from(k);
        let s = 2.0 * k + ab;
        // 2k (k+a+b) (2k+a+b-2) P_k
        //   = (2k+a+b-1) [(2k+a+b)(2k+a+b-2) x + a^2 - b^2] P_{k-1}
        //     - 2 (k+a-1)(k+b-1)(2k+a+b) P_{k-2}
        let c0 = 2.0 * k * (k + ab) * (s - 2.0);
        let c1 = (s - 1.0) * (s * (s - 2.0) * x + (a - b) * ab);
        let c2 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * s;
        let next = (c1 * cur - c2 * prev) / c0;
        prev = cur;
        cur = next;
    }
    cur
}

/// Step of the sampling sum used for Dawson's integral. The aliasing error
/// is of order `exp(-(pi / 2h)^2)`, far below double precision at `h = 0.2`.
const RYBICKI_STEP: f64 = 0.2;

/// Beyond this argument Dawson's integral uses its asymptotic series.
const DAWSON_ASYMPTOTIC: f64 = 50.0;

/// Dawson's integral `F(x) = exp(-x^2) \int_0^x exp(t^2) dt`.
pub fn dawson(x: f64) -> f64 {
    if x == 0.0 {
        return x;
    }
    let ax = x.abs();
    let value = if ax > DAWSON_ASYMPTOTIC {
        dawson_asymptotic(ax)
    } else {
        // F(x) = (2/sqrt(pi)) exp(-x^2) sum_{n odd > 0} exp(-n^2 h^2) sinh(2 n h x) / n
        //      = (1/sqrt(pi)) sum_{n odd > 0} [exp(-(x - nh)^2) - exp(-(x + nh)^2)] / n
        rybicki_sum(ax, |t| (-t * t).exp() - (-t * t - 4.0 * ax * (ax - t)).exp())
            / std::f64::consts::PI.sqrt()
    };
    value.copysign(x)
}

/// Sums `term(x - n h) / n` over odd `n > 0` until the Gaussian tail is negligible.
fn rybicki_sum(x: f64, term: impl Fn(f64) -> f64) -> f64 {
    let h = RYBICKI_STEP;
    // Terms with |x - n h| > 7 are below exp(-49) relative to the peak.
    let n_max = ((x + 7.0) / h).ceil() as u32 + 1;
    let mut sum = 0.0;
    let mut n = n_max | 1;
    // Ascending magnitude last: sum from the largest n downwards.
    loop {
        let nf = f64::from(n);
        sum += term(x - nf * h) / nf;
        if n == 1 {
            break;
        }
        n -= 2;
    }
    sum
}

fn dawson_asymptotic(x: f64) -> f64 {
    // F(x) ~ 1/(2x) sum_k (2k-1)!! / (2x^2)^k
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..30 {
        term *= f64::from(2 * k - 1) * inv;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum / (2.0 * x)
}

/// Largest `|x|` accepted by [`erfi`].
pub const ERFI_GUARD: f64 = 30.0;

/// Imaginary error function `erfi(x) = (2/sqrt(pi)) \int_0^x exp(t^2) dt`.
///
/// Evaluated as `2 exp(x^2) F(x) / sqrt(pi)` with the exponential folded into
/// the sampling sum so no intermediate overflows before the result does.
pub fn erfi(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("erfi of NaN".into()));
    }
    if x.abs() > ERFI_GUARD {
        return Err(Error::Overflow(format!("erfi argument |{x}| exceeds {ERFI_GUARD}")));
    }
    if x == 0.0 {
        return Ok(x);
    }
    let ax = x.abs();
    // exp(x^2) [exp(-(x-nh)^2) - exp(-(x+nh)^2)] = exp(2nhx - n^2h^2) - exp(-2nhx - n^2h^2)
    let value = FRAC_2_SQRT_PI / std::f64::consts::PI.sqrt()
        * rybicki_sum(ax, |t| {
            let nh = ax - t;
            (nh * (2.0 * ax - nh)).exp() - (-nh * (2.0 * ax + nh)).exp()
        });
    if !value.is_finite() {
        return Err(Error::Overflow(format!("erfi({x}) exceeds the double range")));
    }
    Ok(value.copysign(x))
}

/// Error function: positive-term series below 2.5, continued fraction for `erfc` above.
pub fn erf(x: f64) -> f64 {
    if x == 0.0 {
        return x;
    }
    let ax = x.abs();
    let value = if ax < 2.5 {
        // erf(x) = (2/sqrt(pi)) exp(-x^2) sum_k 2^k x^{2k+1} / (2k+1)!!
        let x2 = ax * ax;
        let mut term = ax;
        let mut sum = ax;
        let mut k = 0.0;
        while term > 1e-17 * sum {
            k += 1.0;
            term *= 2.0 * x2 / (2.0 * k + 1.0);
            sum += term;
        }
        FRAC_2_SQRT_PI * (-x2).exp() * sum
    } else {
        1.0 - erfc_continued_fraction(ax)
    };
    value.copysign(x)
}

fn erfc_continued_fraction(x: f64) -> f64 {
    // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    // evaluated bottom-up with a fixed depth adequate for x >= 2.5.
    let mut f = x;
    for k in (1..=60).rev() {
        f = x + 0.5 * f64::from(k) / f;
    }
    (-x * x).exp() / (std::f64::consts::PI.sqrt() * f)
}
