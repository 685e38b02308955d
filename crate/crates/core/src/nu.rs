//! Parametric Nikiforov-Uvarov engine.
//!
//! Works on equations of the form
//!
//! ```text
//! psi'' + (a1 - a2 s) / (s (1 - a3 s)) psi'
//!       + (-xi1 s^2 + xi2 s - xi3) / (s^2 (1 - a3 s)^2) psi = 0
//! ```
//!
//! and knows nothing about any particular potential.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::JacobiIndex;

/// Radicands in `(-RADICAND_TOLERANCE, 0)` are treated as exact zeros.
pub const RADICAND_TOLERANCE: f64 = 1e-12;

/// The six parameters `a1..a3`, `xi1..xi3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuInput {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub xi3: f64,
}

/// Derived coefficients `a4..a13`.
///
/// `a8` and `a9` are reported as computed; the coefficients that need their
/// square roots (`a10..a13`) are only meaningful when [`NuDerived::is_real`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuDerived {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    pub a7: f64,
    pub a8: f64,
    pub a9: f64,
    pub a10: f64,
    pub a11: f64,
    pub a12: f64,
    pub a13: f64,
    /// `sqrt(a8)`, `None` when `a8` is negative beyond tolerance.
    pub sqrt_a8: Option<f64>,
    /// `sqrt(a9)`, `None` when `a9` is negative beyond tolerance.
    pub sqrt_a9: Option<f64>,
}

fn checked_sqrt(x: f64) -> Option<f64> {
    if x >= 0.0 {
        Some(x.sqrt())
    } else if x > -RADICAND_TOLERANCE {
        Some(0.0)
    } else {
        None
    }
}

impl NuDerived {
    pub fn is_real(&self) -> bool {
        self.sqrt_a8.is_some() && self.sqrt_a9.is_some()
    }

    /// Both square roots, or the first offending radicand.
    pub fn roots(&self) -> Result<(f64, f64)> {
        let r8 = self
            .sqrt_a8
            .ok_or(Error::ComplexCoefficient { name: "alpha8", value: self.a8 })?;
        let r9 = self
            .sqrt_a9
            .ok_or(Error::ComplexCoefficient { name: "alpha9", value: self.a9 })?;
        Ok((r8, r9))
    }
}

/// Computes `a4..a13` from the six input parameters.
pub fn derive(input: &NuInput) -> NuDerived {
    let NuInput { a1, a2, a3, xi1, xi2, xi3 } = *input;
    let a4 = 0.5 * (1.0 - a1);
    let a5 = 0.5 * (a2 - 2.0 * a3);
    let a6 = a5 * a5 + xi1;
    let a7 = 2.0 * a4 * a5 - xi2;
    let a8 = a4 * a4 + xi3;
    let a9 = a3 * a7 + a3 * a3 * a8 + a6;
    let sqrt_a8 = checked_sqrt(a8);
    let sqrt_a9 = checked_sqrt(a9);
    let r8 = sqrt_a8.unwrap_or(f64::NAN);
    let r9 = sqrt_a9.unwrap_or(f64::NAN);
    NuDerived {
        a1,
        a2,
        a3,
        a4,
        a5,
        a6,
        a7,
        a8,
        a9,
        a10: a1 + 2.0 * a4 + 2.0 * r8,
        a11: a2 - 2.0 * a5 + 2.0 * (r9 + a3 * r8),
        a12: a4 + r8,
        a13: a5 - (r9 + a3 * r8),
        sqrt_a8,
        sqrt_a9,
    }
}

/// Part of the quantization condition that does not involve `sqrt(a8)`,
/// together with the coefficient of `sqrt(a8)`:
/// `condition = base + sqrt(a8) * slope`.
fn condition_parts(d: &NuDerived, r9: f64, n: u32) -> (f64, f64) {
    let n = f64::from(n);
    let base = (d.a2 - d.a3) * n + d.a3 * n * n - (2.0 * n + 1.0) * d.a5
        + (2.0 * n + 1.0) * r9
        + d.a7
        + 2.0 * d.a3 * d.a8;
    let slope = (2.0 * n + 1.0) * d.a3 + 2.0 * r9;
    (base, slope)
}

/// Left side of the quantization condition
/// `(a2 - a3) n + a3 n^2 - (2n+1) a5 + (2n+1)(sqrt(a9) + a3 sqrt(a8))
///  + a7 + 2 a3 a8 + 2 sqrt(a8 a9)`. A bound state has residual zero.
pub fn quantization_residual(input: &NuInput, n: u32) -> Result<f64> {
    let d = derive(input);
    let (r8, r9) = d.roots()?;
    let (base, slope) = condition_parts(&d, r9, n);
    Ok(base + r8 * slope)
}

/// The same condition with `sqrt(a8)` eliminated by squaring:
/// `(base / slope)^2 - a8`. Its zeros are the zeros of the residual for
/// either sign of `sqrt(a8)`; only `a9 >= 0` is required.
pub fn squared_quantization_residual(input: &NuInput, n: u32) -> Result<f64> {
    let d = derive(input);
    let r9 = d
        .sqrt_a9
        .ok_or(Error::ComplexCoefficient { name: "alpha9", value: d.a9 })?;
    let (base, slope) = condition_parts(&d, r9, n);
    let ratio = base / slope;
    Ok(ratio * ratio - d.a8)
}

/// The value of `sqrt(a8)` that zeroes the unsquared condition, `-base/slope`.
/// At a root of [`squared_quantization_residual`] its magnitude is `sqrt(a8)`;
/// a negative sign marks a root whose `s^{a12}` factor grows instead of decaying.
pub fn signed_decay_exponent(input: &NuInput, n: u32) -> Result<f64> {
    let d = derive(input);
    let r9 = d
        .sqrt_a9
        .ok_or(Error::ComplexCoefficient { name: "alpha9", value: d.a9 })?;
    let (base, slope) = condition_parts(&d, r9, n);
    Ok(-base / slope)
}

/// Exponents and Jacobi parameters of the eigenfunction
/// `psi(s) = s^{a12} (1 - a3 s)^{-a12 - a13/a3} P_n^{(a10 - 1, a11/a3 - a10 - 1)}(1 - 2 a3 s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionShape {
    pub exponent_s: f64,
    pub exponent_1ms: f64,
    pub jacobi_a: f64,
    pub jacobi_b: f64,
}

impl EigenfunctionShape {
    pub fn jacobi(&self, n: u32) -> Result<JacobiIndex> {
        JacobiIndex::new(n, self.jacobi_a, self.jacobi_b)
    }
}

pub fn eigenfunction_shape(derived: &NuDerived) -> Result<EigenfunctionShape> {
    derived.roots()?;
    let d = derived;
    Ok(EigenfunctionShape {
        exponent_s: d.a12,
        exponent_1ms: -d.a12 - d.a13 / d.a3,
        jacobi_a: d.a10 - 1.0,
        jacobi_b: d.a11 / d.a3 - d.a10 - 1.0,
    })
}
