//! Run configuration: a single JSON document, unknown keys rejected.

use std::path::Path;

use dfpep::model::{EtaBranch, RecastForm};
use dfpep::oracle::GridSpec;
use dfpep::thermo::Bounds;
use dfpep::{ApproxScheme, Branch, PhysicalConstants, PotentialParams, SolverWindow, StateLabel, WExponent};
use serde::{Deserialize, Deserializer};

use crate::CliError;

/// A number given either as a JSON number or as a string: `"0.25"`, `"1/12"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Num {
    pub fn parse(text: &str) -> Result<f64, String> {
        let text = text.trim();
        let value = match text.split_once('/') {
            Some((num, den)) => {
                let num: f64 = num.trim().parse().map_err(|_| format!("bad numerator in {text:?}"))?;
                let den: f64 = den.trim().parse().map_err(|_| format!("bad denominator in {text:?}"))?;
                if den == 0.0 {
                    return Err(format!("zero denominator in {text:?}"));
                }
                num / den
            }
            None => text.parse().map_err(|_| format!("not a number: {text:?}"))?,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(format!("not finite: {text:?}"))
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(Num(x)),
            Raw::Text(s) => Num::parse(&s).map(Num).map_err(serde::de::Error::custom),
        }
    }
}

fn one() -> Num {
    Num(1.0)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub p1: Num,
    pub p2: Num,
    pub p3: Num,
    #[serde(default = "one")]
    pub q: Num,
    pub alpha: Num,
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialParams, CliError> {
        PotentialParams::new(self.p1.0, self.p2.0, self.p3.0, self.q.0, self.alpha.0)
            .map_err(|e| CliError::Config(format!("potential: {e}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    #[serde(default = "default_c0")]
    pub c0: Num,
    #[serde(default)]
    pub omega: Option<Num>,
    #[serde(default)]
    pub lambda: Option<Num>,
    /// `c0 = omega = 0`, `lambda = 4 alpha^2`; excludes the other keys.
    #[serde(default)]
    pub greene_aldrich: bool,
}

fn default_c0() -> Num {
    Num(1.0 / 12.0)
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self { c0: default_c0(), omega: None, lambda: None, greene_aldrich: false }
    }
}

impl SchemeConfig {
    pub fn build(&self, alpha: f64) -> Result<ApproxScheme, CliError> {
        if self.greene_aldrich {
            if self.omega.is_some() || self.lambda.is_some() {
                return Err(CliError::Config("scheme: greene_aldrich excludes omega and lambda".into()));
            }
            return Ok(ApproxScheme::greene_aldrich(alpha));
        }
        Ok(ApproxScheme::new(
            self.c0.0,
            self.omega.map_or(0.0, |n| n.0),
            self.lambda.map_or(0.0, |n| n.0),
        ))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    #[serde(default = "one")]
    pub mu: Num,
    #[serde(default = "one")]
    pub m: Num,
    #[serde(default = "one")]
    pub hbar: Num,
    #[serde(default = "one")]
    pub kb: Num,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self { mu: one(), m: one(), hbar: one(), kb: one() }
    }
}

impl ConstantsConfig {
    pub fn build(&self) -> Result<PhysicalConstants, CliError> {
        let c = PhysicalConstants { mu: self.mu.0, m: self.m.0, hbar: self.hbar.0, kb: self.kb.0 };
        c.validate().map_err(|e| CliError::Config(format!("constants: {e}")))?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextKind {
    #[default]
    Relativistic,
    Nonrelativistic,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub n: u32,
    pub l: u32,
    pub d: u32,
}

impl StateSpec {
    pub fn build(&self) -> Result<StateLabel, CliError> {
        StateLabel::new(self.n, self.l, self.d).map_err(|e| CliError::Config(format!("state: {e}")))
    }
}

/// Inclusive ranges `[lo, hi]` for each label.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRanges {
    pub n: [u32; 2],
    pub l: [u32; 2],
    pub d: [u32; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StatesConfig {
    List(Vec<StateSpec>),
    Ranges(StateRanges),
}

impl Default for StatesConfig {
    fn default() -> Self {
        StatesConfig::List(Vec::new())
    }
}

impl StatesConfig {
    /// States sorted by `(n, l, D)`, duplicates removed.
    pub fn build(&self) -> Result<Vec<StateLabel>, CliError> {
        let mut out = match self {
            StatesConfig::List(v) => v.iter().map(StateSpec::build).collect::<Result<Vec<_>, _>>()?,
            StatesConfig::Ranges(r) => {
                let mut v = Vec::new();
                for n in r.n[0]..=r.n[1] {
                    for l in r.l[0]..=r.l[1] {
                        for d in r.d[0]..=r.d[1] {
                            v.push(StateSpec { n, l, d }.build()?);
                        }
                    }
                }
                v
            }
        };
        out.sort_by_key(|s| (s.n, s.l, s.d));
        out.dedup();
        Ok(out)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub lo: Num,
    pub hi: Num,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

fn default_grid() -> usize {
    SolverWindow::DEFAULT_GRID
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentKind {
    #[default]
    Generic,
    Printed,
}

impl From<ExponentKind> for WExponent {
    fn from(k: ExponentKind) -> Self {
        match k {
            ExponentKind::Generic => WExponent::Generic,
            ExponentKind::Printed => WExponent::Printed,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchChoice {
    Negative,
    #[default]
    Positive,
}

impl From<BranchChoice> for Branch {
    fn from(b: BranchChoice) -> Self {
        match b {
            BranchChoice::Negative => Branch::Negative,
            BranchChoice::Positive => Branch::Positive,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    /// Fixed outer radius; otherwise doubled from `1/alpha` until the curve decays.
    #[serde(default)]
    pub r_max: Option<Num>,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Energy used for every state instead of solving.
    #[serde(default)]
    pub energy: Option<Num>,
    /// Recorded in the metadata only.
    #[serde(default)]
    pub reference_energy: Option<Num>,
    #[serde(default)]
    pub branch: BranchChoice,
    #[serde(default)]
    pub exponent: ExponentKind,
}

fn default_points() -> usize {
    2001
}

impl Default for WaveConfig {
    fn default() -> Self {
        Self {
            r_max: None,
            points: default_points(),
            energy: None,
            reference_energy: None,
            branch: BranchChoice::default(),
            exponent: ExponentKind::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaGrid {
    pub lo: Num,
    pub hi: Num,
    pub per_decade: usize,
}

impl Default for BetaGrid {
    fn default() -> Self {
        Self { lo: Num(1e-3), hi: Num(1e2), per_decade: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    ZBeta,
    ZDimension,
    ZP2,
    UBeta,
    FBeta,
    CBeta,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureSpec {
    pub name: String,
    pub kind: FigureKind,
    /// `eta` overrides; empty means the value implied by the potential.
    #[serde(default)]
    pub etas: Vec<Num>,
    /// Fixed beta for the `z_dimension` and `z_p2` sweeps.
    #[serde(default)]
    pub beta: Option<Num>,
    #[serde(default)]
    pub dimensions: Vec<u32>,
    #[serde(default)]
    pub p2: Vec<Num>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermoConfig {
    #[serde(default)]
    pub beta: BetaGrid,
    #[serde(default)]
    pub state: Option<StateSpec>,
    #[serde(default)]
    pub q1_mode: Option<RecastForm>,
    #[serde(default)]
    pub branch_eta: Option<EtaBranch>,
    #[serde(default)]
    pub bounds: Option<Bounds>,
    #[serde(default)]
    pub figures: Vec<FigureSpec>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub r_max: Option<Num>,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub alpha_scan: Vec<Num>,
}


impl OracleConfig {
    pub fn grid(&self, alpha: f64) -> Result<GridSpec, CliError> {
        let default = GridSpec::default_for(alpha);
        GridSpec::new(self.r_max.map_or(default.r_max, |r| r.0), self.points.unwrap_or(default.n))
            .map_err(|e| CliError::Config(format!("oracle: {e}")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub potential: PotentialConfig,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub context: ContextKind,
    #[serde(default)]
    pub states: StatesConfig,
    #[serde(default)]
    pub window: Option<WindowConfig>,
    #[serde(default)]
    pub wavefunction: WaveConfig,
    #[serde(default)]
    pub thermo: ThermoConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn window(&self) -> Result<SolverWindow, CliError> {
        match &self.window {
            Some(w) => SolverWindow::new(w.lo.0, w.hi.0, w.grid)
                .map_err(|e| CliError::Config(format!("window: {e}"))),
            None => Ok(SolverWindow::default_for(self.constants.mu.0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_and_decimals() {
        assert_eq!(Num::parse("1/12").unwrap(), 1.0 / 12.0);
        assert_eq!(Num::parse(" -3 / 4 ").unwrap(), -0.75);
        assert_eq!(Num::parse("0.1").unwrap(), 0.1);
        assert!(Num::parse("1/0").is_err());
        assert!(Num::parse("abc").is_err());
    }

    #[test]
    fn minimal_config_and_defaults() {
        let c = RunConfig::parse(r#"{"potential": {"p1": 1, "p2": "2", "p3": 1, "alpha": "1/10"}}"#).unwrap();
        assert_eq!(c.potential.alpha.0, 0.1);
        assert_eq!(c.potential.q.0, 1.0);
        assert_eq!(c.scheme.c0.0, 1.0 / 12.0);
        assert!(c.states.build().unwrap().is_empty());
        assert_eq!(c.context, ContextKind::Relativistic);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse(r#"{"potential": {"p1": 1, "p2": 2, "p3": 1, "alpha": 0.1}, "extra": 1}"#).is_err());
        assert!(RunConfig::parse(r#"{"potential": {"p1": 1, "p2": 2, "p3": 1, "alpha": 0.1, "r": 1}}"#).is_err());
    }

    #[test]
    fn ranges_expand_sorted() {
        let c = RunConfig::parse(
            r#"{"potential": {"p1": 1, "p2": 2, "p3": 1, "alpha": 0.1},
                "states": {"n": [0, 2], "l": [0, 4], "d": [1, 6]}}"#,
        )
        .unwrap();
        let s = c.states.build().unwrap();
        assert_eq!(s.len(), 90);
        assert!(s.windows(2).all(|w| (w[0].n, w[0].l, w[0].d) < (w[1].n, w[1].l, w[1].d)));
    }
}
