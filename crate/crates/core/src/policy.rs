//! Augmentation policy: which operator to run and how its scalars are drawn.

use alloc::string::ToString;
use core::fmt;
use core::str::FromStr;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Method {
    MixCut,
    Cutout,
    Mixup,
    CutMix,
    None,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::MixCut,
        Method::Cutout,
        Method::Mixup,
        Method::CutMix,
        Method::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::MixCut => "mixcut",
            Method::Cutout => "cutout",
            Method::Mixup => "mixup",
            Method::CutMix => "cutmix",
            Method::None => "none",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Interpolation strength: drawn from Beta(1, 1) or fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LambdaSpec {
    Beta11,
    Fixed(f64),
}

/// Removal area ratio: `1 - eta` with `eta ~ Beta(1, 1)`, or a fixed ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RatioSpec {
    OneMinusEtaBeta11,
    Fixed(f64),
}

/// Where the cut-region center comes from.
///
/// `Uniform` is the default. `Interior` keeps the unclipped square inside the
/// image; `Fixed` pins the center and consumes no draws.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CenterSpec {
    Uniform,
    Interior,
    Fixed { x: f64, y: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AugmentPolicy {
    pub method: Method,
    pub lambda: LambdaSpec,
    pub beta: RatioSpec,
    /// Probability that a minibatch is augmented at all.
    pub gamma: f64,
    /// Draw λ and the region per sample instead of once per minibatch.
    pub per_sample: bool,
    pub center: CenterSpec,
}

impl AugmentPolicy {
    /// λ ~ Beta(1,1), β = 1 - η with η ~ Beta(1,1), γ = 0.5.
    pub fn mixcut() -> Self {
        Self {
            method: Method::MixCut,
            lambda: LambdaSpec::Beta11,
            beta: RatioSpec::OneMinusEtaBeta11,
            gamma: 0.5,
            per_sample: false,
            center: CenterSpec::Uniform,
        }
    }

    /// Fixed β = 0.25, γ = 1.
    pub fn cutout() -> Self {
        Self {
            method: Method::Cutout,
            lambda: LambdaSpec::Fixed(1.0),
            beta: RatioSpec::Fixed(0.25),
            gamma: 1.0,
            ..Self::mixcut()
        }
    }

    /// λ ~ Beta(1,1), no removal, γ = 1.
    pub fn mixup() -> Self {
        Self {
            method: Method::Mixup,
            beta: RatioSpec::Fixed(0.0),
            gamma: 1.0,
            ..Self::mixcut()
        }
    }

    /// Cut ratio 1 - η with η ~ Beta(1,1), γ = 0.5.
    pub fn cutmix() -> Self {
        Self {
            method: Method::CutMix,
            ..Self::mixcut()
        }
    }

    pub fn none() -> Self {
        Self {
            method: Method::None,
            lambda: LambdaSpec::Fixed(1.0),
            beta: RatioSpec::Fixed(0.0),
            gamma: 0.0,
            ..Self::mixcut()
        }
    }

    /// Defaults for `method`.
    pub fn for_method(method: Method) -> Self {
        match method {
            Method::MixCut => Self::mixcut(),
            Method::Cutout => Self::cutout(),
            Method::Mixup => Self::mixup(),
            Method::CutMix => Self::cutmix(),
            Method::None => Self::none(),
        }
    }

    pub fn with_lambda(mut self, lambda: LambdaSpec) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_beta(mut self, beta: RatioSpec) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_center(mut self, center: CenterSpec) -> Self {
        self.center = center;
        self
    }

    pub fn with_per_sample(mut self, per_sample: bool) -> Self {
        self.per_sample = per_sample;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidProbability(self.gamma));
        }
        if let LambdaSpec::Fixed(v) = self.lambda {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidRatio(v));
            }
        }
        if let RatioSpec::Fixed(v) = self.beta {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidRatio(v));
            }
        }
        if let CenterSpec::Fixed { x, y } = self.center {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::InvalidPolicy("fixed center must be finite".to_string()));
            }
        }
        Ok(())
    }
}

impl Default for AugmentPolicy {
    fn default() -> Self {
        Self::mixcut()
    }
}

impl fmt::Display for LambdaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaSpec::Beta11 => f.write_str("beta11"),
            LambdaSpec::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Display for RatioSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatioSpec::OneMinusEtaBeta11 => f.write_str("beta11"),
            RatioSpec::Fixed(v) => write!(f, "{v}"),
        }
    }
}

impl fmt::Display for CenterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CenterSpec::Uniform => f.write_str("uniform"),
            CenterSpec::Interior => f.write_str("interior"),
            CenterSpec::Fixed { x, y } => write!(f, "{x},{y}"),
        }
    }
}

fn parse_unit(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidPolicy(alloc::format!("not a number: `{s}`")))?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidRatio(v));
    }
    Ok(v)
}

impl FromStr for LambdaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("beta11") {
            Ok(LambdaSpec::Beta11)
        } else {
            parse_unit(s).map(LambdaSpec::Fixed)
        }
    }
}

impl FromStr for RatioSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("beta11") {
            Ok(RatioSpec::OneMinusEtaBeta11)
        } else {
            parse_unit(s).map(RatioSpec::Fixed)
        }
    }
}

impl FromStr for CenterSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("uniform") {
            return Ok(CenterSpec::Uniform);
        }
        if s.eq_ignore_ascii_case("interior") {
            return Ok(CenterSpec::Interior);
        }
        let bad = || Error::InvalidPolicy(alloc::format!("center must be uniform, interior or x,y: `{s}`"));
        let (x, y) = s.split_once(',').ok_or_else(bad)?;
        let x: f64 = x.trim().parse().map_err(|_| bad())?;
        let y: f64 = y.trim().parse().map_err(|_| bad())?;
        if !x.is_finite() || !y.is_finite() {
            return Err(bad());
        }
        Ok(CenterSpec::Fixed { x, y })
    }
}
