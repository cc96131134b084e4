use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// How the inner region near the labels is treated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaVariant {
    /// `min(γ, ζ)`, switching at the crossover radius `r_ζ`.
    Truncated,
    /// `ζ` for `dist <= r`, `γ` beyond; possibly discontinuous.
    TwoRegion { r: f64 },
}

/// The far-field law `γ(dist)`.
#[derive(Clone)]
pub enum GammaLaw {
    /// `1 + (r0/dist)^α`
    Standard,
    /// Arbitrary radial law; used for the pure power-law `dist^{-α}` oracle.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for GammaLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaLaw::Standard => write!(f, "Standard"),
            GammaLaw::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Parameters of the label weight `γ_ζ`.
#[derive(Debug, Clone)]
pub struct WeightProfile {
    pub alpha: f64,
    pub r0: f64,
    /// Truncation level in `(1, +∞]`.
    pub zeta: f64,
    pub variant: GammaVariant,
    /// Apply the power law at every distance instead of only within `R/4`.
    pub global_formula: bool,
    /// Minimum label separation `R`; required when `global_formula` is off.
    pub label_separation: Option<f64>,
    pub law: GammaLaw,
}

impl WeightProfile {
    pub fn new(alpha: f64, r0: f64, zeta: f64) -> Result<Self> {
        let profile = WeightProfile {
            alpha,
            r0,
            zeta,
            variant: GammaVariant::Truncated,
            global_formula: true,
            label_separation: None,
            law: GammaLaw::Standard,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn with_variant(mut self, variant: GammaVariant) -> Result<Self> {
        self.variant = variant;
        self.validate()?;
        Ok(self)
    }

    /// Restricts the power law to `dist <= R/4`, with `γ = 1` beyond.
    pub fn local_only(mut self, label_separation: f64) -> Result<Self> {
        self.global_formula = false;
        self.label_separation = Some(label_separation);
        self.validate()?;
        Ok(self)
    }

    /// Pure power law `γ(dist) = dist^{-α}`, truncated at `ζ`.
    pub fn pure_power_law(alpha: f64, zeta: f64) -> Result<Self> {
        let profile = WeightProfile {
            alpha,
            r0: 1.0,
            zeta,
            variant: GammaVariant::Truncated,
            global_formula: true,
            label_separation: None,
            law: GammaLaw::Custom(Arc::new(move |d: f64| d.powf(-alpha))),
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::config(format!(
                "alpha must be a nonnegative number, got {}",
                self.alpha
            )));
        }
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(Error::config(format!(
                "r0 must be positive, got {}",
                self.r0
            )));
        }
        if self.zeta.is_nan() || self.zeta <= 1.0 {
            return Err(Error::config(format!(
                "zeta must exceed 1, got {}",
                self.zeta
            )));
        }
        if self.zeta.is_infinite() && self.variant != (GammaVariant::TwoRegion { r: 0.0 }) {
            return Err(Error::config(
                "zeta = inf is only supported with the two-region variant at r = 0",
            ));
        }
        if let GammaVariant::TwoRegion { r } = self.variant {
            if r.is_nan() || r < 0.0 {
                return Err(Error::config(format!(
                    "two-region radius must be nonnegative, got {r}"
                )));
            }
        }
        if !self.global_formula {
            match self.label_separation {
                Some(sep) if sep > 0.0 => {}
                _ => {
                    return Err(Error::config(
                        "local-only gamma needs a positive label separation",
                    ))
                }
            }
        }
        Ok(())
    }

    fn law(&self, dist: f64) -> f64 {
        match &self.law {
            GammaLaw::Standard => 1.0 + (self.r0 / dist).powf(self.alpha),
            GammaLaw::Custom(f) => f(dist),
        }
    }

    /// Untruncated weight `γ(dist)`; `+∞` at `dist = 0` for `α > 0`.
    pub fn gamma(&self, dist: f64) -> f64 {
        if self.global_formula {
            return self.law(dist);
        }
        let quarter = self.label_separation.unwrap_or(f64::INFINITY) / 4.0;
        if dist <= quarter {
            self.law(dist).max(1.0)
        } else {
            1.0
        }
    }

    /// Truncated weight `γ_ζ(dist)`.
    pub fn gamma_zeta(&self, dist: f64) -> f64 {
        match self.variant {
            GammaVariant::Truncated => self.gamma(dist).min(self.zeta),
            GammaVariant::TwoRegion { r } => {
                if dist <= r {
                    self.zeta
                } else {
                    self.gamma(dist)
                }
            }
        }
    }

    /// Crossover radius `r_ζ = r0 (ζ - 1)^{-1/α}` where `γ` reaches `ζ`.
    pub fn crossover_radius(&self) -> f64 {
        if self.alpha == 0.0 {
            return if self.zeta <= 2.0 { f64::INFINITY } else { 0.0 };
        }
        self.r0 * (self.zeta - 1.0).powf(-1.0 / self.alpha)
    }
}

/// `ζ` either given directly or as `c · n · ε²`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum ZetaSpec {
    Value(f64),
    Scaled { scaled: f64 },
}

impl ZetaSpec {
    pub fn resolve(&self, n: usize, eps: f64) -> f64 {
        match *self {
            ZetaSpec::Value(z) => z,
            ZetaSpec::Scaled { scaled } => scaled * n as f64 * eps * eps,
        }
    }
}
