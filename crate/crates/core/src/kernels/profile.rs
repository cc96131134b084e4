use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Rescaled support of every kernel profile: `η(t) = 0` for `t > 2`.
pub const SUPPORT_RADIUS_FACTOR: f64 = 2.0;

/// Panels per smooth segment in the moment quadrature.
const SIMPSON_PANELS: usize = 20_000;

#[derive(Clone)]
pub enum KernelKind {
    /// `1` on `[0, 1]`, `0` beyond.
    Indicator,
    /// `exp(-t² / (2 s²))` with `s = σ/ε`, hard-zeroed past `t = 2`.
    Gaussian { sigma_factor: f64 },
    /// User profile on `[0, support]`; `breakpoints` lists interior jumps or kinks
    /// so the moment quadrature can integrate piecewise.
    Custom {
        name: String,
        profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        support: f64,
        breakpoints: Vec<f64>,
    },
}

impl fmt::Debug for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::Indicator => write!(f, "Indicator"),
            KernelKind::Gaussian { sigma_factor } => {
                write!(f, "Gaussian {{ sigma_factor: {sigma_factor} }}")
            }
            KernelKind::Custom { name, support, .. } => {
                write!(f, "Custom {{ name: {name:?}, support: {support} }}")
            }
        }
    }
}

/// Radial kernel profile `η`, optionally multiplied by a constant.
///
/// Experiment mode uses the raw Gaussian; [`KernelProfile::admissible`] rescales
/// a profile so that `η(1) >= 1`, which is the class the consistency checks assume.
#[derive(Debug, Clone)]
pub struct KernelProfile {
    kind: KernelKind,
    scale: f64,
}

impl KernelProfile {
    pub fn indicator() -> Self {
        KernelProfile {
            kind: KernelKind::Indicator,
            scale: 1.0,
        }
    }

    pub fn gaussian(sigma_factor: f64) -> Result<Self> {
        if !(sigma_factor > 0.0 && sigma_factor.is_finite()) {
            return Err(Error::config(format!(
                "sigma_factor must be positive, got {sigma_factor}"
            )));
        }
        Ok(KernelProfile {
            kind: KernelKind::Gaussian { sigma_factor },
            scale: 1.0,
        })
    }

    /// Custom profile. It must be nonincreasing on `[0, support]` and vanish beyond.
    pub fn custom(
        name: impl Into<String>,
        support: f64,
        breakpoints: Vec<f64>,
        profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(support > 0.0 && support <= SUPPORT_RADIUS_FACTOR) {
            return Err(Error::config(format!(
                "custom kernel support must lie in (0, 2], got {support}"
            )));
        }
        let kernel = KernelProfile {
            kind: KernelKind::Custom {
                name: name.into(),
                profile: Arc::new(profile),
                support,
                breakpoints,
            },
            scale: 1.0,
        };
        kernel.check_monotone()?;
        Ok(kernel)
    }

    fn check_monotone(&self) -> Result<()> {
        let steps = 2000;
        let mut prev = f64::INFINITY;
        for i in 0..=steps {
            let t = SUPPORT_RADIUS_FACTOR * i as f64 / steps as f64;
            let v = self.base(t);
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(format!(
                    "kernel profile invalid at t = {t}: {v}"
                )));
            }
            if v > prev * (1.0 + 1e-12) {
                return Err(Error::config(format!(
                    "kernel profile increases at t = {t}"
                )));
            }
            prev = v;
        }
        Ok(())
    }

    /// Rescales so that `η(1) >= 1`. Profiles already in that class are unchanged.
    pub fn admissible(&self) -> Self {
        let at_one = self.base(1.0);
        let scale = if at_one >= 1.0 || at_one <= 0.0 {
            1.0
        } else {
            1.0 / at_one
        };
        KernelProfile {
            kind: self.kind.clone(),
            scale,
        }
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn name(&self) -> String {
        match &self.kind {
            KernelKind::Indicator => "indicator".into(),
            KernelKind::Gaussian { .. } => "gaussian".into(),
            KernelKind::Custom { name, .. } => name.clone(),
        }
    }

    /// Rescaled distance beyond which the profile vanishes.
    pub fn support(&self) -> f64 {
        match &self.kind {
            KernelKind::Indicator => 1.0,
            KernelKind::Gaussian { .. } => SUPPORT_RADIUS_FACTOR,
            KernelKind::Custom { support, .. } => *support,
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![0.0];
        if let KernelKind::Custom { breakpoints, .. } = &self.kind {
            pts.extend(
                breakpoints
                    .iter()
                    .copied()
                    .filter(|&b| b > 0.0 && b < self.support()),
            );
        }
        pts.push(self.support());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn base(&self, t: f64) -> f64 {
        if t > self.support() {
            return 0.0;
        }
        match &self.kind {
            KernelKind::Indicator => 1.0,
            KernelKind::Gaussian { sigma_factor } => {
                (-t * t / (2.0 * sigma_factor * sigma_factor)).exp()
            }
            KernelKind::Custom { profile, .. } => profile(t),
        }
    }

    /// Profile value `η(t)` for rescaled distance `t >= 0`.
    pub fn eta(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::config(format!(
                "kernel argument must be nonnegative, got {t}"
            )));
        }
        Ok(self.eta_unchecked(t))
    }

    #[inline]
    pub(crate) fn eta_unchecked(&self, t: f64) -> f64 {
        self.scale * self.base(t)
    }

    /// Rescaled kernel `ε^{-d} η(|x - y| / ε)`, given the distance `|x - y|`.
    pub fn eta_eps(&self, dist: f64, eps: f64, dim: usize) -> Result<f64> {
        if !(eps > 0.0) {
            return Err(Error::config(format!("eps must be positive, got {eps}")));
        }
        Ok(self.eta(dist / eps)? / eps.powi(dim as i32))
    }

    /// Same as [`eta_eps`](Self::eta_eps) for a displacement vector.
    pub fn eta_eps_vec(&self, displacement: &[f64], eps: f64) -> Result<f64> {
        let dist = displacement.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.eta_eps(dist, eps, displacement.len())
    }
}

/// Second moments of a kernel profile in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KernelMoments {
    /// `∫ η(|z|) z_1² dz`
    pub sigma_eta: f64,
    /// `(1/d) ∫ η(|z|) |z|² dz`
    pub theta_eta: f64,
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels + panels % 2;
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Surface area of the unit sphere `S^{d-1}` in `R^d`.
pub fn unit_sphere_area(d: usize) -> f64 {
    // S_{d-1} = 2π^{d/2}/Γ(d/2), via S_{d+1} = 2π S_{d-1} / d
    match d {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * unit_sphere_area(d - 2) / (d - 2) as f64,
    }
}

/// Computes `σ_η` and `θ_η` by two separate quadratures.
///
/// `θ_η` integrates the radial profile against `r^{d+1}` with the closed-form
/// sphere area. `σ_η` multiplies the same radial integral by a numerically
/// integrated angular factor `∫_{S^{d-1}} ω_1² dω` (or, for `d = 1`, integrates
/// `η(|z|) z²` directly over `[-2, 2]`).
pub fn kernel_moments(kernel: &KernelProfile, dim: usize) -> Result<KernelMoments> {
    if dim == 0 {
        return Err(Error::config("dimension must be at least 1"));
    }
    let breaks = kernel.breakpoints();
    let piecewise = |f: &dyn Fn(f64) -> f64| -> f64 {
        breaks
            .windows(2)
            .map(|w| {
                // interior samples only, so jumps at the ends of a segment are
                // evaluated from the inside
                let (a, b) = (w[0], w[1]);
                let span = b - a;
                let inner = |t: f64| f(t.clamp(a + span * 1e-15, b - span * 1e-15));
                simpson(inner, a, b, SIMPSON_PANELS)
            })
            .sum()
    };

    let d = dim as i32;
    let radial = piecewise(&|r: f64| kernel.eta_unchecked(r) * r.powi(d + 1));
    let theta_eta = unit_sphere_area(dim) * radial / dim as f64;

    let sigma_eta = if dim == 1 {
        let mut line: Vec<f64> = breaks.iter().rev().map(|b| -b).collect();
        line.extend(breaks.iter().skip(1));
        line.windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let span = b - a;
                simpson(
                    |z: f64| {
                        let z = z.clamp(a + span * 1e-15, b - span * 1e-15);
                        kernel.eta_unchecked(z.abs()) * z * z
                    },
                    a,
                    b,
                    SIMPSON_PANELS,
                )
            })
            .sum()
    } else {
        let angular_tail = simpson(
            |phi: f64| phi.cos().powi(2) * phi.sin().powi(d - 2),
            0.0,
            PI,
            SIMPSON_PANELS,
        );
        unit_sphere_area(dim - 1) * angular_tail * radial
    };
    Ok(KernelMoments {
        sigma_eta,
        theta_eta,
    })
}
