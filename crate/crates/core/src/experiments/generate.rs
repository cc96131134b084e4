use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng::rng_from_seed;
use crate::error::{Error, Result};
use crate::geometry::{LabelSet, PointCloud};

/// Sampling density for synthetic clouds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    /// Uniform on `[0, 1]^d`.
    UniformBox { dim: usize },
    /// Density `1` on `[0, 1]^d` except `density_ratio` on the slab
    /// `strip_lo <= x_1 <= strip_hi`.
    StripDensity {
        dim: usize,
        strip_lo: f64,
        strip_hi: f64,
        density_ratio: f64,
    },
    /// Uniform on the unit ball, with a label at the origin and every sample
    /// within `ring_width` of the boundary labeled as well. Ring values are
    /// `|x|^ring_exponent`, or `1` without an exponent.
    DiscWithRing {
        dim: usize,
        ring_width: f64,
        center_value: f64,
        ring_exponent: Option<f64>,
    },
}

impl Generator {
    pub fn box2d() -> Self {
        Generator::UniformBox { dim: 2 }
    }

    pub fn strip() -> Self {
        Generator::StripDensity {
            dim: 3,
            strip_lo: 0.45,
            strip_hi: 0.55,
            density_ratio: 0.6,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Generator::UniformBox { dim }
            | Generator::StripDensity { dim, .. }
            | Generator::DiscWithRing { dim, .. } => dim,
        }
    }

    /// Probability mass of the low-density strip.
    pub fn strip_mass(&self) -> Option<f64> {
        match *self {
            Generator::StripDensity {
                strip_lo,
                strip_hi,
                density_ratio,
                ..
            } => {
                let width = strip_hi - strip_lo;
                Some(width * density_ratio / ((1.0 - width) + width * density_ratio))
            }
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::config("generator dimension must be at least 1"));
        }
        match *self {
            Generator::StripDensity {
                strip_lo,
                strip_hi,
                density_ratio,
                ..
            } => {
                if !(0.0 <= strip_lo && strip_lo < strip_hi && strip_hi <= 1.0) {
                    return Err(Error::config(format!(
                        "strip [{strip_lo}, {strip_hi}] must be a nonempty subinterval of [0, 1]"
                    )));
                }
                if !(density_ratio > 0.0 && density_ratio.is_finite()) {
                    return Err(Error::config(format!(
                        "strip density ratio must be positive, got {density_ratio}"
                    )));
                }
            }
            Generator::DiscWithRing { ring_width, .. } => {
                if !(ring_width > 0.0 && ring_width < 1.0) {
                    return Err(Error::config(format!(
                        "ring width must lie in (0, 1), got {ring_width}"
                    )));
                }
            }
            Generator::UniformBox { .. } => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelPoint {
    pub at: Vec<f64>,
    pub value: f64,
}

impl LabelPoint {
    pub fn new(at: Vec<f64>, value: f64) -> Self {
        LabelPoint { at, value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub generator: Generator,
    pub n: usize,
    pub seed: u64,
    /// Appended after the samples as extra labeled nodes.
    pub labels: Vec<LabelPoint>,
}

fn sample_point(gen: &Generator, rng: &mut impl Rng, out: &mut Vec<f64>) {
    let d = gen.dim();
    match *gen {
        Generator::UniformBox { .. } => out.extend((0..d).map(|_| rng.random::<f64>())),
        Generator::StripDensity {
            strip_lo,
            strip_hi,
            density_ratio,
            ..
        } => {
            let top = density_ratio.max(1.0);
            loop {
                let p: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                let density = if p[0] >= strip_lo && p[0] <= strip_hi {
                    density_ratio
                } else {
                    1.0
                };
                if rng.random::<f64>() * top < density {
                    out.extend(p);
                    return;
                }
            }
        }
        Generator::DiscWithRing { .. } => loop {
            let p: Vec<f64> = (0..d).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
            if p.iter().map(|v| v * v).sum::<f64>() < 1.0 {
                out.extend(p);
                return;
            }
        },
    }
}

/// Draws `n` i.i.d. points and appends the declared labels as extra nodes.
pub fn generate(spec: &SyntheticSpec) -> Result<PointCloud> {
    spec.generator.validate()?;
    if spec.n == 0 {
        return Err(Error::config("sample count must be at least 1"));
    }
    let d = spec.generator.dim();
    let mut rng = rng_from_seed(spec.seed);
    let mut coords = Vec::with_capacity((spec.n + spec.labels.len() + 1) * d);
    for _ in 0..spec.n {
        sample_point(&spec.generator, &mut rng, &mut coords);
    }
    let mut cloud = PointCloud::new(d, coords)?;

    if let Generator::DiscWithRing {
        ring_width,
        center_value,
        ring_exponent,
        ..
    } = spec.generator
    {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (i, p) in cloud.points().enumerate() {
            let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r > 1.0 - ring_width {
                nodes.push(i);
                values.push(ring_exponent.map_or(1.0, |b| r.powf(b)));
            }
        }
        cloud.set_labels(LabelSet::scalar(nodes, values))?;
        cloud.append_labeled(&[vec![0.0; d]], &[center_value])?;
    }

    let (at, values): (Vec<Vec<f64>>, Vec<f64>) =
        spec.labels.iter().map(|l| (l.at.clone(), l.value)).unzip();
    cloud.append_labeled(&at, &values)?;
    Ok(cloud)
}
