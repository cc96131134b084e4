//! Kernel profiles `η`, their `ε`-rescaling, and the singular label weights `γ`, `γ_ζ`.

mod profile;
mod weights;

pub use profile::{
    kernel_moments, unit_sphere_area, KernelKind, KernelMoments, KernelProfile,
    SUPPORT_RADIUS_FACTOR,
};
pub use weights::{GammaLaw, GammaVariant, WeightProfile, ZetaSpec};
