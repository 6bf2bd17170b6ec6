//! Restoration of color-cast, low-contrast underwater photographs.
//!
//! The library models a degraded frame as ambient light blended with an
//! attenuated scene,
//!
//! ```text
//! I = R * L * t + L * (1 - t)
//! ```
//!
//! where `R` is the scene reflectance being recovered, `L` the local
//! ambient illumination, and `t` the transmission of the water column.
//! Restoration runs in five stages, each usable on its own:
//!
//! 1. [`color`] — attenuation compensation between channels followed by
//!    a statistical white balance.
//! 2. [`illumination`] — patch-maximum ambient light, edge-preserving
//!    refinement, and a brightness-adaptive gamma correction.
//! 3. [`transmission`] — patch-minimum transmission with the same
//!    edge-preserving refinement.
//! 4. [`solver`] — a split-variable minimization recovering reflectance
//!    and illumination jointly under curvature-weighted total variation
//!    and Laplacian smoothness.
//! 5. [`metrics`] — no-reference sharpness/colorfulness scores and a
//!    perceptual color difference for before/after comparison.
//!
//! [`pipeline`] chains the stages; the `clearwater` binary wraps the
//! pipeline in a command-line interface.

pub mod color;
pub mod config;
pub mod error;
pub mod field;
pub mod guided;
pub mod illumination;
pub mod image_io;
pub mod metrics;
pub mod ops;
pub mod pipeline;
pub mod solver;
pub mod spectral;
pub mod synth;
pub mod transmission;

pub use error::{Error, Result};
pub use field::{Field, VectorField};
pub use image_io::RgbField;
