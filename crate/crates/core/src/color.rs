//! Adaptive color correction for water-attenuated images.
//!
//! Underwater, red light is absorbed within a few meters, so raw frames
//! arrive with a strong blue or green cast. Correction runs in two stages:
//!
//! 1. **Channel compensation** — the deficient channels borrow energy from
//!    the dominant one. Whichever of green/blue has the larger mean acts as
//!    the donor; each other channel `c` is lifted by
//!    `d * (1 - sigmoid(I_c))^2 * (mean_donor - mean_c) * I_c`,
//!    so the boost scales with the channel's deficit, is damped where the
//!    pixel is already bright, and vanishes where the pixel carries no
//!    signal. The donor channel passes through unchanged.
//! 2. **Statistical balance** — each channel is recentred and spread around
//!    one half: `0.5 * (1 + (I_c - mean_c) / (phi * std_c))`, with the
//!    standard deviation stabilized from below so flat channels cannot
//!    blow up. Before the final clamp to `[0, 1]` every balanced channel
//!    has mean exactly one half.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::image_io::RgbField;

/// Tunables of both correction stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorParams {
    /// Gain on the compensation transfer term.
    pub d: f64,
    /// Spread divisor in the statistical balance.
    pub phi: f64,
    /// Lower bound applied to channel standard deviations during balance.
    pub epsilon_var: f64,
}

impl Default for ColorParams {
    fn default() -> Self {
        ColorParams {
            d: 5.0,
            phi: 2.3,
            epsilon_var: 1e-6,
        }
    }
}

impl ColorParams {
    /// Checks `d > 0`, `phi > 0`, `epsilon_var > 0`.
    ///
    /// # Errors
    /// [`Error::InvalidParameter`] naming the offending field.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("color.d", self.d),
            ("color.phi", self.phi),
            ("color.epsilon_var", self.epsilon_var),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and positive, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Logistic function `1 / (1 + e^-z)`.
#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Per-channel arithmetic means `[mean_r, mean_g, mean_b]`.
///
/// # Errors
/// Returns [`Error::EmptyInput`] for an image with no pixels.
pub fn channel_means(img: &RgbField) -> Result<[f64; 3]> {
    if img.channels[0].is_empty() {
        return Err(Error::EmptyInput {
            context: "channel_means on an image with no pixels",
        });
    }
    Ok([
        img.channels[0].mean(),
        img.channels[1].mean(),
        img.channels[2].mean(),
    ])
}

/// Stage 1: lifts attenuated channels using the stronger of green/blue as
/// donor, then clamps to `[0, 1]`. Ties prefer the green donor.
///
/// # Errors
/// Returns [`Error::EmptyInput`] for an image with no pixels.
pub fn compensate_channels(img: &RgbField, params: &ColorParams) -> Result<RgbField> {
    let [mr, mg, mb] = channel_means(img)?;
    let (h, w) = img.shape();
    // Indices of the two receiving channels and the donor mean.
    let (recv, donor_mean): ([usize; 2], f64) = if mg >= mb {
        ([0, 2], mg) // green donates to red and blue
    } else {
        ([0, 1], mb) // blue donates to red and green
    };
    let means = [mr, mg, mb];
    let mut out = img.clone();
    for &c in &recv {
        let deficit = donor_mean - means[c];
        let src = &img.channels[c];
        out.channels[c] = Field::from_fn(h, w, |i, j| {
            let v = src.at(i, j);
            let damp = 1.0 - sigmoid(v);
            (v + params.d * damp * damp * deficit * v).clamp(0.0, 1.0)
        });
    }
    Ok(out)
}

/// Stage 2: statistical balance. Each channel is mapped to
/// `0.5 * (1 + (I_c - mean_c) / (phi * max(std_c, epsilon_var)))` and then
/// clamped to `[0, 1]`.
///
/// # Errors
/// Returns [`Error::EmptyInput`] for an image with no pixels.
pub fn color_balance(img: &RgbField, params: &ColorParams) -> Result<RgbField> {
    if img.channels[0].is_empty() {
        return Err(Error::EmptyInput {
            context: "color_balance on an image with no pixels",
        });
    }
    let mut out = img.clone();
    for c in 0..3 {
        let ch = &img.channels[c];
        let mean = ch.mean();
        let spread = params.phi * ch.std().max(params.epsilon_var);
        out.channels[c] = ch.map(|v| (0.5 * (1.0 + (v - mean) / spread)).clamp(0.0, 1.0));
    }
    Ok(out)
}

/// Both correction stages in order: compensation, then balance.
///
/// # Errors
/// Returns [`Error::EmptyInput`] for an image with no pixels.
pub fn correct_color(img: &RgbField, params: &ColorParams) -> Result<RgbField> {
    color_balance(&compensate_channels(img, params)?, params)
}
