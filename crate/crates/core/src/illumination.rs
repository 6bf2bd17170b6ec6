//! Local ambient-light estimation with adaptive gamma shaping.
//!
//! Underwater ambient light varies across the frame (beams, shadowing,
//! depth gradients), so a single global airlight is a poor model. The
//! estimate here is built in four stages:
//!
//! 1. **Local maximum** — per channel, a square max-filter of half-width
//!    `patch` approximates the ambient level that locally dominates the
//!    scene; a positivity floor keeps later divisions safe.
//! 2. **Brightness mask** — pixels whose channel-mean local maximum
//!    exceeds the global mean of the local-max image are flagged as
//!    strongly lit (strict `>`).
//! 3. **Mask refinement** — the binary mask is smoothed by a guided
//!    filter steered by the luminance (channel mean) of the local-max
//!    image, yielding a soft lighting map that follows scene edges.
//! 4. **Gamma shaping** — the refined map is normalized to a signed
//!    exponent and converted to a per-pixel gamma,
//!    `gamma = 1 - delta * theta^((M - mean) / (max - min))`,
//!    then every channel of the local-max image is raised to that shared
//!    gamma. Brighter-than-average regions get gamma above the midpoint
//!    (darkening the estimate less) and dim regions get more lift. When
//!    the refined map is constant the exponent is defined as zero, giving
//!    the flat midpoint gamma `1 - delta`.

use crate::error::Result;
use crate::field::Field;
use crate::guided::{guided_filter, GuidedFilterParams};
use crate::image_io::RgbField;

/// Positivity floor applied to the local-max illumination.
pub const ILLUMINATION_FLOOR: f64 = 1e-3;

/// Parameters of the illumination estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlluminationParams {
    /// Max-filter half-width; the window is `(2*patch+1)` squared.
    pub patch: usize,
    /// Base of the gamma exponent; contrast of the adaptive range.
    pub theta: f64,
    /// Depth of the gamma dip; gamma spans around `1 - delta`.
    pub delta: f64,
    /// Positivity floor for the estimate.
    pub floor: f64,
}

impl Default for IlluminationParams {
    fn default() -> Self {
        IlluminationParams {
            patch: 2,
            theta: 0.8,
            delta: 0.5,
            floor: ILLUMINATION_FLOOR,
        }
    }
}

impl IlluminationParams {
    /// Checks `patch >= 1`, `0 < theta < 1`, `0 < delta < 1`, `floor > 0`.
    ///
    /// # Errors
    /// [`crate::Error::InvalidParameter`] naming the offending field.
    pub fn validate(&self) -> Result<()> {
        use crate::error::Error;
        if self.patch < 1 {
            return Err(Error::InvalidParameter {
                name: "illumination.patch",
                reason: "must be at least 1".into(),
            });
        }
        for (name, v) in [
            ("illumination.theta", self.theta),
            ("illumination.delta", self.delta),
        ] {
            if !(v.is_finite() && v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must lie strictly between 0 and 1, got {v}"),
                });
            }
        }
        if !(self.floor.is_finite() && self.floor > 0.0) {
            return Err(Error::InvalidParameter {
                name: "illumination.floor",
                reason: format!("must be finite and positive, got {}", self.floor),
            });
        }
        Ok(())
    }
}

/// Output of [`estimate_illumination`]: the final estimate plus the
/// intermediates needed for debugging dumps.
#[derive(Debug, Clone)]
pub struct IlluminationResult {
    /// Gamma-shaped ambient-light estimate, in `[floor, 1]` per channel.
    pub l: RgbField,
    /// Raw local-max estimate before gamma shaping.
    pub l0: RgbField,
    /// The shared per-pixel gamma map.
    pub gamma: Field,
}

/// Separable square max-filter with replicate (clamped) boundary.
fn max_filter(src: &Field, half: usize) -> Field {
    let (h, w) = src.shape();
    let r = half as isize;
    // pass 1: row-direction maxima
    let rowmax = Field::from_fn(h, w, |i, j| {
        let j0 = (j as isize - r).max(0) as usize;
        let j1 = (j + half).min(w - 1);
        let mut m = f64::NEG_INFINITY;
        for jj in j0..=j1 {
            m = m.max(src.at(i, jj));
        }
        m
    });
    // pass 2: column-direction maxima of the row maxima
    Field::from_fn(h, w, |i, j| {
        let i0 = (i as isize - r).max(0) as usize;
        let i1 = (i + half).min(h - 1);
        let mut m = f64::NEG_INFINITY;
        for ii in i0..=i1 {
            m = m.max(rowmax.at(ii, j));
        }
        m
    })
}

/// Stage 1: per-channel local maximum with the positivity floor applied.
pub fn local_max_illumination(img: &RgbField, patch: usize, floor: f64) -> RgbField {
    let mut out = img.clone();
    for c in 0..3 {
        out.channels[c] = max_filter(&img.channels[c], patch).map(|v| v.max(floor));
    }
    out
}

/// Stage 2: binary mask of strongly lit pixels — 1 where the channel-mean
/// of `l0` strictly exceeds the global mean of all `l0` samples.
pub fn brightness_mask(l0: &RgbField) -> Field {
    let global = (l0.channels[0].mean() + l0.channels[1].mean() + l0.channels[2].mean()) / 3.0;
    l0.channel_mean_plane()
        .map(|v| if v > global { 1.0 } else { 0.0 })
}

/// Stage 4a: converts the refined mask into a shared gamma map.
///
/// `gamma = 1 - delta * theta^e` with
/// `e = (m - mean(m)) / (max(m) - min(m))`; a constant map gets `e = 0`
/// everywhere, hence the flat midpoint `gamma = 1 - delta`.
pub fn gamma_map(mask_refined: &Field, theta: f64, delta: f64) -> Field {
    let hi = mask_refined.max();
    let lo = mask_refined.min();
    let mean = mask_refined.mean();
    if hi > lo {
        let range = hi - lo;
        mask_refined.map(|v| 1.0 - delta * theta.powf((v - mean) / range))
    } else {
        Field::filled(
            mask_refined.rows(),
            mask_refined.cols(),
            1.0 - delta, // theta^0 == 1
        )
    }
}

/// Stage 4b: raises every channel of `l0` to the shared `gamma` map.
pub fn apply_gamma(l0: &RgbField, gamma: &Field) -> RgbField {
    let (h, w) = l0.shape();
    let mut out = l0.clone();
    for c in 0..3 {
        let ch = &l0.channels[c];
        out.channels[c] = Field::from_fn(h, w, |i, j| ch.at(i, j).powf(gamma.at(i, j)));
    }
    out
}

/// Full illumination estimate: local max, brightness mask, guided
/// refinement (guide = channel mean of the local-max image), gamma
/// shaping.
///
/// The result satisfies `l in [floor, 1]` per channel whenever the input
/// lies in `[0, 1]`, because the gamma map stays in `(0, 1]`.
///
/// # Errors
/// Propagates shape errors from image construction (none occur for a
/// well-formed input; the signature stays fallible for pipeline symmetry).
pub fn estimate_illumination(
    img: &RgbField,
    params: &IlluminationParams,
    mask_filter: &GuidedFilterParams,
) -> Result<IlluminationResult> {
    let l0 = local_max_illumination(img, params.patch, params.floor);
    let mask = brightness_mask(&l0);
    let guide = l0.channel_mean_plane();
    let refined = guided_filter(&guide, &mask, *mask_filter);
    let gamma = gamma_map(&refined, params.theta, params.delta);
    let l = apply_gamma(&l0, &gamma);
    Ok(IlluminationResult { l, l0, gamma })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_filter_window_is_correct_at_borders() {
        let f = Field::from_fn(4, 4, |i, j| (i * 4 + j) as f64);
        let m = max_filter(&f, 1);
        // corner (0,0): window {0,1,4,5} -> 5
        assert_eq!(m.at(0, 0), 5.0);
        // center (1,1): 3x3 block max = 10
        assert_eq!(m.at(1, 1), 10.0);
        // far corner: max of whole lower-right 2x2 = 15
        assert_eq!(m.at(3, 3), 15.0);
    }

    #[test]
    fn gamma_midpoint_value() {
        // exponent 0.5 with the default theta/delta:
        // 1 - 0.5 * 0.8^0.5 = 0.5527864045...
        let g = 1.0 - 0.5 * 0.8f64.powf(0.5);
        assert!((g - 0.552_786_404_500_042_06).abs() < 1e-12);
    }

    #[test]
    fn constant_image_yields_sqrt_estimate() {
        // A constant image has a degenerate refined mask, so the exponent
        // is zero, gamma = 1 - delta = 0.5, and L = c^0.5 everywhere.
        let c = 0.64;
        let img = RgbField::from_fn(9, 9, |_, _, _| c);
        let out = estimate_illumination(
            &img,
            &IlluminationParams::default(),
            &GuidedFilterParams::MASK,
        )
        .unwrap();
        for ch in &out.l.channels {
            for &v in ch.as_slice() {
                assert!((v - c.sqrt()).abs() < 1e-12);
            }
        }
        for &g in out.gamma.as_slice() {
            assert_eq!(g, 0.5);
        }
    }

    #[test]
    fn estimate_stays_in_floor_one_interval() {
        let img = RgbField::from_fn(12, 10, |i, j, c| {
            (((i * 31 + j * 17 + c * 43) % 97) as f64 / 96.0).powi(2)
        });
        let params = IlluminationParams::default();
        let out = estimate_illumination(&img, &params, &GuidedFilterParams::MASK).unwrap();
        for ch in &out.l.channels {
            assert!(ch.min() >= params.floor);
            assert!(ch.max() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn mask_is_strictly_binary_and_strict_threshold() {
        let img = RgbField::from_fn(6, 6, |i, _, _| if i < 3 { 0.2 } else { 0.8 });
        let l0 = local_max_illumination(&img, 1, ILLUMINATION_FLOOR);
        let mask = brightness_mask(&l0);
        for &v in mask.as_slice() {
            assert!(v == 0.0 || v == 1.0);
        }
        // constant image: nothing exceeds the mean strictly
        let flat = RgbField::from_fn(5, 5, |_, _, _| 0.5);
        let l0f = local_max_illumination(&flat, 1, ILLUMINATION_FLOOR);
        assert_eq!(brightness_mask(&l0f).sum(), 0.0);
    }
}
