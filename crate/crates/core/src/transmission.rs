//! Transmission estimation from the dark-channel ratio.
//!
//! Under the image-formation model `I = R L t + L (1 - t)`, a pixel whose
//! true reflectance is near zero in some channel observes
//! `I ~ L (1 - t)` there, so `1 - min_c min_window(I_c) / L_c` estimates
//! the transmission. Concretely:
//!
//! 1. per channel, take the windowed minimum of the observation;
//! 2. divide by the illumination at the window center and clip the ratio
//!    into `[0, 1]`;
//! 3. take the minimum over channels and subtract from one;
//! 4. clamp into `[t_min, 1]`, refine with a guided filter steered by the
//!    luminance of the color-corrected image, and clamp again (the filter
//!    can overshoot the clamp interval).
//!
//! The shared map serves all three channels: attenuation differences are
//! already absorbed by the color-correction stage, and one geometry-driven
//! map avoids channel-dependent structure artifacts.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::guided::{guided_filter, GuidedFilterParams};
use crate::illumination::ILLUMINATION_FLOOR;
use crate::image_io::RgbField;

/// Parameters of the transmission estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionParams {
    /// Min-filter half-width; the window is `(2*patch+1)` squared.
    pub patch: usize,
    /// Lower clamp for the transmission map.
    pub t_min: f64,
}

impl Default for TransmissionParams {
    fn default() -> Self {
        TransmissionParams {
            patch: 7,
            t_min: 0.05,
        }
    }
}

impl TransmissionParams {
    /// Checks `patch >= 1` and `0 < t_min < 1`.
    ///
    /// # Errors
    /// [`Error::InvalidParameter`] naming the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.patch < 1 {
            return Err(Error::InvalidParameter {
                name: "transmission.patch",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.t_min.is_finite() && self.t_min > 0.0 && self.t_min < 1.0) {
            return Err(Error::InvalidParameter {
                name: "transmission.t_min",
                reason: format!("must lie strictly between 0 and 1, got {}", self.t_min),
            });
        }
        Ok(())
    }
}

/// Output of [`estimate_transmission`].
#[derive(Debug, Clone)]
pub struct TransmissionResult {
    /// Refined transmission, clamped into `[t_min, 1]`.
    pub t: Field,
    /// Raw (pre-clamp, pre-refinement) transmission `1 - min_c ratio_c`.
    pub t_raw: Field,
}

/// Separable square min-filter with replicate (clamped) boundary.
pub fn window_min(src: &Field, half: usize) -> Field {
    let (h, w) = src.shape();
    let r = half as isize;
    let rowmin = Field::from_fn(h, w, |i, j| {
        let j0 = (j as isize - r).max(0) as usize;
        let j1 = (j + half).min(w - 1);
        let mut m = f64::INFINITY;
        for jj in j0..=j1 {
            m = m.min(src.at(i, jj));
        }
        m
    });
    Field::from_fn(h, w, |i, j| {
        let i0 = (i as isize - r).max(0) as usize;
        let i1 = (i + half).min(h - 1);
        let mut m = f64::INFINITY;
        for ii in i0..=i1 {
            m = m.min(rowmin.at(ii, j));
        }
        m
    })
}

/// Full transmission estimate from a color-corrected image and its
/// illumination map.
///
/// # Errors
/// * [`Error::DimensionMismatch`] if `img` and `l` disagree in shape.
/// * [`Error::IlluminationBelowFloor`] if any illumination sample lies
///   below the positivity floor — the ratio would be unbounded.
pub fn estimate_transmission(
    img: &RgbField,
    l: &RgbField,
    params: &TransmissionParams,
    refine_filter: &GuidedFilterParams,
) -> Result<TransmissionResult> {
    img.channels[0].check_same_shape(&l.channels[0])?;
    let l_min = l.channels.iter().map(Field::min).fold(f64::INFINITY, f64::min);
    if l_min < ILLUMINATION_FLOOR {
        return Err(Error::IlluminationBelowFloor {
            floor: ILLUMINATION_FLOOR,
            min: l_min,
        });
    }

    let (h, w) = img.shape();
    // channel-wise clipped ratio, then min over channels
    let mut min_ratio = Field::filled(h, w, f64::INFINITY);
    for c in 0..3 {
        let wmin = window_min(&img.channels[c], params.patch);
        let lc = &l.channels[c];
        for i in 0..h {
            for j in 0..w {
                let ratio = (wmin.at(i, j) / lc.at(i, j)).clamp(0.0, 1.0);
                let cur = min_ratio.at_mut(i, j);
                *cur = cur.min(ratio);
            }
        }
    }
    let t_raw = min_ratio.map(|v| 1.0 - v);
    let t_clamped = t_raw.clamp(params.t_min, 1.0);
    let guide = img.luminance();
    let refined = guided_filter(&guide, &t_clamped, *refine_filter);
    Ok(TransmissionResult {
        t: refined.clamp(params.t_min, 1.0),
        t_raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_min_is_exact_on_a_small_grid() {
        let f = Field::from_fn(4, 4, |i, j| (i * 4 + j) as f64);
        let m = window_min(&f, 1);
        assert_eq!(m.at(0, 0), 0.0);
        assert_eq!(m.at(2, 2), 5.0); // 3x3 block starting at (1,1)
        assert_eq!(m.at(3, 3), 10.0);
    }

    #[test]
    fn illumination_below_floor_is_rejected() {
        let img = RgbField::from_fn(6, 6, |_, _, _| 0.5);
        let l = RgbField::from_fn(6, 6, |i, j, _| if (i, j) == (2, 3) { 1e-5 } else { 0.8 });
        let err = estimate_transmission(
            &img,
            &l,
            &TransmissionParams::default(),
            &GuidedFilterParams::TRANSMISSION,
        )
        .unwrap_err();
        assert!(matches!(err, Error::IlluminationBelowFloor { .. }));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let img = RgbField::zeros(6, 6);
        let l = RgbField::from_fn(5, 6, |_, _, _| 0.8);
        assert!(estimate_transmission(
            &img,
            &l,
            &TransmissionParams::default(),
            &GuidedFilterParams::TRANSMISSION,
        )
        .is_err());
    }

    #[test]
    fn output_respects_clamp_interval() {
        let img = RgbField::from_fn(20, 20, |i, j, c| {
            ((i * 31 + j * 17 + c * 43) % 97) as f64 / 96.0
        });
        let l = RgbField::from_fn(20, 20, |i, j, _| 0.6 + 0.3 * ((i + j) % 5) as f64 / 5.0);
        let params = TransmissionParams::default();
        let out = estimate_transmission(&img, &l, &params, &GuidedFilterParams::TRANSMISSION)
            .unwrap();
        assert!(out.t.min() >= params.t_min);
        assert!(out.t.max() <= 1.0);
    }

    #[test]
    fn dark_scene_under_bright_light_reads_as_backscatter() {
        // Observation equal to L * (1 - t0) with a dark (zero-reflectance)
        // scene: the raw estimate must recover ~t0 exactly away from any
        // window effect (the image is constant, so there is none).
        let t0 = 0.37;
        let l_val = 0.8;
        let img = RgbField::from_fn(10, 10, |_, _, _| l_val * (1.0 - t0));
        let l = RgbField::from_fn(10, 10, |_, _, _| l_val);
        let out = estimate_transmission(
            &img,
            &l,
            &TransmissionParams { patch: 2, t_min: 0.05 },
            &GuidedFilterParams { radius: 2, eps: 1e-4 },
        )
        .unwrap();
        for &v in out.t_raw.as_slice() {
            assert!((v - t0).abs() < 1e-12);
        }
    }
}
