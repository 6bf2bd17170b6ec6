//! No-reference quality scores and perceptual color difference.
//!
//! Three measures cover the before/after comparison:
//!
//! * [`entropy`] — Shannon entropy of the 8-bit luminance histogram;
//!   more occupied gray levels means more retained detail.
//! * [`uciqe`] — weighted sum of chroma spread, luminance contrast, and
//!   mean saturation in CIELab, the usual single-number score for
//!   underwater imagery.
//! * [`ciede2000`] — mean ΔE₀₀ perceptual color difference against a
//!   reference image.
//!
//! Lab conversion assumes sRGB input under a D65 white point and uses
//! the conventional two-piece companding and cube-root transfer
//! functions, so values agree with the common scientific-imaging
//! implementations to ~1e-10.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::image_io::RgbField;

/// Weights of the three UCIQE terms (chroma std, luminance contrast,
/// mean saturation), from the metric's defining publication.
pub const UCIQE_WEIGHTS: [f64; 3] = [0.4680, 0.2745, 0.2576];

/// Quality summary of one image.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MetricReport {
    /// Luminance-histogram entropy in bits, in `[0, 8]` for 8-bit data.
    pub entropy: f64,
    /// Underwater color image quality score (non-negative).
    pub uciqe: f64,
    /// Mean ΔE₀₀ against a reference image, when one was supplied.
    pub ciede2000: Option<f64>,
}

impl MetricReport {
    /// Scores `img`, optionally measuring color difference against
    /// `reference`.
    ///
    /// # Errors
    /// [`Error::DimensionMismatch`] when the reference disagrees in size.
    pub fn compute(img: &RgbField, reference: Option<&RgbField>) -> Result<MetricReport> {
        Ok(MetricReport {
            entropy: entropy(img),
            uciqe: uciqe(img),
            ciede2000: match reference {
                Some(r) => Some(ciede2000(img, r)?),
                None => None,
            },
        })
    }
}

// ---------------------------------------------------------------------------
// sRGB -> CIELab
// ---------------------------------------------------------------------------

/// Linearizes one sRGB component in `[0, 1]`.
#[inline]
fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

/// D65 reference white in XYZ.
const WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

/// Rows of the linear-sRGB → XYZ matrix (ITU-R BT.709 primaries, D65).
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412453, 0.357580, 0.180423],
    [0.212671, 0.715160, 0.072169],
    [0.019334, 0.119193, 0.950227],
];

/// The Lab transfer function applied to normalized tristimulus values.
#[inline]
fn lab_f(t: f64) -> f64 {
    if t > 0.008856 {
        t.cbrt()
    } else {
        7.787 * t + 16.0 / 116.0
    }
}

/// Converts one sRGB pixel (components in `[0, 1]`) to CIELab
/// (`L` in `[0, 100]`).
pub fn rgb_pixel_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lin = [
        srgb_to_linear(rgb[0]),
        srgb_to_linear(rgb[1]),
        srgb_to_linear(rgb[2]),
    ];
    let mut f = [0.0; 3];
    for k in 0..3 {
        let v = RGB_TO_XYZ[k][0] * lin[0] + RGB_TO_XYZ[k][1] * lin[1] + RGB_TO_XYZ[k][2] * lin[2];
        f[k] = lab_f(v / WHITE[k]);
    }
    [
        116.0 * f[1] - 16.0,
        500.0 * (f[0] - f[1]),
        200.0 * (f[1] - f[2]),
    ]
}

/// Converts a whole image to Lab planes `[L, a, b]`.
pub fn rgb_to_lab(img: &RgbField) -> [Field; 3] {
    let (h, w) = img.shape();
    let mut l = Field::zeros(h, w);
    let mut a = Field::zeros(h, w);
    let mut b = Field::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            let lab = rgb_pixel_to_lab(img.pixel(i, j));
            *l.at_mut(i, j) = lab[0];
            *a.at_mut(i, j) = lab[1];
            *b.at_mut(i, j) = lab[2];
        }
    }
    [l, a, b]
}

// ---------------------------------------------------------------------------
// CIEDE2000
// ---------------------------------------------------------------------------

const POW7_25: f64 = 6_103_515_625.0; // 25^7

#[inline]
fn deg_to_rad(d: f64) -> f64 {
    d * std::f64::consts::PI / 180.0
}

/// Hue angle in degrees in `[0, 360)`; zero for an achromatic sample.
#[inline]
fn hue_deg(ap: f64, b: f64) -> f64 {
    if ap == 0.0 && b == 0.0 {
        0.0
    } else {
        let h = b.atan2(ap).to_degrees();
        if h < 0.0 {
            h + 360.0
        } else {
            h
        }
    }
}

/// ΔE₀₀ between two Lab triples, with all parametric factors at 1.
///
/// Implements the full standard formula: chroma-dependent `a` rescaling,
/// the hue-difference and mean-hue branch rules, the `T` weighting, and
/// the blue-region rotation term.
pub fn ciede2000_lab(lab1: [f64; 3], lab2: [f64; 3]) -> f64 {
    let (l1, a1, b1) = (lab1[0], lab1[1], lab1[2]);
    let (l2, a2, b2) = (lab2[0], lab2[1], lab2[2]);

    let c1 = a1.hypot(b1);
    let c2 = a2.hypot(b2);
    let cbar = 0.5 * (c1 + c2);
    let cbar7 = cbar.powi(7);
    let g = 0.5 * (1.0 - (cbar7 / (cbar7 + POW7_25)).sqrt());
    let a1p = (1.0 + g) * a1;
    let a2p = (1.0 + g) * a2;
    let c1p = a1p.hypot(b1);
    let c2p = a2p.hypot(b2);
    let h1p = hue_deg(a1p, b1);
    let h2p = hue_deg(a2p, b2);

    let dl = l2 - l1;
    let dc = c2p - c1p;
    let dhp = if c1p * c2p == 0.0 {
        0.0
    } else {
        let d = h2p - h1p;
        if d.abs() <= 180.0 {
            d
        } else if d > 180.0 {
            d - 360.0
        } else {
            d + 360.0
        }
    };
    let dh = 2.0 * (c1p * c2p).sqrt() * deg_to_rad(0.5 * dhp).sin();

    let lbar = 0.5 * (l1 + l2);
    let cbarp = 0.5 * (c1p + c2p);
    let hbar = if c1p * c2p == 0.0 {
        h1p + h2p
    } else if (h1p - h2p).abs() <= 180.0 {
        0.5 * (h1p + h2p)
    } else if h1p + h2p < 360.0 {
        0.5 * (h1p + h2p + 360.0)
    } else {
        0.5 * (h1p + h2p - 360.0)
    };

    let t = 1.0 - 0.17 * deg_to_rad(hbar - 30.0).cos() + 0.24 * deg_to_rad(2.0 * hbar).cos()
        + 0.32 * deg_to_rad(3.0 * hbar + 6.0).cos()
        - 0.20 * deg_to_rad(4.0 * hbar - 63.0).cos();
    let dtheta = 30.0 * (-((hbar - 275.0) / 25.0) * ((hbar - 275.0) / 25.0)).exp();
    let cbarp7 = cbarp.powi(7);
    let rc = 2.0 * (cbarp7 / (cbarp7 + POW7_25)).sqrt();
    let lm50 = (lbar - 50.0) * (lbar - 50.0);
    let sl = 1.0 + 0.015 * lm50 / (20.0 + lm50).sqrt();
    let sc = 1.0 + 0.045 * cbarp;
    let sh = 1.0 + 0.015 * cbarp * t;
    let rt = -deg_to_rad(2.0 * dtheta).sin() * rc;

    let fl = dl / sl;
    let fc = dc / sc;
    let fh = dh / sh;
    (fl * fl + fc * fc + fh * fh + rt * fc * fh).sqrt()
}

/// Mean ΔE₀₀ over all pixels of `img` against `reference`.
///
/// # Errors
/// [`Error::DimensionMismatch`] when the images disagree in size.
pub fn ciede2000(img: &RgbField, reference: &RgbField) -> Result<f64> {
    if img.shape() != reference.shape() {
        return Err(Error::DimensionMismatch {
            expected_h: reference.rows(),
            expected_w: reference.cols(),
            got_h: img.rows(),
            got_w: img.cols(),
        });
    }
    let (h, w) = img.shape();
    if h * w == 0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for i in 0..h {
        for j in 0..w {
            total += ciede2000_lab(
                rgb_pixel_to_lab(img.pixel(i, j)),
                rgb_pixel_to_lab(reference.pixel(i, j)),
            );
        }
    }
    Ok(total / (h * w) as f64)
}

// ---------------------------------------------------------------------------
// Entropy
// ---------------------------------------------------------------------------

/// Shannon entropy, in bits, of the 256-bin histogram of the 8-bit
/// quantized luminance (`0.299 R + 0.587 G + 0.114 B`). Empty bins
/// contribute zero; a constant image scores 0 and a perfectly uniform
/// 256-level image scores exactly 8.
pub fn entropy(img: &RgbField) -> f64 {
    let y = img.luminance();
    let n = y.len();
    if n == 0 {
        return 0.0;
    }
    let mut hist = [0u64; 256];
    for &v in y.as_slice() {
        // ties-to-even so exact half-level luminances quantize the same
        // way on every platform and match the 8-bit writer
        let bin = (v * 255.0).round_ties_even().clamp(0.0, 255.0) as usize;
        hist[bin] += 1;
    }
    let n = n as f64;
    let mut e = 0.0;
    for &c in &hist {
        if c > 0 {
            let p = c as f64 / n;
            e -= p * p.log2();
        }
    }
    e
}

// ---------------------------------------------------------------------------
// UCIQE
// ---------------------------------------------------------------------------

/// Underwater color image quality: `w1·σ_chroma + w2·con_l + w3·μ_sat`
/// in CIELab, with `σ_chroma` the population standard deviation of
/// chroma, `con_l` the spread between the bottom-1% and top-1%
/// luminance order statistics, `μ_sat` the mean of `C/√(C²+L²)`
/// (zero at achromatic pixels), and the chroma/contrast terms on the
/// 0–1 scale (Lab values divided by 100).
pub fn uciqe(img: &RgbField) -> f64 {
    let [l, a, b] = rgb_to_lab(img);
    let n = l.len();
    if n == 0 {
        return 0.0;
    }

    let chroma: Vec<f64> = (0..n)
        .map(|k| a.as_slice()[k].hypot(b.as_slice()[k]))
        .collect();
    let mean_c = chroma.iter().sum::<f64>() / n as f64;
    let var_c = chroma.iter().map(|c| (c - mean_c) * (c - mean_c)).sum::<f64>() / n as f64;
    let sigma_c = var_c.sqrt();

    let mut sorted_l: Vec<f64> = l.as_slice().to_vec();
    sorted_l.sort_by(|x, y| x.partial_cmp(y).expect("finite luminance"));
    let lo = (0.01 * (n - 1) as f64).floor() as usize;
    let hi = (0.99 * (n - 1) as f64).ceil() as usize;
    let con_l = sorted_l[hi] - sorted_l[lo];

    let mean_sat = (0..n)
        .map(|k| {
            let c = chroma[k];
            if c > 0.0 {
                c / c.hypot(l.as_slice()[k])
            } else {
                0.0
            }
        })
        .sum::<f64>()
        / n as f64;

    UCIQE_WEIGHTS[0] * (sigma_c / 100.0) + UCIQE_WEIGHTS[1] * (con_l / 100.0)
        + UCIQE_WEIGHTS[2] * mean_sat
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lab_of(r: u8, g: u8, b: u8) -> [f64; 3] {
        rgb_pixel_to_lab([r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0])
    }

    #[test]
    fn lab_matches_reference_conversions() {
        // Reference values from a widely used scientific-imaging
        // implementation, printed to 10 decimals.
        let cases: [((u8, u8, u8), [f64; 3]); 8] = [
            ((0, 0, 0), [0.0, 0.0, 0.0]),
            ((255, 255, 255), [100.0, -0.0024549379, 0.0046534212]),
            ((255, 0, 0), [53.2405879437, 80.0923082257, 67.2027510444]),
            ((0, 0, 255), [32.2956725650, 79.1855909118, -107.8573002067]),
            ((128, 128, 128), [53.5850134522, -0.0014726456, 0.0027914515]),
            ((64, 32, 200), [30.1366842019, 59.0932233685, -79.8841175564]),
            ((250, 5, 128), [54.0239908400, 83.1316444860, 2.7033505734]),
            ((77, 199, 33), [71.2366002116, -61.0577313473, 65.2807501681]),
        ];
        for ((r, g, b), want) in cases {
            let got = lab_of(r, g, b);
            for k in 0..3 {
                assert_abs_diff_eq!(got[k], want[k], epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn ciede2000_zero_on_identical_and_symmetric() {
        let x = [50.0, 2.6772, -79.7751];
        let y = [50.0, 0.0, -82.7485];
        assert_eq!(ciede2000_lab(x, x), 0.0);
        assert_abs_diff_eq!(ciede2000_lab(x, y), ciede2000_lab(y, x), epsilon = 1e-12);
    }

    #[test]
    fn ciede2000_standard_pairs_spot_check() {
        // First and last rows of the standard verification table.
        assert_abs_diff_eq!(
            ciede2000_lab([50.0, 2.6772, -79.7751], [50.0, 0.0, -82.7485]),
            2.0425,
            epsilon = 1e-4
        );
        assert_abs_diff_eq!(
            ciede2000_lab([2.0776, 0.0795, -1.1350], [0.9033, -0.0636, -0.5514]),
            0.9082,
            epsilon = 1e-4
        );
    }

    #[test]
    fn mean_ciede2000_requires_matching_shapes_and_hits_zero() {
        let a = RgbField::from_fn(4, 5, |i, j, c| ((i + 2 * j + 3 * c) % 7) as f64 / 7.0);
        let b = RgbField::zeros(4, 6);
        assert!(ciede2000(&a, &b).is_err());
        assert_eq!(ciede2000(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn entropy_bounds() {
        let flat = RgbField::from_fn(10, 10, |_, _, _| 0.42);
        assert_eq!(entropy(&flat), 0.0);
        // 16x16 grayscale covering each of the 256 levels exactly once.
        let uniform = RgbField::from_fn(16, 16, |i, j, _| (i * 16 + j) as f64 / 255.0);
        assert_eq!(entropy(&uniform), 8.0);
    }

    #[test]
    fn entropy_is_position_invariant() {
        let img = RgbField::from_fn(8, 8, |i, j, _| ((i * 13 + j * 7) % 11) as f64 / 10.0);
        // Transpose the pixels: same histogram, same entropy.
        let permuted = RgbField::from_fn(8, 8, |i, j, c| img.pixel(j, i)[c]);
        assert_eq!(entropy(&img), entropy(&permuted));
    }

    #[test]
    fn uciqe_constant_gray_is_zero() {
        let flat = RgbField::from_fn(12, 12, |_, _, _| 0.5);
        let score = uciqe(&flat);
        // Gray has (numerically) zero chroma spread, zero contrast, and
        // saturation ~1e-5 from the Lab white-point rounding.
        assert!(score < 1e-4, "score {score}");
    }

    #[test]
    fn uciqe_luminance_ramp_is_contrast_only() {
        let ramp = RgbField::from_fn(16, 16, |i, j, _| (i * 16 + j) as f64 / 255.0);
        let [l, _, _] = rgb_to_lab(&ramp);
        let mut sorted: Vec<f64> = l.as_slice().to_vec();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let n = sorted.len();
        let lo = (0.01 * (n - 1) as f64).floor() as usize;
        let hi = (0.99 * (n - 1) as f64).ceil() as usize;
        let expected = UCIQE_WEIGHTS[1] * (sorted[hi] - sorted[lo]) / 100.0;
        // Chroma/saturation contributions are bounded by the tiny Lab
        // white-point asymmetry.
        assert_abs_diff_eq!(uciqe(&ramp), expected, epsilon = 1e-4);
    }

    #[test]
    fn uciqe_chroma_variance_strictly_increases_chroma_term() {
        // Half the pixels slightly colored: the chroma std rises vs. gray.
        let gray = RgbField::from_fn(8, 8, |_, _, _| 0.5);
        let tinted = RgbField::from_fn(8, 8, |i, _, c| {
            if i < 4 && c == 0 {
                0.7
            } else {
                0.5
            }
        });
        assert!(uciqe(&tinted) > uciqe(&gray));
    }
}
