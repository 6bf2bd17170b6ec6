//! RGB images as triplets of scalar fields, plus PNG ingest/egress.
//!
//! Images are carried in planar form — one [`Field`] per channel, values in
//! `[0, 1]` — because every stage of the restoration chain operates on
//! channels independently or on per-pixel triplets. 8-bit files are mapped
//! to floats by dividing by 255; writing rounds back with
//! `round(255 * v)`, which is also used to requantize in-memory results
//! before metric evaluation so that reported numbers describe the bytes on
//! disk, not the internal reals.

use std::path::Path;

use crate::error::{Error, Result};
use crate::field::Field;

/// Planar RGB image; channel order is `[red, green, blue]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbField {
    /// The three channel planes, all the same shape.
    pub channels: [Field; 3],
}

impl RgbField {
    /// Zero-filled image of `rows x cols`.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RgbField {
            channels: [
                Field::zeros(rows, cols),
                Field::zeros(rows, cols),
                Field::zeros(rows, cols),
            ],
        }
    }

    /// Builds an image by evaluating `f(row, col, channel)` everywhere.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut ch: Vec<Field> = Vec::with_capacity(3);
        for c in 0..3 {
            ch.push(Field::from_fn(rows, cols, |i, j| f(i, j, c)));
        }
        let [r, g, b] = <[Field; 3]>::try_from(ch).expect("three channels");
        RgbField { channels: [r, g, b] }
    }

    /// Wraps three same-shaped planes.
    ///
    /// # Errors
    /// Returns [`Error::DimensionMismatch`] if the planes disagree in shape.
    pub fn from_channels(r: Field, g: Field, b: Field) -> Result<Self> {
        r.check_same_shape(&g)?;
        r.check_same_shape(&b)?;
        Ok(RgbField { channels: [r, g, b] })
    }

    /// Number of rows (height).
    #[inline]
    pub fn rows(&self) -> usize {
        self.channels[0].rows()
    }

    /// Number of columns (width).
    #[inline]
    pub fn cols(&self) -> usize {
        self.channels[0].cols()
    }

    /// `(rows, cols)` of every plane.
    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.channels[0].shape()
    }

    /// Pixel triplet at `(row, col)`.
    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        [
            self.channels[0].at(row, col),
            self.channels[1].at(row, col),
            self.channels[2].at(row, col),
        ]
    }

    /// Applies `f` to every sample of every channel.
    pub fn map(&self, f: impl Fn(f64) -> f64 + Copy) -> RgbField {
        RgbField {
            channels: [
                self.channels[0].map(f),
                self.channels[1].map(f),
                self.channels[2].map(f),
            ],
        }
    }

    /// Clamps every sample into `[lo, hi]`.
    pub fn clamp(&self, lo: f64, hi: f64) -> RgbField {
        self.map(|v| v.clamp(lo, hi))
    }

    /// True when every sample in every channel is finite.
    pub fn all_finite(&self) -> bool {
        self.channels.iter().all(Field::all_finite)
    }

    /// Snaps every sample to the nearest 8-bit level: `round(255 v) / 255`.
    ///
    /// Run this before computing quality metrics on an image that has been
    /// (or will be) written to an 8-bit file, so the metrics describe the
    /// stored pixels.
    pub fn quantize_u8(&self) -> RgbField {
        self.map(|v| (v * 255.0).round_ties_even() / 255.0)
    }

    /// Weighted luminance plane `0.299 R + 0.587 G + 0.114 B`.
    pub fn luminance(&self) -> Field {
        let (h, w) = self.shape();
        Field::from_fn(h, w, |i, j| {
            let [r, g, b] = self.pixel(i, j);
            0.299 * r + 0.587 * g + 0.114 * b
        })
    }

    /// Unweighted per-pixel channel mean, `(R + G + B) / 3`.
    pub fn channel_mean_plane(&self) -> Field {
        let (h, w) = self.shape();
        Field::from_fn(h, w, |i, j| {
            let [r, g, b] = self.pixel(i, j);
            (r + g + b) / 3.0
        })
    }
}

/// Reads an 8-bit image file into `[0, 1]` floats (values divided by 255).
///
/// Any format the decoder recognizes is accepted and converted to RGB;
/// alpha, if present, is dropped.
///
/// # Errors
/// Returns [`Error::ImageRead`] when the file is missing, unreadable, or
/// not a decodable image.
pub fn load_image(path: &Path) -> Result<RgbField> {
    let dyn_img = image::open(path).map_err(|source| Error::ImageRead {
        path: path.to_path_buf(),
        source,
    })?;
    let rgb = dyn_img.to_rgb8();
    let (w, h) = rgb.dimensions();
    let (w, h) = (w as usize, h as usize);
    let mut out = RgbField::zeros(h, w);
    for (i, row) in rgb.rows().enumerate() {
        for (j, px) in row.enumerate() {
            for c in 0..3 {
                *out.channels[c].at_mut(i, j) = px.0[c] as f64 / 255.0;
            }
        }
    }
    Ok(out)
}

/// Writes an image as an 8-bit PNG, rounding each sample to
/// `round(255 * clamp(v, 0, 1))`.
///
/// The encoder settings are fixed, so identical pixel data always produces
/// byte-identical files.
///
/// # Errors
/// Returns [`Error::ImageWrite`] on encoding or filesystem failure.
pub fn save_png(path: &Path, img: &RgbField) -> Result<()> {
    let (h, w) = img.shape();
    let mut buf = image::RgbImage::new(w as u32, h as u32);
    for i in 0..h {
        for j in 0..w {
            let px = img.pixel(i, j);
            let bytes = [
                (px[0].clamp(0.0, 1.0) * 255.0).round_ties_even() as u8,
                (px[1].clamp(0.0, 1.0) * 255.0).round_ties_even() as u8,
                (px[2].clamp(0.0, 1.0) * 255.0).round_ties_even() as u8,
            ];
            buf.put_pixel(j as u32, i as u32, image::Rgb(bytes));
        }
    }
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::ImageWrite {
            path: path.to_path_buf(),
            source,
        })
}
