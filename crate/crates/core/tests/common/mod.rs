//! Shared helpers for the integration suites: frozen-data loading and
//! the deterministic pattern images the reference outputs were built
//! from.

use std::path::PathBuf;

use clearwater::{Field, RgbField};

/// Absolute path of a file in `tests/data`.
pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

/// Reads a little-endian f64 dump.
pub fn load_f64(name: &str) -> Vec<f64> {
    let bytes = std::fs::read(data_path(name)).unwrap_or_else(|e| panic!("read {name}: {e}"));
    assert_eq!(bytes.len() % 8, 0, "{name}: not a multiple of 8 bytes");
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect()
}

/// Loads an `h`×`w` scalar field stored row-major.
pub fn load_field(name: &str, h: usize, w: usize) -> Field {
    let v = load_f64(name);
    assert_eq!(v.len(), h * w, "{name}: unexpected length");
    Field::from_vec(h, w, v).expect("shape")
}

/// Loads an `h`×`w`×3 image stored row-major with interleaved channels.
pub fn load_rgb(name: &str, h: usize, w: usize) -> RgbField {
    let v = load_f64(name);
    assert_eq!(v.len(), h * w * 3, "{name}: unexpected length");
    RgbField::from_fn(h, w, |i, j, c| v[(i * w + j) * 3 + c])
}

/// The deterministic 10×12 pattern the reference chain outputs were
/// generated from: a red-deficient, blue-dominant color ramp.
pub fn pat(shift: usize) -> RgbField {
    RgbField::from_fn(10, 12, |i, j, c| {
        let v = ((i * 31 + j * 17 + c * 43 + shift) % 97) as f64 / 96.0;
        match c {
            0 => 0.20 * v,
            1 => 0.45 + 0.40 * v,
            _ => 0.50 + 0.45 * v,
        }
    })
}

/// Same pattern with the channel order reversed (red-dominant variant,
/// exercising the other donor branch).
pub fn pat_reversed(shift: usize) -> RgbField {
    let p = pat(shift);
    RgbField::from_channels(
        p.channels[2].clone(),
        p.channels[1].clone(),
        p.channels[0].clone(),
    )
    .expect("equal shapes")
}

/// Largest absolute difference between two scalar fields.
pub fn max_abs_diff(a: &Field, b: &Field) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Largest absolute difference between two images across all channels.
pub fn max_abs_diff_rgb(a: &RgbField, b: &RgbField) -> f64 {
    (0..3)
        .map(|c| max_abs_diff(&a.channels[c], &b.channels[c]))
        .fold(0.0, f64::max)
}

/// Mean absolute difference between two scalar fields.
pub fn mean_abs_diff(a: &Field, b: &Field) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let n = a.len().max(1) as f64;
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        / n
}
