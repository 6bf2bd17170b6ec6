//! Dense scalar and vector fields on a regular pixel grid.
//!
//! A [`Field`] is a row-major `f64` grid: index `(i, j)` addresses row `i`
//! (the y direction, increasing downward) and column `j` (the x direction,
//! increasing rightward). All image-derived quantities in this crate —
//! channels, illumination, transmission, multipliers — are `Field`s, so
//! every operator works on one concrete layout.
//!
//! A [`VectorField`] bundles the two components of a discrete vector
//! quantity such as a gradient, with `x` the along-row (column-direction)
//! component and `y` the down-column (row-direction) component.

use crate::error::{Error, Result};

/// Row-major scalar grid of `f64` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Field {
    /// Creates a zero-filled field of `rows x cols`.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Field {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    /// Creates a field filled with `value`.
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Field {
            data: vec![value; rows * cols],
            rows,
            cols,
        }
    }

    /// Wraps an existing row-major buffer.
    ///
    /// # Errors
    /// Returns [`Error::DimensionMismatch`] when `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape((rows, cols), (data.len(), 1)));
        }
        Ok(Field { data, rows, cols })
    }

    /// Builds a field by evaluating `f(row, col)` at every sample.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Field { data, rows, cols }
    }

    /// Number of rows (image height).
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns (image width).
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `(rows, cols)` pair, convenient for shape checks.
    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Total number of samples.
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// True when the grid holds no samples.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Sample at `(row, col)`.
    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    /// Mutable sample at `(row, col)`.
    #[inline]
    pub fn at_mut(&mut self, row: usize, col: usize) -> &mut f64 {
        debug_assert!(row < self.rows && col < self.cols);
        &mut self.data[row * self.cols + col]
    }

    /// Read-only view of the underlying row-major buffer.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Mutable view of the underlying row-major buffer.
    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Returns an error unless `other` has the same shape as `self`.
    pub fn check_same_shape(&self, other: &Field) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::shape(self.shape(), other.shape()));
        }
        Ok(())
    }

    /// Element-wise map into a new field.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            data: self.data.iter().map(|&v| f(v)).collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    /// In-place element-wise map.
    pub fn map_inplace(&mut self, f: impl Fn(f64) -> f64) {
        for v in &mut self.data {
            *v = f(*v);
        }
    }

    /// Element-wise combination of two same-shaped fields.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert_eq!(self.shape(), other.shape());
        Field {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    /// Arithmetic mean of all samples; 0 for an empty field.
    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Population standard deviation (the `1/N` convention).
    pub fn std(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        let m = self.mean();
        let var =
            self.data.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / self.data.len() as f64;
        var.sqrt()
    }

    /// Smallest sample; `+inf` for an empty field.
    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest sample; `-inf` for an empty field.
    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Euclidean norm of the sample vector.
    pub fn norm_l2(&self) -> f64 {
        self.data.iter().map(|&v| v * v).sum::<f64>().sqrt()
    }

    /// Sum of all samples.
    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Clamps every sample into `[lo, hi]`.
    pub fn clamp(&self, lo: f64, hi: f64) -> Field {
        self.map(|v| v.clamp(lo, hi))
    }

    /// True when every sample is finite.
    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `||self - other|| / max(||other||, floor)` — the relative change
    /// measure used by the solver's stopping rule.
    pub fn rel_change_from(&self, previous: &Field) -> f64 {
        debug_assert_eq!(self.shape(), previous.shape());
        let mut diff = 0.0;
        for (a, b) in self.data.iter().zip(&previous.data) {
            let d = a - b;
            diff += d * d;
        }
        diff.sqrt() / previous.norm_l2().max(1e-12)
    }
}

/// Two-component vector field with the same grid layout as [`Field`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    /// Along-row (column-direction) component.
    pub x: Field,
    /// Down-column (row-direction) component.
    pub y: Field,
}

impl VectorField {
    /// Zero vector field of `rows x cols`.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        VectorField {
            x: Field::zeros(rows, cols),
            y: Field::zeros(rows, cols),
        }
    }

    /// `(rows, cols)` of both components.
    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.x.shape()
    }

    /// Pointwise Euclidean magnitude `sqrt(x^2 + y^2)`.
    pub fn magnitude(&self) -> Field {
        self.x.zip_map(&self.y, |a, b| a.hypot(b))
    }

    /// Euclidean norm over both component grids, i.e. the norm of the
    /// stacked sample vector.
    pub fn norm_l2(&self) -> f64 {
        let sx: f64 = self.x.as_slice().iter().map(|v| v * v).sum();
        let sy: f64 = self.y.as_slice().iter().map(|v| v * v).sum();
        (sx + sy).sqrt()
    }

    /// True when every component sample is finite.
    pub fn all_finite(&self) -> bool {
        self.x.all_finite() && self.y.all_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_rejects_wrong_length() {
        assert!(Field::from_vec(2, 3, vec![0.0; 5]).is_err());
        assert!(Field::from_vec(2, 3, vec![0.0; 6]).is_ok());
    }

    #[test]
    fn indexing_is_row_major() {
        let f = Field::from_fn(2, 3, |i, j| (i * 10 + j) as f64);
        assert_eq!(f.at(0, 0), 0.0);
        assert_eq!(f.at(0, 2), 2.0);
        assert_eq!(f.at(1, 0), 10.0);
        assert_eq!(f.as_slice(), &[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
    }

    #[test]
    fn moments_match_hand_values() {
        let f = Field::from_vec(1, 4, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(f.mean(), 2.5);
        // population variance of 1..4 is 1.25
        assert!((f.std() - 1.25f64.sqrt()).abs() < 1e-15);
        assert_eq!(f.min(), 1.0);
        assert_eq!(f.max(), 4.0);
    }

    #[test]
    fn rel_change_is_scaled_by_previous_norm() {
        let a = Field::filled(2, 2, 1.0);
        let b = Field::filled(2, 2, 1.1);
        let expected = (4.0 * 0.1f64 * 0.1).sqrt() / 2.0; // ||diff|| / ||a||
        assert!((b.rel_change_from(&a) - expected).abs() < 1e-12);
    }
}
