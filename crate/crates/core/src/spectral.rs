//! Spectral solver for the coupled grad-div subproblems.
//!
//! Two of the variational subproblems require solving, for a vector field
//! `p = (p1, p2)` on a periodic grid,
//!
//! ```text
//! ratio * p - grad(div p) = (h1, h2)
//! ```
//!
//! With wrap-around forward-difference gradients and backward-difference
//! divergences, both operators are diagonalized by the 2-D discrete
//! Fourier transform. Writing the per-frequency symbols
//!
//! ```text
//! d = e^{i w} - 1        (forward difference)
//! b = 1 - e^{-i w}       (backward difference)
//! ```
//!
//! along x (columns, frequency `wx`) and y (rows, frequency `wy`), each
//! frequency decouples into a 2x2 linear system
//!
//! ```text
//! [ ratio - dx bx     - dx by   ] [P1]   [H1]
//! [   - dy bx       ratio - dy by] [P2] = [H2]
//! ```
//!
//! whose determinant is *real* and bounded below by `ratio^2`: using
//! `d b = -(2 - 2 cos w)`, the diagonal terms are `ratio + r` with
//! `r >= 0`, and the cross terms cancel in the determinant to
//! `ratio^2 + ratio (rx + ry) >= ratio^2 > 0`. The system is therefore
//! solved exactly per frequency by Cramer's rule with a shared positive
//! denominator, and the answer transformed back.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::Field;

/// Precomputed machinery for one grid shape and one `ratio`.
pub struct SpectralKernel {
    rows: usize,
    cols: usize,
    ratio: f64,
    fwd_rows: Arc<dyn Fft<f64>>,
    inv_rows: Arc<dyn Fft<f64>>,
    fwd_cols: Arc<dyn Fft<f64>>,
    inv_cols: Arc<dyn Fft<f64>>,
    /// Forward-difference symbol per column frequency.
    dx: Vec<Complex<f64>>,
    /// Backward-difference symbol per column frequency.
    bx: Vec<Complex<f64>>,
    /// Forward-difference symbol per row frequency.
    dy: Vec<Complex<f64>>,
    /// Backward-difference symbol per row frequency.
    by: Vec<Complex<f64>>,
    /// `2 - 2 cos(w)` per column / row frequency.
    rx: Vec<f64>,
    ry: Vec<f64>,
}

impl std::fmt::Debug for SpectralKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralKernel")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("ratio", &self.ratio)
            .finish()
    }
}

impl SpectralKernel {
    /// Plans transforms and tabulates difference symbols.
    ///
    /// # Errors
    /// * [`Error::EmptyInput`] for a zero-sized grid.
    /// * [`Error::InvalidParameter`] unless `ratio` is finite and positive
    ///   (the denominator lower bound `ratio^2` degenerates otherwise).
    pub fn new(rows: usize, cols: usize, ratio: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyInput {
                context: "spectral kernel on an empty grid",
            });
        }
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::InvalidParameter {
                name: "ratio",
                reason: format!("must be finite and positive, got {ratio}"),
            });
        }
        let mut planner = FftPlanner::new();
        let fwd_rows = planner.plan_fft_forward(rows);
        let inv_rows = planner.plan_fft_inverse(rows);
        let fwd_cols = planner.plan_fft_forward(cols);
        let inv_cols = planner.plan_fft_inverse(cols);

        let symbol = |k: usize, n: usize| {
            let w = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let (sin, cos) = w.sin_cos();
            (
                Complex::new(cos - 1.0, sin),  // forward difference
                Complex::new(1.0 - cos, sin),  // backward difference
                2.0 - 2.0 * cos,               // their negated product
            )
        };
        let mut dx = Vec::with_capacity(cols);
        let mut bx = Vec::with_capacity(cols);
        let mut rx = Vec::with_capacity(cols);
        for j in 0..cols {
            let (d, b, r) = symbol(j, cols);
            dx.push(d);
            bx.push(b);
            rx.push(r);
        }
        let mut dy = Vec::with_capacity(rows);
        let mut by = Vec::with_capacity(rows);
        let mut ry = Vec::with_capacity(rows);
        for i in 0..rows {
            let (d, b, r) = symbol(i, rows);
            dy.push(d);
            by.push(b);
            ry.push(r);
        }
        Ok(SpectralKernel {
            rows,
            cols,
            ratio,
            fwd_rows,
            inv_rows,
            fwd_cols,
            inv_cols,
            dx,
            bx,
            dy,
            by,
            rx,
            ry,
        })
    }

    /// Grid shape the kernel was planned for.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// The `ratio` this kernel solves with.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Smallest Cramer denominator across all frequencies; always
    /// `>= ratio^2 > 0`.
    pub fn min_denominator(&self) -> f64 {
        let mut min = f64::INFINITY;
        for &ry in &self.ry {
            for &rx in &self.rx {
                let det = self.ratio * self.ratio + self.ratio * (rx + ry);
                min = min.min(det);
            }
        }
        min
    }

    /// Unnormalized forward 2-D DFT of a real field.
    pub fn fft2(&self, f: &Field) -> Vec<Complex<f64>> {
        debug_assert_eq!(f.shape(), (self.rows, self.cols));
        let mut data: Vec<Complex<f64>> = f
            .as_slice()
            .iter()
            .map(|&v| Complex::new(v, 0.0))
            .collect();
        self.pass_2d(&mut data, false);
        data
    }

    /// Inverse 2-D DFT (normalized by `rows * cols`), real part only.
    pub fn ifft2_real(&self, mut spectrum: Vec<Complex<f64>>) -> Field {
        self.pass_2d(&mut spectrum, true);
        let scale = 1.0 / (self.rows * self.cols) as f64;
        Field::from_vec(
            self.rows,
            self.cols,
            spectrum.iter().map(|c| c.re * scale).collect(),
        )
        .expect("shape preserved by transform")
    }

    /// Row transforms followed by column transforms.
    fn pass_2d(&self, data: &mut [Complex<f64>], inverse: bool) {
        let (rows, cols) = (self.rows, self.cols);
        let row_fft = if inverse { &self.inv_cols } else { &self.fwd_cols };
        for r in 0..rows {
            row_fft.process(&mut data[r * cols..(r + 1) * cols]);
        }
        let col_fft = if inverse { &self.inv_rows } else { &self.fwd_rows };
        let mut column = vec![Complex::new(0.0, 0.0); rows];
        for c in 0..cols {
            for r in 0..rows {
                column[r] = data[r * cols + c];
            }
            col_fft.process(&mut column);
            for r in 0..rows {
                data[r * cols + c] = column[r];
            }
        }
    }

    /// Solves `ratio * p - grad(div p) = (h1, h2)` on the periodic grid.
    ///
    /// Exact per-frequency 2x2 Cramer solve; cost is four transforms.
    pub fn solve_coupled(&self, h1: &Field, h2: &Field) -> (Field, Field) {
        debug_assert_eq!(h1.shape(), (self.rows, self.cols));
        debug_assert_eq!(h2.shape(), (self.rows, self.cols));
        let mut s1 = self.fft2(h1);
        let mut s2 = self.fft2(h2);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let k = i * self.cols + j;
                let a11 = self.ratio + self.rx[j]; // ratio - dx*bx, real
                let a22 = self.ratio + self.ry[i];
                let a12 = -self.dx[j] * self.by[i];
                let a21 = -self.dy[i] * self.bx[j];
                let det = self.ratio * self.ratio + self.ratio * (self.rx[j] + self.ry[i]);
                let rhs1 = s1[k];
                let rhs2 = s2[k];
                s1[k] = (rhs1 * a22 - a12 * rhs2) / det;
                s2[k] = (rhs2 * a11 - a21 * rhs1) / det;
            }
        }
        (self.ifft2_real(s1), self.ifft2_real(s2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::VectorField;
    use crate::ops::{divergence_periodic, gradient_periodic};

    fn pattern(h: usize, w: usize, k: usize) -> Field {
        Field::from_fn(h, w, |i, j| ((i * 31 + j * 17 + k * 7) % 101) as f64 / 101.0 - 0.5)
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SpectralKernel::new(0, 4, 1.0).is_err());
        assert!(SpectralKernel::new(4, 4, 0.0).is_err());
        assert!(SpectralKernel::new(4, 4, -1.0).is_err());
        assert!(SpectralKernel::new(4, 4, f64::NAN).is_err());
    }

    #[test]
    fn fft_round_trip_is_identity() {
        let k = SpectralKernel::new(6, 10, 1.0).unwrap();
        let f = pattern(6, 10, 3);
        let back = k.ifft2_real(k.fft2(&f));
        for (a, b) in back.as_slice().iter().zip(f.as_slice()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn parseval_energy_matches() {
        let k = SpectralKernel::new(8, 7, 1.0).unwrap();
        let f = pattern(8, 7, 11);
        let spatial: f64 = f.as_slice().iter().map(|v| v * v).sum();
        let spec = k.fft2(&f);
        let spectral: f64 = spec.iter().map(|c| c.norm_sqr()).sum::<f64>() / (8.0 * 7.0);
        assert!((spatial - spectral).abs() < 1e-9);
    }

    #[test]
    fn denominator_is_bounded_below_by_ratio_squared() {
        for &ratio in &[1e-3, 0.1, 1.0, 42.0] {
            let k = SpectralKernel::new(9, 5, ratio).unwrap();
            assert!(k.min_denominator() >= ratio * ratio - 1e-15);
        }
    }

    #[test]
    fn constant_input_returns_input_over_ratio() {
        let ratio = 2.5;
        let k = SpectralKernel::new(6, 6, ratio).unwrap();
        let h1 = Field::filled(6, 6, 0.7);
        let h2 = Field::filled(6, 6, -1.2);
        let (p1, p2) = k.solve_coupled(&h1, &h2);
        for &v in p1.as_slice() {
            assert!((v - 0.7 / ratio).abs() < 1e-12);
        }
        for &v in p2.as_slice() {
            assert!((v + 1.2 / ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn solution_satisfies_the_operator_equation() {
        let ratio = 0.8;
        let k = SpectralKernel::new(8, 8, ratio).unwrap();
        let h1 = pattern(8, 8, 1);
        let h2 = pattern(8, 8, 2);
        let (p1, p2) = k.solve_coupled(&h1, &h2);
        // apply ratio * p - grad(div p) with the periodic stencils
        let div = divergence_periodic(&VectorField {
            x: p1.clone(),
            y: p2.clone(),
        });
        let g = gradient_periodic(&div);
        for i in 0..8 {
            for j in 0..8 {
                let r1 = ratio * p1.at(i, j) - g.x.at(i, j);
                let r2 = ratio * p2.at(i, j) - g.y.at(i, j);
                assert!((r1 - h1.at(i, j)).abs() < 1e-10);
                assert!((r2 - h2.at(i, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn solve_is_linear() {
        let k = SpectralKernel::new(5, 7, 1.3).unwrap();
        let (a, b) = (1.7, -0.6);
        let h1a = pattern(5, 7, 1);
        let h2a = pattern(5, 7, 2);
        let h1b = pattern(5, 7, 3);
        let h2b = pattern(5, 7, 4);
        let (p1a, p2a) = k.solve_coupled(&h1a, &h2a);
        let (p1b, p2b) = k.solve_coupled(&h1b, &h2b);
        let h1 = h1a.zip_map(&h1b, |x, y| a * x + b * y);
        let h2 = h2a.zip_map(&h2b, |x, y| a * x + b * y);
        let (p1, p2) = k.solve_coupled(&h1, &h2);
        for idx in 0..p1.len() {
            let e1 = a * p1a.as_slice()[idx] + b * p1b.as_slice()[idx];
            let e2 = a * p2a.as_slice()[idx] + b * p2b.as_slice()[idx];
            assert!((p1.as_slice()[idx] - e1).abs() < 1e-11);
            assert!((p2.as_slice()[idx] - e2).abs() < 1e-11);
        }
    }
}
