//! Edge-preserving guided filter and its box-mean building block.
//!
//! The guided filter assumes the output is an affine function of a guide
//! image within each local window: `out = a * guide + b`. The coefficients
//! minimize a ridge-regularized fit to the source inside every window of
//! radius `r`, and are then averaged across overlapping windows:
//!
//! ```text
//! a = cov(guide, src) / (var(guide) + eps)
//! b = mean(src) - a * mean(guide)
//! out = mean(a) * guide + mean(b)
//! ```
//!
//! Window statistics use **edge-clipped** boxes: near the border the
//! window shrinks to the valid intersection and the divisor is the true
//! number of samples, so no phantom zero padding leaks into means.
//! As `eps` grows the affine fit flattens (`a -> 0`) and the result
//! approaches the plain box mean of the source.

use crate::field::Field;

/// Parameters of one guided-filter application.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidedFilterParams {
    /// Window radius; the full window is `(2r+1) x (2r+1)`.
    pub radius: usize,
    /// Ridge regularizer added to the guide variance.
    pub eps: f64,
}

impl GuidedFilterParams {
    /// Defaults used when refining the transmission map.
    pub const TRANSMISSION: GuidedFilterParams = GuidedFilterParams {
        radius: 16,
        eps: 1e-3,
    };
    /// Defaults used when refining the illumination brightness mask.
    pub const MASK: GuidedFilterParams = GuidedFilterParams {
        radius: 8,
        eps: 1e-4,
    };

    /// Checks `radius >= 1` and `eps > 0`. `context` names the filter
    /// instance in error messages (e.g. `"guided_mask"`).
    ///
    /// # Errors
    /// [`crate::Error::InvalidParameter`] naming the offending field.
    pub fn validate(&self, context: &'static str) -> crate::error::Result<()> {
        use crate::error::Error;
        if self.radius < 1 {
            return Err(Error::InvalidParameter {
                name: context,
                reason: format!("radius must be at least 1, got {}", self.radius),
            });
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::InvalidParameter {
                name: context,
                reason: format!("eps must be finite and positive, got {}", self.eps),
            });
        }
        Ok(())
    }
}

/// Edge-clipped box mean of radius `r`: each output sample is the average
/// of all samples within the `(2r+1) x (2r+1)` window intersected with the
/// image, divided by the actual window population.
pub fn box_mean(src: &Field, r: usize) -> Field {
    let (h, w) = src.shape();
    if h == 0 || w == 0 {
        return src.clone();
    }
    // Summed-area table with a zero top row / left column:
    // sat[i+1][j+1] = sum of src[0..=i][0..=j].
    let (sh, sw) = (h + 1, w + 1);
    let mut sat = vec![0.0f64; sh * sw];
    for i in 0..h {
        let mut row_acc = 0.0;
        for j in 0..w {
            row_acc += src.at(i, j);
            sat[(i + 1) * sw + (j + 1)] = sat[i * sw + (j + 1)] + row_acc;
        }
    }
    let ri = r as isize;
    Field::from_fn(h, w, |i, j| {
        let i0 = (i as isize - ri).max(0) as usize;
        let j0 = (j as isize - ri).max(0) as usize;
        let i1 = (i + r).min(h - 1);
        let j1 = (j + r).min(w - 1);
        let sum = sat[(i1 + 1) * sw + (j1 + 1)] - sat[i0 * sw + (j1 + 1)]
            - sat[(i1 + 1) * sw + j0]
            + sat[i0 * sw + j0];
        let count = ((i1 - i0 + 1) * (j1 - j0 + 1)) as f64;
        sum / count
    })
}

/// Guided filter of `src` steered by `guide`.
///
/// Both fields must share a shape (checked by `debug_assert`; the public
/// pipeline wrappers validate shapes before calling).
pub fn guided_filter(guide: &Field, src: &Field, params: GuidedFilterParams) -> Field {
    debug_assert_eq!(guide.shape(), src.shape());
    let r = params.radius;
    let mean_g = box_mean(guide, r);
    let mean_s = box_mean(src, r);
    let corr_gg = box_mean(&guide.zip_map(guide, |a, b| a * b), r);
    let corr_gs = box_mean(&guide.zip_map(src, |a, b| a * b), r);

    let (h, w) = guide.shape();
    let mut a = Field::zeros(h, w);
    let mut b = Field::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            let mg = mean_g.at(i, j);
            let ms = mean_s.at(i, j);
            let var_g = corr_gg.at(i, j) - mg * mg;
            let cov_gs = corr_gs.at(i, j) - mg * ms;
            let ai = cov_gs / (var_g + params.eps);
            *a.at_mut(i, j) = ai;
            *b.at_mut(i, j) = ms - ai * mg;
        }
    }
    let mean_a = box_mean(&a, r);
    let mean_b = box_mean(&b, r);
    Field::from_fn(h, w, |i, j| mean_a.at(i, j) * guide.at(i, j) + mean_b.at(i, j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(h: usize, w: usize, k: usize) -> Field {
        Field::from_fn(h, w, |i, j| ((i * 31 + j * 17 + k) % 97) as f64 / 96.0)
    }

    /// Direct windowed mean, the obvious O(n r^2) reference.
    fn box_mean_naive(src: &Field, r: usize) -> Field {
        let (h, w) = src.shape();
        let ri = r as isize;
        Field::from_fn(h, w, |i, j| {
            let mut sum = 0.0;
            let mut count = 0.0;
            for di in -ri..=ri {
                for dj in -ri..=ri {
                    let ii = i as isize + di;
                    let jj = j as isize + dj;
                    if ii >= 0 && jj >= 0 && (ii as usize) < h && (jj as usize) < w {
                        sum += src.at(ii as usize, jj as usize);
                        count += 1.0;
                    }
                }
            }
            sum / count
        })
    }

    #[test]
    fn box_mean_matches_naive_window_average() {
        for &(h, w, r) in &[(7usize, 9usize, 1usize), (8, 8, 2), (5, 12, 3), (4, 4, 6)] {
            let src = pattern(h, w, h * w);
            let fast = box_mean(&src, r);
            let slow = box_mean_naive(&src, r);
            for (a, b) in fast.as_slice().iter().zip(slow.as_slice()) {
                assert!((a - b).abs() < 1e-12, "h={h} w={w} r={r}");
            }
        }
    }

    #[test]
    fn box_mean_preserves_constants() {
        let c = Field::filled(6, 5, 0.42);
        let m = box_mean(&c, 2);
        for &v in m.as_slice() {
            assert!((v - 0.42).abs() < 1e-13);
        }
    }

    #[test]
    fn guided_filter_reproduces_affine_functions_of_guide() {
        // If src is already a * guide + b, the filter must return it
        // (up to eps-induced shrinkage, tiny for eps -> 0).
        let guide = pattern(9, 8, 3);
        let src = guide.map(|v| 1.7 * v - 0.2);
        let out = guided_filter(&guide, &src, GuidedFilterParams { radius: 2, eps: 1e-12 });
        for (a, b) in out.as_slice().iter().zip(src.as_slice()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn large_eps_approaches_double_box_mean() {
        // As eps grows, a -> 0 and b -> window mean of the source, so the
        // output mean(a)*guide + mean(b) tends to the box mean of the
        // window means (the twice-smoothed source). The L2 distance to
        // that limit must shrink monotonically in eps.
        let guide = pattern(10, 11, 5);
        let src = pattern(10, 11, 41);
        let r = 3;
        let target = box_mean(&box_mean(&src, r), r);
        let mut last = f64::INFINITY;
        for &eps in &[1e-4, 1e-2, 1.0, 1e2, 1e4] {
            let out = guided_filter(&guide, &src, GuidedFilterParams { radius: r, eps });
            let mut dist = 0.0;
            for (a, b) in out.as_slice().iter().zip(target.as_slice()) {
                dist += (a - b) * (a - b);
            }
            let dist = dist.sqrt();
            assert!(dist < last, "eps {eps}: {dist} !< {last}");
            last = dist;
        }
        // and at huge eps it reaches the limit numerically
        let out = guided_filter(&guide, &src, GuidedFilterParams { radius: r, eps: 1e12 });
        for (a, b) in out.as_slice().iter().zip(target.as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
