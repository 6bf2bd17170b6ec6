//! Matrix-free conjugate gradients for screened-Poisson systems.
//!
//! The reflectance and illumination subproblems are linear systems of the
//! form `(diag(d) - mu * Lap) x = rhs` with `d >= 0` pointwise and
//! `-Lap` the positive semi-definite periodic five-point Laplacian, so the
//! operator is symmetric positive (semi-)definite and plain CG applies.
//! The operator is applied stencil-wise; nothing is assembled.

use crate::field::Field;
use crate::ops::laplacian_periodic;

/// Relative residual target; effectively an exact solve at `f64`.
pub const CG_TOL: f64 = 1e-10;
/// Iteration cap; generous for the grid sizes this crate works at.
pub const CG_MAX_ITER: usize = 200;

/// Solves `(diag(d) - mu * Lap) x = rhs`, warm-started at `x0`.
///
/// Iterates until the residual drops below `CG_TOL * ||rhs||` or the
/// iteration cap is reached; either way the current iterate is returned.
pub fn solve_screened(diag: &Field, rhs: &Field, x0: &Field, mu: f64) -> Field {
    debug_assert_eq!(diag.shape(), rhs.shape());
    debug_assert_eq!(diag.shape(), x0.shape());

    let apply = |x: &Field| -> Field {
        let lap = laplacian_periodic(x);
        Field::from_vec(
            x.rows(),
            x.cols(),
            x.as_slice()
                .iter()
                .zip(diag.as_slice())
                .zip(lap.as_slice())
                .map(|((&xv, &dv), &lv)| dv * xv - mu * lv)
                .collect(),
        )
        .expect("shape preserved")
    };

    let mut x = x0.clone();
    let ax = apply(&x);
    let mut r = rhs.zip_map(&ax, |b, a| b - a);
    let mut p = r.clone();
    let mut rs: f64 = r.as_slice().iter().map(|v| v * v).sum();
    let rhs_norm = rhs.norm_l2() + 1e-300;

    for _ in 0..CG_MAX_ITER {
        if rs.sqrt() / rhs_norm < CG_TOL {
            break;
        }
        let ap = apply(&p);
        let p_ap: f64 = p
            .as_slice()
            .iter()
            .zip(ap.as_slice())
            .map(|(&a, &b)| a * b)
            .sum();
        if p_ap == 0.0 {
            break; // null direction: system is singular along p; stop here
        }
        let alpha = rs / p_ap;
        for (xv, &pv) in x.as_mut_slice().iter_mut().zip(p.as_slice()) {
            *xv += alpha * pv;
        }
        for (rv, &apv) in r.as_mut_slice().iter_mut().zip(ap.as_slice()) {
            *rv -= alpha * apv;
        }
        let rs_new: f64 = r.as_slice().iter().map(|v| v * v).sum();
        let beta = rs_new / rs;
        for (pv, &rv) in p.as_mut_slice().iter_mut().zip(r.as_slice()) {
            *pv = rv + beta * *pv;
        }
        rs = rs_new;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_a_known_solution() {
        // build rhs from a known x*, then solve back
        let (h, w) = (12, 9);
        let x_true = Field::from_fn(h, w, |i, j| ((i * 13 + j * 7) % 23) as f64 / 23.0);
        let diag = Field::from_fn(h, w, |i, j| 0.5 + ((i + 2 * j) % 5) as f64 / 5.0);
        let mu = 0.3;
        let lap = laplacian_periodic(&x_true);
        let rhs = Field::from_vec(
            h,
            w,
            x_true
                .as_slice()
                .iter()
                .zip(diag.as_slice())
                .zip(lap.as_slice())
                .map(|((&x, &d), &l)| d * x - mu * l)
                .collect(),
        )
        .unwrap();
        let x = solve_screened(&diag, &rhs, &Field::zeros(h, w), mu);
        for (a, b) in x.as_slice().iter().zip(x_true.as_slice()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn pure_diagonal_system_is_exact_division() {
        let (h, w) = (5, 5);
        let diag = Field::filled(h, w, 4.0);
        let rhs = Field::from_fn(h, w, |i, j| (i + j) as f64);
        let x = solve_screened(&diag, &rhs, &Field::zeros(h, w), 0.0);
        for i in 0..h {
            for j in 0..w {
                assert!((x.at(i, j) - (i + j) as f64 / 4.0).abs() < 1e-12);
            }
        }
    }
}
