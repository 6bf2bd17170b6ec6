//! Discrete differential operators: gradient, divergence, Laplacian.
//!
//! Two boundary conventions are provided.
//!
//! * **Replicate** (Neumann): forward differences with the last row/column
//!   of each gradient component set to zero, and a divergence defined as
//!   the exact negative adjoint of that gradient, so that
//!   `<grad u, p> = -<u, div p>` holds to machine precision. This is the
//!   pairing used for total-variation energies on bounded images and is
//!   what the public API exposes.
//! * **Periodic** (wrap-around): forward/backward differences with indices
//!   taken modulo the grid size. These stencils are exactly diagonalized
//!   by the discrete Fourier transform, which is what the spectral
//!   subproblem solver relies on, so the variational solver uses them
//!   internally throughout.
//!
//! In both conventions the Laplacian equals `div(grad(.))` exactly, and all
//! three operators are linear.

use crate::field::{Field, VectorField};

// ---------------------------------------------------------------- replicate

/// Forward-difference gradient with replicate boundary.
///
/// `x`-component: `u(i, j+1) - u(i, j)`, zero in the last column.
/// `y`-component: `u(i+1, j) - u(i, j)`, zero in the last row.
pub fn gradient(u: &Field) -> VectorField {
    let (h, w) = u.shape();
    let mut gx = Field::zeros(h, w);
    let mut gy = Field::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            if j + 1 < w {
                *gx.at_mut(i, j) = u.at(i, j + 1) - u.at(i, j);
            }
            if i + 1 < h {
                *gy.at_mut(i, j) = u.at(i + 1, j) - u.at(i, j);
            }
        }
    }
    VectorField { x: gx, y: gy }
}

/// Divergence adjoint to [`gradient`]: `<grad u, p> = -<u, div p>` exactly.
///
/// Per component this is a backward difference whose first sample passes
/// the field value through and whose last sample negates the previous one.
pub fn divergence(p: &VectorField) -> Field {
    let (h, w) = p.shape();
    let mut d = Field::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            let dx = if w == 1 {
                0.0
            } else if j == 0 {
                p.x.at(i, 0)
            } else if j == w - 1 {
                -p.x.at(i, w - 2)
            } else {
                p.x.at(i, j) - p.x.at(i, j - 1)
            };
            let dy = if h == 1 {
                0.0
            } else if i == 0 {
                p.y.at(0, j)
            } else if i == h - 1 {
                -p.y.at(h - 2, j)
            } else {
                p.y.at(i, j) - p.y.at(i - 1, j)
            };
            *d.at_mut(i, j) = dx + dy;
        }
    }
    d
}

/// Five-point Laplacian with replicate boundary; equals
/// `divergence(gradient(u))` exactly.
pub fn laplacian(u: &Field) -> Field {
    let (h, w) = u.shape();
    let cl = |v: isize, n: usize| -> usize { v.clamp(0, n as isize - 1) as usize };
    Field::from_fn(h, w, |i, j| {
        let (ii, jj) = (i as isize, j as isize);
        u.at(cl(ii - 1, h), j) + u.at(cl(ii + 1, h), j) + u.at(i, cl(jj - 1, w))
            + u.at(i, cl(jj + 1, w))
            - 4.0 * u.at(i, j)
    })
}

// ----------------------------------------------------------------- periodic

/// Forward-difference gradient with wrap-around boundary.
pub fn gradient_periodic(u: &Field) -> VectorField {
    let (h, w) = u.shape();
    let mut gx = Field::zeros(h, w);
    let mut gy = Field::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            let jn = if j + 1 == w { 0 } else { j + 1 };
            let in_ = if i + 1 == h { 0 } else { i + 1 };
            *gx.at_mut(i, j) = u.at(i, jn) - u.at(i, j);
            *gy.at_mut(i, j) = u.at(in_, j) - u.at(i, j);
        }
    }
    VectorField { x: gx, y: gy }
}

/// Backward-difference divergence with wrap-around boundary; the exact
/// negative adjoint of [`gradient_periodic`].
pub fn divergence_periodic(p: &VectorField) -> Field {
    let (h, w) = p.shape();
    Field::from_fn(h, w, |i, j| {
        let jp = if j == 0 { w - 1 } else { j - 1 };
        let ip = if i == 0 { h - 1 } else { i - 1 };
        (p.x.at(i, j) - p.x.at(i, jp)) + (p.y.at(i, j) - p.y.at(ip, j))
    })
}

/// Five-point Laplacian with wrap-around boundary; equals
/// `divergence_periodic(gradient_periodic(u))` exactly.
pub fn laplacian_periodic(u: &Field) -> Field {
    let (h, w) = u.shape();
    Field::from_fn(h, w, |i, j| {
        let jn = if j + 1 == w { 0 } else { j + 1 };
        let jp = if j == 0 { w - 1 } else { j - 1 };
        let in_ = if i + 1 == h { 0 } else { i + 1 };
        let ip = if i == 0 { h - 1 } else { i - 1 };
        u.at(ip, j) + u.at(in_, j) + u.at(i, jp) + u.at(i, jn) - 4.0 * u.at(i, j)
    })
}

/// Inner product of two scalar fields, `sum_k a_k b_k`.
pub fn dot(a: &Field, b: &Field) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| x * y)
        .sum()
}

/// Inner product of two vector fields (both components accumulated).
pub fn dot_vec(a: &VectorField, b: &VectorField) -> f64 {
    dot(&a.x, &b.x) + dot(&a.y, &b.y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(h: usize, w: usize) -> Field {
        Field::from_fn(h, w, |i, j| (3 * i + 2 * j) as f64)
    }

    #[test]
    fn gradient_zeroes_last_row_and_column() {
        let g = gradient(&ramp(4, 5));
        for i in 0..4 {
            assert_eq!(g.x.at(i, 4), 0.0);
        }
        for j in 0..5 {
            assert_eq!(g.y.at(3, j), 0.0);
        }
        // interior forward differences of the ramp
        assert_eq!(g.x.at(1, 1), 2.0);
        assert_eq!(g.y.at(1, 1), 3.0);
    }

    #[test]
    fn replicate_adjointness_on_a_fixed_pair() {
        let u = Field::from_fn(5, 4, |i, j| ((i * 7 + j * 3) % 11) as f64 / 11.0);
        let p = VectorField {
            x: Field::from_fn(5, 4, |i, j| ((i * 5 + j * 9 + 2) % 13) as f64 / 13.0),
            y: Field::from_fn(5, 4, |i, j| ((i * 2 + j * 11 + 7) % 17) as f64 / 17.0),
        };
        let lhs = dot_vec(&gradient(&u), &p);
        let rhs = -dot(&u, &divergence(&p));
        assert!((lhs - rhs).abs() < 1e-12, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn periodic_adjointness_on_a_fixed_pair() {
        let u = Field::from_fn(6, 5, |i, j| ((i * 7 + j * 3) % 11) as f64 / 11.0);
        let p = VectorField {
            x: Field::from_fn(6, 5, |i, j| ((i * 5 + j * 9 + 2) % 13) as f64 / 13.0),
            y: Field::from_fn(6, 5, |i, j| ((i * 2 + j * 11 + 7) % 17) as f64 / 17.0),
        };
        let lhs = dot_vec(&gradient_periodic(&u), &p);
        let rhs = -dot(&u, &divergence_periodic(&p));
        assert!((lhs - rhs).abs() < 1e-12, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn laplacian_is_div_of_grad_in_both_conventions() {
        let u = Field::from_fn(7, 6, |i, j| ((i * 13 + j * 5) % 19) as f64 / 19.0);
        let lap = laplacian(&u);
        let dg = divergence(&gradient(&u));
        for (a, b) in lap.as_slice().iter().zip(dg.as_slice()) {
            assert!((a - b).abs() < 1e-13);
        }
        let lp = laplacian_periodic(&u);
        let dgp = divergence_periodic(&gradient_periodic(&u));
        for (a, b) in lp.as_slice().iter().zip(dgp.as_slice()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn operators_are_linear() {
        let u = Field::from_fn(5, 5, |i, j| ((i * 3 + j * 7) % 10) as f64);
        let v = Field::from_fn(5, 5, |i, j| ((i * 9 + j + 4) % 12) as f64);
        let (a, b) = (2.5, -1.25);
        let combo = u.zip_map(&v, |x, y| a * x + b * y);
        let g_combo = gradient(&combo);
        let gu = gradient(&u);
        let gv = gradient(&v);
        for i in 0..5 {
            for j in 0..5 {
                let ex = a * gu.x.at(i, j) + b * gv.x.at(i, j);
                let ey = a * gu.y.at(i, j) + b * gv.y.at(i, j);
                assert!((g_combo.x.at(i, j) - ex).abs() < 1e-12);
                assert!((g_combo.y.at(i, j) - ey).abs() < 1e-12);
            }
        }
        let l_combo = laplacian_periodic(&combo);
        let lu = laplacian_periodic(&u);
        let lv = laplacian_periodic(&v);
        for k in 0..l_combo.len() {
            let expect = a * lu.as_slice()[k] + b * lv.as_slice()[k];
            assert!((l_combo.as_slice()[k] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_field_has_zero_gradient_and_laplacian() {
        let c = Field::filled(4, 4, 0.7);
        assert_eq!(gradient(&c).norm_l2(), 0.0);
        assert_eq!(laplacian(&c).norm_l2(), 0.0);
        assert_eq!(gradient_periodic(&c).norm_l2(), 0.0);
        assert_eq!(laplacian_periodic(&c).norm_l2(), 0.0);
    }
}
