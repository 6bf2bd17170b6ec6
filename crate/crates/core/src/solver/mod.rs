//! Alternating-direction solver for the dual high-order restoration model.
//!
//! Each color channel minimizes
//!
//! ```text
//! E(R, L) = 1/2 ||R L t + L (1 - t) - I||^2
//!         + sum (alpha + beta kappa(R)^2) |grad R|
//!         + gamma/2 ||Lap L||^2
//! ```
//!
//! jointly in the reflectance `R` and illumination `L`. The curvature
//! term is split with auxiliary variables
//!
//! ```text
//! w = grad R,   v = div p,   p = q,   |q| <= 1,   q ~ w/|w|
//! m = grad L,   g = div m
//! ```
//!
//! and the constraints are enforced by an augmented Lagrangian with
//! multipliers `lambda_1..lambda_6` and penalties `mu_1..mu_6`. One outer
//! iteration visits, in order: `R`, `L`, `w`, `p`, `q`, `v`, `m`, `g`,
//! then all multipliers. `R` and `L` solve screened-Poisson systems
//! (conjugate gradients, warm-started); `p` and `m` solve coupled
//! grad-div systems (exact spectral solves); `w` is a curvature-weighted
//! shrinkage; `q` a projection onto the unit ball; `v` and `g` pointwise
//! quadratics.
//!
//! Two deliberate implementation choices, both load-bearing:
//!
//! * The `R`/`L` subproblems are solved (essentially) exactly by CG
//!   rather than by a single relaxation sweep — single sweeps let the
//!   outer loop wander and can diverge outright on strongly attenuated
//!   inputs.
//! * All differential operators inside the loop wrap around, matching
//!   the spectral subproblem solves exactly; boundary effects stay
//!   confined to the energy model rather than leaking into operator
//!   adjointness.
//!
//! The `q` update uses the stationarity condition of the augmented
//! Lagrangian as written, `q~ = p + (lambda_4 + (lambda_2 + mu_2) w) / mu_4`
//! (note the sign of `lambda_4`): this is the form consistent with the
//! ascent rule `lambda_4 += mu_4 (p - q)`, and the one under which the
//! update is the exact constrained minimizer.

pub mod cg;
pub mod energy;

use crate::error::{Error, Result};
use crate::field::{Field, VectorField};
use crate::ops::{divergence_periodic as div_p, gradient_periodic as grad_p};
use crate::spectral::SpectralKernel;

pub use energy::{energy, Boundary, GRAD_EPSILON};

/// Tunable weights and stopping controls of the channel solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// Weight of the plain total-variation factor.
    pub alpha: f64,
    /// Weight of the squared-curvature factor.
    pub beta: f64,
    /// Weight of the squared-Laplacian illumination smoothness term.
    pub gamma: f64,
    /// Augmented-Lagrangian penalties `mu_1..mu_6`.
    pub mu: [f64; 6],
    /// Outer iteration cap.
    pub max_iters: usize,
    /// Relative-change stopping tolerance (must be positive).
    pub tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            alpha: 1e-3,
            beta: 1e-3,
            gamma: 10.0,
            mu: [0.1, 0.1, 1.0, 1.0, 0.1, 1.0],
            max_iters: 100,
            tol: 1e-4,
        }
    }
}

impl SolverParams {
    /// Checks every parameter against its documented domain.
    ///
    /// # Errors
    /// [`Error::InvalidParameter`] naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and non-negative, got {v}"),
                });
            }
        }
        for (k, &m) in self.mu.iter().enumerate() {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidParameter {
                    name: ["mu1", "mu2", "mu3", "mu4", "mu5", "mu6"][k],
                    reason: format!("must be finite and positive, got {m}"),
                });
            }
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidParameter {
                name: "max_iters",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: format!("must be finite and positive, got {}", self.tol),
            });
        }
        Ok(())
    }
}

/// Convergence record of one channel solve.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SolveReport {
    /// Outer iterations actually run.
    pub iterations: usize,
    /// Whether the relative-change test fired before the cap.
    pub converged: bool,
    /// Last observed `max(rel change R, rel change L)`.
    pub final_rel_change: f64,
    /// Energy at initialization and after every outer iteration.
    pub energy_trace: Vec<f64>,
    /// Norms of the five constraint residuals
    /// `(w - grad R, v - div p, p - q, m - grad L, g - div m)`
    /// after every outer iteration.
    pub residual_trace: Vec<[f64; 5]>,
}

/// Result of one channel solve.
#[derive(Debug, Clone)]
pub struct ChannelSolution {
    /// Recovered reflectance (not yet clamped for display).
    pub r: Field,
    /// Recovered illumination.
    pub l: Field,
    /// Convergence record.
    pub report: SolveReport,
}

/// Full mutable state of the splitting scheme, advanced in place.
struct State {
    r: Field,
    l: Field,
    w: VectorField,
    p: VectorField,
    q: VectorField,
    v: Field,
    m: VectorField,
    g: Field,
    l1: VectorField,
    l2: Field,
    l3: Field,
    l4: VectorField,
    l5: VectorField,
    l6: Field,
}

impl State {
    /// Initialization: `R` from the algebraic inversion `I / L0` (clamped),
    /// `L` from the illumination estimate, the splitting variables from
    /// the gradients of their targets (`p`, `q` normalized onto the unit
    /// ball they live in), and zero multipliers.
    fn init(observed: &Field, l0: &Field) -> State {
        let r = observed.zip_map(l0, |i, l| (i / l).clamp(0.0, 1.0));
        let l = l0.clone();
        let gr = grad_p(&r);
        let mag = gr.magnitude();
        let unit = VectorField {
            x: gr.x.zip_map(&mag, |g, m| g / (m + GRAD_EPSILON)),
            y: gr.y.zip_map(&mag, |g, m| g / (m + GRAD_EPSILON)),
        };
        let v = div_p(&unit);
        let m = grad_p(&l);
        let g = div_p(&m);
        let (h, w_) = r.shape();
        State {
            w: gr,
            p: unit.clone(),
            q: unit,
            v,
            g,
            m,
            r,
            l,
            l1: VectorField::zeros(h, w_),
            l2: Field::zeros(h, w_),
            l3: Field::zeros(h, w_),
            l4: VectorField::zeros(h, w_),
            l5: VectorField::zeros(h, w_),
            l6: Field::zeros(h, w_),
        }
    }
}

/// Names used in divergence errors, in update order.
const UPDATE_NAMES: [&str; 9] = [
    "update_r",
    "update_l",
    "update_w",
    "update_p",
    "update_q",
    "update_v",
    "update_m",
    "update_g",
    "update_multipliers",
];

/// Minimizes the channel energy by the augmented-Lagrangian scheme.
///
/// `observed` is the color-corrected channel, `l0` the illumination
/// estimate (also the initialization for `L`), `t` the shared
/// transmission map.
///
/// # Errors
/// * [`Error::InvalidParameter`] from [`SolverParams::validate`].
/// * [`Error::DimensionMismatch`] when the three inputs disagree.
/// * [`Error::EmptyInput`] for zero-sized grids.
/// * [`Error::SolverDiverged`] when any sub-update produces a non-finite
///   value; the error names the update and the 1-based iteration.
pub fn solve_channel(
    observed: &Field,
    l0: &Field,
    t: &Field,
    params: &SolverParams,
) -> Result<ChannelSolution> {
    params.validate()?;
    observed.check_same_shape(l0)?;
    observed.check_same_shape(t)?;
    if observed.is_empty() {
        return Err(Error::EmptyInput {
            context: "solve_channel on an empty grid",
        });
    }

    let (h, w_) = observed.shape();
    let [mu1, mu2, mu3, mu4, mu5, mu6] = params.mu;
    let kernel_p = SpectralKernel::new(h, w_, mu4 / mu3)?;
    let kernel_m = SpectralKernel::new(h, w_, mu5 / mu6)?;

    let mut s = State::init(observed, l0);
    let mut energy_trace = vec![energy(
        &s.r,
        &s.l,
        observed,
        t,
        params.alpha,
        params.beta,
        params.gamma,
        Boundary::Periodic,
    )];
    let mut residual_trace: Vec<[f64; 5]> = Vec::new();
    let mut converged = false;
    let mut final_rel = f64::INFINITY;
    let mut iters_done = 0;

    for iter in 1..=params.max_iters {
        let r_prev = s.r.clone();
        let l_prev = s.l.clone();

        // ---- R: (L t)^2 R - mu1 Lap R = L I t - L^2 t (1-t) - div(mu1 w + lambda1)
        {
            let diag = s.l.zip_map(t, |l, tv| (l * tv) * (l * tv));
            let dw = div_p(&s.w);
            let dl1 = div_p(&s.l1);
            let mut rhs = Field::zeros(h, w_);
            for k in 0..rhs.len() {
                let l = s.l.as_slice()[k];
                let tv = t.as_slice()[k];
                let iv = observed.as_slice()[k];
                let f = l * iv * tv - l * l * tv * (1.0 - tv);
                rhs.as_mut_slice()[k] = f - mu1 * dw.as_slice()[k] - dl1.as_slice()[k];
            }
            s.r = cg::solve_screened(&diag, &rhs, &s.r, mu1);
        }
        check_finite(s.r.all_finite(), 0, iter)?;

        // ---- L: (R t + 1 - t)^2 L - mu5 Lap L = I (R t + 1 - t) - div(mu5 m + lambda5)
        {
            let diag = s.r.zip_map(t, |r, tv| {
                let c = r * tv + 1.0 - tv;
                c * c
            });
            let dm = div_p(&s.m);
            let dl5 = div_p(&s.l5);
            let mut rhs = Field::zeros(h, w_);
            for k in 0..rhs.len() {
                let r = s.r.as_slice()[k];
                let tv = t.as_slice()[k];
                let iv = observed.as_slice()[k];
                let hh = iv * (r * tv + 1.0 - tv);
                rhs.as_mut_slice()[k] = hh - mu5 * dm.as_slice()[k] - dl5.as_slice()[k];
            }
            s.l = cg::solve_screened(&diag, &rhs, &s.l, mu5);
        }
        check_finite(s.l.all_finite(), 1, iter)?;

        // ---- w: anisotropic shrinkage of A = grad R + ((l2+mu2) q - l1)/mu1
        //      with per-pixel threshold B/mu1, B = l2 + mu2 + alpha + beta v^2
        {
            let gr = grad_p(&s.r);
            for k in 0..s.w.x.len() {
                let coef = s.l2.as_slice()[k] + mu2;
                let ax = gr.x.as_slice()[k] + (coef * s.q.x.as_slice()[k] - s.l1.x.as_slice()[k]) / mu1;
                let ay = gr.y.as_slice()[k] + (coef * s.q.y.as_slice()[k] - s.l1.y.as_slice()[k]) / mu1;
                let vv = s.v.as_slice()[k];
                let b = coef + params.alpha + params.beta * vv * vv;
                let norm = ax.hypot(ay);
                let shrink = (norm - b / mu1).max(0.0);
                if norm > 0.0 {
                    s.w.x.as_mut_slice()[k] = shrink * ax / norm;
                    s.w.y.as_mut_slice()[k] = shrink * ay / norm;
                } else {
                    s.w.x.as_mut_slice()[k] = 0.0;
                    s.w.y.as_mut_slice()[k] = 0.0;
                }
            }
        }
        check_finite(s.w.all_finite(), 2, iter)?;

        // ---- p: (mu4/mu3) p - grad(div p) = -grad(v + lambda3/mu3)
        //                                     + (mu4 q - lambda4)/mu3
        {
            let shifted = s.v.zip_map(&s.l3, |v, l3| v + l3 / mu3);
            let gs = grad_p(&shifted);
            let h1 = Field::from_vec(
                h,
                w_,
                (0..h * w_)
                    .map(|k| {
                        -gs.x.as_slice()[k] + (mu4 * s.q.x.as_slice()[k] - s.l4.x.as_slice()[k]) / mu3
                    })
                    .collect(),
            )
            .expect("shape");
            let h2 = Field::from_vec(
                h,
                w_,
                (0..h * w_)
                    .map(|k| {
                        -gs.y.as_slice()[k] + (mu4 * s.q.y.as_slice()[k] - s.l4.y.as_slice()[k]) / mu3
                    })
                    .collect(),
            )
            .expect("shape");
            let (px, py) = kernel_p.solve_coupled(&h1, &h2);
            s.p = VectorField { x: px, y: py };
        }
        check_finite(s.p.all_finite(), 3, iter)?;

        // ---- q: projection of p + (lambda4 + (lambda2+mu2) w)/mu4 onto |q| <= 1
        {
            for k in 0..s.q.x.len() {
                let coef = s.l2.as_slice()[k] + mu2;
                let qx = s.p.x.as_slice()[k] + (s.l4.x.as_slice()[k] + coef * s.w.x.as_slice()[k]) / mu4;
                let qy = s.p.y.as_slice()[k] + (s.l4.y.as_slice()[k] + coef * s.w.y.as_slice()[k]) / mu4;
                let norm = qx.hypot(qy);
                let scale = 1.0 / norm.max(1.0);
                s.q.x.as_mut_slice()[k] = qx * scale;
                s.q.y.as_mut_slice()[k] = qy * scale;
            }
        }
        check_finite(s.q.all_finite(), 4, iter)?;

        // ---- v: pointwise quadratic, v = (mu3 div p - lambda3)/(mu3 + 2 beta |w|)
        {
            let dp = div_p(&s.p);
            let wmag = s.w.magnitude();
            for k in 0..s.v.len() {
                s.v.as_mut_slice()[k] = (mu3 * dp.as_slice()[k] - s.l3.as_slice()[k])
                    / (mu3 + 2.0 * params.beta * wmag.as_slice()[k]);
            }
        }
        check_finite(s.v.all_finite(), 5, iter)?;

        // ---- m: (mu5/mu6) m - grad(div m) = -grad(g + lambda6/mu6)
        //                                     + (mu5 grad L - lambda5)/mu6
        {
            let shifted = s.g.zip_map(&s.l6, |g, l6| g + l6 / mu6);
            let gs = grad_p(&shifted);
            let gl = grad_p(&s.l);
            let h1 = Field::from_vec(
                h,
                w_,
                (0..h * w_)
                    .map(|k| {
                        -gs.x.as_slice()[k] + (mu5 * gl.x.as_slice()[k] - s.l5.x.as_slice()[k]) / mu6
                    })
                    .collect(),
            )
            .expect("shape");
            let h2 = Field::from_vec(
                h,
                w_,
                (0..h * w_)
                    .map(|k| {
                        -gs.y.as_slice()[k] + (mu5 * gl.y.as_slice()[k] - s.l5.y.as_slice()[k]) / mu6
                    })
                    .collect(),
            )
            .expect("shape");
            let (mx, my) = kernel_m.solve_coupled(&h1, &h2);
            s.m = VectorField { x: mx, y: my };
        }
        check_finite(s.m.all_finite(), 6, iter)?;

        // ---- g: pointwise quadratic, g = (mu6 div m - lambda6)/(mu6 + gamma)
        {
            let dm = div_p(&s.m);
            for k in 0..s.g.len() {
                s.g.as_mut_slice()[k] =
                    (mu6 * dm.as_slice()[k] - s.l6.as_slice()[k]) / (mu6 + params.gamma);
            }
        }
        check_finite(s.g.all_finite(), 7, iter)?;

        // ---- multiplier ascent on all six constraints
        let residuals;
        {
            let gr = grad_p(&s.r);
            let gl = grad_p(&s.l);
            let dp = div_p(&s.p);
            let dm = div_p(&s.m);
            let mut r1 = 0.0;
            let mut r2 = 0.0;
            let mut r3 = 0.0;
            let mut r4 = 0.0;
            let mut r5 = 0.0;
            for k in 0..h * w_ {
                let e1x = s.w.x.as_slice()[k] - gr.x.as_slice()[k];
                let e1y = s.w.y.as_slice()[k] - gr.y.as_slice()[k];
                s.l1.x.as_mut_slice()[k] += mu1 * e1x;
                s.l1.y.as_mut_slice()[k] += mu1 * e1y;
                r1 += e1x * e1x + e1y * e1y;

                let wmag = s.w.x.as_slice()[k].hypot(s.w.y.as_slice()[k]);
                let wq = s.w.x.as_slice()[k] * s.q.x.as_slice()[k]
                    + s.w.y.as_slice()[k] * s.q.y.as_slice()[k];
                s.l2.as_mut_slice()[k] += mu2 * (wmag - wq);

                let e2 = s.v.as_slice()[k] - dp.as_slice()[k];
                s.l3.as_mut_slice()[k] += mu3 * e2;
                r2 += e2 * e2;

                let e3x = s.p.x.as_slice()[k] - s.q.x.as_slice()[k];
                let e3y = s.p.y.as_slice()[k] - s.q.y.as_slice()[k];
                s.l4.x.as_mut_slice()[k] += mu4 * e3x;
                s.l4.y.as_mut_slice()[k] += mu4 * e3y;
                r3 += e3x * e3x + e3y * e3y;

                let e4x = s.m.x.as_slice()[k] - gl.x.as_slice()[k];
                let e4y = s.m.y.as_slice()[k] - gl.y.as_slice()[k];
                s.l5.x.as_mut_slice()[k] += mu5 * e4x;
                s.l5.y.as_mut_slice()[k] += mu5 * e4y;
                r4 += e4x * e4x + e4y * e4y;

                let e5 = s.g.as_slice()[k] - dm.as_slice()[k];
                s.l6.as_mut_slice()[k] += mu6 * e5;
                r5 += e5 * e5;
            }
            residuals = [r1.sqrt(), r2.sqrt(), r3.sqrt(), r4.sqrt(), r5.sqrt()];
        }
        let multipliers_finite = s.l1.all_finite()
            && s.l2.all_finite()
            && s.l3.all_finite()
            && s.l4.all_finite()
            && s.l5.all_finite()
            && s.l6.all_finite();
        check_finite(multipliers_finite, 8, iter)?;

        energy_trace.push(energy(
            &s.r,
            &s.l,
            observed,
            t,
            params.alpha,
            params.beta,
            params.gamma,
            Boundary::Periodic,
        ));
        residual_trace.push(residuals);
        iters_done = iter;

        let rel = s.r.rel_change_from(&r_prev).max(s.l.rel_change_from(&l_prev));
        final_rel = rel;
        if rel < params.tol {
            converged = true;
            break;
        }
    }

    Ok(ChannelSolution {
        r: s.r,
        l: s.l,
        report: SolveReport {
            iterations: iters_done,
            converged,
            final_rel_change: final_rel,
            energy_trace,
            residual_trace,
        },
    })
}

#[inline]
fn check_finite(ok: bool, update_idx: usize, iteration: usize) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::SolverDiverged {
            update: UPDATE_NAMES[update_idx],
            iteration,
        })
    }
}
