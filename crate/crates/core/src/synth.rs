//! Synthetic scenes, illumination, and water columns for tests and demos.
//!
//! Everything here is deterministic given its inputs: the smooth
//! single-channel fixture is a fixed closed form, and the random scene
//! generator takes an explicit seed. The degradation applies the same
//! forward model the solver inverts,
//!
//! ```text
//! I = R * L * t + L * (1 - t)
//! ```
//!
//! so recovery quality against the known ground truth is meaningful.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::Field;
use crate::image_io::RgbField;

/// Ground truth and observation for one channel of the forward model.
#[derive(Debug, Clone)]
pub struct SynthChannel {
    /// True reflectance `R*`.
    pub reflectance: Field,
    /// True illumination `L*`.
    pub illumination: Field,
    /// Transmission `t`.
    pub transmission: Field,
    /// Observation `R* L* t + L* (1 - t)`.
    pub observed: Field,
}

/// Composes the forward model from known factors.
pub fn forward_model(r: &Field, l: &Field, t: &Field) -> Field {
    Field::from_fn(r.rows(), r.cols(), |i, j| {
        let (rv, lv, tv) = (r.at(i, j), l.at(i, j), t.at(i, j));
        rv * lv * tv + lv * (1.0 - tv)
    })
}

/// Periodic bump: `exp(-(sin^2(pi(x-cx)) + sin^2(pi(y-cy))) / s)`.
///
/// Smooth, strictly positive, and exactly periodic on the unit square,
/// so it plays well with the solver's wrap-around operators.
fn periodic_bump(x: f64, y: f64, cx: f64, cy: f64, s: f64) -> f64 {
    let sx = (std::f64::consts::PI * (x - cx)).sin();
    let sy = (std::f64::consts::PI * (y - cy)).sin();
    (-(sx * sx + sy * sy) / s).exp()
}

/// Smooth multi-bump reflectance under gently varying illumination and
/// transmission — the standard convergence/recovery fixture.
///
/// The reflectance stacks four periodic bumps of both signs on a 0.5
/// base (clipped to `[0.05, 0.95]`), the illumination is a faint
/// product-cosine around 0.8, and the transmission swings 0.55–0.85.
/// All three factors are periodic on the grid.
pub fn bump_fixture(n: usize) -> SynthChannel {
    let coord = |k: usize| k as f64 / n as f64;
    let reflectance = Field::from_fn(n, n, |i, j| {
        let (x, y) = (coord(j), coord(i));
        let v = 0.50 + 0.30 * periodic_bump(x, y, 0.28, 0.35, 0.008)
            - 0.28 * periodic_bump(x, y, 0.70, 0.62, 0.006)
            + 0.25 * periodic_bump(x, y, 0.55, 0.20, 0.004)
            - 0.22 * periodic_bump(x, y, 0.20, 0.75, 0.005);
        v.clamp(0.05, 0.95)
    });
    let tau = std::f64::consts::TAU;
    let illumination = Field::from_fn(n, n, |i, j| {
        0.80 + 0.02 * (tau * coord(j)).cos() * (tau * coord(i)).cos()
    });
    let transmission = Field::from_fn(n, n, |i, j| {
        0.70 + 0.15 * (tau * coord(i)).sin() * (tau * coord(j)).cos()
    });
    let observed = forward_model(&reflectance, &illumination, &transmission);
    SynthChannel {
        reflectance,
        illumination,
        transmission,
        observed,
    }
}

/// A colorful synthetic "clean scene": smooth random Fourier fields per
/// channel, eight vivid discs with one or two dominant channels, and a
/// near-white plus a near-black accent disc for lightness spread.
/// Values land in `[0.02, 0.98]`.
pub fn vivid_scene<R: Rng>(rng: &mut R, n: usize) -> RgbField {
    let tau = std::f64::consts::TAU;
    let coord = |k: usize| k as f64 / n as f64;
    let mut channels = [Field::zeros(n, n), Field::zeros(n, n), Field::zeros(n, n)];
    for ch in channels.iter_mut() {
        let mut modes = Vec::with_capacity(6);
        for _ in 0..6 {
            modes.push((
                rng.gen_range(1..4) as f64,
                rng.gen_range(1..4) as f64,
                rng.gen_range(0.08..0.25),
                rng.gen_range(0.0..tau),
                rng.gen_range(0.0..tau),
            ));
        }
        *ch = Field::from_fn(n, n, |i, j| {
            let (x, y) = (coord(j), coord(i));
            let mut v = 0.5;
            for &(fx, fy, amp, p0, p1) in &modes {
                v += amp * (tau * fx * x + p0).sin() * (tau * fy * y + p1).cos();
            }
            v
        });
    }
    let mut img = RgbField::from_channels(
        channels[0].clone(),
        channels[1].clone(),
        channels[2].clone(),
    )
    .expect("equal shapes");

    let paint_disc = |img: &mut RgbField, cx: f64, cy: f64, radius: f64, col: [f64; 3], blend: f64| {
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (coord(j), coord(i));
                if (x - cx) * (x - cx) + (y - cy) * (y - cy) < radius * radius {
                    for c in 0..3 {
                        let old = img.channels[c].at(i, j);
                        *img.channels[c].at_mut(i, j) = (1.0 - blend) * old + blend * col[c];
                    }
                }
            }
        }
    };

    for _ in 0..8 {
        let cx = rng.gen_range(0.12..0.88);
        let cy = rng.gen_range(0.12..0.88);
        let radius = rng.gen_range(0.09..0.20);
        let mut col = [
            rng.gen_range(0.03..0.18),
            rng.gen_range(0.03..0.18),
            rng.gen_range(0.03..0.18),
        ];
        // one or two dominant channels, chosen without replacement
        let mut order = [0usize, 1, 2];
        for k in (1..3).rev() {
            order.swap(k, rng.gen_range(0..=k));
        }
        let dominant = rng.gen_range(1..3usize);
        for &c in order.iter().take(dominant) {
            col[c] = rng.gen_range(0.78..0.98);
        }
        paint_disc(&mut img, cx, cy, radius, col, 0.92);
    }
    let bright = rng.gen_range(0.86..0.96);
    let dark = rng.gen_range(0.03..0.10);
    for level in [bright, dark] {
        let cx = rng.gen_range(0.15..0.85);
        let cy = rng.gen_range(0.15..0.85);
        let radius = rng.gen_range(0.05..0.10);
        paint_disc(&mut img, cx, cy, radius, [level; 3], 0.9);
    }
    img.map(|v| v.clamp(0.02, 0.98))
}

/// One standard-normal draw (Box–Muller on two uniform samples).
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Pushes a clean scene through a mildly turbid water column: a bluish
/// ambient cast with gentle spatial sway, a smoothly varying
/// transmission around 0.72, the blend `R L t + L (1 - t)`, and a touch
/// of sensor noise. Output clipped to `[0, 1]`.
pub fn underwater_degrade<R: Rng>(rng: &mut R, scene: &RgbField) -> RgbField {
    let (h, w) = scene.shape();
    let n = h.max(w) as f64;
    let tau = std::f64::consts::TAU;
    let base = [
        rng.gen_range(0.35..0.50),
        rng.gen_range(0.65..0.80),
        rng.gen_range(0.72..0.88),
    ];
    let (sx, sy) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
    let (ty, tx) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
    let mut out = RgbField::zeros(h, w);
    for i in 0..h {
        for j in 0..w {
            let (x, y) = (j as f64 / n, i as f64 / n);
            let sway = 0.08 * (tau * (x + sx)).sin() + 0.06 * (tau * (y + sy)).cos();
            let t = (0.72 + 0.18 * (tau * (y + ty)).sin() * (tau * (x + tx)).cos())
                .clamp(0.45, 0.95);
            let scene_px = scene.pixel(i, j);
            for c in 0..3 {
                let l = (base[c] * (1.0 + sway)).clamp(0.05, 1.0);
                let v = scene_px[c] * l * t + l * (1.0 - t) + 1e-3 * standard_normal(rng);
                *out.channels[c].at_mut(i, j) = v.clamp(0.0, 1.0);
            }
        }
    }
    out
}

/// A clean scene paired with its degraded observation.
#[derive(Debug, Clone)]
pub struct DegradedSample {
    /// Ground-truth colorful scene.
    pub scene: RgbField,
    /// The same scene seen through the water column.
    pub degraded: RgbField,
}

/// Generates `count` independent scene/observation pairs of size
/// `n`×`n` from one seed.
pub fn degraded_samples(seed: u64, count: usize, n: usize) -> Vec<DegradedSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let scene = vivid_scene(&mut rng, n);
            let degraded = underwater_degrade(&mut rng, &scene);
            DegradedSample { scene, degraded }
        })
        .collect()
}
