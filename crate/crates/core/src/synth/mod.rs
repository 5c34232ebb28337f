//! Seeded synthetic scenarios and brute-force reference implementations.
//!
//! Everything here is deterministic given a seed: the generator uses a
//! ChaCha8 stream, whose output is fixed across platforms.

mod oracle;
mod scenario;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Point2, Quad};

pub use oracle::{brute_density, mc_iou, optimal_match, McEstimate, OracleError, MAX_EXHAUSTIVE};
pub use scenario::{generate, DetectionSource, Scenario, ScenarioParams, SynthError};

pub type SynthRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SynthRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random convex quadrilateral near `center`: a rotated rectangle whose
/// corners are each displaced by up to a fifth of its short side, resampled
/// until the result is convex.
pub fn random_convex_quad(
    rng: &mut SynthRng,
    center: Point2,
    width: (f64, f64),
    height: (f64, f64),
    max_angle: f64,
) -> Quad {
    let pick = |rng: &mut SynthRng, (lo, hi): (f64, f64)| if hi > lo { rng.random_range(lo..=hi) } else { lo };
    let w = pick(rng, width);
    let h = pick(rng, height);
    let angle = pick(rng, (-max_angle, max_angle));
    let (s, c) = angle.sin_cos();
    let wobble = 0.2 * w.min(h);
    let corners = [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)];
    for _ in 0..64 {
        let raw = corners.map(|(u, v)| {
            let x = u * w + rng.random_range(-wobble..=wobble);
            let y = v * h + rng.random_range(-wobble..=wobble);
            Point2::new(center.x + x * c - y * s, center.y + x * s + y * c)
        });
        if let Ok(q) = Quad::normalize(raw) {
            return q;
        }
    }
    let raw = corners.map(|(u, v)| {
        let (x, y) = (u * w, v * h);
        Point2::new(center.x + x * c - y * s, center.y + x * s + y * c)
    });
    Quad::normalize(raw).expect("rectangle with positive sides")
}
