//! Reference implementations that share no code path with the library
//! routines they check.

use rand::Rng;
use thiserror::Error;

use super::seeded_rng;
use crate::eval::eligible_pairs;
use crate::geometry::{Point2, Quad};
use crate::model::{MatchConfig, Track};

/// Largest side of an exhaustive matching problem.
pub const MAX_EXHAUSTIVE: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("exhaustive matching supports at most {MAX_EXHAUSTIVE} tracks per side, got {gt} x {pred}")]
    TooLarge { gt: usize, pred: usize },
}

/// Monte-Carlo IoU estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub iou: f64,
    /// Binomial standard error of `iou` given the samples that hit the union.
    pub std_error: f64,
    pub samples: usize,
    pub in_union: usize,
}

impl McEstimate {
    /// Half-width of the two-sided 99% normal confidence interval.
    pub fn ci99_half_width(&self) -> f64 {
        2.5758 * self.std_error
    }
}

fn inside(q: &[Point2; 4], x: f64, y: f64) -> bool {
    (0..4).all(|i| {
        let a = q[i];
        let b = q[(i + 1) % 4];
        (b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x) >= 0.0
    })
}

/// Edge lines of a counter-clockwise quad as `(u, v, w)` with the interior
/// on the side where `u*x + v*y + w >= 0`.
fn half_planes(q: &[Point2; 4]) -> [(f64, f64, f64); 4] {
    std::array::from_fn(|i| {
        let (a, b) = (q[i], q[(i + 1) % 4]);
        let (u, v) = (a.y - b.y, b.x - a.x);
        (u, v, -(u * a.x + v * a.y))
    })
}

fn inside_planes(h: &[(f64, f64, f64); 4], x: f64, y: f64) -> bool {
    // Branch-free: roughly half the samples fall outside.
    h.iter().fold(f64::INFINITY, |m, &(u, v, w)| m.min(u * x + v * y + w)) >= 0.0
}

/// Estimates IoU from `samples` uniform points over the joint bounding box.
pub fn mc_iou(a: &Quad, b: &Quad, samples: usize, seed: u64) -> McEstimate {
    let (va, vb) = (a.vertices(), b.vertices());
    let all = va.iter().chain(vb.iter());
    let x0 = all.clone().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let x1 = all.clone().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let y0 = all.clone().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let y1 = all.map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);

    let (ha, hb) = (half_planes(va), half_planes(vb));
    let mut rng = seeded_rng(seed);
    let (mut both, mut either) = (0usize, 0usize);
    for _ in 0..samples {
        let x = x0 + (x1 - x0) * rng.random::<f64>();
        let y = y0 + (y1 - y0) * rng.random::<f64>();
        let ia = inside_planes(&ha, x, y);
        let ib = inside_planes(&hb, x, y);
        both += usize::from(ia & ib);
        either += usize::from(ia | ib);
    }
    if either == 0 {
        return McEstimate { iou: 0.0, std_error: 0.0, samples, in_union: 0 };
    }
    let p = both as f64 / either as f64;
    McEstimate {
        iou: p,
        std_error: (p * (1.0 - p) / either as f64).sqrt(),
        samples,
        in_union: either,
    }
}

/// Size of a maximum one-to-one matching over eligible pairs, by exhaustive
/// search.
pub fn optimal_match(gt: &[Track], pred: &[Track], cfg: &MatchConfig) -> Result<usize, OracleError> {
    if gt.len() > MAX_EXHAUSTIVE || pred.len() > MAX_EXHAUSTIVE {
        return Err(OracleError::TooLarge { gt: gt.len(), pred: pred.len() });
    }
    let pairs = eligible_pairs(gt, pred, cfg);
    let mut allowed = vec![0u32; gt.len()];
    for m in &pairs {
        let g = gt.iter().position(|t| t.id == m.gt_track_id).expect("pair from gt");
        let p = pred.iter().position(|t| t.id == m.pred_track_id).expect("pair from pred");
        allowed[g] |= 1 << p;
    }

    fn best(allowed: &[u32], used: u32) -> usize {
        let Some((&first, rest)) = allowed.split_first() else { return 0 };
        let mut top = best(rest, used); // leave this gt unmatched
        let mut options = first & !used;
        while options != 0 {
            let bit = options & options.wrapping_neg();
            top = top.max(1 + best(rest, used | bit));
            options &= !bit;
        }
        top
    }
    Ok(best(&allowed, 0))
}

fn segments_meet(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let o = |a: Point2, b: Point2, c: Point2| {
        let v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    };
    let on = |a: Point2, b: Point2, c: Point2| {
        c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
    };
    let (d1, d2) = (o(q1, q2, p1), o(q1, q2, p2));
    let (d3, d4) = (o(p1, p2, q1), o(p1, p2, q2));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    (d1 == 0 && on(q1, q2, p1))
        || (d2 == 0 && on(q1, q2, p2))
        || (d3 == 0 && on(p1, p2, q1))
        || (d4 == 0 && on(p1, p2, q2))
}

fn closed_overlap(a: &[Point2; 4], b: &[Point2; 4]) -> bool {
    for i in 0..4 {
        for j in 0..4 {
            if segments_meet(a[i], a[(i + 1) % 4], b[j], b[(j + 1) % 4]) {
                return true;
            }
        }
    }
    inside(a, b[0].x, b[0].y) || inside(b, a[0].x, a[0].y)
}

fn grown(q: &Quad, factor: f64) -> [Point2; 4] {
    let v = q.vertices();
    // Centroid from the two triangles of a fan around vertex 0.
    let tri = |a: Point2, b: Point2, c: Point2| {
        let area = ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)) / 2.0;
        (area, Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0))
    };
    let (a1, c1) = tri(v[0], v[1], v[2]);
    let (a2, c2) = tri(v[0], v[2], v[3]);
    let cx = (a1 * c1.x + a2 * c2.x) / (a1 + a2);
    let cy = (a1 * c1.y + a2 * c2.y) / (a1 + a2);
    let short = (0..4)
        .map(|i| {
            let (p, n) = (v[i], v[(i + 1) % 4]);
            ((n.x - p.x).powi(2) + (n.y - p.y).powi(2)).sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    let d = factor * short;
    v.map(|p| {
        let (dx, dy) = (p.x - cx, p.y - cy);
        let len = (dx * dx + dy * dy).sqrt();
        Point2::new(p.x + d * dx / len, p.y + d * dy / len)
    })
}

/// Density labels via pairwise tests and union-find.
pub fn brute_density(quads: &[Quad]) -> Vec<u32> {
    let n = quads.len();
    let grown: Vec<[Point2; 4]> = quads.iter().map(|q| grown(q, 0.1)).collect();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && closed_overlap(&grown[i], quads[j].vertices()) {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| root(&mut parent, i)).collect();
    roots
        .iter()
        .map(|r| roots.iter().filter(|s| *s == r).count() as u32)
        .collect()
}
