use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{random_convex_quad, seeded_rng, SynthRng};
use crate::geometry::{Point2, Quad};
use crate::model::{Detection, DetectionFrame, FrameIndex, Track, VideoDetections, VideoTracks};

/// Gap kept between the cells that confine each track, in pixels.
const CELL_MARGIN: f64 = 2.0;

/// Per-frame displacement cap as a fraction of a box's short side.
const MAX_STEP_FRACTION: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid scenario parameters: {0}")]
    InvalidParams(String),
    #[error("cannot place {n_tracks} tracks disjointly; the arena holds at most {capacity}")]
    InfeasiblePacking { n_tracks: usize, capacity: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub seed: u64,
    pub video_id: String,
    pub n_tracks: usize,
    pub frame_count: u32,
    pub arena_width: f64,
    pub arena_height: f64,
    pub min_box_width: f64,
    pub max_box_width: f64,
    pub min_box_height: f64,
    pub max_box_height: f64,
    /// Text boxes are rotated by up to this many degrees either way.
    pub max_rotation_deg: f64,
    /// Shortest ground-truth lifetime, frames.
    pub min_lifetime: u32,
    /// Standard deviation of the per-frame random-walk step, px.
    pub motion_sigma: f64,
    /// Standard deviation of per-vertex detection noise, px.
    pub jitter_sigma: f64,
    pub dropout: f64,
    /// Expected spurious detections per frame.
    pub false_positive_rate: f64,
    pub duplicate_prob: f64,
    pub true_conf_min: f64,
    pub true_conf_max: f64,
    pub false_conf_min: f64,
    pub false_conf_max: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            seed: 0,
            video_id: "synth".into(),
            n_tracks: 8,
            frame_count: 200,
            arena_width: 1280.0,
            arena_height: 720.0,
            min_box_width: 40.0,
            max_box_width: 200.0,
            min_box_height: 16.0,
            max_box_height: 64.0,
            max_rotation_deg: 10.0,
            min_lifetime: 10,
            motion_sigma: 1.0,
            jitter_sigma: 0.5,
            dropout: 0.05,
            false_positive_rate: 0.2,
            duplicate_prob: 0.02,
            true_conf_min: 0.5,
            true_conf_max: 1.0,
            false_conf_min: 0.05,
            false_conf_max: 0.25,
        }
    }
}

impl ScenarioParams {
    /// Parameters with every noise source switched off.
    pub fn noise_free(self) -> Self {
        ScenarioParams {
            jitter_sigma: 0.0,
            dropout: 0.0,
            false_positive_rate: 0.0,
            duplicate_prob: 0.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidParams(m));
        for (name, p) in [
            ("dropout", self.dropout),
            ("duplicate_prob", self.duplicate_prob),
            ("true_conf_min", self.true_conf_min),
            ("true_conf_max", self.true_conf_max),
            ("false_conf_min", self.false_conf_min),
            ("false_conf_max", self.false_conf_max),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is outside [0, 1]"));
            }
        }
        for (name, lo, hi) in [
            ("box width", self.min_box_width, self.max_box_width),
            ("box height", self.min_box_height, self.max_box_height),
            ("true confidence", self.true_conf_min, self.true_conf_max),
            ("false confidence", self.false_conf_min, self.false_conf_max),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("{name} range [{lo}, {hi}] is empty"));
            }
        }
        if self.min_box_width < 1.0 || self.min_box_height < 1.0 {
            return bad("boxes must be at least 1 px on each side".into());
        }
        for (name, v) in [
            ("motion_sigma", self.motion_sigma),
            ("jitter_sigma", self.jitter_sigma),
            ("false_positive_rate", self.false_positive_rate),
            ("max_rotation_deg", self.max_rotation_deg),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} = {v} must be finite and non-negative"));
            }
        }
        if self.max_rotation_deg > 45.0 {
            return bad("max_rotation_deg must not exceed 45".into());
        }
        if self.frame_count == 0 {
            return bad("frame_count must be positive".into());
        }
        if self.min_lifetime == 0 || self.min_lifetime > self.frame_count {
            return bad(format!("min_lifetime must lie in [1, {}]", self.frame_count));
        }
        if self.video_id.is_empty() {
            return bad("video_id must not be empty".into());
        }
        let diag = self.max_box_width.hypot(self.max_box_height);
        if !(self.arena_width >= diag && self.arena_height >= diag) {
            return bad(format!(
                "arena {}x{} cannot hold a {diag:.1} px box diagonal",
                self.arena_width, self.arena_height
            ));
        }
        Ok(())
    }

    fn cell_size(&self) -> f64 {
        self.max_box_width.hypot(self.max_box_height) + CELL_MARGIN
    }

    /// Number of disjoint track cells the arena provides.
    pub fn capacity(&self) -> usize {
        let s = self.cell_size();
        ((self.arena_width / s).floor() * (self.arena_height / s).floor()) as usize
    }
}

/// Origin of one generated detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionSource {
    /// Jittered copy of a ground-truth box.
    Track(u64),
    /// Extra copy of a ground-truth box.
    Duplicate(u64),
    FalsePositive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub ground_truth: VideoTracks,
    pub detections: VideoDetections,
    /// Parallel to `detections.frames[i].detections`.
    pub sources: Vec<Vec<DetectionSource>>,
}

struct Walker {
    id: u64,
    width: f64,
    height: f64,
    angle: f64,
    start: FrameIndex,
    end: FrameIndex,
    // Admissible center region.
    lo: Point2,
    hi: Point2,
}

fn oriented_box(center: Point2, width: f64, height: f64, angle: f64) -> Quad {
    let (s, c) = angle.sin_cos();
    let corner = |u: f64, v: f64| Point2::new(center.x + u * c - v * s, center.y + u * s + v * c);
    let (hw, hh) = (width / 2.0, height / 2.0);
    Quad::normalize([corner(-hw, -hh), corner(hw, -hh), corner(hw, hh), corner(-hw, hh)])
        .expect("box sides are at least 1 px")
}

fn uniform(rng: &mut SynthRng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

fn jittered(rng: &mut SynthRng, q: &Quad, sigma: f64) -> Quad {
    if sigma == 0.0 {
        return *q;
    }
    let noise = Normal::new(0.0, sigma).expect("sigma is finite and positive");
    let moved = q
        .vertices()
        .map(|v| Point2::new(v.x + noise.sample(rng), v.y + noise.sample(rng)));
    Quad::normalize(moved).unwrap_or(*q)
}

/// Generates ground truth and matching noisy detections from `params`.
///
/// Each track lives in its own cell of a grid laid over the arena and random
/// walks inside it, so boxes of distinct tracks never touch. Consecutive boxes
/// of one track move by at most a tenth of their short side per axis.
pub fn generate(params: &ScenarioParams) -> Result<Scenario, SynthError> {
    params.validate()?;
    let capacity = params.capacity();
    if params.n_tracks > capacity {
        return Err(SynthError::InfeasiblePacking {
            n_tracks: params.n_tracks,
            capacity,
        });
    }

    let mut rng = seeded_rng(params.seed);
    let cell = params.cell_size();
    let cols = (params.arena_width / cell).floor() as usize;

    // Partial Fisher-Yates: the first n_tracks entries are the chosen cells.
    let mut cells: Vec<usize> = (0..capacity).collect();
    for i in 0..params.n_tracks {
        let j = rng.random_range(i..capacity);
        cells.swap(i, j);
    }

    let max_angle = params.max_rotation_deg.to_radians();
    let walkers: Vec<Walker> = (0..params.n_tracks)
        .map(|i| {
            let width = uniform(&mut rng, params.min_box_width, params.max_box_width);
            let height = uniform(&mut rng, params.min_box_height, params.max_box_height);
            let angle = uniform(&mut rng, -max_angle, max_angle);
            let len = rng.random_range(params.min_lifetime..=params.frame_count);
            let start = rng.random_range(0..=params.frame_count - len);
            let (cx, cy) = ((cells[i] % cols) as f64, (cells[i] / cols) as f64);
            let radius = width.hypot(height) / 2.0 + CELL_MARGIN / 2.0;
            Walker {
                id: i as u64,
                width,
                height,
                angle,
                start,
                end: start + len - 1,
                lo: Point2::new(cx * cell + radius, cy * cell + radius),
                hi: Point2::new((cx + 1.0) * cell - radius, (cy + 1.0) * cell - radius),
            }
        })
        .collect();

    let step = (params.motion_sigma > 0.0)
        .then(|| Normal::new(0.0, params.motion_sigma).expect("validated"));
    let mut tracks = Vec::with_capacity(walkers.len());
    for w in &walkers {
        let mut center = Point2::new(uniform(&mut rng, w.lo.x, w.hi.x), uniform(&mut rng, w.lo.y, w.hi.y));
        let cap = MAX_STEP_FRACTION * w.width.min(w.height);
        let mut boxes = Vec::with_capacity((w.end - w.start + 1) as usize);
        for f in w.start..=w.end {
            if f > w.start {
                if let Some(step) = &step {
                    let dx = step.sample(&mut rng).clamp(-cap, cap);
                    let dy = step.sample(&mut rng).clamp(-cap, cap);
                    center = Point2::new(
                        (center.x + dx).clamp(w.lo.x, w.hi.x),
                        (center.y + dy).clamp(w.lo.y, w.hi.y),
                    );
                }
            }
            boxes.push((f, oriented_box(center, w.width, w.height, w.angle)));
        }
        tracks.push(Track::ground_truth(w.id, boxes).expect("lifetime is non-empty"));
    }
    let ground_truth = VideoTracks::new(params.video_id.clone(), tracks);

    let fp_whole = params.false_positive_rate.floor() as usize;
    let fp_frac = params.false_positive_rate.fract();
    let mut frames = Vec::new();
    let mut sources = Vec::new();
    for f in 0..params.frame_count {
        let mut dets = Vec::new();
        let mut src = Vec::new();
        for (id, m) in ground_truth.boxes_at(f) {
            if params.dropout > 0.0 && rng.random_bool(params.dropout) {
                continue;
            }
            let quad = jittered(&mut rng, &m.quad, params.jitter_sigma);
            let score = uniform(&mut rng, params.true_conf_min, params.true_conf_max);
            dets.push(Detection { quad, score });
            src.push(DetectionSource::Track(id));
            if params.duplicate_prob > 0.0 && rng.random_bool(params.duplicate_prob) {
                let quad = jittered(&mut rng, &m.quad, params.jitter_sigma);
                let score = uniform(&mut rng, params.true_conf_min, params.true_conf_max);
                dets.push(Detection { quad, score });
                src.push(DetectionSource::Duplicate(id));
            }
        }
        let n_fp = fp_whole + usize::from(fp_frac > 0.0 && rng.random_bool(fp_frac));
        for _ in 0..n_fp {
            let at = Point2::new(
                uniform(&mut rng, 0.0, params.arena_width),
                uniform(&mut rng, 0.0, params.arena_height),
            );
            let quad = random_convex_quad(
                &mut rng,
                at,
                (params.min_box_width, params.max_box_width),
                (params.min_box_height, params.max_box_height),
                max_angle,
            );
            let score = uniform(&mut rng, params.false_conf_min, params.false_conf_max);
            dets.push(Detection { quad, score });
            src.push(DetectionSource::FalsePositive);
        }
        if !dets.is_empty() {
            frames.push(DetectionFrame { frame: f, detections: dets });
            sources.push(src);
        }
    }

    Ok(Scenario {
        ground_truth,
        detections: VideoDetections {
            video_id: params.video_id.clone(),
            frame_count: params.frame_count,
            frames,
        },
        sources,
    })
}
