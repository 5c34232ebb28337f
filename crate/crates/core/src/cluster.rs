//! Temporal clustering of per-frame detections into text tracks.
//!
//! Detections are swept frame by frame. A point joins the nearest cluster
//! whose most recent member lies at most `eps` frames back and whose center
//! (its most recent member) is closer than `tau_d` in `1 - IoU` distance;
//! otherwise it opens a new cluster. A cluster takes at most one point per
//! frame. After the sweep, weak clusters are discarded as noise, missing
//! frames inside each surviving cluster are filled with the mean of the
//! flanking members, and the clusters become [`Track`]s whose temporal label
//! is the cluster range.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geometry::{iou_spatial, Point2, Quad};
use crate::model::{
    ClusterConfig, FrameIndex, Member, ModelError, NoiseRule, TextPoint, Track, VideoDetections,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("frame {frame} appears after frame {previous}; frames must be strictly increasing")]
    UnorderedFrames {
        previous: FrameIndex,
        frame: FrameIndex,
    },
    #[error(transparent)]
    Config(#[from] ModelError),
}

/// `1 - IoU` between the boxes of two points.
pub fn dist_points(p: &TextPoint, q: &TextPoint) -> f64 {
    1.0 - iou_spatial(&p.quad, &q.quad)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterMember {
    pub point: TextPoint,
    pub interpolated: bool,
}

/// A cluster under construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkingCluster {
    id: usize,
    members: Vec<ClusterMember>,
    sum_conf: f64,
}

impl WorkingCluster {
    pub fn new(id: usize, seed: TextPoint) -> Self {
        WorkingCluster {
            id,
            members: vec![ClusterMember { point: seed, interpolated: false }],
            sum_conf: seed.confidence,
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn members(&self) -> &[ClusterMember] {
        &self.members
    }

    /// The most recently added member.
    pub fn center(&self) -> &TextPoint {
        &self.members.last().expect("cluster is never empty").point
    }

    pub fn first_frame(&self) -> FrameIndex {
        self.members[0].point.frame
    }

    pub fn last_frame(&self) -> FrameIndex {
        self.center().frame
    }

    /// Frames from the earliest to the latest member, inclusive.
    pub fn lifecycle(&self) -> u64 {
        u64::from(self.last_frame() - self.first_frame()) + 1
    }

    /// Mean member confidence.
    pub fn confidence(&self) -> f64 {
        self.sum_conf / self.members.len() as f64
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    /// Distance from `p` to the cluster center.
    pub fn distance_to(&self, p: &TextPoint) -> f64 {
        dist_points(p, self.center())
    }

    /// Appends `p`, which becomes the new center.
    ///
    /// Panics if `p` is not later than the current last frame.
    pub fn push(&mut self, p: TextPoint) {
        assert!(p.frame > self.last_frame(), "cluster members must advance in time");
        self.sum_conf += p.confidence;
        self.members.push(ClusterMember { point: p, interpolated: false });
    }
}

/// Runs the online grouping pass over frame-ordered points.
pub fn sweep<I>(points: I, cfg: &ClusterConfig) -> Result<Vec<WorkingCluster>, ClusterError>
where
    I: IntoIterator<Item = TextPoint>,
{
    let mut clusters: Vec<WorkingCluster> = Vec::new();
    // Indices of clusters still reachable from the current frame, ascending.
    let mut active: Vec<usize> = Vec::new();
    let mut current: Option<FrameIndex> = None;

    for p in points {
        match current {
            Some(f) if p.frame < f => {
                return Err(ClusterError::UnorderedFrames { previous: f, frame: p.frame })
            }
            Some(f) if p.frame == f => {}
            _ => {
                current = Some(p.frame);
                let horizon = u64::from(p.frame).saturating_sub(u64::from(cfg.eps));
                active.retain(|&c| u64::from(clusters[c].last_frame()) >= horizon);
            }
        }

        let mut best: Option<(usize, f64)> = None;
        for &c in &active {
            let cluster = &clusters[c];
            if cluster.last_frame() >= p.frame {
                continue; // already took a point in this frame
            }
            let d = cluster.distance_to(&p);
            if d < cfg.tau_d && best.is_none_or(|(_, bd)| d < bd) {
                best = Some((c, d));
            }
        }

        match best {
            Some((c, _)) => clusters[c].push(p),
            None => {
                let id = clusters.len();
                clusters.push(WorkingCluster::new(id, p));
                active.push(id);
            }
        }
    }
    Ok(clusters)
}

fn is_noise(c: &WorkingCluster, tau_l: u32, tau_c: f64, rule: NoiseRule) -> bool {
    let short = c.lifecycle() < u64::from(tau_l);
    let weak = c.confidence() < tau_c;
    match rule {
        NoiseRule::Both => short && weak,
        NoiseRule::Either => short || weak,
    }
}

/// Splits clusters into survivors and the points of deleted clusters.
pub fn filter_noise(
    clusters: Vec<WorkingCluster>,
    tau_l: u32,
    tau_c: f64,
    rule: NoiseRule,
) -> (Vec<WorkingCluster>, Vec<TextPoint>) {
    let mut kept = Vec::with_capacity(clusters.len());
    let mut noise = Vec::new();
    for c in clusters {
        if is_noise(&c, tau_l, tau_c, rule) {
            noise.extend(c.members.iter().map(|m| m.point));
        } else {
            kept.push(c);
        }
    }
    (kept, noise)
}

/// Vertex rotation of `b` that best lines up with `a`.
fn best_alignment(a: &Quad, b: &Quad) -> usize {
    let (va, vb) = (a.vertices(), b.vertices());
    (0..4)
        .map(|r| {
            let cost: f64 = (0..4)
                .map(|i| {
                    let d = va[i] - vb[(i + r) % 4];
                    d.x * d.x + d.y * d.y
                })
                .sum();
            (r, cost)
        })
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        .0
}

/// Vertex-wise mean of two quadrilaterals after aligning corresponding
/// corners. Falls back to `a` if the mean is not a valid quadrilateral.
pub fn mean_quad(a: &Quad, b: &Quad) -> Quad {
    let r = best_alignment(a, b);
    let (va, vb) = (a.vertices(), b.vertices());
    let mean: [Point2; 4] = std::array::from_fn(|i| va[i].midpoint(vb[(i + r) % 4]));
    Quad::normalize(mean).unwrap_or(*a)
}

/// Fills every missing frame inside the cluster range with the mean of the
/// nearest observed members before and after the gap.
pub fn interpolate_gaps(cluster: WorkingCluster) -> WorkingCluster {
    if cluster.lifecycle() == cluster.members.len() as u64 {
        return cluster;
    }
    let mut filled = Vec::with_capacity(cluster.lifecycle() as usize);
    let mut sum_conf = cluster.sum_conf;
    for pair in cluster.members.windows(2) {
        let (before, after) = (pair[0].point, pair[1].point);
        filled.push(pair[0]);
        if after.frame - before.frame > 1 {
            let quad = mean_quad(&before.quad, &after.quad);
            let confidence = (before.confidence + after.confidence) / 2.0;
            for frame in (before.frame + 1)..after.frame {
                sum_conf += confidence;
                filled.push(ClusterMember {
                    point: TextPoint { frame, quad, center: quad.centroid(), confidence },
                    interpolated: true,
                });
            }
        }
    }
    filled.push(*cluster.members.last().expect("cluster is never empty"));
    WorkingCluster {
        id: cluster.id,
        members: filled,
        sum_conf,
    }
}

/// Converts clusters into tracks numbered from 0 in cluster order.
pub fn finalize(clusters: Vec<WorkingCluster>) -> Vec<Track> {
    clusters
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let members: BTreeMap<FrameIndex, Member> = c
                .members
                .iter()
                .map(|m| {
                    (
                        m.point.frame,
                        Member {
                            quad: m.point.quad,
                            confidence: m.point.confidence,
                            interpolated: m.interpolated,
                        },
                    )
                })
                .collect();
            Track::from_members(i as u64, members).expect("clusters are non-empty with valid confidences")
        })
        .collect()
}

/// Result of clustering one video.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterOutcome {
    pub tracks: Vec<Track>,
    pub noise: Vec<TextPoint>,
}

/// Full pipeline: sweep, noise removal, gap filling, temporal labelling.
pub fn cluster_video(
    dets: &VideoDetections,
    cfg: &ClusterConfig,
) -> Result<ClusterOutcome, ClusterError> {
    cfg.validate()?;
    for pair in dets.frames.windows(2) {
        if pair[1].frame <= pair[0].frame {
            return Err(ClusterError::UnorderedFrames {
                previous: pair[0].frame,
                frame: pair[1].frame,
            });
        }
    }
    let clusters = sweep(dets.text_points(), cfg)?;
    let (kept, noise) = filter_noise(clusters, cfg.tau_l, cfg.tau_c, cfg.noise_rule);
    let filled = kept.into_iter().map(interpolate_gaps).collect();
    Ok(ClusterOutcome {
        tracks: finalize(filled),
        noise,
    })
}
