//! Spatio-temporal detection metric and a legacy per-frame protocol.
//!
//! A predicted track counts as a correct detection of a ground-truth track
//! when both its track-level spatial IoU reaches `theta_l` and its temporal
//! IoU reaches `theta_r`. Pairs are accepted greedily one-to-one in
//! descending order of `spatial × temporal`, so duplicate predictions of one
//! instance are penalised. Precision and recall are averaged per video.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::geometry::{iou_spatial, Quad};
use crate::model::{FrameIndex, MatchConfig, ModelError, SpatialIouMode, TemporalRange, Track, VideoTracks};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("video `{video_id}` has no counterpart in the {missing_from}")]
    Pairing {
        video_id: String,
        missing_from: &'static str,
    },
    #[error("video `{0}` appears more than once in the {1}")]
    DuplicateVideo(String, &'static str),
    #[error("nothing to evaluate: no videos given")]
    NoVideos,
    #[error(transparent)]
    Config(#[from] ModelError),
}

/// Frame-count IoU of two inclusive intervals.
pub fn temporal_iou(a: &TemporalRange, b: &TemporalRange) -> f64 {
    match a.intersection(b) {
        None => 0.0,
        Some(i) => {
            let inter = i.len() as f64;
            inter / (a.len() as f64 + b.len() as f64 - inter)
        }
    }
}

/// Track-level spatial IoU. `None` when the tracks share no frame of their
/// temporal ranges.
///
/// In [`SpatialIouMode::PerFrameMean`] the per-frame IoUs are averaged over
/// every frame of the temporal intersection; a frame where only one track
/// has a box contributes zero.
pub fn track_spatial_iou(g: &Track, p: &Track, mode: SpatialIouMode) -> Option<f64> {
    let inter = g.range().intersection(&p.range())?;
    match mode {
        SpatialIouMode::PerFrameMean => {
            let total: f64 = g
                .members()
                .range(inter.start()..=inter.end())
                .filter_map(|(f, gm)| p.member(*f).map(|pm| iou_spatial(&gm.quad, &pm.quad)))
                .sum();
            Some(total / inter.len() as f64)
        }
        SpatialIouMode::EnclosingBox => {
            let gb = Quad::enclosing(g.members().values().map(|m| &m.quad))?;
            let pb = Quad::enclosing(p.members().values().map(|m| &m.quad))?;
            Some(iou_spatial(&gb, &pb))
        }
    }
}

/// An accepted (or eligible) ground-truth / prediction pairing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub gt_track_id: u64,
    pub pred_track_id: u64,
    pub spatial_iou: f64,
    pub temporal_iou: f64,
}

impl Match {
    fn strength(&self) -> f64 {
        self.spatial_iou * self.temporal_iou
    }
}

/// Every pair meeting both thresholds.
pub fn eligible_pairs(gt: &[Track], pred: &[Track], cfg: &MatchConfig) -> Vec<Match> {
    let mut out = Vec::new();
    for g in gt {
        for p in pred {
            let t = temporal_iou(&g.range(), &p.range());
            if t <= 0.0 || t < cfg.theta_r {
                continue;
            }
            match track_spatial_iou(g, p, cfg.spatial) {
                Some(s) if s >= cfg.theta_l => out.push(Match {
                    gt_track_id: g.id,
                    pred_track_id: p.id,
                    spatial_iou: s,
                    temporal_iou: t,
                }),
                _ => {}
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VideoMatching {
    pub matches: Vec<Match>,
    /// Missed ground-truth track ids.
    pub unmatched_gt: Vec<u64>,
    /// False-positive or duplicate prediction ids.
    pub unmatched_pred: Vec<u64>,
}

/// Greedy one-to-one matching of one video.
pub fn match_tracks(gt: &[Track], pred: &[Track], cfg: &MatchConfig) -> VideoMatching {
    let mut candidates = eligible_pairs(gt, pred, cfg);
    candidates.sort_by(|a, b| {
        b.strength()
            .total_cmp(&a.strength())
            .then(a.gt_track_id.cmp(&b.gt_track_id))
            .then(a.pred_track_id.cmp(&b.pred_track_id))
    });

    let mut used_gt = BTreeSet::new();
    let mut used_pred = BTreeSet::new();
    let mut matches = Vec::new();
    for c in candidates {
        if used_gt.contains(&c.gt_track_id) || used_pred.contains(&c.pred_track_id) {
            continue;
        }
        used_gt.insert(c.gt_track_id);
        used_pred.insert(c.pred_track_id);
        matches.push(c);
    }

    VideoMatching {
        matches,
        unmatched_gt: gt.iter().map(|t| t.id).filter(|id| !used_gt.contains(id)).collect(),
        unmatched_pred: pred.iter().map(|t| t.id).filter(|id| !used_pred.contains(id)).collect(),
    }
}

/// Per-video counts and the precision / recall terms derived from them.
///
/// With no predictions the precision term is 1 if there is also no ground
/// truth and 0 otherwise. With no ground truth the recall term is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoScore {
    pub video_id: String,
    pub hits: usize,
    pub estimated: usize,
    pub truth: usize,
    pub precision: f64,
    pub recall: f64,
}

impl VideoScore {
    pub fn from_counts(video_id: impl Into<String>, hits: usize, estimated: usize, truth: usize) -> Self {
        let precision = match estimated {
            0 if truth == 0 => 1.0,
            0 => 0.0,
            e => hits as f64 / e as f64,
        };
        let recall = match truth {
            0 => 1.0,
            t => hits as f64 / t as f64,
        };
        VideoScore {
            video_id: video_id.into(),
            hits,
            estimated,
            truth,
            precision,
            recall,
        }
    }
}

/// Weighted harmonic mean `1 / (alpha / p + (1 - alpha) / r)`; zero when
/// either input is zero.
pub fn f_score(precision: f64, recall: f64, alpha: f64) -> f64 {
    if precision <= 0.0 || recall <= 0.0 {
        return 0.0;
    }
    1.0 / (alpha / precision + (1.0 - alpha) / recall)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scorecard {
    pub config: MatchConfig,
    pub videos: Vec<VideoScore>,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

/// Averages per-video terms into the aggregate scores.
pub fn aggregate(mut videos: Vec<VideoScore>, config: MatchConfig) -> Result<Scorecard, EvalError> {
    if videos.is_empty() {
        return Err(EvalError::NoVideos);
    }
    videos.sort_by(|a, b| a.video_id.cmp(&b.video_id));
    let n = videos.len() as f64;
    let precision = videos.iter().map(|v| v.precision).sum::<f64>() / n;
    let recall = videos.iter().map(|v| v.recall).sum::<f64>() / n;
    Ok(Scorecard {
        config,
        videos,
        precision,
        recall,
        f_score: f_score(precision, recall, config.alpha),
    })
}

/// Pairs ground-truth and predicted videos by id, in id order.
pub fn pair_videos<'a>(
    gt: &'a [VideoTracks],
    pred: &'a [VideoTracks],
) -> Result<Vec<(&'a VideoTracks, &'a VideoTracks)>, EvalError> {
    fn index<'a>(
        videos: &'a [VideoTracks],
        what: &'static str,
    ) -> Result<BTreeMap<&'a str, &'a VideoTracks>, EvalError> {
        let mut map = BTreeMap::new();
        for v in videos {
            if map.insert(v.video_id.as_str(), v).is_some() {
                return Err(EvalError::DuplicateVideo(v.video_id.clone(), what));
            }
        }
        Ok(map)
    }
    let gt_map = index(gt, "ground truth")?;
    let pred_map = index(pred, "predictions")?;
    if let Some(id) = pred_map.keys().find(|k| !gt_map.contains_key(*k)) {
        return Err(EvalError::Pairing {
            video_id: id.to_string(),
            missing_from: "ground truth",
        });
    }
    let mut pairs = Vec::with_capacity(gt_map.len());
    for (id, g) in gt_map {
        let p = pred_map.get(id).ok_or_else(|| EvalError::Pairing {
            video_id: id.to_string(),
            missing_from: "predictions",
        })?;
        pairs.push((g, *p));
    }
    if pairs.is_empty() {
        return Err(EvalError::NoVideos);
    }
    Ok(pairs)
}

/// Scores one paired video.
pub fn score_video(gt: &VideoTracks, pred: &VideoTracks, cfg: &MatchConfig) -> VideoScore {
    let m = match_tracks(&gt.tracks, &pred.tracks, cfg);
    VideoScore::from_counts(gt.video_id.clone(), m.matches.len(), pred.tracks.len(), gt.tracks.len())
}

/// Spatio-temporal evaluation over a set of videos.
pub fn stdm(
    gt_videos: &[VideoTracks],
    pred_videos: &[VideoTracks],
    cfg: &MatchConfig,
) -> Result<Scorecard, EvalError> {
    cfg.validate()?;
    let videos = pair_videos(gt_videos, pred_videos)?
        .into_iter()
        .map(|(g, p)| score_video(g, p, cfg))
        .collect();
    aggregate(videos, *cfg)
}

/// Micro-averaged per-frame detection scores.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameScores {
    pub theta: f64,
    pub true_positives: usize,
    pub detections: usize,
    pub ground_truth: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

/// Greedy one-to-one matches between boxes of a single frame at IoU ≥ `theta`.
pub fn match_frame(gt: &[Quad], det: &[Quad], theta: f64) -> usize {
    let mut pairs = Vec::new();
    for (i, g) in gt.iter().enumerate() {
        for (j, d) in det.iter().enumerate() {
            let iou = iou_spatial(g, d);
            if iou >= theta && iou > 0.0 {
                pairs.push((iou, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_gt = vec![false; gt.len()];
    let mut used_det = vec![false; det.len()];
    let mut tp = 0;
    for (_, i, j) in pairs {
        if !used_gt[i] && !used_det[j] {
            used_gt[i] = true;
            used_det[j] = true;
            tp += 1;
        }
    }
    tp
}

fn quads_by_frame(v: &VideoTracks) -> BTreeMap<FrameIndex, Vec<Quad>> {
    let mut out: BTreeMap<FrameIndex, Vec<Quad>> = BTreeMap::new();
    for t in &v.tracks {
        for (&f, m) in t.members() {
            out.entry(f).or_default().push(m.quad);
        }
    }
    out
}

/// Legacy image-level protocol: every frame is matched independently and
/// counts are pooled across all frames of all videos.
pub fn ic15_frame_eval(
    gt_videos: &[VideoTracks],
    pred_videos: &[VideoTracks],
    theta: f64,
) -> Result<FrameScores, EvalError> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(ModelError::Config(format!("theta = {theta} is outside (0, 1]")).into());
    }
    let (mut tp, mut n_det, mut n_gt) = (0usize, 0usize, 0usize);
    for (g, p) in pair_videos(gt_videos, pred_videos)? {
        let gf = quads_by_frame(g);
        let pf = quads_by_frame(p);
        let frames: BTreeSet<FrameIndex> = gf.keys().chain(pf.keys()).copied().collect();
        for f in frames {
            let gq = gf.get(&f).map_or(&[][..], Vec::as_slice);
            let pq = pf.get(&f).map_or(&[][..], Vec::as_slice);
            tp += match_frame(gq, pq, theta);
            n_det += pq.len();
            n_gt += gq.len();
        }
    }
    let s = VideoScore::from_counts("", tp, n_det, n_gt);
    Ok(FrameScores {
        theta,
        true_positives: tp,
        detections: n_det,
        ground_truth: n_gt,
        precision: s.precision,
        recall: s.recall,
        f_score: f_score(s.precision, s.recall, 0.5),
    })
}
