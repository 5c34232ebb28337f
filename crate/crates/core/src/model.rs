//! Shared domain types: detections, tracks, temporal ranges and configuration.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::attributes::TrackAttributes;
use crate::geometry::{Point2, Quad};

pub type FrameIndex = u32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl ModelError {
    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        ModelError::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn check_unit_interval(value: f64) -> Result<(), String> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(format!("{value} is outside [0, 1]"))
    }
}

/// One detected text instance reduced to a point in (x, y, t) space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextPoint {
    pub frame: FrameIndex,
    pub quad: Quad,
    pub center: Point2,
    pub confidence: f64,
}

impl TextPoint {
    pub fn new(frame: FrameIndex, quad: Quad, confidence: f64) -> Result<Self, ModelError> {
        check_unit_interval(confidence).map_err(|m| ModelError::schema("confidence", m))?;
        Ok(TextPoint {
            frame,
            quad,
            center: quad.centroid(),
            confidence,
        })
    }
}

/// Inclusive interval of frame indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TemporalRange {
    start: FrameIndex,
    end: FrameIndex,
}

impl TemporalRange {
    pub fn new(start: FrameIndex, end: FrameIndex) -> Option<Self> {
        (start <= end).then_some(TemporalRange { start, end })
    }

    pub fn start(&self) -> FrameIndex {
        self.start
    }

    pub fn end(&self) -> FrameIndex {
        self.end
    }

    /// Number of frames covered, `end - start + 1`.
    pub fn len(&self) -> u64 {
        u64::from(self.end - self.start) + 1
    }

    pub fn contains(&self, frame: FrameIndex) -> bool {
        (self.start..=self.end).contains(&frame)
    }

    pub fn intersection(&self, other: &TemporalRange) -> Option<TemporalRange> {
        TemporalRange::new(self.start.max(other.start), self.end.min(other.end))
    }

    pub fn frames(&self) -> impl Iterator<Item = FrameIndex> {
        self.start..=self.end
    }
}

/// A track member at one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub quad: Quad,
    pub confidence: f64,
    /// Filled in by gap interpolation rather than observed.
    pub interpolated: bool,
}

impl Member {
    pub fn observed(quad: Quad, confidence: f64) -> Self {
        Member {
            quad,
            confidence,
            interpolated: false,
        }
    }
}

/// One text identity over its lifetime.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    range: TemporalRange,
    members: BTreeMap<FrameIndex, Member>,
    score: f64,
    pub attrs: Option<TrackAttributes>,
}

impl Track {
    /// Builds a track whose range spans its members and whose score is the
    /// mean member confidence.
    pub fn from_members(
        id: u64,
        members: BTreeMap<FrameIndex, Member>,
    ) -> Result<Track, ModelError> {
        let (first, last) = match (members.keys().next(), members.keys().next_back()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(ModelError::schema("boxes", "track has no members")),
        };
        for m in members.values() {
            check_unit_interval(m.confidence).map_err(|e| ModelError::schema("conf", e))?;
        }
        let score = members.values().map(|m| m.confidence).sum::<f64>() / members.len() as f64;
        Ok(Track {
            id,
            range: TemporalRange { start: first, end: last },
            members,
            score,
            attrs: None,
        })
    }

    /// Ground-truth style track: every member has confidence 1.
    pub fn ground_truth<I>(id: u64, boxes: I) -> Result<Track, ModelError>
    where
        I: IntoIterator<Item = (FrameIndex, Quad)>,
    {
        let members = boxes
            .into_iter()
            .map(|(f, q)| (f, Member::observed(q, 1.0)))
            .collect();
        Track::from_members(id, members)
    }

    /// Track with an externally supplied score, as read from a file.
    pub(crate) fn with_score(
        id: u64,
        members: BTreeMap<FrameIndex, Member>,
        score: f64,
    ) -> Result<Track, ModelError> {
        let mut t = Track::from_members(id, members)?;
        t.score = score;
        Ok(t)
    }

    pub fn range(&self) -> TemporalRange {
        self.range
    }

    pub fn members(&self) -> &BTreeMap<FrameIndex, Member> {
        &self.members
    }

    pub fn member(&self, frame: FrameIndex) -> Option<&Member> {
        self.members.get(&frame)
    }

    /// Mean member confidence.
    pub fn score(&self) -> f64 {
        self.score
    }

    /// Number of frames from the first to the last member, inclusive.
    pub fn lifecycle(&self) -> u64 {
        self.range.len()
    }

    pub fn member_count(&self) -> usize {
        self.members.len()
    }
}

/// One detection proposal inside a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub quad: Quad,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionFrame {
    pub frame: FrameIndex,
    pub detections: Vec<Detection>,
}

/// Per-frame detection proposals for a single video.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoDetections {
    pub video_id: String,
    pub frame_count: u32,
    pub frames: Vec<DetectionFrame>,
}

impl VideoDetections {
    pub fn empty(video_id: impl Into<String>, frame_count: u32) -> Self {
        VideoDetections {
            video_id: video_id.into(),
            frame_count,
            frames: Vec::new(),
        }
    }

    /// All detections as text points, in frame then input order.
    pub fn text_points(&self) -> impl Iterator<Item = TextPoint> + '_ {
        self.frames.iter().flat_map(|f| {
            f.detections.iter().map(move |d| TextPoint {
                frame: f.frame,
                quad: d.quad,
                center: d.quad.centroid(),
                confidence: d.score,
            })
        })
    }

    pub fn detection_count(&self) -> usize {
        self.frames.iter().map(|f| f.detections.len()).sum()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut prev: Option<FrameIndex> = None;
        for (i, f) in self.frames.iter().enumerate() {
            if prev.is_some_and(|p| f.frame <= p) {
                return Err(ModelError::schema(
                    format!("frames[{i}].frame"),
                    format!("frame {} is not strictly after frame {}", f.frame, prev.unwrap()),
                ));
            }
            if f.frame >= self.frame_count {
                return Err(ModelError::schema(
                    format!("frames[{i}].frame"),
                    format!("frame {} is not below frame_count {}", f.frame, self.frame_count),
                ));
            }
            for (j, d) in f.detections.iter().enumerate() {
                check_unit_interval(d.score).map_err(|m| {
                    ModelError::schema(format!("frames[{i}].detections[{j}].score"), m)
                })?;
            }
            prev = Some(f.frame);
        }
        Ok(())
    }
}

/// Tracks of one video: either annotated ground truth or predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoTracks {
    pub video_id: String,
    pub tracks: Vec<Track>,
}

pub type VideoGroundTruth = VideoTracks;

impl VideoTracks {
    pub fn new(video_id: impl Into<String>, tracks: Vec<Track>) -> Self {
        VideoTracks {
            video_id: video_id.into(),
            tracks,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = std::collections::BTreeSet::new();
        for (i, t) in self.tracks.iter().enumerate() {
            if !seen.insert(t.id) {
                return Err(ModelError::schema(
                    format!("tracks[{i}].id"),
                    format!("duplicate track id {}", t.id),
                ));
            }
        }
        Ok(())
    }

    /// Every box present at `frame`, paired with the owning track id.
    pub fn boxes_at(&self, frame: FrameIndex) -> impl Iterator<Item = (u64, &Member)> + '_ {
        self.tracks
            .iter()
            .filter_map(move |t| t.member(frame).map(|m| (t.id, m)))
    }
}

/// How a weak cluster is recognised as noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseRule {
    /// Short lifecycle and low confidence.
    #[default]
    Both,
    /// Short lifecycle or low confidence.
    Either,
}

/// Temporal clustering hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterConfig {
    /// Look-back window in frames for candidate clusters.
    pub eps: u32,
    /// A point joins a cluster only if `1 - IoU` to its center is below this.
    pub tau_d: f64,
    /// Lifecycle threshold, frames.
    pub tau_l: u32,
    /// Mean-confidence threshold.
    pub tau_c: f64,
    pub noise_rule: NoiseRule,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            eps: 3,
            tau_d: 0.7,
            tau_l: 3,
            tau_c: 0.3,
            noise_rule: NoiseRule::Both,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.eps < 1 {
            return Err(ModelError::Config("eps must be at least 1".into()));
        }
        if self.tau_l < 1 {
            return Err(ModelError::Config("tau_l must be at least 1".into()));
        }
        check_unit_interval(self.tau_d).map_err(|m| ModelError::Config(format!("tau_d: {m}")))?;
        check_unit_interval(self.tau_c).map_err(|m| ModelError::Config(format!("tau_c: {m}")))?;
        Ok(())
    }
}

/// Which boxes the track-level spatial IoU compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpatialIouMode {
    /// Mean per-frame IoU over the temporal intersection.
    #[default]
    PerFrameMean,
    /// IoU of the axis-aligned boxes enclosing each whole track.
    EnclosingBox,
}

/// Matching thresholds for the spatio-temporal protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig {
    pub theta_l: f64,
    pub theta_r: f64,
    pub alpha: f64,
    pub spatial: SpatialIouMode,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            theta_l: 0.5,
            theta_r: 0.5,
            alpha: 0.5,
            spatial: SpatialIouMode::PerFrameMean,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("theta_l", self.theta_l),
            ("theta_r", self.theta_r),
            ("alpha", self.alpha),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(ModelError::Config(format!("{name} = {v} is outside (0, 1)")));
            }
        }
        Ok(())
    }
}
