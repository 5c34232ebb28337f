//! JSON interchange formats for detections and track files.
//!
//! Numbers in written documents carry at most six fractional digits and never
//! use exponent notation. Keys are emitted in a fixed order and boxes in
//! ascending frame order, so identical inputs serialize byte-identically.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::attributes::TrackAttributes;
use crate::geometry::Quad;
use crate::model::{
    check_unit_interval, Detection, DetectionFrame, FrameIndex, Member, ModelError, Track,
    VideoDetections, VideoTracks,
};

/// Fixed-point decimal rendering of a finite float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decimal {
    value: f64,
    digits: usize,
    trim: bool,
}

impl Decimal {
    /// Exactly `digits` fractional digits.
    pub fn fixed(value: f64, digits: usize) -> Self {
        Decimal { value, digits, trim: false }
    }

    /// Up to `digits` fractional digits; trailing zeros dropped, one kept.
    pub fn trimmed(value: f64, digits: usize) -> Self {
        Decimal { value, digits, trim: true }
    }

    pub fn render(&self) -> Option<String> {
        if !self.value.is_finite() {
            return None;
        }
        let mut s = format!("{:.*}", self.digits, self.value);
        if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
            s.remove(0);
        }
        if self.trim && s.contains('.') {
            let keep = s.trim_end_matches('0').len();
            s.truncate(keep);
            if s.ends_with('.') {
                s.push('0');
            }
        } else if self.digits == 0 {
            s.push_str(".0");
        }
        Some(s)
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::Error;
        let text = self
            .render()
            .ok_or_else(|| S::Error::custom(format!("cannot serialize {}", self.value)))?;
        RawValue::from_string(text)
            .map_err(S::Error::custom)?
            .serialize(serializer)
    }
}

fn num(v: f64) -> Decimal {
    Decimal::trimmed(v, 6)
}

fn quad_out(q: &Quad) -> [[Decimal; 2]; 4] {
    q.to_xy().map(|[x, y]| [num(x), num(y)])
}

fn parse_json<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, ModelError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        if inner.is_data() {
            ModelError::schema(path, inner.to_string())
        } else {
            json_error(&inner)
        }
    })?;
    de.end().map_err(|e| json_error(&e))?;
    Ok(value)
}

fn json_error(e: &serde_json::Error) -> ModelError {
    ModelError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn to_pretty<T: Serialize>(doc: &T) -> Result<Vec<u8>, ModelError> {
    let mut out = serde_json::to_vec_pretty(doc)
        .map_err(|e| ModelError::schema("<document>", e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

#[derive(Deserialize)]
struct DetectionsIn {
    video_id: String,
    frame_count: u32,
    frames: Vec<FrameIn>,
}

#[derive(Deserialize)]
struct FrameIn {
    frame: FrameIndex,
    detections: Vec<DetectionIn>,
}

#[derive(Deserialize)]
struct DetectionIn {
    quad: [[f64; 2]; 4],
    score: f64,
}

#[derive(Serialize)]
struct DetectionsOut<'a> {
    video_id: &'a str,
    frame_count: u32,
    frames: Vec<FrameOut>,
}

#[derive(Serialize)]
struct FrameOut {
    frame: FrameIndex,
    detections: Vec<DetectionOut>,
}

#[derive(Serialize)]
struct DetectionOut {
    quad: [[Decimal; 2]; 4],
    score: Decimal,
}

#[derive(Deserialize)]
struct TracksIn {
    video_id: String,
    tracks: Vec<TrackIn>,
}

#[derive(Deserialize)]
struct TrackIn {
    id: u64,
    start: FrameIndex,
    end: FrameIndex,
    #[serde(default)]
    score: Option<f64>,
    boxes: Vec<BoxIn>,
    #[serde(default)]
    attrs: Option<TrackAttributes>,
}

fn full_confidence() -> f64 {
    1.0
}

#[derive(Deserialize)]
struct BoxIn {
    frame: FrameIndex,
    quad: [[f64; 2]; 4],
    #[serde(default = "full_confidence")]
    conf: f64,
}

#[derive(Serialize)]
struct TracksOut<'a> {
    video_id: &'a str,
    tracks: Vec<TrackOut<'a>>,
}

#[derive(Serialize)]
struct TrackOut<'a> {
    id: u64,
    start: FrameIndex,
    end: FrameIndex,
    score: Decimal,
    boxes: Vec<BoxOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    attrs: Option<&'a TrackAttributes>,
}

#[derive(Serialize)]
struct BoxOut {
    frame: FrameIndex,
    quad: [[Decimal; 2]; 4],
    conf: Decimal,
}

/// Parses and validates a detections document.
pub fn parse_detections(bytes: &[u8]) -> Result<VideoDetections, ModelError> {
    let doc: DetectionsIn = parse_json(bytes)?;
    if doc.video_id.is_empty() {
        return Err(ModelError::schema("video_id", "must not be empty"));
    }
    let mut frames = Vec::with_capacity(doc.frames.len());
    for (i, f) in doc.frames.into_iter().enumerate() {
        let mut detections = Vec::with_capacity(f.detections.len());
        for (j, d) in f.detections.into_iter().enumerate() {
            let quad = Quad::from_xy(d.quad).map_err(|e| {
                ModelError::schema(format!("frames[{i}].detections[{j}].quad"), e.to_string())
            })?;
            detections.push(Detection { quad, score: d.score });
        }
        frames.push(DetectionFrame { frame: f.frame, detections });
    }
    let video = VideoDetections {
        video_id: doc.video_id,
        frame_count: doc.frame_count,
        frames,
    };
    video.validate()?;
    Ok(video)
}

pub fn serialize_detections(video: &VideoDetections) -> Result<Vec<u8>, ModelError> {
    let doc = DetectionsOut {
        video_id: &video.video_id,
        frame_count: video.frame_count,
        frames: video
            .frames
            .iter()
            .map(|f| FrameOut {
                frame: f.frame,
                detections: f
                    .detections
                    .iter()
                    .map(|d| DetectionOut {
                        quad: quad_out(&d.quad),
                        score: num(d.score),
                    })
                    .collect(),
            })
            .collect(),
    };
    to_pretty(&doc)
}

/// Parses and validates a ground-truth or predicted track document.
///
/// A missing track `score` defaults to the mean box confidence and a missing
/// box `conf` to 1.
pub fn parse_tracks(bytes: &[u8]) -> Result<VideoTracks, ModelError> {
    let doc: TracksIn = parse_json(bytes)?;
    if doc.video_id.is_empty() {
        return Err(ModelError::schema("video_id", "must not be empty"));
    }
    let mut tracks = Vec::with_capacity(doc.tracks.len());
    for (i, t) in doc.tracks.into_iter().enumerate() {
        let field = |name: &str| format!("tracks[{i}].{name}");
        if t.start > t.end {
            return Err(ModelError::schema(
                field("start"),
                format!("start {} is after end {}", t.start, t.end),
            ));
        }
        if t.boxes.is_empty() {
            return Err(ModelError::schema(field("boxes"), "track has no boxes"));
        }
        let n_boxes = t.boxes.len();
        let mut members = BTreeMap::new();
        let mut prev: Option<FrameIndex> = None;
        for (k, b) in t.boxes.into_iter().enumerate() {
            let bfield = |name: &str| format!("tracks[{i}].boxes[{k}].{name}");
            if prev.is_some_and(|p| b.frame <= p) {
                return Err(ModelError::schema(bfield("frame"), "boxes must be in strictly ascending frame order"));
            }
            if b.frame < t.start || b.frame > t.end {
                return Err(ModelError::schema(
                    bfield("frame"),
                    format!("frame {} lies outside [{}, {}]", b.frame, t.start, t.end),
                ));
            }
            check_unit_interval(b.conf).map_err(|m| ModelError::schema(bfield("conf"), m))?;
            let quad = Quad::from_xy(b.quad)
                .map_err(|e| ModelError::schema(bfield("quad"), e.to_string()))?;
            members.insert(b.frame, Member::observed(quad, b.conf));
            prev = Some(b.frame);
        }
        if members.keys().next() != Some(&t.start) || members.keys().next_back() != Some(&t.end) {
            return Err(ModelError::schema(
                field("start"),
                format!("declared range [{}, {}] does not match the first and last box", t.start, t.end),
            ));
        }
        let mut track = match t.score {
            Some(score) => {
                check_unit_interval(score).map_err(|m| ModelError::schema(field("score"), m))?;
                Track::with_score(t.id, members, score)?
            }
            None => Track::from_members(t.id, members)?,
        };
        if let Some(attrs) = &t.attrs {
            if attrs.density.len() != n_boxes || attrs.scale.len() != n_boxes {
                return Err(ModelError::schema(
                    field("attrs"),
                    format!("expected {n_boxes} per-box labels"),
                ));
            }
            if attrs.density.contains(&0) {
                return Err(ModelError::schema(field("attrs.density"), "density must be at least 1"));
            }
        }
        track.attrs = t.attrs;
        tracks.push(track);
    }
    let video = VideoTracks::new(doc.video_id, tracks);
    video.validate()?;
    Ok(video)
}

/// Alias of [`parse_tracks`] for annotation files.
pub fn parse_ground_truth(bytes: &[u8]) -> Result<VideoTracks, ModelError> {
    parse_tracks(bytes)
}

pub fn serialize_tracks(tracks: &[Track], video_id: &str) -> Result<Vec<u8>, ModelError> {
    let doc = TracksOut {
        video_id,
        tracks: tracks
            .iter()
            .map(|t| TrackOut {
                id: t.id,
                start: t.range().start(),
                end: t.range().end(),
                score: num(t.score()),
                boxes: t
                    .members()
                    .iter()
                    .map(|(&frame, m)| BoxOut {
                        frame,
                        quad: quad_out(&m.quad),
                        conf: num(m.confidence),
                    })
                    .collect(),
                attrs: t.attrs.as_ref(),
            })
            .collect(),
    };
    to_pretty(&doc)
}
