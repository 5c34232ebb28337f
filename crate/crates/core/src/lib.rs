//! Spatio-temporal video scene text detection.
//!
//! Turns per-frame text detection proposals into text tracks (each with a
//! quadrilateral per frame and an inclusive frame range) by temporal
//! clustering, and scores tracks against ground truth with a spatio-temporal
//! matching protocol or a per-frame legacy protocol.
//!
//! - [`geometry`]: convex quadrilaterals, clipping and IoU.
//! - [`model`]: detections, tracks, ranges and configuration.
//! - [`format`]: the JSON file formats.
//! - [`cluster`]: the clustering pipeline.
//! - [`eval`]: evaluation protocols.
//! - [`attributes`]: density, scale and lifecycle labels.
//! - [`synth`]: seeded scenario generation and reference oracles.

pub mod attributes;
pub mod cluster;
pub mod eval;
pub mod format;
pub mod geometry;
pub mod model;
pub mod synth;

pub use cluster::{cluster_video, ClusterError, ClusterOutcome};
pub use eval::{ic15_frame_eval, stdm, EvalError, FrameScores, Scorecard};
pub use format::{parse_detections, parse_ground_truth, parse_tracks, serialize_detections, serialize_tracks};
pub use geometry::{iou_spatial, GeometryError, Point2, Quad};
pub use model::{
    ClusterConfig, MatchConfig, ModelError, NoiseRule, SpatialIouMode, TemporalRange, TextPoint, Track,
    VideoDetections, VideoGroundTruth, VideoTracks,
};
