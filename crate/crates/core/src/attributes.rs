//! Per-instance attribute labels: density, scale and lifecycle.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::io;

use serde::{Deserialize, Serialize};

use crate::geometry::{quads_touch, Quad};
use crate::model::{FrameIndex, Track, VideoTracks};

/// Expansion applied to each box, as a multiple of its short side, before
/// testing for neighbours.
pub const DENSITY_EXPANSION: f64 = 0.1;

/// Short sides below this many pixels are small.
pub const SMALL_SCALE_BELOW: f64 = 32.0;
/// Short sides above this many pixels are large.
pub const LARGE_SCALE_ABOVE: f64 = 64.0;

/// Lifecycles below this many frames are short.
pub const SHORT_LIFECYCLE_BELOW: u64 = 30;
/// Lifecycles above this many frames are long.
pub const LONG_LIFECYCLE_ABOVE: u64 = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleClass {
    Small,
    Medium,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LifecycleClass {
    Short,
    Normal,
    Long,
}

impl fmt::Display for ScaleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScaleClass::Small => "small",
            ScaleClass::Medium => "medium",
            ScaleClass::Large => "large",
        })
    }
}

impl fmt::Display for LifecycleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LifecycleClass::Short => "short",
            LifecycleClass::Normal => "normal",
            LifecycleClass::Long => "long",
        })
    }
}

/// Labels attached to a track. `density` and `scale` hold one entry per box,
/// in ascending frame order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackAttributes {
    pub lifecycle: LifecycleClass,
    pub density: Vec<u32>,
    pub scale: Vec<ScaleClass>,
}

/// Size of the connected group each box belongs to.
///
/// Two boxes are linked when either one, expanded by [`DENSITY_EXPANSION`]
/// times its short side, touches the other one unexpanded.
pub fn frame_density(quads: &[Quad]) -> Vec<u32> {
    let expanded: Vec<Quad> = quads
        .iter()
        .map(|q| q.expand(DENSITY_EXPANSION).unwrap_or(*q))
        .collect();
    let n = quads.len();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if quads_touch(&expanded[i], &quads[j]) || quads_touch(&expanded[j], &quads[i]) {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }

    let mut component = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for seed in 0..n {
        if component[seed] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0u32;
        let mut queue = VecDeque::from([seed]);
        component[seed] = id;
        while let Some(i) = queue.pop_front() {
            size += 1;
            for &j in &adjacency[i] {
                if component[j] == usize::MAX {
                    component[j] = id;
                    queue.push_back(j);
                }
            }
        }
        sizes.push(size);
    }
    component.into_iter().map(|c| sizes[c]).collect()
}

pub fn scale_class_of(short_side: f64) -> ScaleClass {
    if short_side < SMALL_SCALE_BELOW {
        ScaleClass::Small
    } else if short_side <= LARGE_SCALE_ABOVE {
        ScaleClass::Medium
    } else {
        ScaleClass::Large
    }
}

pub fn scale_class(q: &Quad) -> ScaleClass {
    scale_class_of(q.short_side())
}

pub fn lifecycle_class_of(frames: u64) -> LifecycleClass {
    if frames < SHORT_LIFECYCLE_BELOW {
        LifecycleClass::Short
    } else if frames <= LONG_LIFECYCLE_ABOVE {
        LifecycleClass::Normal
    } else {
        LifecycleClass::Long
    }
}

pub fn lifecycle_class(t: &Track) -> LifecycleClass {
    lifecycle_class_of(t.lifecycle())
}

/// One line of the attribute CSV summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeRow {
    pub track_id: u64,
    pub frame: FrameIndex,
    pub density: u32,
    pub scale: ScaleClass,
    pub lifecycle: LifecycleClass,
}

/// Computes labels for every track of a video. Density is evaluated among all
/// boxes that share a frame.
pub fn annotate(video: &VideoTracks) -> VideoTracks {
    let mut by_frame: BTreeMap<FrameIndex, Vec<(usize, Quad)>> = BTreeMap::new();
    for (ti, t) in video.tracks.iter().enumerate() {
        for (&f, m) in t.members() {
            by_frame.entry(f).or_default().push((ti, m.quad));
        }
    }
    let mut density: Vec<BTreeMap<FrameIndex, u32>> = vec![BTreeMap::new(); video.tracks.len()];
    for (&f, entries) in &by_frame {
        let quads: Vec<Quad> = entries.iter().map(|(_, q)| *q).collect();
        for ((ti, _), d) in entries.iter().zip(frame_density(&quads)) {
            density[*ti].insert(f, d);
        }
    }

    let tracks = video
        .tracks
        .iter()
        .zip(density)
        .map(|(t, d)| {
            let mut t = t.clone();
            t.attrs = Some(TrackAttributes {
                lifecycle: lifecycle_class(&t),
                density: d.into_values().collect(),
                scale: t.members().values().map(|m| scale_class(&m.quad)).collect(),
            });
            t
        })
        .collect();
    VideoTracks::new(video.video_id.clone(), tracks)
}

/// Flattens an annotated video into CSV rows, track by track.
pub fn attribute_rows(annotated: &VideoTracks) -> Vec<AttributeRow> {
    let mut rows = Vec::new();
    for t in &annotated.tracks {
        let Some(attrs) = &t.attrs else { continue };
        for (((&frame, _), &density), &scale) in
            t.members().iter().zip(&attrs.density).zip(&attrs.scale)
        {
            rows.push(AttributeRow {
                track_id: t.id,
                frame,
                density,
                scale,
                lifecycle: attrs.lifecycle,
            });
        }
    }
    rows
}

/// Writes `track_id,frame,density,scale,lifecycle` rows with a header line.
pub fn write_csv<W: io::Write>(rows: &[AttributeRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Quad {
        Quad::rect(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn singleton() {
        assert_eq!(frame_density(&[rect(0.0, 0.0, 100.0, 20.0)]), vec![1]);
        assert!(frame_density(&[]).is_empty());
    }

    #[test]
    fn pair_plus_isolated() {
        // Short sides 20: expansion reaches ~2 px beyond each corner.
        let a = rect(0.0, 0.0, 100.0, 20.0);
        let b = rect(101.0, 0.0, 201.0, 20.0);
        let far = rect(500.0, 500.0, 600.0, 520.0);
        assert_eq!(frame_density(&[a, b, far]), vec![2, 2, 1]);
        // Without expansion the 1 px gap would keep them apart.
        assert!(!quads_touch(&a, &b));
    }

    #[test]
    fn chain_is_transitive() {
        let a = rect(0.0, 0.0, 100.0, 20.0);
        let b = rect(101.0, 0.0, 201.0, 20.0);
        let c = rect(202.0, 0.0, 302.0, 20.0);
        let ea = a.expand(DENSITY_EXPANSION).unwrap();
        assert!(!quads_touch(&ea, &c));
        assert_eq!(frame_density(&[a, b, c]), vec![3, 3, 3]);
    }

    #[test]
    fn asymmetric_reach_is_symmetrised() {
        // The big box's expansion reaches the small one but not vice versa.
        let big = rect(0.0, 0.0, 400.0, 100.0);
        let small = rect(405.0, 40.0, 425.0, 50.0);
        assert!(quads_touch(&big.expand(DENSITY_EXPANSION).unwrap(), &small));
        assert!(!quads_touch(&small.expand(DENSITY_EXPANSION).unwrap(), &big));
        assert_eq!(frame_density(&[big, small]), vec![2, 2]);
        assert_eq!(frame_density(&[small, big]), vec![2, 2]);
    }

    #[test]
    fn scale_boundaries() {
        assert_eq!(scale_class_of(20.0), ScaleClass::Small);
        assert_eq!(scale_class_of(31.999), ScaleClass::Small);
        assert_eq!(scale_class_of(32.0), ScaleClass::Medium);
        assert_eq!(scale_class_of(64.0), ScaleClass::Medium);
        assert_eq!(scale_class_of(64.5), ScaleClass::Large);
        assert_eq!(scale_class_of(100.0), ScaleClass::Large);
        assert_eq!(scale_class(&rect(0.0, 0.0, 300.0, 40.0)), ScaleClass::Medium);
    }

    #[test]
    fn lifecycle_boundaries() {
        let expect = [
            (10, LifecycleClass::Short),
            (29, LifecycleClass::Short),
            (30, LifecycleClass::Normal),
            (31, LifecycleClass::Normal),
            (60, LifecycleClass::Normal),
            (120, LifecycleClass::Normal),
            (121, LifecycleClass::Long),
            (200, LifecycleClass::Long),
        ];
        for (frames, class) in expect {
            assert_eq!(lifecycle_class_of(frames), class, "{frames}");
        }
    }

    #[test]
    fn annotate_video() {
        let a = Track::ground_truth(0, (0..40).map(|f| (f, rect(0.0, 0.0, 100.0, 20.0)))).unwrap();
        let b = Track::ground_truth(1, (10..12).map(|f| (f, rect(101.0, 0.0, 201.0, 20.0)))).unwrap();
        let v = annotate(&VideoTracks::new("v", vec![a, b]));
        let aa = v.tracks[0].attrs.as_ref().unwrap();
        assert_eq!(aa.lifecycle, LifecycleClass::Normal);
        assert_eq!(aa.density.len(), 40);
        assert_eq!(aa.density[9], 1);
        assert_eq!(aa.density[10], 2);
        assert_eq!(aa.density[12], 1);
        assert_eq!(v.tracks[1].attrs.as_ref().unwrap().density, vec![2, 2]);

        let rows = attribute_rows(&v);
        assert_eq!(rows.len(), 42);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("track_id,frame,density,scale,lifecycle"));
        assert_eq!(lines.next(), Some("0,0,1,small,normal"));
        assert_eq!(text.lines().count(), 43);
    }
}
