use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use log::{debug, info};
use rayon::prelude::*;
use serde::Serialize;
use stvtext::attributes::{annotate, attribute_rows, write_csv};
use stvtext::eval::{aggregate, pair_videos, score_video};
use stvtext::format::Decimal;
use stvtext::synth::{generate, ScenarioParams};
use stvtext::{
    cluster_video, ic15_frame_eval, parse_detections, parse_tracks, serialize_detections, serialize_tracks,
    VideoTracks,
};

use crate::args::{AttrsArgs, ClusterArgs, EvalArgs, Protocol, SynthArgs};
use crate::failure::{Failure, Tag};

/// A file, or every `*.json` directly inside a directory, in name order.
fn list_inputs(path: &Path) -> Result<(Vec<PathBuf>, bool), Failure> {
    let meta = fs::metadata(path).input(format!("cannot read {}", path.display()))?;
    if !meta.is_dir() {
        return Ok((vec![path.to_path_buf()], false));
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path).input(format!("cannot list {}", path.display()))? {
        let p = entry.input(format!("cannot list {}", path.display()))?.path();
        if p.is_file() && p.extension().is_some_and(|e| e == "json") {
            files.push(p);
        }
    }
    files.sort();
    Ok((files, true))
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).input(format!("cannot read {}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).internal(format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, bytes).internal(format!("cannot write {}", path.display()))
}

fn write_stdout(bytes: &[u8]) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    out.write_all(bytes).and_then(|_| out.flush()).internal("cannot write to stdout")
}

fn load_tracks(path: &Path) -> Result<Vec<VideoTracks>, Failure> {
    let (files, _) = list_inputs(path)?;
    files
        .par_iter()
        .map(|f| parse_tracks(&read(f)?).input(f.display().to_string()))
        .collect()
}

pub fn synth(args: &SynthArgs) -> Result<(), Failure> {
    let mut params = ScenarioParams {
        seed: args.seed,
        video_id: args.video_id.clone(),
        n_tracks: args.tracks,
        frame_count: args.frames,
        arena_width: args.width,
        arena_height: args.height,
        min_lifetime: args.min_lifetime,
        dropout: args.dropout,
        jitter_sigma: args.jitter,
        false_positive_rate: args.fp_rate,
        duplicate_prob: args.duplicate_prob,
        ..Default::default()
    };
    if args.noise_free {
        params = params.noise_free();
    }
    let scenario = generate(&params).input("invalid scenario parameters")?;

    let gt = serialize_tracks(&scenario.ground_truth.tracks, &scenario.ground_truth.video_id)
        .internal("serializing ground truth")?;
    let dets = serialize_detections(&scenario.detections).internal("serializing detections")?;
    let mut echo = serde_json::to_vec_pretty(&params).internal("serializing parameters")?;
    echo.push(b'\n');

    write_file(&args.out.join("gt.json"), &gt)?;
    write_file(&args.out.join("detections.json"), &dets)?;
    write_file(&args.out.join("params.json"), &echo)?;
    eprintln!(
        "synth: {} tracks, {} detections in {} frames -> {}",
        scenario.ground_truth.tracks.len(),
        scenario.detections.detection_count(),
        params.frame_count,
        args.out.display()
    );
    Ok(())
}

struct Clustered {
    source: PathBuf,
    video_id: String,
    bytes: Vec<u8>,
    tracks: usize,
    noise: usize,
}

pub fn cluster(args: &ClusterArgs) -> Result<(), Failure> {
    let cfg = args.config();
    cfg.validate().input("invalid clustering flags")?;
    let (files, is_dir) = list_inputs(&args.input)?;
    if is_dir && args.output.is_none() {
        return Err(Failure::input(anyhow::anyhow!(
            "--output is required when the input is a directory"
        )));
    }

    let mut done: Vec<Clustered> = files
        .par_iter()
        .map(|f| {
            let dets = parse_detections(&read(f)?).input(f.display().to_string())?;
            let out = cluster_video(&dets, &cfg).input(f.display().to_string())?;
            debug!("{}: {} tracks, {} noise points", dets.video_id, out.tracks.len(), out.noise.len());
            let bytes = serialize_tracks(&out.tracks, &dets.video_id).internal("serializing tracks")?;
            Ok(Clustered {
                source: f.clone(),
                video_id: dets.video_id,
                bytes,
                tracks: out.tracks.len(),
                noise: out.noise.len(),
            })
        })
        .collect::<Result<_, Failure>>()?;
    done.sort_by(|a, b| a.video_id.cmp(&b.video_id).then_with(|| a.source.cmp(&b.source)));

    for c in &done {
        match &args.output {
            None => write_stdout(&c.bytes)?,
            Some(out) if is_dir => {
                let name = c.source.file_name().expect("listed entries have names");
                write_file(&out.join(name), &c.bytes)?;
            }
            Some(out) => write_file(out, &c.bytes)?,
        }
        eprintln!("cluster: {}: {} tracks, {} noise points", c.video_id, c.tracks, c.noise);
    }
    Ok(())
}

#[derive(Serialize)]
struct VideoRow<'a> {
    id: &'a str,
    #[serde(rename = "H")]
    hits: usize,
    #[serde(rename = "E")]
    estimated: usize,
    #[serde(rename = "T")]
    truth: usize,
    p: Decimal,
    r: Decimal,
}

#[derive(Serialize)]
struct StdmCard<'a> {
    protocol: &'static str,
    theta_l: Decimal,
    theta_r: Decimal,
    alpha: Decimal,
    videos: Vec<VideoRow<'a>>,
    #[serde(rename = "P")]
    precision: Decimal,
    #[serde(rename = "R")]
    recall: Decimal,
    #[serde(rename = "F")]
    f_score: Decimal,
}

#[derive(Serialize)]
struct Ic15Card {
    protocol: &'static str,
    theta_l: Decimal,
    #[serde(rename = "TP")]
    true_positives: usize,
    #[serde(rename = "E")]
    detections: usize,
    #[serde(rename = "T")]
    ground_truth: usize,
    #[serde(rename = "P")]
    precision: Decimal,
    #[serde(rename = "R")]
    recall: Decimal,
    #[serde(rename = "F")]
    f_score: Decimal,
}

fn d4(v: f64) -> Decimal {
    Decimal::fixed(v, 4)
}

pub fn eval(args: &EvalArgs) -> Result<(), Failure> {
    let cfg = args.config();
    cfg.validate().input("invalid evaluation flags")?;
    let gt = load_tracks(&args.gt)?;
    let pred = load_tracks(&args.pred)?;
    info!("{} ground-truth and {} predicted videos", gt.len(), pred.len());

    let mut json = match args.protocol {
        Protocol::Stdm => {
            let pairs = pair_videos(&gt, &pred).input("pairing videos")?;
            let scores = pairs.par_iter().map(|(g, p)| score_video(g, p, &cfg)).collect();
            let card = aggregate(scores, cfg).input("aggregating scores")?;
            let out = StdmCard {
                protocol: "stdm",
                theta_l: d4(cfg.theta_l),
                theta_r: d4(cfg.theta_r),
                alpha: d4(cfg.alpha),
                videos: card
                    .videos
                    .iter()
                    .map(|v| VideoRow {
                        id: &v.video_id,
                        hits: v.hits,
                        estimated: v.estimated,
                        truth: v.truth,
                        p: d4(v.precision),
                        r: d4(v.recall),
                    })
                    .collect(),
                precision: d4(card.precision),
                recall: d4(card.recall),
                f_score: d4(card.f_score),
            };
            serde_json::to_vec_pretty(&out).internal("serializing scorecard")?
        }
        Protocol::Ic15 => {
            let s = ic15_frame_eval(&gt, &pred, cfg.theta_l).input("per-frame evaluation")?;
            let out = Ic15Card {
                protocol: "ic15",
                theta_l: d4(s.theta),
                true_positives: s.true_positives,
                detections: s.detections,
                ground_truth: s.ground_truth,
                precision: d4(s.precision),
                recall: d4(s.recall),
                f_score: d4(s.f_score),
            };
            serde_json::to_vec_pretty(&out).internal("serializing scorecard")?
        }
    };
    json.push(b'\n');
    write_stdout(&json)
}

pub fn attrs(args: &AttrsArgs) -> Result<(), Failure> {
    let src = &args.input;
    let video = parse_tracks(&read(src)?).input(src.display().to_string())?;
    let annotated = annotate(&video);

    if let Some(csv_path) = &args.csv {
        let rows = attribute_rows(&annotated);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).internal("writing CSV")?;
        eprintln!("attrs: {} rows", rows.len());
        return if csv_path.as_os_str() == "-" {
            write_stdout(&buf)
        } else {
            write_file(csv_path, &buf)
        };
    }

    let bytes = serialize_tracks(&annotated.tracks, &annotated.video_id).internal("serializing tracks")?;
    let dest = args.output.as_deref().unwrap_or(src);
    write_file(dest, &bytes)?;
    eprintln!("attrs: annotated {} tracks -> {}", annotated.tracks.len(), dest.display());
    Ok(())
}
