use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stvtext::{ClusterConfig, MatchConfig, NoiseRule, SpatialIouMode};

#[derive(Debug, Parser)]
#[command(name = "stvtext", version, about = "Spatio-temporal scene text tracks: clustering and evaluation")]
pub struct Cli {
    /// Worker threads for multi-video inputs (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic ground-truth and detections pair.
    Synth(SynthArgs),
    /// Group per-frame detections into text tracks.
    Cluster(ClusterArgs),
    /// Score predicted tracks against ground truth.
    Eval(EvalArgs),
    /// Label ground-truth tracks with density, scale and lifecycle.
    Attrs(AttrsArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory; receives gt.json, detections.json and params.json.
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "synth")]
    pub video_id: String,
    #[arg(long, default_value_t = 8)]
    pub tracks: usize,
    #[arg(long, default_value_t = 200)]
    pub frames: u32,
    #[arg(long, default_value_t = 1280.0)]
    pub width: f64,
    #[arg(long, default_value_t = 720.0)]
    pub height: f64,
    #[arg(long, default_value_t = 10)]
    pub min_lifetime: u32,
    #[arg(long, default_value_t = 0.05)]
    pub dropout: f64,
    #[arg(long, default_value_t = 0.5)]
    pub jitter: f64,
    /// Expected spurious detections per frame.
    #[arg(long, default_value_t = 0.2)]
    pub fp_rate: f64,
    #[arg(long, default_value_t = 0.02)]
    pub duplicate_prob: f64,
    /// Turn off jitter, dropout, duplicates and false positives.
    #[arg(long)]
    pub noise_free: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NoiseRuleArg {
    Both,
    Either,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Detections file, or a directory of them.
    pub input: PathBuf,
    /// Tracks file (directory when the input is one). Stdout if omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub eps: u32,
    #[arg(long, default_value_t = 0.7)]
    pub tau_d: f64,
    #[arg(long, default_value_t = 3)]
    pub tau_l: u32,
    #[arg(long, default_value_t = 0.3)]
    pub tau_c: f64,
    #[arg(long, value_enum, default_value_t = NoiseRuleArg::Both)]
    pub noise_rule: NoiseRuleArg,
}

impl ClusterArgs {
    pub fn config(&self) -> ClusterConfig {
        ClusterConfig {
            eps: self.eps,
            tau_d: self.tau_d,
            tau_l: self.tau_l,
            tau_c: self.tau_c,
            noise_rule: match self.noise_rule {
                NoiseRuleArg::Both => NoiseRule::Both,
                NoiseRuleArg::Either => NoiseRule::Either,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    Stdm,
    Ic15,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpatialArg {
    /// Mean per-frame IoU over the shared frames.
    Mean,
    /// IoU of the lifetime enclosing boxes.
    Enclosing,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth tracks file or directory.
    #[arg(long)]
    pub gt: PathBuf,
    /// Predicted tracks file or directory.
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, value_enum, default_value_t = Protocol::Stdm)]
    pub protocol: Protocol,
    /// Spatial IoU threshold (the per-box threshold under ic15).
    #[arg(long, default_value_t = 0.5)]
    pub theta_l: f64,
    #[arg(long, default_value_t = 0.5)]
    pub theta_r: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = SpatialArg::Mean)]
    pub spatial: SpatialArg,
}

impl EvalArgs {
    pub fn config(&self) -> MatchConfig {
        MatchConfig {
            theta_l: self.theta_l,
            theta_r: self.theta_r,
            alpha: self.alpha,
            spatial: match self.spatial {
                SpatialArg::Mean => SpatialIouMode::PerFrameMean,
                SpatialArg::Enclosing => SpatialIouMode::EnclosingBox,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct AttrsArgs {
    /// Ground-truth tracks file; rewritten in place unless --output or --csv is given.
    pub input: PathBuf,
    /// Write the annotated file here instead of in place.
    #[arg(short, long, conflicts_with = "csv")]
    pub output: Option<PathBuf>,
    /// Emit a CSV summary to this path (`-` for stdout) instead of annotating.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}
