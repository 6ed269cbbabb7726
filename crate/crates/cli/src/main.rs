//! `mcnn`: fitting, threshold optimization, routing and evaluation from the
//! command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod output;

use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "mcnn",
    version,
    about = "Rate-constrained multi-CNN selection toolkit"
)]
pub struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory for outputs when --out is not given.
    #[arg(long, global = true, env = "MCNN_OUT_DIR", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    /// Output file. Results go to stdout when neither this nor an output
    /// directory is set.
    #[arg(long, short, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Worker threads for parallel work; 0 picks one per core.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// Reject accuracy triples violating A_3D >= A_2D >= A_SP instead of
    /// falling back to grid search.
    #[arg(long, global = true)]
    pub strict: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the Gamma source model to manifest r_motion values.
    FitSource {
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Histogram bins for the KL diagnostic.
        #[arg(long)]
        kl_bins: Option<usize>,
    },
    /// Fit the linear 3D/2D stream-rate models from manifest r_3d / r_2d.
    FitRates {
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Optimal thresholds for one budget.
    Optimize {
        #[command(flatten)]
        model: ModelArgs,
        /// Available rate, kbps.
        #[arg(long)]
        budget: f64,
    },
    /// Optimal thresholds over a range of budgets.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// Explicit ascending budgets, kbps; overrides the range.
        #[arg(long, value_delimiter = ',')]
        budgets: Option<Vec<f64>>,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Route every manifest video under a policy.
    Select {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        accuracies: AccuracyArgs,
    },
    /// Score a policy against per-video correctness bits.
    Evaluate {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Per-bin counts of videos each temporal classifier got right.
    BinOverlap {
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Bin width, kbps.
        #[arg(long)]
        bin_width: Option<f64>,
    },
    /// Average rates per (codec, qp).
    RateTable {
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// aEPE of motion-vector flow against ground-truth .flo frames.
    Aepe {
        /// MVSC sidecar.
        #[arg(long)]
        mv: PathBuf,
        /// Directory of .flo frames, paired with sidecar frames in file
        /// name order.
        #[arg(long)]
        flow_dir: PathBuf,
    },
    /// Export classifier input volumes as raw little-endian float32.
    Volumes {
        #[arg(long)]
        mv: PathBuf,
        #[arg(long, value_enum)]
        layout: LayoutArg,
        /// Spatial crop size in blocks.
        #[arg(long)]
        size: Option<usize>,
        /// Frames per volume.
        #[arg(long)]
        temporal_extent: Option<usize>,
        #[arg(long, default_value_t = 0)]
        t_start: usize,
        /// Fail on short videos instead of looping them.
        #[arg(long)]
        no_loop: bool,
        /// Single crop `x,y` (block units); default is the ten-crop set.
        #[arg(long, value_delimiter = ',', value_name = "X,Y")]
        crop: Option<Vec<usize>>,
        /// Mirror the single crop horizontally.
        #[arg(long, requires = "crop")]
        flip: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LayoutArg {
    #[value(name = "split-4d")]
    Split4d,
    #[value(name = "stacked-3d")]
    Stacked3d,
}

#[derive(Debug, Args)]
pub struct AccuracyArgs {
    /// Classifier accuracies `A_3D,A_2D,A_SP`.
    #[arg(long, value_delimiter = ',', value_name = "A_3D,A_2D,A_SP")]
    pub accuracies: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Source model JSON (`alpha`, `beta`), e.g. fit-source output.
    #[arg(long, value_name = "FILE")]
    pub source: Option<PathBuf>,
    /// Rate model JSON (`a_3d`, `b_3d`, `a_2d`, `b_2d`), e.g. fit-rates output.
    #[arg(long, value_name = "FILE")]
    pub rates: Option<PathBuf>,
    /// Spatial-route rate, kbps.
    #[arg(long)]
    pub i_sp: Option<f64>,
    #[command(flatten)]
    pub accuracies: AccuracyArgs,
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    /// Policy JSON: optimize output or a bare policy object.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["r_low", "r_high"])]
    pub policy: Option<PathBuf>,
    #[arg(long, requires = "r_high")]
    pub r_low: Option<f64>,
    #[arg(long, requires = "r_low")]
    pub r_high: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
