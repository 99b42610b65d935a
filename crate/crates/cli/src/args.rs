use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wsp_core::io::ImageLayout;
use wsp_core::InitScheme;

#[derive(Debug, Parser)]
#[command(
    name = "wsp",
    version,
    about = "Support points and weighted support points by energy-distance minimization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Support points of the empirical measure of a dataset.
    #[command(args_override_self = true)]
    Sp(SpArgs),
    /// Weighted support points of random measures, one optimizer run per draw.
    #[command(args_override_self = true)]
    Wsp(WspArgs),
    /// Draw one random measure, optionally checking its centering.
    #[command(args_override_self = true)]
    Rmeasure(RmeasureArgs),
    /// Energy distance between two (optionally weighted) point sets.
    #[command(args_override_self = true)]
    Energy(EnergyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    /// Uniform draws inside the data bounding box.
    Uniform,
    /// Distinct data columns.
    Columns,
}

impl InitArg {
    pub fn scheme(self) -> InitScheme {
        match self {
            InitArg::Uniform => InitScheme::UniformBoundingBox,
            InitArg::Columns => InitScheme::SampleColumns,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InitArg::Uniform => "uniform",
            InitArg::Columns => "columns",
        }
    }
}

/// Where the reference data comes from and how it is preprocessed.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Matrix file (text or WSPM), IDX image file, or a folder of PNG images.
    #[arg(long)]
    pub input: PathBuf,

    /// IDX label file matching `--input`.
    #[arg(long, requires = "keep")]
    pub labels: Option<PathBuf>,

    /// Labels to keep, comma separated (e.g. `6,9`).
    #[arg(long, value_delimiter = ',', requires = "labels")]
    pub keep: Vec<u8>,

    /// Bilinear resize of image data to `HxW`.
    #[arg(long, value_parser = parse_size)]
    pub resize: Option<(usize, usize)>,

    /// Image layout `HxW` or `HxWxC` for matrix inputs holding images.
    #[arg(long, value_parser = parse_layout)]
    pub layout: Option<ImageLayout>,
}

/// Optimizer and output options shared by `sp` and `wsp`.
#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    /// Number of support points.
    #[arg(long)]
    pub n: usize,

    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,

    #[arg(long = "max-iter", default_value_t = 1000)]
    pub max_iter: usize,

    /// Compare `|s^l - s^(l-1)| / max(1, |s^l|)` with the tolerance.
    #[arg(long = "relative-tol")]
    pub relative_tol: bool,

    #[arg(long, value_enum, default_value_t = InitArg::Uniform)]
    pub init: InitArg,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,

    /// Output matrix; `.wspm`/`.bin` write binary, anything else text.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Manifest path (default: `<out>.manifest`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    /// Render the points as a PNG grid (image data only).
    #[arg(long)]
    pub render: Option<PathBuf>,

    /// Images per grid row (default: n).
    #[arg(long = "grid-cols")]
    pub grid_cols: Option<usize>,

    /// Per-iteration trace as CSV (`iter,cost,delta,ms`).
    #[arg(long)]
    pub trace: Option<PathBuf>,

    /// Keep raw optimizer output for image data instead of clipping and rounding.
    #[arg(long = "no-clip")]
    pub no_clip: bool,
}

/// Random-measure options shared by `wsp` and `rmeasure`.
#[derive(Debug, Clone, Args)]
pub struct MeasureArgs {
    /// Minimum fraction of atoms kept by the subset-size rule.
    #[arg(long = "subset-floor", default_value_t = 0.6)]
    pub subset_floor: f64,

    #[arg(long = "theta-lo", default_value_t = 0.7)]
    pub theta_lo: f64,

    #[arg(long = "theta-hi", default_value_t = 0.9)]
    pub theta_hi: f64,

    /// Keep exactly this many atoms instead of the randomized rule.
    #[arg(long = "fixed-subset")]
    pub fixed_subset: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SpArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub opt: OptimizeArgs,
    /// `key = value` defaults; command-line flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct WspArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub opt: OptimizeArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Target coefficient of variation of the random weights.
    #[arg(long, default_value_t = 0.4)]
    pub cv: f64,
    /// Number of independent runs.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Execute runs concurrently.
    #[arg(long = "parallel-runs")]
    pub parallel_runs: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RmeasureArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long)]
    pub cv: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Measure file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Manifest path (default: `<out>.manifest` when `--out` is given).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Estimate the centering gap on random half-space events.
    #[arg(long = "check-centering")]
    pub check_centering: bool,
    #[arg(long, default_value_t = 20_000)]
    pub draws: usize,
    /// Number of half-space events for the centering check.
    #[arg(long, default_value_t = 40)]
    pub events: usize,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EnergyArgs {
    /// First point set (matrix, IDX or PNG folder).
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    /// Random-measure file weighting `--a` (atoms restricted to its indices).
    #[arg(long = "weights-a")]
    pub weights_a: Option<PathBuf>,
    #[arg(long = "weights-b")]
    pub weights_b: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_dims(s: &str) -> Result<Vec<usize>, String> {
    s.split(['x', 'X'])
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| format!("`{t}` is not a positive integer"))
        })
        .collect()
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    match parse_dims(s)?.as_slice() {
        [h, w] => Ok((*h, *w)),
        _ => Err("expected HxW".into()),
    }
}

fn parse_layout(s: &str) -> Result<ImageLayout, String> {
    match parse_dims(s)?.as_slice() {
        [h, w] => Ok(ImageLayout::new(*h, *w, 1)),
        [h, w, c] if *c == 1 || *c == 3 => Ok(ImageLayout::new(*h, *w, *c)),
        _ => Err("expected HxW or HxWxC with C in {1, 3}".into()),
    }
}
