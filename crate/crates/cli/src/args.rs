use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "subpix", version, about = "Sublinear-query approximate image matching")]
pub struct Cli {
    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    /// Report wall time (on stderr, and as `wall_ms` in bench rows).
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find a transformation taking M1 close to M2.
    Match(MatchArgs),
    /// Distance between two images under a given transformation.
    Distance(DistanceArgs),
    /// Generate adversarial instance pairs.
    Gen(GenArgs),
    /// Encode a grayscale image as a binary volume.
    Reduce(ReduceArgs),
    /// Grid sizes of a cover, without enumerating it.
    CoverStats(CoverStatsArgs),
    /// Query counts and wall time over a range of image sizes.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Smooth,
    General,
    Exact,
    #[value(name = "3d")]
    ThreeD,
    Gray,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Affine,
    Translation,
    Identity,
}

#[derive(Debug, Args)]
pub struct CoverArgs {
    /// Cover resolution δ′, in (0, √2).
    #[arg(long = "delta", default_value_t = 0.25)]
    pub delta_prime: f64,

    /// Bound c ≥ 1 on scaling factors.
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,

    /// Transformation family the cover spans.
    #[arg(long, value_enum, default_value_t = FamilyArg::Translation)]
    pub family: FamilyArg,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[arg(long, value_enum, default_value_t = Mode::Smooth)]
    pub mode: Mode,

    #[arg(long)]
    pub m1: PathBuf,

    #[arg(long)]
    pub m2: PathBuf,

    #[command(flatten)]
    pub cover: CoverArgs,

    /// Additive accuracy ε, in (0, 1).
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// General mode: literal objective and discard rule.
    #[arg(long)]
    pub strict_paper: bool,

    /// Write the chosen transformation as a descriptor file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    /// Transform descriptor file.
    #[arg(long)]
    pub t: PathBuf,

    #[arg(long)]
    pub m1: PathBuf,

    #[arg(long)]
    pub m2: PathBuf,

    /// Also report a sampled estimate at this accuracy.
    #[arg(long)]
    pub epsilon: Option<f64>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenFamily {
    D1,
    D2,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: GenFamily,

    #[arg(long)]
    pub n: usize,

    /// Block size; must divide n and be at most n/8.
    #[arg(long, default_value_t = 1)]
    pub k: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Files are written as `<prefix>_m1.pbm`, `<prefix>_m2.pbm` and, for d2,
    /// `<prefix>_shift.json`.
    #[arg(long)]
    pub out_prefix: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Grayscale PGM input.
    #[arg(long = "in")]
    pub input: PathBuf,

    /// VOX3 output.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Space {
    #[value(name = "2d")]
    TwoD,
    #[value(name = "3d")]
    ThreeD,
    Restricted,
}

#[derive(Debug, Args)]
pub struct CoverStatsArgs {
    #[arg(long)]
    pub n: usize,

    #[arg(long, value_enum, default_value_t = Space::TwoD)]
    pub space: Space,

    #[command(flatten)]
    pub cover: CoverArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BenchMode {
    Smooth,
    General,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = BenchMode::Smooth)]
    pub mode: BenchMode,

    /// Comma-separated image sizes.
    #[arg(long, value_delimiter = ',', default_values_t = [64, 128, 256])]
    pub n: Vec<usize>,

    #[command(flatten)]
    pub cover: CoverArgs,

    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
