//! `herglotz`: run the approximation experiments or any single stage of them.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "herglotz", version, about = "Approximate functions by Herglotz wave functions")]
struct Cli {
    /// Experiment config (TOML). Also supplies defaults to the stage commands.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Use the full-size grids (512² planar, 256³ volumetric).
    #[arg(long, global = true)]
    paper_scale: bool,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Reserved; every stage is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Zero-padding factor for the spectrum sampled onto the sphere.
    #[arg(long, global = true)]
    spectral_padding: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a whole experiment and write its manifest.
    Run,
    /// Sample the configured target on its grid.
    TargetGen(TargetGenArgs),
    /// Forward (or inverse) DFT of a sample file.
    Dft(DftArgs),
    /// Compute a Herglotz density from a field or spectrum.
    Density(DensityArgs),
    /// Evaluate a density on a plane or at listed points.
    Eval(EvalArgs),
    /// Zero level set of the real part of a planar field.
    Levelset(LevelsetArgs),
    /// Compare fields or level sets, or check the Helmholtz residual.
    Metrics(MetricsArgs),
    /// Draw fields, densities or contours as PNG.
    Render(RenderArgs),
    /// Boundary excitation `n·∇u + ikαu` at listed samples.
    Excite(ExciteArgs),
}

#[derive(Args, Debug)]
struct TargetGenArgs {
    /// Samples per axis; overrides the config.
    #[arg(long)]
    samples: Option<usize>,
    /// Gaussian targets: 2 or 3 dimensions.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DftArgs {
    input: PathBuf,
    #[arg(long)]
    inverse: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum DensityMethod {
    Plane,
    TimeReversal,
    Asymptotic,
    Modal,
}

#[derive(Args, Debug)]
struct DensityArgs {
    /// Field or spectrum file.
    input: PathBuf,
    #[arg(long, value_enum)]
    method: DensityMethod,
    /// Triangle count of the sphere mesh; overrides the config.
    #[arg(long)]
    triangles: Option<usize>,
    /// Modal truncation degree N.
    #[arg(long)]
    max_degree: Option<usize>,
    /// Modal ball radius R in wavelengths.
    #[arg(long)]
    radius: Option<f64>,
    /// Also write the modal coefficients here.
    #[arg(long)]
    coefficients: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Density CSV.
    density: PathBuf,
    /// Height `x₃` of the evaluation plane in wavelengths.
    #[arg(long, conflicts_with = "points", allow_negative_numbers = true)]
    plane: Option<f64>,
    /// CSV of `x,y,z` rows.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    half_extent: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LevelsetArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// Relative L² difference `‖a − b‖/‖b‖` of two fields.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    rel_l2: Option<Vec<PathBuf>>,
    /// Symmetric mean distance between two level sets.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    nodal: Option<Vec<PathBuf>>,
    /// First zero of a planar field along +x₁.
    #[arg(long)]
    radial_zero: Option<PathBuf>,
    /// Finite-difference Helmholtz residual of a density on a cube.
    #[arg(long)]
    residual: Option<PathBuf>,
    /// Cube samples per axis for `--residual`.
    #[arg(long, default_value_t = 16)]
    samples: usize,
    /// Cube half extent in wavelengths for `--residual`.
    #[arg(long, default_value_t = 0.5)]
    half_extent: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PartArg {
    Re,
    Im,
}

#[derive(Subcommand, Debug)]
enum RenderKind {
    /// Diverging colour map of the real part of a planar field.
    Heatmap {
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        vmin: f64,
        #[arg(long, allow_negative_numbers = true)]
        vmax: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Mollweide map of a density.
    Mollweide {
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        vmin: f64,
        #[arg(long, allow_negative_numbers = true)]
        vmax: f64,
        #[arg(long, value_enum, default_value_t = PartArg::Re)]
        part: PartArg,
        #[arg(long, default_value_t = 720)]
        width: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Level sets, the first in black and the second in red.
    Contours {
        #[arg(num_args = 1..=2, required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 5.0)]
        half_extent: f64,
        #[arg(long, default_value_t = 512)]
        size: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[command(subcommand)]
    kind: RenderKind,
}

#[derive(Args, Debug)]
struct ExciteArgs {
    /// Density CSV.
    density: PathBuf,
    /// CSV of `x,y,z,nx,ny,nz,re_alpha,im_alpha` rows.
    #[arg(long)]
    samples: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Library errors already carry their causes in the message.
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
