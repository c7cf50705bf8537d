use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pfo", version, about = "Wasserstein regression of transfer operators from distributional snapshots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Experiment config (JSON). A previous run.json is accepted as well.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed for all randomness.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DescentArgs {
    /// Gradient descent step size.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Iteration cap; 0 evaluates the initial guess only.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Stop once the gradient norm drops below this value.
    #[arg(long)]
    pub grad_tol: Option<f64>,
    /// Enable Armijo backtracking.
    #[arg(long)]
    pub backtracking: bool,
    /// Step on the plain sum over snapshot pairs rather than their average.
    #[arg(long)]
    pub sum_pairs: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Identity,
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    /// Powers 3, 1, 0 of (1 - x).
    Cubic,
    Linear,
    Affine,
    /// Powers of (1 - x) given by --exponents.
    Monomials,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Grid,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OtMode {
    ClosedForm,
    Sampled,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the Gaussian snapshots of a linear stochastic system.
    SimulateAr1 {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of snapshots.
        #[arg(long)]
        steps: Option<usize>,
        /// Drop the process noise.
        #[arg(long)]
        noise_free: bool,
    },
    /// Fit a linear map to Gaussian snapshots.
    FitGaussian {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        descent: DescentArgs,
        /// Gaussian snapshot file; the built-in AR(1) sequence when absent.
        #[arg(long)]
        snapshots: Option<PathBuf>,
        #[arg(long, value_enum)]
        init: Option<InitArg>,
        /// Iterations whose pushforward ellipses are written.
        #[arg(long, alias = "ellipse-iters", value_delimiter = ',')]
        dump_iters: Option<Vec<usize>>,
    },
    /// Fit a basis-function model to point-cloud snapshots.
    FitEmpirical {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        descent: DescentArgs,
        /// Empirical snapshot file; the built-in cubic generator when absent.
        #[arg(long)]
        snapshots: Option<PathBuf>,
        #[arg(long, value_enum)]
        basis: Option<BasisArg>,
        #[arg(long, value_delimiter = ',')]
        exponents: Option<Vec<u32>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta_init: Option<Vec<f64>>,
        /// Points per snapshot for the built-in generator.
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long, value_enum)]
        sampling: Option<SamplingArg>,
        /// Iterations whose map curves and densities are written.
        #[arg(long, value_delimiter = ',')]
        dump_iters: Option<Vec<usize>>,
    },
    /// Wasserstein-2 distance between two measure files.
    Ot {
        source: PathBuf,
        target: PathBuf,
        /// Defaults to closed-form for two Gaussians, exact discrete otherwise.
        #[arg(long, value_enum)]
        mode: Option<OtMode>,
        /// Samples drawn per Gaussian in sampled mode.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for the coupling or Monge map file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ulam box discretization of a map.
    Ulam {
        #[command(flatten)]
        common: CommonArgs,
        /// Boxes per axis.
        #[arg(long, value_delimiter = ',')]
        boxes: Option<Vec<usize>>,
        #[arg(long)]
        samples_per_box: Option<usize>,
    },
    /// Extended DMD on a trajectory of a map.
    Edmd {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of trajectory states.
        #[arg(long)]
        steps: Option<usize>,
        /// Use all monomials up to this total degree instead of the coordinates.
        #[arg(long)]
        degree: Option<u32>,
    },
}
