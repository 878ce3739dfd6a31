use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bergman", version, about = "Toeplitz operators on weighted Bergman spaces of the unit ball")]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Output directory (files are written here instead of standard output).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Seed for Monte Carlo rules and random directions.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Tolerance of the subcommand's main check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Print the resolved plan and exit without computing.
    #[arg(long, global = true)]
    pub dry_run: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct QuadArgs {
    /// Quadrature scheme: gauss-jacobi or monte-carlo.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Radial and angular order of the product rule.
    #[arg(long)]
    pub order: Option<usize>,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct GeometryArgs {
    /// Dimension of the full ball.
    #[arg(long)]
    pub n: Option<usize>,
    /// Dimension of the first factor.
    #[arg(long)]
    pub ell: Option<usize>,
    /// Partition of the first factor, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AssemblyArg {
    Auto,
    Quadrature,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a symbol and print its canonical form.
    Parse {
        #[arg(long)]
        symbol: String,
        #[command(flatten)]
        geometry: GeometryArgs,
    },
    /// Assemble a truncated Toeplitz matrix and export it as CSV.
    Matrix {
        #[arg(long)]
        symbol: String,
        /// Dimension of a plain ball (ignored when --n is given).
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long = "D", default_value_t = 4)]
        cutoff: u32,
        #[arg(long, value_enum, default_value_t = AssemblyArg::Auto)]
        assembly: AssemblyArg,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Eigenvalues γ(ρ) of a quasi-radial profile for all levels |ρ| <= rmax.
    Gamma {
        /// Partition k, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        /// Profile in the radii r1, r2, ...
        #[arg(long, conflicts_with = "table")]
        profile: Option<String>,
        /// Tabulated one-group profile, CSV `r,value`.
        #[arg(long)]
        table: Option<PathBuf>,
        /// Treat the table as piecewise constant.
        #[arg(long)]
        step: bool,
        #[arg(long, default_value_t = 10)]
        rmax: u32,
        #[arg(long)]
        order: Option<usize>,
    },
    /// Operator norm of a truncated Toeplitz matrix on B^d with weight μ.
    Norm {
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        #[arg(long = "D", default_value_t = 8)]
        cutoff: u32,
        #[arg(long, value_enum, default_value_t = AssemblyArg::Auto)]
        assembly: AssemblyArg,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Level blocks of a torus-invariant symbol on B^n; products are also
    /// checked against the tensor factorization.
    Decompose {
        #[arg(long)]
        symbol: String,
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long = "D", default_value_t = 6)]
        cutoff: u32,
        /// Largest |ρ| to report (default: D).
        #[arg(long)]
        levels: Option<u32>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Berezin transform of a symbol (and of its truncated operator with --D).
    Berezin {
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 0.0)]
        mu: f64,
        /// Point as comma separated complex numbers, e.g. "0.3+0.1i".
        #[arg(long)]
        point: String,
        #[arg(long = "D")]
        cutoff: Option<u32>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Semicommutator norms and Berezin errors over a μ schedule.
    Quantize {
        #[arg(long)]
        c1: String,
        #[arg(long)]
        c2: Option<String>,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32")]
        mus: Vec<f64>,
        #[arg(long = "D", default_value_t = 64)]
        cutoff: u32,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Sampled essential spectrum and Fredholm verdict of a matrix symbol.
    Spectrum {
        /// Rows separated by ';', entries by ','.
        #[arg(long)]
        symbol: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Quasi-radial weight profile on the first factor.
        #[arg(long)]
        profile: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 6)]
        levels: u32,
        #[arg(long, default_value_t = 64)]
        random: usize,
        #[arg(long, default_value_t = 6)]
        steps: u32,
    },
    /// Fredholm index report of T_{f_c} on B^n for a matrix symbol c on B^{n-ℓ}.
    Fredholm {
        #[arg(long)]
        symbol: String,
        #[command(flatten)]
        geometry: GeometryArgs,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long = "D", default_value_t = 6)]
        cutoff: u32,
        #[arg(long, default_value_t = 64)]
        random: usize,
        #[arg(long, default_value_t = 6)]
        steps: u32,
    },
    /// Run an experiment suite (norm, factorization, quantization, spectrum or all).
    Suite {
        name: String,
        /// Override a configuration key, `key=value`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}
