use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "condpath", version, about = "Conditional path analysis for linear path diagrams")]
pub struct Cli {
    /// Diagram file, or `-` for standard input.
    #[arg(short, long, global = true, value_name = "FILE")]
    pub diagram: Option<PathBuf>,

    /// Emit one JSON record instead of the text report.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check acyclicity, positive definiteness and well-formedness.
    Validate,
    /// Implied covariance of two nodes, or the whole matrix.
    Cov {
        x: Option<String>,
        y: Option<String>,
    },
    /// Partial covariance given a set of nodes.
    Pcov {
        x: String,
        y: String,
        #[arg(long, num_args = 1..)]
        given: Vec<String>,
    },
    /// Decompose a covariance into one monomial per open path.
    Wright { x: String, y: String },
    /// Decide separation given a set of nodes.
    Dsep {
        x: String,
        y: String,
        #[arg(long, num_args = 1..)]
        given: Vec<String>,
    },
    /// Apply the node-splitting transform.
    Condition {
        #[arg(long, num_args = 1.., required = true)]
        on: Vec<String>,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Factorize a partial covariance into covariance times variance ratios.
    Factorize {
        x: String,
        y: String,
        #[arg(long, num_args = 1..)]
        given: Vec<String>,
        /// Use every shared subpath instead of the longest one.
        #[arg(long)]
        chain: bool,
    },
    /// Collapsibility over a set of nodes, optionally searching for a sign reversal.
    Simpson {
        x: String,
        y: String,
        #[arg(long, num_args = 1..)]
        given: Vec<String>,
        /// Number of random parameterizations to try.
        #[arg(long, value_name = "N")]
        search: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a random diagram.
    Gen(GenArgs),
    /// Run factorizations or sign checks over random instances.
    Sweep {
        #[arg(long, value_enum, default_value_t = SweepKind::Soundness)]
        kind: SweepKind,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Where to write the first failing instance, if any.
        #[arg(long, value_name = "FILE")]
        artifact: Option<PathBuf>,
        #[command(flatten)]
        gen: GenArgs,
    },
    /// Re-run a failure artifact written by `sweep`.
    Replay { artifact: PathBuf },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Soundness,
    Simpson,
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    #[arg(long, default_value_t = 6)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0.4)]
    pub density: f64,
    #[arg(long, default_value_t = 0.2)]
    pub bidirected: f64,
    /// Generate a singly-connected diagram.
    #[arg(long)]
    pub tree: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
