//! `elastic-graphs`: command-line front end for elastic graph shape analysis.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use elastic_graphs::io::Normalization;
use elastic_graphs::matching::Solver;
use elastic_graphs::ErrorKind;

#[derive(Debug, Parser)]
#[command(
    name = "elastic-graphs",
    version,
    about = "Shape analysis of graphs whose edges are curves"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

/// Settings that override the run configuration file.
#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON run configuration; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Points per edge after arc-length resampling.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, value_parser = parse_solver)]
    solver: Option<Solver>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for emitted files.
    #[arg(long, short = 'd', global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    normalize: Option<NormalizeArg>,
    /// More log output (repeat for more).
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn parse_solver(s: &str) -> Result<Solver, String> {
    s.parse().map_err(|e: elastic_graphs::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormalizeArg {
    None,
    TotalLength,
}

impl From<NormalizeArg> for Normalization {
    fn from(n: NormalizeArg) -> Self {
        match n {
            NormalizeArg::None => Normalization::None,
            NormalizeArg::TotalLength => Normalization::TotalLength,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Space {
    Preshape,
    Quotient,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quotient distance between two graphs, with the node matching.
    Dist {
        first: PathBuf,
        second: PathBuf,
        /// Output file (default: dist.json in the output directory).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Path between two graphs, written as one graph file per step.
    Geodesic {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 7)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Space::Quotient)]
        space: Space,
    },
    /// Karcher mean of a set of graphs and the registered samples.
    Mean {
        #[arg(required = true, num_args = 1..)]
        graphs: Vec<PathBuf>,
    },
    /// Tangent PCA: scores, singular values and principal paths.
    Pca {
        #[arg(required = true, num_args = 2..)]
        graphs: Vec<PathBuf>,
        #[arg(long, default_value_t = 3)]
        components: usize,
    },
    /// Pairwise quotient distances.
    Distmat {
        #[arg(required = true, num_args = 2..)]
        graphs: Vec<PathBuf>,
        /// Metadata key to order rows by, such as `age`.
        #[arg(long)]
        order_by: Option<String>,
    },
    /// Classical multidimensional scaling of a distance matrix file.
    Mds {
        distmat: PathBuf,
        #[arg(short, default_value_t = 2)]
        k: usize,
    },
    /// Hypothesis tests on PCA scores or distance matrices.
    Test {
        #[command(subcommand)]
        test: TestCommand,
    },
    /// Converts an SWC morphology to a graph file.
    IngestSwc {
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
}

/// How samples are split into two groups.
#[derive(Debug, Args)]
struct Grouping {
    /// Metadata key defining the groups.
    #[arg(long)]
    group_by: String,
    /// For numeric keys, samples at or above this value form the second
    /// group.
    #[arg(long, default_value_t = 50.0)]
    threshold: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StatisticArg {
    MeanDifference,
    PseudoF,
}

#[derive(Debug, Subcommand)]
enum TestCommand {
    /// Two-sample t-test on one component's scores.
    T {
        #[arg(long)]
        scores: PathBuf,
        #[command(flatten)]
        grouping: Grouping,
        /// Component, counted from 1.
        #[arg(long, default_value_t = 1)]
        component: usize,
        /// Equal-variance t instead of Welch.
        #[arg(long)]
        pooled: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Hotelling's T² on the leading components.
    Hotelling {
        #[arg(long)]
        scores: PathBuf,
        #[command(flatten)]
        grouping: Grouping,
        #[arg(long, default_value_t = 2)]
        components: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Permutation test on a distance matrix.
    Perm {
        #[arg(long)]
        distmat: PathBuf,
        #[command(flatten)]
        grouping: Grouping,
        #[arg(long)]
        n_perm: Option<usize>,
        #[arg(long, value_enum, default_value_t = StatisticArg::MeanDifference)]
        statistic: StatisticArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Pearson correlation of one component's scores with a covariate.
    Corr {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        covariate: String,
        #[arg(long, default_value_t = 1)]
        component: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

/// A failed command: message for stderr and the process exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<elastic_graphs::Error> for Failure {
    fn from(e: elastic_graphs::Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Numeric => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(&cli.global, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
