use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use clubench_core::MetricId;

use crate::external::DEFAULT_TIMEOUT_SECS;
use crate::report::Format;

#[derive(Debug, Parser)]
#[command(name = "clubench", version, about = "Benchmark clustering algorithms against reference partitions")]
pub struct Cli {
    /// Root of the benchmark data (`<battery>/<dataset>.data.gz`, ...)
    #[arg(long, global = true, env = "CLUBENCH_DATA")]
    pub data: Option<PathBuf>,

    /// Root of the stored results (`<method>/<battery>/<dataset>.result<k>.gz`)
    #[arg(long, global = true, env = "CLUBENCH_RESULTS")]
    pub results: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Default, Clone, Args)]
pub struct Selection {
    /// Only this battery (repeatable)
    #[arg(long = "battery", value_name = "BATTERY")]
    pub batteries: Vec<String>,

    /// Only datasets with this name (repeatable)
    #[arg(long = "dataset", value_name = "DATASET")]
    pub datasets: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print `battery/dataset  n  d  ks` for every dataset
    List {
        #[command(flatten)]
        selection: Selection,
    },
    /// Cluster the selected datasets at every reference cluster count and
    /// store the partitions
    Run {
        #[command(flatten)]
        selection: Selection,

        /// kmeans, single, complete, average, or exec:"COMMAND {data} {k}"
        #[arg(long)]
        method: String,

        /// Name to store results under (required for exec: methods)
        #[arg(long)]
        name: Option<String>,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Parallel workers (default: all cores)
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        workers: Option<u64>,

        /// Seconds an external tool may take per cluster count
        #[arg(long, default_value_t = DEFAULT_TIMEOUT_SECS, value_parser = clap::value_parser!(u64).range(1..))]
        timeout: u64,
    },
    /// Score stored partitions against the reference labellings
    Score {
        #[command(flatten)]
        selection: Selection,

        /// Method group, matched as a prefix of variant names (repeatable;
        /// default: every stored method)
        #[arg(long = "method", value_name = "GROUP")]
        methods: Vec<String>,

        /// nca, ar or nmi (repeatable)
        #[arg(long = "metric", default_value = "nca")]
        metrics: Vec<MetricId>,

        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,

        /// Parallel workers (default: all cores)
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        workers: Option<u64>,
    },
    /// Draw a reference labelling or a stored partition as an SVG scatterplot
    Plot {
        #[arg(long)]
        battery: String,

        #[arg(long)]
        dataset: String,

        /// Index j of the reference labelling `labels<j>` (default 0)
        #[arg(long, conflicts_with = "method")]
        labels: Option<usize>,

        /// Stored method variant to draw instead of a reference labelling
        #[arg(long, requires = "k")]
        method: Option<String>,

        #[arg(long, requires = "method")]
        k: Option<usize>,

        /// Output file
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the confusion matrix of a stored partition
    Confusion {
        #[arg(long)]
        method: String,

        #[arg(long)]
        battery: String,

        #[arg(long)]
        dataset: String,

        #[arg(long)]
        k: usize,
    },
}
