//! Benchmarking clustering algorithms against expert reference partitions.
//!
//! * [`dataset`] reads and writes benchmark batteries (`battery/dataset`
//!   with one or more reference labellings, `0` marking noise points);
//! * [`metrics`] compares two partitions: confusion matrices, normalized
//!   clustering accuracy, adjusted Rand index and normalized mutual
//!   information;
//! * [`scoring`] drops noise points, compares predictions with every
//!   reference labelling at the matching cluster count and keeps the best
//!   score;
//! * [`algorithms`] provides k-means and agglomerative baselines;
//! * [`results`] stores predicted partitions per method.

pub mod algorithms;
pub mod dataset;
pub mod labels;
pub mod metrics;
pub mod results;
pub mod scoring;
mod textio;

pub use dataset::{load_dataset, BenchmarkDataset, DataError, ReferenceLabelling};
pub use scoring::{get_score, MetricId, PartitionSet};
