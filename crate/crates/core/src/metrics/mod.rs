//! Partition similarity: confusion matrices, the assignment solver behind
//! normalized clustering accuracy, and the external validity indices.

mod assignment;
mod confusion;
mod indices;

use thiserror::Error;

use crate::labels::LabelError;

pub use assignment::{solve_assignment, Permutation};
pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use indices::{adjusted_rand, nca, normalized_mutual_info};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("label vectors differ in length: {reference} reference vs {predicted} predicted")]
    LengthMismatch { reference: usize, predicted: usize },
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error("label {label} outside 1..={k}")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("matrix is {rows}x{cols}, a square matrix is required")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has no entries")]
    EmptyMatrix,
    #[error("matrix rows differ in length")]
    Ragged,
    #[error("matrix contains a non-finite weight")]
    NonFinite,
    #[error("reference cluster {row} has no points")]
    EmptyRow { row: usize },
    #[error("{n} points compared, at least {required} required")]
    TooFewPoints { n: u64, required: u64 },
    #[error("at least 2 clusters required, found {k}")]
    TooFewClusters { k: usize },
}
