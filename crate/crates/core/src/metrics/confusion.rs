use std::fmt;

use super::MetricError;
use crate::labels::validate_partition;

/// Contingency table between a reference partition (rows) and a predicted
/// one (columns): `count(i, j)` is the number of points of reference
/// cluster `i` assigned to predicted cluster `j`. Indices are 0-based here,
/// i.e. row `i` holds reference label `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    n_rows: usize,
    n_cols: usize,
    counts: Vec<u64>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    total: u64,
}

impl ConfusionMatrix {
    /// Builds a matrix from explicit counts. Rows must all have the same,
    /// nonzero length and the grand total must be positive.
    pub fn from_counts(rows: &[Vec<u64>]) -> Result<Self, MetricError> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if n_rows == 0 || n_cols == 0 {
            return Err(MetricError::EmptyMatrix);
        }
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(MetricError::Ragged);
        }
        let counts = rows.iter().flatten().copied().collect();
        Self::from_flat(n_rows, n_cols, counts)
    }

    fn from_flat(n_rows: usize, n_cols: usize, counts: Vec<u64>) -> Result<Self, MetricError> {
        let mut row_sums = vec![0u64; n_rows];
        let mut col_sums = vec![0u64; n_cols];
        for (idx, &c) in counts.iter().enumerate() {
            row_sums[idx / n_cols] += c;
            col_sums[idx % n_cols] += c;
        }
        let total = row_sums.iter().sum();
        if total == 0 {
            return Err(MetricError::TooFewPoints { n: 0, required: 1 });
        }
        Ok(Self {
            n_rows,
            n_cols,
            counts,
            row_sums,
            col_sums,
            total,
        })
    }

    /// Cross-tabulates two label vectors with known cluster counts. Labels
    /// must lie in `1..=k_ref` and `1..=k_pred`; clusters may be empty, in
    /// which case the corresponding row or column is all zeros.
    pub fn tabulate(
        y_ref: &[usize],
        k_ref: usize,
        y_pred: &[usize],
        k_pred: usize,
    ) -> Result<Self, MetricError> {
        if y_ref.len() != y_pred.len() {
            return Err(MetricError::LengthMismatch {
                reference: y_ref.len(),
                predicted: y_pred.len(),
            });
        }
        if k_ref == 0 || k_pred == 0 {
            return Err(MetricError::EmptyMatrix);
        }
        let mut counts = vec![0u64; k_ref * k_pred];
        for (&r, &p) in y_ref.iter().zip(y_pred) {
            if !(1..=k_ref).contains(&r) {
                return Err(MetricError::LabelOutOfRange { label: r, k: k_ref });
            }
            if !(1..=k_pred).contains(&p) {
                return Err(MetricError::LabelOutOfRange { label: p, k: k_pred });
            }
            counts[(r - 1) * k_pred + (p - 1)] += 1;
        }
        Self::from_flat(k_ref, k_pred, counts)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn count(&self, row: usize, col: usize) -> u64 {
        self.counts[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.counts[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    /// Number of compared points.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub(crate) fn cells(&self) -> &[u64] {
        &self.counts
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.n_rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = Vec::with_capacity(self.counts.len());
        for j in 0..self.n_cols {
            for i in 0..self.n_rows {
                counts.push(self.count(i, j));
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            counts,
            row_sums: self.col_sums.clone(),
            col_sums: self.row_sums.clone(),
            total: self.total,
        }
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.counts.iter().map(|c| c.to_string().len()).max().unwrap_or(1);
        for i in 0..self.n_rows {
            let cells: Vec<String> = self
                .row(i)
                .iter()
                .map(|c| format!("{c:>width$}"))
                .collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Confusion matrix of two noise-free partitions, each labelled with
/// contiguous IDs `1..=k`.
pub fn confusion_matrix(y_ref: &[usize], y_pred: &[usize]) -> Result<ConfusionMatrix, MetricError> {
    if y_ref.len() != y_pred.len() {
        return Err(MetricError::LengthMismatch {
            reference: y_ref.len(),
            predicted: y_pred.len(),
        });
    }
    let k_ref = contiguous_k(y_ref)?;
    let k_pred = contiguous_k(y_pred)?;
    ConfusionMatrix::tabulate(y_ref, k_ref, y_pred, k_pred)
}

/// Like [`validate_partition`] but a single cluster is fine here.
fn contiguous_k(labels: &[usize]) -> Result<usize, MetricError> {
    match validate_partition(labels) {
        Ok(k) => Ok(k),
        Err(crate::labels::LabelError::TooFewClusters { k: 1 }) => Ok(1),
        Err(e) => Err(MetricError::Label(e)),
    }
}
