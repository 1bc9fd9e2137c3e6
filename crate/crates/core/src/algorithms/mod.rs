//! Built-in reference clusterers and the multi-k driver.

mod hierarchy;
mod kmeans;

use ndarray::ArrayView2;
use thiserror::Error;

use crate::scoring::{PartitionSet, ScoreError};

pub use hierarchy::{agglomerative, Agglomerative, Dendrogram, Linkage, Merge};
pub use kmeans::{inertia, kmeans, kmeans_restart, KMeans, KMeansConfig, KMeansRun};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgorithmError {
    #[error("cannot form {k} clusters from {n} points (need 2 <= k <= n)")]
    BadK { k: usize, n: usize },
    #[error("data contain non-finite values")]
    NonFinite,
    #[error("data matrix has no rows or no columns")]
    EmptyData,
    #[error("no cluster counts requested")]
    NoKs,
    #[error("cluster count {0} requested twice")]
    DuplicateK(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("clusterer returned an invalid partition: {0}")]
    Partition(#[from] ScoreError),
    #[error("{0}")]
    Failed(String),
}

/// Anything that can split the rows of a data matrix into `k` clusters.
pub trait Clusterer: Sync {
    /// Method name under which results are stored.
    fn name(&self) -> String;

    /// Labels `1..=k`, each used at least once.
    fn fit_predict(&self, data: ArrayView2<'_, f64>, k: usize) -> Result<Vec<usize>, AlgorithmError>;

    /// One partition per requested `k`. Hierarchical methods override this
    /// to build their tree once.
    fn fit_predict_each(
        &self,
        data: ArrayView2<'_, f64>,
        ks: &[usize],
    ) -> Result<PartitionSet, AlgorithmError> {
        let mut set = PartitionSet::new(data.nrows());
        for &k in ks {
            set.insert(self.fit_predict(data, k)?)?;
        }
        Ok(set)
    }
}

/// Runs `algorithm` once for every cluster count in `ks`.
pub fn fit_predict_many(
    algorithm: &dyn Clusterer,
    data: ArrayView2<'_, f64>,
    ks: &[usize],
) -> Result<PartitionSet, AlgorithmError> {
    if ks.is_empty() {
        return Err(AlgorithmError::NoKs);
    }
    for (i, &k) in ks.iter().enumerate() {
        if ks[..i].contains(&k) {
            return Err(AlgorithmError::DuplicateK(k));
        }
        check_input(data, k)?;
    }
    let set = algorithm.fit_predict_each(data, ks)?;
    debug_assert_eq!(set.len(), ks.len());
    Ok(set)
}

pub(crate) fn check_points(data: ArrayView2<'_, f64>) -> Result<(), AlgorithmError> {
    if data.nrows() == 0 || data.ncols() == 0 {
        return Err(AlgorithmError::EmptyData);
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(AlgorithmError::NonFinite);
    }
    Ok(())
}

pub(crate) fn check_input(data: ArrayView2<'_, f64>, k: usize) -> Result<(), AlgorithmError> {
    let n = data.nrows();
    if k < 2 || k > n {
        return Err(AlgorithmError::BadK { k, n });
    }
    check_points(data)
}
