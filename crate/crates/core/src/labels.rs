//! Label vector validation shared by reference labellings and predictions.
//!
//! Cluster IDs are 1-based. In reference labellings `0` marks a noise
//! point; predicted partitions never contain `0`.

use thiserror::Error;

/// Label `0`, reserved for noise points in reference labellings.
pub const NOISE: usize = 0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("label vector is empty")]
    Empty,
    #[error("negative label {value} at position {index}")]
    Negative { index: usize, value: i64 },
    #[error("at least 2 clusters required, found {k}")]
    TooFewClusters { k: usize },
    #[error("label {label} missing (labels must cover 1..={k})")]
    Missing { label: usize, k: usize },
    #[error("noise label 0 at position {index} is not allowed in a partition")]
    Noise { index: usize },
    #[error("expected {expected} labels, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("expected {expected} clusters, found {found}")]
    WrongClusterCount { expected: usize, found: usize },
}

/// Checks a reference labelling read from an external source and returns its
/// cluster count `k = max(labels)`.
///
/// Values must lie in `0..=k` with every ID in `1..=k` present and `k >= 2`.
pub fn validate_labelling(labels: &[i64]) -> Result<usize, LabelError> {
    if labels.is_empty() {
        return Err(LabelError::Empty);
    }
    if let Some((index, &value)) = labels.iter().enumerate().find(|(_, &v)| v < 0) {
        return Err(LabelError::Negative { index, value });
    }
    let as_usize: Vec<usize> = labels.iter().map(|&v| v as usize).collect();
    check_cover(&as_usize, true)
}

/// Checks a predicted partition: every label in `1..=k`, each present, no
/// noise markers. Returns `k`.
pub fn validate_partition(labels: &[usize]) -> Result<usize, LabelError> {
    if labels.is_empty() {
        return Err(LabelError::Empty);
    }
    if let Some(index) = labels.iter().position(|&v| v == NOISE) {
        return Err(LabelError::Noise { index });
    }
    check_cover(labels, false)
}

fn check_cover(labels: &[usize], allow_noise: bool) -> Result<usize, LabelError> {
    let k = labels.iter().copied().max().unwrap_or(0);
    // A label larger than the vector length necessarily leaves a gap; this
    // also bounds the allocation below for corrupted input.
    if k > labels.len() {
        let mut seen = labels.to_vec();
        seen.sort_unstable();
        seen.dedup();
        let missing = (1..=k)
            .find(|l| seen.binary_search(l).is_err())
            .unwrap_or(k);
        return Err(LabelError::Missing { label: missing, k });
    }
    let mut present = vec![false; k + 1];
    for &l in labels {
        present[l] = true;
    }
    debug_assert!(allow_noise || !present[NOISE]);
    if let Some(label) = (1..=k).find(|&l| !present[l]) {
        return Err(LabelError::Missing { label, k });
    }
    if k < 2 {
        return Err(LabelError::TooFewClusters { k });
    }
    Ok(k)
}

/// Renumbers labels so that clusters are numbered 1, 2, ... in order of
/// their first occurrence.
pub fn relabel_first_occurrence(labels: &[usize]) -> Vec<usize> {
    let mut mapping = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = mapping.len() + 1;
            *mapping.entry(l).or_insert(next)
        })
        .collect()
}
