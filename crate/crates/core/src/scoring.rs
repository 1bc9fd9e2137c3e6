//! Scoring predicted partitions against reference labellings.
//!
//! Noise points (reference label 0) are dropped before comparison, a
//! prediction is compared with each reference labelling at that labelling's
//! cluster count, and the best score over all labellings is reported.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dataset::ReferenceLabelling;
use crate::labels::{validate_partition, LabelError, NOISE};
use crate::metrics::{self, ConfusionMatrix, MetricError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("prediction has {predicted} labels, reference has {reference}")]
    LengthMismatch { reference: usize, predicted: usize },
    #[error("every point is marked as noise in the reference labelling")]
    AllNoise,
    #[error("prediction has {predicted} clusters, reference labelling has {reference}")]
    KMismatch { reference: usize, predicted: usize },
    #[error("no predicted partition with {k} clusters")]
    MissingK { k: usize },
    #[error("partition with {k} clusters given twice")]
    DuplicateK { k: usize },
    #[error("no reference labellings")]
    NoLabellings,
    #[error("invalid prediction: {0}")]
    Prediction(#[from] LabelError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// The external validity measures a score can be computed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum MetricId {
    /// Normalized clustering accuracy.
    #[default]
    Nca,
    AdjustedRand,
    /// Normalized mutual information.
    Nmi,
}

impl MetricId {
    pub const ALL: [MetricId; 3] = [MetricId::Nca, MetricId::AdjustedRand, MetricId::Nmi];

    pub fn name(self) -> &'static str {
        match self {
            MetricId::Nca => "nca",
            MetricId::AdjustedRand => "ar",
            MetricId::Nmi => "nmi",
        }
    }

    pub fn evaluate(self, c: &ConfusionMatrix) -> Result<f64, MetricError> {
        match self {
            MetricId::Nca => metrics::nca(c),
            MetricId::AdjustedRand => metrics::adjusted_rand(c),
            MetricId::Nmi => metrics::normalized_mutual_info(c),
        }
    }

    /// Closed interval every finite score lies in, for `k` reference
    /// clusters.
    pub fn range(self, k: usize) -> (f64, f64) {
        match self {
            MetricId::Nca => (-1.0 / (k.max(2) - 1) as f64, 1.0),
            MetricId::AdjustedRand => (-1.0, 1.0),
            MetricId::Nmi => (0.0, 1.0),
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nca" => Ok(MetricId::Nca),
            "ar" | "ari" | "adjusted_rand" => Ok(MetricId::AdjustedRand),
            "nmi" => Ok(MetricId::Nmi),
            _ => Err(format!("unknown metric {s:?} (expected nca, ar or nmi)")),
        }
    }
}

/// Predicted partitions of one dataset keyed by their cluster count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSet {
    n: usize,
    by_k: BTreeMap<usize, Vec<usize>>,
}

impl PartitionSet {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            by_k: BTreeMap::new(),
        }
    }

    /// Builds a set from label vectors, each of which must have `n` entries.
    pub fn from_partitions<I>(n: usize, partitions: I) -> Result<Self, ScoreError>
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        let mut set = Self::new(n);
        for labels in partitions {
            set.insert(labels)?;
        }
        Ok(set)
    }

    /// Adds a partition labelled `1..=k` (every label used, `k >= 2`) and
    /// returns its `k`.
    pub fn insert(&mut self, labels: Vec<usize>) -> Result<usize, ScoreError> {
        if labels.len() != self.n {
            return Err(LabelError::LengthMismatch {
                expected: self.n,
                found: labels.len(),
            }
            .into());
        }
        let k = validate_partition(&labels)?;
        if self.by_k.contains_key(&k) {
            return Err(ScoreError::DuplicateK { k });
        }
        self.by_k.insert(k, labels);
        Ok(k)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize) -> Option<&[usize]> {
        self.by_k.get(&k).map(Vec::as_slice)
    }

    /// Stored cluster counts, ascending.
    pub fn ks(&self) -> impl Iterator<Item = usize> + '_ {
        self.by_k.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.by_k.iter().map(|(&k, v)| (k, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.by_k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_k.is_empty()
    }
}

/// Restricts both label vectors to the points that are not noise in the
/// reference labelling.
pub fn filter_noise(
    reference: &ReferenceLabelling,
    y_pred: &[usize],
) -> Result<(Vec<usize>, Vec<usize>), ScoreError> {
    let y_ref = reference.labels();
    if y_ref.len() != y_pred.len() {
        return Err(ScoreError::LengthMismatch {
            reference: y_ref.len(),
            predicted: y_pred.len(),
        });
    }
    let (kept_ref, kept_pred): (Vec<usize>, Vec<usize>) = y_ref
        .iter()
        .zip(y_pred)
        .filter(|(&r, _)| r != NOISE)
        .unzip();
    if kept_ref.is_empty() {
        return Err(ScoreError::AllNoise);
    }
    Ok((kept_ref, kept_pred))
}

fn prediction_k(y_pred: &[usize]) -> Result<usize, ScoreError> {
    match validate_partition(y_pred) {
        Ok(k) => Ok(k),
        // a single predicted cluster is a legitimate (if poor) answer
        Err(LabelError::TooFewClusters { k: 1 }) => Ok(1),
        Err(e) => Err(e.into()),
    }
}

/// Confusion matrix of the non-noise points, `k_ref x k_pred`. Predicted
/// clusters that contain only noise points stay as zero columns.
pub fn noise_free_confusion(
    reference: &ReferenceLabelling,
    y_pred: &[usize],
) -> Result<ConfusionMatrix, ScoreError> {
    let k_pred = prediction_k(y_pred)?;
    let (y_ref, y_pred) = filter_noise(reference, y_pred)?;
    Ok(ConfusionMatrix::tabulate(
        &y_ref,
        reference.n_clusters(),
        &y_pred,
        k_pred,
    )?)
}

/// Per-predicted-cluster counts of the reference noise points, or `None`
/// when the reference labelling has no noise.
pub fn noise_row(
    reference: &ReferenceLabelling,
    y_pred: &[usize],
) -> Result<Option<Vec<u64>>, ScoreError> {
    let k_pred = prediction_k(y_pred)?;
    if reference.len() != y_pred.len() {
        return Err(ScoreError::LengthMismatch {
            reference: reference.len(),
            predicted: y_pred.len(),
        });
    }
    if !reference.has_noise() {
        return Ok(None);
    }
    let mut row = vec![0u64; k_pred];
    for (&r, &p) in reference.labels().iter().zip(y_pred) {
        if r == NOISE {
            row[p - 1] += 1;
        }
    }
    Ok(Some(row))
}

/// Similarity of one predicted partition to one reference labelling.
pub fn score_one(
    reference: &ReferenceLabelling,
    y_pred: &[usize],
    metric: MetricId,
) -> Result<f64, ScoreError> {
    let c = noise_free_confusion(reference, y_pred)?;
    if metric == MetricId::Nca && c.n_cols() != reference.n_clusters() {
        return Err(ScoreError::KMismatch {
            reference: reference.n_clusters(),
            predicted: c.n_cols(),
        });
    }
    Ok(metric.evaluate(&c)?)
}

/// The maximal score over all reference labellings, with the labelling that
/// attains it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestScore {
    pub score: f64,
    /// Index of the maximizing labelling (the first one on ties).
    pub labelling: usize,
    /// Its cluster count.
    pub k: usize,
}

/// Scores `predictions` against every labelling at the matching cluster
/// count and keeps the maximum.
pub fn get_best_score(
    labellings: &[ReferenceLabelling],
    predictions: &PartitionSet,
    metric: MetricId,
) -> Result<BestScore, ScoreError> {
    let mut best: Option<BestScore> = None;
    for (index, labelling) in labellings.iter().enumerate() {
        let k = labelling.n_clusters();
        let y_pred = predictions.get(k).ok_or(ScoreError::MissingK { k })?;
        let score = score_one(labelling, y_pred, metric)?;
        if best.is_none_or(|b| score > b.score) {
            best = Some(BestScore {
                score,
                labelling: index,
                k,
            });
        }
    }
    best.ok_or(ScoreError::NoLabellings)
}

/// [`get_best_score`] without the provenance.
pub fn get_score(
    labellings: &[ReferenceLabelling],
    predictions: &PartitionSet,
    metric: MetricId,
) -> Result<f64, ScoreError> {
    get_best_score(labellings, predictions, metric).map(|b| b.score)
}
