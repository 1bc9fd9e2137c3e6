//! Lloyd's k-means with k-means++ seeding and multiple restarts.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check_input, AlgorithmError, Clusterer};
use crate::labels::relabel_first_occurrence;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    /// Number of independently seeded restarts; the best one is kept.
    pub n_init: usize,
    /// Maximum Lloyd iterations per restart.
    pub max_iter: usize,
    /// A restart stops once the relative decrease of the inertia falls to
    /// this value or below.
    pub tol: f64,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            n_init: 10,
            max_iter: 300,
            tol: 1e-9,
            seed: 0,
        }
    }
}

impl KMeansConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), AlgorithmError> {
        if self.n_init == 0 || self.max_iter == 0 || self.tol.is_nan() || self.tol < 0.0 {
            return Err(AlgorithmError::InvalidConfig(format!("{self:?}")));
        }
        Ok(())
    }
}

/// Outcome of a single seeded restart.
#[derive(Debug, Clone)]
pub struct KMeansRun {
    pub restart: usize,
    /// Labels `1..=k` in centroid order (not yet renumbered).
    pub labels: Vec<usize>,
    /// Within-cluster sum of squares of the final labels around their means.
    pub inertia: f64,
    /// Inertia after every assignment step, measured against the centroids
    /// the points were assigned to.
    pub history: Vec<f64>,
}

/// Partitions the rows of `data` into `k` clusters labelled `1..=k` in
/// order of first occurrence.
///
/// Restart `r` draws from a ChaCha8 stream `r` keyed by `config.seed`; the
/// restart with the smallest inertia wins (lowest index on ties), so the
/// result does not depend on how restarts are scheduled.
pub fn kmeans(
    data: ArrayView2<'_, f64>,
    k: usize,
    config: &KMeansConfig,
) -> Result<Vec<usize>, AlgorithmError> {
    config.validate()?;
    check_input(data, k)?;
    let best = (0..config.n_init)
        .into_par_iter()
        .map(|r| run_restart(data, k, config, r))
        .min_by(|a, b| {
            a.inertia
                .total_cmp(&b.inertia)
                .then(a.restart.cmp(&b.restart))
        })
        .expect("n_init >= 1");
    Ok(relabel_first_occurrence(&best.labels))
}

/// Within-cluster sum of squared distances to the cluster means; labels are
/// 1-based.
pub fn inertia(data: ArrayView2<'_, f64>, labels: &[usize], k: usize) -> f64 {
    let centroids = means(data, labels, k);
    data.rows()
        .into_iter()
        .zip(labels)
        .map(|(x, &l)| sq_dist(x, centroids.row(l - 1)))
        .sum()
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn rng_for(config: &KMeansConfig, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);
    rng
}

/// Runs restart number `restart` of [`kmeans`] on its own.
pub fn kmeans_restart(
    data: ArrayView2<'_, f64>,
    k: usize,
    config: &KMeansConfig,
    restart: usize,
) -> Result<KMeansRun, AlgorithmError> {
    config.validate()?;
    check_input(data, k)?;
    Ok(run_restart(data, k, config, restart))
}

fn run_restart(
    data: ArrayView2<'_, f64>,
    k: usize,
    config: &KMeansConfig,
    restart: usize,
) -> KMeansRun {
    let mut rng = rng_for(config, restart);
    let mut centroids = seed_plus_plus(data, k, &mut rng);
    let n = data.nrows();
    let mut labels = vec![0usize; n];
    let mut dist = vec![0.0f64; n];
    let mut history = Vec::new();

    for iter in 0..config.max_iter {
        let changed = assign(data, &centroids, &mut labels, &mut dist);
        repair_empty_clusters(data, &mut centroids, &mut labels, &mut dist);
        let cost: f64 = dist.iter().sum();
        let previous = history.last().copied();
        history.push(cost);
        if iter > 0 && !changed {
            break;
        }
        centroids = means_zero_based(data, &labels, k);
        if let Some(prev) = previous {
            if prev - cost <= config.tol * prev {
                break;
            }
        }
    }

    let labels: Vec<usize> = labels.iter().map(|l| l + 1).collect();
    KMeansRun {
        restart,
        inertia: inertia(data, &labels, k),
        labels,
        history,
    }
}

/// k-means++: the first centre uniformly at random, each further one with
/// probability proportional to the squared distance to the nearest centre.
fn seed_plus_plus(data: ArrayView2<'_, f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = data.nrows();
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut nearest: Vec<f64> = data
        .rows()
        .into_iter()
        .map(|x| sq_dist(x, data.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in nearest.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding may leave target >= acc; take the last candidate
            pick.unwrap_or_else(|| nearest.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            // remaining points coincide with centres
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, x) in data.rows().into_iter().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(x, data.row(next)));
        }
    }
    let mut centroids = Array2::zeros((k, data.ncols()));
    for (c, &i) in chosen.iter().enumerate() {
        centroids.row_mut(c).assign(&data.row(i));
    }
    centroids
}

/// Nearest-centroid assignment (lowest index on ties); labels are 0-based.
fn assign(
    data: ArrayView2<'_, f64>,
    centroids: &Array2<f64>,
    labels: &mut [usize],
    dist: &mut [f64],
) -> bool {
    let mut changed = false;
    for (i, x) in data.rows().into_iter().enumerate() {
        let (best, d) = centroids
            .rows()
            .into_iter()
            .map(|c| sq_dist(x, c))
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (j, d)| if d < acc.1 { (j, d) } else { acc });
        if labels[i] != best {
            changed = true;
        }
        labels[i] = best;
        dist[i] = d;
    }
    changed
}

/// Gives each empty cluster the point lying farthest from its centroid
/// (taken from a cluster with at least two members).
fn repair_empty_clusters(
    data: ArrayView2<'_, f64>,
    centroids: &mut Array2<f64>,
    labels: &mut [usize],
    dist: &mut [f64],
) {
    let k = centroids.nrows();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    while let Some(empty) = sizes.iter().position(|&s| s == 0) {
        let far = (0..labels.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .fold(None, |acc: Option<usize>, i| match acc {
                Some(j) if dist[j] >= dist[i] => Some(j),
                _ => Some(i),
            })
            .expect("k <= n guarantees a cluster with two members");
        sizes[labels[far]] -= 1;
        sizes[empty] += 1;
        labels[far] = empty;
        dist[far] = 0.0;
        centroids.row_mut(empty).assign(&data.row(far));
    }
}

fn means_zero_based(data: ArrayView2<'_, f64>, labels: &[usize], k: usize) -> Array2<f64> {
    let mut sums = Array2::<f64>::zeros((k, data.ncols()));
    let mut counts = vec![0usize; k];
    for (x, &l) in data.rows().into_iter().zip(labels) {
        let mut row = sums.row_mut(l);
        row += &x;
        counts[l] += 1;
    }
    for (mut row, &c) in sums.rows_mut().into_iter().zip(&counts) {
        if c > 0 {
            row /= c as f64;
        }
    }
    sums
}

fn means(data: ArrayView2<'_, f64>, labels: &[usize], k: usize) -> Array2<f64> {
    let zero_based: Vec<usize> = labels.iter().map(|l| l - 1).collect();
    means_zero_based(data, &zero_based, k)
}

/// k-means as a [`Clusterer`].
#[derive(Debug, Clone, Copy, Default)]
pub struct KMeans {
    pub config: KMeansConfig,
}

impl Clusterer for KMeans {
    fn name(&self) -> String {
        "KMeans".to_string()
    }

    fn fit_predict(&self, data: ArrayView2<'_, f64>, k: usize) -> Result<Vec<usize>, AlgorithmError> {
        kmeans(data, k, &self.config)
    }
}
