//! External cluster validity indices computed from a confusion matrix.
//!
//! Partial sums are accumulated in ascending order of their terms, so each
//! index is bitwise invariant under row and column permutations.

use super::assignment::solve_assignment;
use super::{ConfusionMatrix, MetricError};

/// Normalized clustering accuracy.
///
/// With `a(i, j) = c(i, j) / c(i, .)` the share of reference cluster `i`
/// that went to predicted cluster `j`, this is the best permutation-matched
/// mean of `(a - 1/k) / (1 - 1/k)`: zero for perfectly uniform rows, one
/// when some relabelling makes the matrix diagonal, and never below
/// `-1/(k-1)`. Rows are reference clusters, so the measure is not symmetric.
pub fn nca(c: &ConfusionMatrix) -> Result<f64, MetricError> {
    if !c.is_square() {
        return Err(MetricError::NotSquare {
            rows: c.n_rows(),
            cols: c.n_cols(),
        });
    }
    let k = c.n_rows();
    if k < 2 {
        return Err(MetricError::TooFewClusters { k });
    }
    if let Some(row) = c.row_sums().iter().position(|&s| s == 0) {
        return Err(MetricError::EmptyRow { row });
    }
    // Solving on columns sorted by content makes the choice among tied
    // optima, and hence the rounding, independent of predicted label names.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&j| (0..k).map(|i| c.count(i, j)).collect::<Vec<_>>());
    let weights: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let sum = c.row_sums()[i] as f64;
            order.iter().map(|&j| c.count(i, j) as f64 / sum).collect()
        })
        .collect();
    let (sigma, _) = solve_assignment(&weights)?;
    let mut matched: Vec<f64> = (0..k).map(|j| weights[sigma.row_for(j)][j]).collect();
    let accuracy_sum = ascending_sum(&mut matched);
    let kf = k as f64;
    Ok((accuracy_sum / kf - 1.0 / kf) / (1.0 - 1.0 / kf))
}

fn pairs(x: u64) -> u128 {
    let x = u128::from(x);
    x * x.saturating_sub(1) / 2
}

/// Adjusted Rand index (Hubert and Arabie). Returns 0 when the index is
/// undefined because the maximum equals its expectation.
pub fn adjusted_rand(c: &ConfusionMatrix) -> Result<f64, MetricError> {
    let n = c.total();
    if n < 2 {
        return Err(MetricError::TooFewPoints { n, required: 2 });
    }
    // exact integer pair counts
    let index: u128 = c.cells().iter().map(|&x| pairs(x)).sum();
    let rows: u128 = c.row_sums().iter().map(|&x| pairs(x)).sum();
    let cols: u128 = c.col_sums().iter().map(|&x| pairs(x)).sum();
    let all = pairs(n) as f64;
    let (index, rows, cols) = (index as f64, rows as f64, cols as f64);
    let expected = rows * cols / all;
    let max_index = (rows + cols) / 2.0;
    if max_index == expected {
        return Ok(0.0);
    }
    Ok((index - expected) / (max_index - expected))
}

/// Mutual information divided by the larger of the two entropies (natural
/// logarithms). Both entropies zero means both partitions are trivial and
/// identical, which scores 1.
pub fn normalized_mutual_info(c: &ConfusionMatrix) -> Result<f64, MetricError> {
    let n = c.total();
    let h_ref = entropy(c.row_sums(), n);
    let h_pred = entropy(c.col_sums(), n);
    let denom = h_ref.max(h_pred);
    if denom == 0.0 {
        return Ok(1.0);
    }
    let mutual = mutual_info(c).max(0.0);
    Ok((mutual / denom).min(1.0))
}

/// `sum p(i, j) ln(p(i, j) / (p(i) p(j)))`, with the ratio formed from exact
/// integer products so independent cells contribute exactly zero.
fn mutual_info(c: &ConfusionMatrix) -> f64 {
    let n = c.total();
    let nf = n as f64;
    let mut terms = Vec::new();
    for (i, &r) in c.row_sums().iter().enumerate() {
        for (j, &s) in c.col_sums().iter().enumerate() {
            let x = c.count(i, j);
            if x == 0 {
                continue;
            }
            let num = u128::from(n) * u128::from(x);
            let den = u128::from(r) * u128::from(s);
            terms.push(x as f64 / nf * (num as f64 / den as f64).ln());
        }
    }
    ascending_sum(&mut terms)
}

fn entropy(counts: &[u64], n: u64) -> f64 {
    let nf = n as f64;
    let ln_n = nf.ln();
    let mut terms: Vec<f64> = counts
        .iter()
        .filter(|&&x| x > 0)
        .map(|&x| {
            let xf = x as f64;
            xf / nf * (ln_n - xf.ln())
        })
        .collect();
    ascending_sum(&mut terms)
}

fn ascending_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}
