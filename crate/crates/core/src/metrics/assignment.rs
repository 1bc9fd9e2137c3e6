//! Exact maximum-weight linear assignment.
//!
//! The optimum is found with the O(k^3) shortest augmenting path variant of
//! the Hungarian method. Among all optimal assignments the one whose mapping
//! array is lexicographically smallest is reported.

use super::MetricError;

/// A bijection on `0..k`; `row_for(j)` is the row matched with column `j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; mapping.len()];
        for &m in &mapping {
            if m >= seen.len() || std::mem::replace(&mut seen[m], true) {
                return None;
            }
        }
        Some(Self(mapping))
    }

    pub fn identity(k: usize) -> Self {
        Self((0..k).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn row_for(&self, col: usize) -> usize {
        self.0[col]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// The mapping with 1-based cluster IDs.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|m| m + 1).collect()
    }
}

/// Finds the permutation `sigma` maximizing `sum_j weights[sigma(j)][j]`.
///
/// Returns the permutation and its total weight (summed in column order).
pub fn solve_assignment(weights: &[Vec<f64>]) -> Result<(Permutation, f64), MetricError> {
    let k = weights.len();
    if k == 0 {
        return Err(MetricError::EmptyMatrix);
    }
    if let Some(row) = weights.iter().find(|r| r.len() != k) {
        return Err(MetricError::NotSquare {
            rows: k,
            cols: row.len(),
        });
    }
    if weights.iter().flatten().any(|w| !w.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    let flat: Vec<f64> = weights.iter().flatten().copied().collect();
    let mapping = if k <= 3 {
        exhaustive(&flat, k)
    } else {
        lexicographic_optimum(&flat, k)
    };
    let total = (0..k).map(|j| flat[mapping[j] * k + j]).sum();
    Ok((Permutation(mapping), total))
}

/// First maximum in lexicographic enumeration order.
fn exhaustive(w: &[f64], k: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = perm.clone();
    let mut best_total = f64::NEG_INFINITY;
    loop {
        let total: f64 = (0..k).map(|j| w[perm[j] * k + j]).sum();
        if total > best_total {
            best_total = total;
            best.clone_from(&perm);
        }
        if !next_permutation(&mut perm) {
            return best;
        }
    }
}

pub(crate) fn next_permutation(perm: &mut [usize]) -> bool {
    let Some(i) = perm.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = perm.iter().rposition(|&x| x > perm[i]).unwrap();
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

/// Fixes columns left to right, each time taking the smallest row that
/// still admits the best completion of the remaining subproblem.
fn lexicographic_optimum(w: &[f64], k: usize) -> Vec<usize> {
    let mut free_rows: Vec<usize> = (0..k).collect();
    let mut mapping = Vec::with_capacity(k);
    for col in 0..k {
        let rest_cols: Vec<usize> = (col + 1..k).collect();
        let mut best: Option<(f64, usize)> = None;
        for (pos, &row) in free_rows.iter().enumerate() {
            let rest_rows: Vec<usize> = free_rows
                .iter()
                .enumerate()
                .filter(|&(p, _)| p != pos)
                .map(|(_, &r)| r)
                .collect();
            let value = w[row * k + col] + max_weight(w, k, &rest_rows, &rest_cols);
            if best.is_none_or(|(v, _)| value > v) {
                best = Some((value, pos));
            }
        }
        let (_, pos) = best.expect("at least one free row");
        mapping.push(free_rows.remove(pos));
    }
    mapping
}

/// Optimal total of the assignment restricted to the given rows and columns.
fn max_weight(w: &[f64], k: usize, rows: &[usize], cols: &[usize]) -> f64 {
    let m = rows.len();
    if m == 0 {
        return 0.0;
    }
    let cost: Vec<f64> = rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| -w[r * k + c]))
        .collect();
    let row_to_col = hungarian_min(&cost, m);
    row_to_col
        .iter()
        .enumerate()
        .map(|(i, &j)| w[rows[i] * k + cols[j]])
        .sum()
}

/// Minimum-cost perfect matching of a dense `m x m` cost matrix; returns the
/// column assigned to each row.
fn hungarian_min(cost: &[f64], m: usize) -> Vec<usize> {
    // 1-based potentials and matching, index 0 is the virtual source column.
    let mut u = vec![0.0f64; m + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut matched_row = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=m {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; m];
    for j in 1..=m {
        row_to_col[matched_row[j] - 1] = j - 1;
    }
    row_to_col
}
