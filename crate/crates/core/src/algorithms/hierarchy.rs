//! Agglomerative clustering under the Euclidean distance.
//!
//! Clusters are identified by their founder, the smallest point index they
//! contain. Among merges at equal dissimilarity the pair with the
//! lexicographically smallest `(founder, founder)` key goes first.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;

use super::{check_input, check_points, AlgorithmError, Clusterer};
use crate::labels::relabel_first_occurrence;
use crate::scoring::PartitionSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Linkage {
    Single,
    Complete,
    Average,
}

impl Linkage {
    pub const ALL: [Linkage; 3] = [Linkage::Single, Linkage::Complete, Linkage::Average];

    pub fn name(self) -> &'static str {
        match self {
            Linkage::Single => "single",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Linkage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            _ => Err(format!("unknown linkage {s:?}")),
        }
    }
}

/// One merge step: the clusters founded by `first < second` are joined at
/// dissimilarity `height`; the result keeps founder `first`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub first: usize,
    pub second: usize,
    pub height: f64,
}

/// The full merge sequence of `n` points (`n - 1` merges).
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn build(data: ArrayView2<'_, f64>, linkage: Linkage) -> Result<Self, AlgorithmError> {
        check_points(data)?;
        let merges = match linkage {
            Linkage::Single => single_linkage(data),
            Linkage::Complete | Linkage::Average => stored_distance(data, linkage),
        };
        Ok(Self {
            n: data.nrows(),
            merges,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Labels `1..=k` (first-occurrence order) after the first `n - k`
    /// merges.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>, AlgorithmError> {
        if k < 2 || k > self.n {
            return Err(AlgorithmError::BadK { k, n: self.n });
        }
        let mut sets = DisjointSets::new(self.n);
        for m in &self.merges[..self.n - k] {
            sets.union(m.first, m.second);
        }
        let roots: Vec<usize> = (0..self.n).map(|i| sets.find(i)).collect();
        Ok(relabel_first_occurrence(&roots))
    }
}

/// Union-find whose representative is always the smallest member.
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Joins the two sets and returns their founders `(smaller, larger)`.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> (usize, usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        (lo, hi)
    }
}

fn sq_dist(data: ArrayView2<'_, f64>, i: usize, j: usize) -> f64 {
    data.row(i)
        .iter()
        .zip(data.row(j))
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Single linkage from a minimum spanning tree (Prim, O(n^2) time and O(n)
/// memory). Removing the k-1 heaviest tree edges gives the k-cut. The
/// partition after all merges up to a given weight does not depend on which
/// spanning tree was found, so only the order inside a level of equal
/// weights needs care: tied levels are replayed from every point pair at
/// that weight.
fn single_linkage(data: ArrayView2<'_, f64>) -> Vec<Merge> {
    let n = data.nrows();
    let mut tree = mst_edges(data);
    tree.sort_by(|a, b| a.2.total_cmp(&b.2));
    let levels: Vec<&[(usize, usize, f64)]> = tree.chunk_by(|a, b| a.2 == b.2).collect();

    let tied: HashMap<u64, usize> = levels
        .iter()
        .enumerate()
        .filter(|(_, level)| level.len() > 1)
        .map(|(idx, level)| (level[0].2.to_bits(), idx))
        .collect();
    let mut tied_pairs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); levels.len()];
    if !tied.is_empty() {
        for i in 0..n {
            for j in i + 1..n {
                if let Some(&level) = tied.get(&sq_dist(data, i, j).to_bits()) {
                    tied_pairs[level].push((i, j));
                }
            }
        }
    }

    let mut sets = DisjointSets::new(n);
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for (idx, level) in levels.iter().enumerate() {
        let height = level[0].2.sqrt();
        if let [(i, j, _)] = level {
            let (first, second) = sets.union(*i, *j);
            merges.push(Merge {
                first,
                second,
                height,
            });
            continue;
        }
        for _ in 0..level.len() {
            let mut pick: Option<(usize, usize)> = None;
            for &(i, j) in &tied_pairs[idx] {
                let (ri, rj) = (sets.find(i), sets.find(j));
                if ri == rj {
                    continue;
                }
                let key = (ri.min(rj), ri.max(rj));
                if pick.is_none_or(|p| key < p) {
                    pick = Some(key);
                }
            }
            let (a, b) = pick.expect("tied level has a crossing pair");
            let (first, second) = sets.union(a, b);
            merges.push(Merge {
                first,
                second,
                height,
            });
        }
    }
    merges
}

/// Prim's tree as `(i, j, squared weight)` edges.
fn mst_edges(data: ArrayView2<'_, f64>) -> Vec<(usize, usize, f64)> {
    let n = data.nrows();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut current = 0;
    in_tree[0] = true;
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let mut next = usize::MAX;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let d = sq_dist(data, current, j);
            if d < best[j] {
                best[j] = d;
                from[j] = current;
            }
            if next == usize::MAX || best[j] < best[next] {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((from[next], next, best[next]));
        current = next;
    }
    edges
}

/// Condensed upper-triangular distance matrix.
struct Condensed {
    n: usize,
    values: Vec<f64>,
}

impl Condensed {
    fn new(data: ArrayView2<'_, f64>) -> Self {
        let n = data.nrows();
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                values.push(sq_dist(data, i, j).sqrt());
            }
        }
        Self { n, values }
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = (i.min(j), i.max(j));
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.index(i, j)]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.index(i, j);
        self.values[idx] = v;
    }
}

type Candidate = (f64, usize, usize);

fn candidate(d: f64, i: usize, j: usize) -> Candidate {
    (d, i.min(j), i.max(j))
}

fn less(a: &Candidate, b: &Candidate) -> bool {
    a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))).is_lt()
}

/// Complete and average linkage on stored distances, updated with the
/// Lance-Williams formulas. Each active cluster caches its nearest
/// neighbour; both linkages never bring a merged cluster closer to a third
/// one than the nearer of its parts was.
fn stored_distance(data: ArrayView2<'_, f64>, linkage: Linkage) -> Vec<Merge> {
    let n = data.nrows();
    let mut dist = Condensed::new(data);
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let nearest_of = |i: usize, dist: &Condensed, active: &[bool]| -> Option<Candidate> {
        let mut best: Option<Candidate> = None;
        for j in (0..n).filter(|&j| j != i && active[j]) {
            let c = candidate(dist.get(i, j), i, j);
            if best.is_none_or(|b| less(&c, &b)) {
                best = Some(c);
            }
        }
        best
    };
    let mut nearest: Vec<Option<Candidate>> = (0..n).map(|i| nearest_of(i, &dist, &active)).collect();

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        let (height, a, b) = (0..n)
            .filter(|&i| active[i])
            .filter_map(|i| nearest[i])
            .reduce(|x, y| if less(&y, &x) { y } else { x })
            .expect("two active clusters remain");
        merges.push(Merge {
            first: a,
            second: b,
            height,
        });
        active[b] = false;
        nearest[b] = None;
        let (sa, sb) = (size[a] as f64, size[b] as f64);
        for x in (0..n).filter(|&x| active[x] && x != a) {
            let (da, db) = (dist.get(a, x), dist.get(b, x));
            let merged = match linkage {
                Linkage::Complete => da.max(db),
                Linkage::Average => (sa * da + sb * db) / (sa + sb),
                Linkage::Single => unreachable!("single linkage uses the spanning tree"),
            };
            dist.set(a, x, merged);
        }
        size[a] += size[b];
        nearest[a] = nearest_of(a, &dist, &active);
        for x in (0..n).filter(|&x| active[x] && x != a) {
            let stale = nearest[x].is_some_and(|(_, p, q)| [p, q].contains(&a) || [p, q].contains(&b));
            if stale {
                nearest[x] = nearest_of(x, &dist, &active);
            } else {
                let c = candidate(dist.get(a, x), a, x);
                if nearest[x].is_none_or(|cur| less(&c, &cur)) {
                    nearest[x] = Some(c);
                }
            }
        }
    }
    merges
}

/// Cuts the `linkage` merge tree of `data` at `k` clusters.
pub fn agglomerative(
    data: ArrayView2<'_, f64>,
    linkage: Linkage,
    k: usize,
) -> Result<Vec<usize>, AlgorithmError> {
    check_input(data, k)?;
    Dendrogram::build(data, linkage)?.cut(k)
}

/// Agglomerative clustering as a [`Clusterer`]; several cluster counts share
/// one tree.
#[derive(Debug, Clone, Copy)]
pub struct Agglomerative {
    pub linkage: Linkage,
}

impl Clusterer for Agglomerative {
    fn name(&self) -> String {
        match self.linkage {
            Linkage::Single => "Single",
            Linkage::Complete => "Complete",
            Linkage::Average => "Average",
        }
        .to_string()
    }

    fn fit_predict(&self, data: ArrayView2<'_, f64>, k: usize) -> Result<Vec<usize>, AlgorithmError> {
        agglomerative(data, self.linkage, k)
    }

    fn fit_predict_each(
        &self,
        data: ArrayView2<'_, f64>,
        ks: &[usize],
    ) -> Result<PartitionSet, AlgorithmError> {
        let tree = Dendrogram::build(data, self.linkage)?;
        let mut set = PartitionSet::new(data.nrows());
        for &k in ks {
            set.insert(tree.cut(k)?)?;
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Textbook agglomeration: every step scans all cluster pairs of an
    /// explicitly maintained cluster distance matrix. Distances for
    /// complete and average linkage are recomputed from the members.
    fn naive(data: ArrayView2<'_, f64>, linkage: Linkage) -> Vec<Merge> {
        let n = data.nrows();
        let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
        let pair = |i: usize, j: usize| sq_dist(data, i, j).sqrt();
        let between = |a: &[usize], b: &[usize]| -> f64 {
            let ds = a.iter().flat_map(|&i| b.iter().map(move |&j| pair(i, j)));
            match linkage {
                Linkage::Single => ds.fold(f64::INFINITY, f64::min),
                Linkage::Complete => ds.fold(0.0, f64::max),
                Linkage::Average => ds.sum::<f64>() / (a.len() * b.len()) as f64,
            }
        };
        let mut merges = Vec::new();
        for _ in 1..n {
            let mut best: Option<Candidate> = None;
            for a in 0..n {
                for b in a + 1..n {
                    if let (Some(ma), Some(mb)) = (&members[a], &members[b]) {
                        let c = (between(ma, mb), a, b);
                        if best.is_none_or(|x| less(&c, &x)) {
                            best = Some(c);
                        }
                    }
                }
            }
            let (height, a, b) = best.unwrap();
            let mb = members[b].take().unwrap();
            members[a].as_mut().unwrap().extend(mb);
            merges.push(Merge {
                first: a,
                second: b,
                height,
            });
        }
        merges
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, d), |_| rng.random_range(-10.0..10.0))
    }

    fn grid_points(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, 2), |_| f64::from(rng.random_range(0..6u8)))
    }

    fn assert_same_merges(got: &[Merge], want: &[Merge], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (step, (g, w)) in got.iter().zip(want).enumerate() {
            assert_eq!((g.first, g.second), (w.first, w.second), "step {step}");
            assert!((g.height - w.height).abs() <= tol, "step {step}: {g:?} vs {w:?}");
        }
    }

    #[test]
    fn chain_splits_at_widest_gap() {
        let data = array![[0.0], [1.0], [2.0], [10.0], [11.0], [12.0]];
        for linkage in Linkage::ALL {
            assert_eq!(agglomerative(data.view(), linkage, 2).unwrap(), [1, 1, 1, 2, 2, 2]);
        }
        let tree = Dendrogram::build(data.view(), Linkage::Single).unwrap();
        let heights: Vec<f64> = tree.merges().iter().map(|m| m.height).collect();
        assert_eq!(heights, [1.0, 1.0, 1.0, 1.0, 8.0]);
        assert_eq!(
            tree.merges()[..2],
            [
                Merge { first: 0, second: 1, height: 1.0 },
                Merge { first: 0, second: 2, height: 1.0 }
            ]
        );
    }

    #[test]
    fn cut_at_n_gives_singletons() {
        let data = array![[3.0, 1.0], [0.0, 0.0], [3.0, 1.0], [7.0, 2.0]];
        for linkage in Linkage::ALL {
            assert_eq!(agglomerative(data.view(), linkage, 4).unwrap(), [1, 2, 3, 4]);
        }
    }

    #[test]
    fn cuts_are_nested() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = random_points(&mut rng, 40, 3);
        for linkage in Linkage::ALL {
            let tree = Dendrogram::build(data.view(), linkage).unwrap();
            for k in 2..40 {
                let coarse = tree.cut(k).unwrap();
                let fine = tree.cut(k + 1).unwrap();
                for i in 0..40 {
                    for j in 0..40 {
                        if fine[i] == fine[j] {
                            assert_eq!(coarse[i], coarse[j]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn single_linkage_matches_naive_agglomeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for round in 0..30 {
            let n = rng.random_range(2..45);
            let data = if round % 2 == 0 {
                random_points(&mut rng, n, 2)
            } else {
                grid_points(&mut rng, n)
            };
            let got = Dendrogram::build(data.view(), Linkage::Single).unwrap();
            assert_same_merges(got.merges(), &naive(data.view(), Linkage::Single), 0.0);
        }
    }

    #[test]
    fn stored_distance_linkages_match_naive_agglomeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let n = rng.random_range(2..35);
            let data = random_points(&mut rng, n, 3);
            for linkage in [Linkage::Complete, Linkage::Average] {
                let got = Dendrogram::build(data.view(), linkage).unwrap();
                assert_same_merges(got.merges(), &naive(data.view(), linkage), 1e-9);
            }
        }
    }

    #[test]
    fn complete_linkage_with_ties_matches_naive_agglomeration() {
        // maxima of exact pairwise distances are exact, so ties survive
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let n = rng.random_range(2..30);
            let data = grid_points(&mut rng, n);
            let got = Dendrogram::build(data.view(), Linkage::Complete).unwrap();
            assert_same_merges(got.merges(), &naive(data.view(), Linkage::Complete), 0.0);
        }
    }

    #[test]
    fn several_ks_share_one_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data = random_points(&mut rng, 25, 2);
        let method = Agglomerative { linkage: Linkage::Average };
        assert_eq!(method.name(), "Average");
        let set = method.fit_predict_each(data.view(), &[2, 5, 9]).unwrap();
        for k in [2, 5, 9] {
            assert_eq!(set.get(k).unwrap(), agglomerative(data.view(), Linkage::Average, k).unwrap());
        }
    }

    #[test]
    fn bad_input() {
        let data = array![[0.0], [1.0]];
        assert_eq!(
            agglomerative(data.view(), Linkage::Single, 3),
            Err(AlgorithmError::BadK { k: 3, n: 2 })
        );
        let data = array![[0.0], [f64::NAN]];
        assert_eq!(
            agglomerative(data.view(), Linkage::Complete, 2),
            Err(AlgorithmError::NonFinite)
        );
        let tree = Dendrogram::build(array![[0.0]].view(), Linkage::Single).unwrap();
        assert!(tree.merges().is_empty());
        assert_eq!(tree.n_points(), 1);
    }

    #[test]
    fn linkage_names() {
        for l in Linkage::ALL {
            assert_eq!(l.to_string().parse::<Linkage>().unwrap(), l);
        }
        assert_eq!("AVERAGE".parse::<Linkage>().unwrap(), Linkage::Average);
        assert!("ward".parse::<Linkage>().is_err());
    }
}
