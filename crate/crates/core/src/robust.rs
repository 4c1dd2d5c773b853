//! Inductive robust hierarchical clustering.
//!
//! A seeded subsample of `n0` points is clustered and the result extended
//! to every point:
//!
//! 1. the `round((alpha + nu) n0)` subsample points with the sparsest
//!    `t`-nearest neighborhoods are set aside as suspected noise;
//! 2. every remaining point is replaced by the coordinate-wise median of its
//!    `t`-nearest neighborhood, and the medians are merged with median
//!    linkage (clusters joined by the lower median of their cross
//!    distances);
//! 3. the pruning is the latest merge state holding exactly `k` clusters of
//!    at least `ceil((alpha + nu) n0) + 1` points, smaller clusters being
//!    labeled noise (a plain cut at `k` when no such state exists);
//! 4. every point takes the plurality label of its `t` nearest subsample
//!    points, ties to the smaller label.
//!
//! The neighborhood size is `t = ceil(6 (alpha + nu) n0 / k) + 1`: the
//! good-neighborhood radius measured against the expected cluster size
//! `n0 / k`, so that `t` stays below half a cluster whenever
//! `alpha + nu < 1/12`. It can be overridden.
//!
//! The lower median of a union lies between the lower medians of its parts,
//! so merge heights never decrease.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::max_weight_matching;
use crate::error::{Error, Result};
use crate::linkage::{
    condensed_index, greedy_agglomerate, pairwise_distances, squared_euclidean, Dendrogram,
};
use crate::model::{ClusterLabeling, CounterfactualMatrix, PointSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodNeighborhoodParams {
    pub alpha: f64,
    pub nu: f64,
    pub delta: f64,
    pub subsample_n: usize,
    /// Overrides the neighborhood size `t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighborhood: Option<usize>,
}

impl GoodNeighborhoodParams {
    pub fn new(alpha: f64, nu: f64, subsample_n: usize) -> Self {
        Self {
            alpha,
            nu,
            delta: 0.05,
            subsample_n,
            neighborhood: None,
        }
    }

    pub fn with_neighborhood(mut self, t: usize) -> Self {
        self.neighborhood = Some(t);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..1.0).contains(&v);
        if !unit(self.alpha) || !unit(self.nu) {
            return Err(Error::param(format!(
                "alpha and nu must lie in [0, 1), got {} and {}",
                self.alpha, self.nu
            )));
        }
        if self.alpha + self.nu >= 1.0 {
            return Err(Error::param("alpha + nu must be < 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.subsample_n < 2 {
            return Err(Error::param("subsample size must be at least 2"));
        }
        if self.neighborhood == Some(0) {
            return Err(Error::param("neighborhood size must be at least 1"));
        }
        Ok(())
    }

    /// `t = ceil(6 (alpha + nu) n0 / k) + 1` for `k` target clusters unless
    /// overridden, capped at `n0`.
    pub fn neighborhood_size(&self, k: usize) -> usize {
        let t = self.neighborhood.unwrap_or_else(|| {
            ceil_tolerant(6.0 * (self.alpha + self.nu) * self.subsample_n as f64 / k.max(1) as f64)
                + 1
        });
        t.min(self.subsample_n)
    }

    /// Subsample points set aside as suspected noise before linkage:
    /// `round((alpha + nu) n0)`, leaving at least `k` points.
    pub fn trimmed(&self, k: usize) -> usize {
        (((self.alpha + self.nu) * self.subsample_n as f64).round() as usize)
            .min(self.subsample_n.saturating_sub(k))
    }

    /// Clusters smaller than this are treated as noise when pruning:
    /// `ceil((alpha + nu) n0) + 1`, and never below 2.
    pub fn min_cluster_size(&self) -> usize {
        (ceil_tolerant((self.alpha + self.nu) * self.subsample_n as f64) + 1).max(2)
    }
}

/// Ceiling that ignores representation error just above an integer, so
/// that `6 * 0.05 * 50` counts as 15.
fn ceil_tolerant(x: f64) -> usize {
    (x - 1e-9 * x.abs().max(1.0)).ceil().max(0.0) as usize
}

/// Hierarchy over the subsample and the rule extending it to all points.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    subsample: Vec<usize>,
    points: PointSet,
    core: Vec<usize>,
    dendrogram: Dendrogram,
    t: usize,
    votes: usize,
    min_cluster_size: usize,
    pruning_step: usize,
    subsample_labels: ClusterLabeling,
    degenerate: bool,
}

impl Hierarchy {
    /// Indices (ascending) of the subsample in the full dataset.
    pub fn subsample(&self) -> &[usize] {
        &self.subsample
    }

    /// Subsample positions (ascending) kept after noise trimming; the
    /// dendrogram's leaf `i` is subsample position `core()[i]`.
    pub fn core(&self) -> &[usize] {
        &self.core
    }

    /// Dendrogram over the core subsample points.
    pub fn dendrogram(&self) -> &Dendrogram {
        &self.dendrogram
    }

    pub fn neighborhood_size(&self) -> usize {
        self.t
    }

    /// Neighbors consulted by the extension vote.
    pub fn votes(&self) -> usize {
        self.votes
    }

    pub fn min_cluster_size(&self) -> usize {
        self.min_cluster_size
    }

    /// Number of merges applied to obtain the pruning.
    pub fn pruning_step(&self) -> usize {
        self.pruning_step
    }

    /// Pruned labels of the subsample points (0 marks pruned-away points).
    pub fn subsample_labels(&self) -> &ClusterLabeling {
        &self.subsample_labels
    }

    /// True when every subsample point coincides.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Label of an arbitrary point: plurality label among its `votes`
    /// nearest subsample points, ties to the smaller label.
    pub fn assign(&self, query: &[f64]) -> Result<usize> {
        if query.len() != self.points.dim() {
            return Err(Error::param("query dimension does not match the hierarchy"));
        }
        Ok(self.vote(query))
    }

    fn vote(&self, query: &[f64]) -> usize {
        let mut scored: Vec<(f64, usize)> = self
            .points
            .rows()
            .enumerate()
            .map(|(j, p)| (squared_euclidean(p, query), j))
            .collect();
        let m = self.votes.min(scored.len());
        let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if m < scored.len() {
            scored.select_nth_unstable_by(m - 1, order);
        }
        let labels = self.subsample_labels.labels();
        let mut counts = vec![0usize; self.subsample_labels.k_max() + 1];
        for &(_, j) in &scored[..m] {
            counts[labels[j]] += 1;
        }
        // first maximum is the smallest label
        let mut best = 0;
        for (label, &c) in counts.iter().enumerate() {
            if c > counts[best] {
                best = label;
            }
        }
        best
    }

    /// Extends the pruning to every row of `points`; subsample rows keep
    /// their own labels.
    pub fn extend(&self, points: &PointSet) -> Result<ClusterLabeling> {
        if points.dim() != self.points.dim() {
            return Err(Error::param("point dimension does not match the hierarchy"));
        }
        let mut labels: Vec<usize> = (0..points.len())
            .into_par_iter()
            .map(|i| self.vote(points.row(i)))
            .collect();
        for (pos, &i) in self.subsample.iter().enumerate() {
            if i < labels.len() {
                labels[i] = self.subsample_labels.labels()[pos];
            }
        }
        relabel(&labels)
    }
}

/// Renumbers nonzero labels `1..` by first appearance, keeping 0 as noise.
fn relabel(labels: &[usize]) -> Result<ClusterLabeling> {
    let max = labels.iter().copied().max().unwrap_or(0);
    let mut map = vec![0usize; max + 1];
    let mut next = 0;
    let out = labels
        .iter()
        .map(|&l| {
            if l == 0 {
                return 0;
            }
            if map[l] == 0 {
                next += 1;
                map[l] = next;
            }
            map[l]
        })
        .collect();
    ClusterLabeling::new(out)
}

fn merge_sorted(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        if x[i] <= y[j] {
            out.push(x[i]);
            i += 1;
        } else {
            out.push(y[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&x[i..]);
    out.extend_from_slice(&y[j..]);
    out
}

fn lower_median(sorted: &[f64]) -> f64 {
    sorted[(sorted.len() - 1) / 2]
}

/// Subsample positions left after removing the `remove` points whose
/// `t`-th nearest neighbor is farthest (ties remove the larger index).
fn sparsest_removed(points: &PointSet, t: usize, remove: usize) -> Vec<usize> {
    if remove == 0 {
        return (0..points.len()).collect();
    }
    let radius: Vec<f64> = nearest_neighbors(points, t)
        .iter()
        .enumerate()
        .map(|(i, nbrs)| squared_euclidean(points.row(i), points.row(*nbrs.last().unwrap())))
        .collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| radius[b].total_cmp(&radius[a]).then(b.cmp(&a)));
    let mut kept: Vec<usize> = order[remove..].to_vec();
    kept.sort_unstable();
    kept
}

/// Indices of the `t` nearest points of every row (itself included),
/// ordered by distance then index.
fn nearest_neighbors(points: &PointSet, t: usize) -> Vec<Vec<usize>> {
    let n = points.len();
    let t = t.min(n);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let x = points.row(i);
            let mut scored: Vec<(f64, usize)> = points
                .rows()
                .enumerate()
                .map(|(j, y)| (if i == j { -1.0 } else { squared_euclidean(x, y) }, j))
                .collect();
            let order =
                |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if t < n {
                scored.select_nth_unstable_by(t - 1, order);
                scored.truncate(t);
            }
            scored.sort_unstable_by(order);
            scored.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

/// Coordinate-wise (lower) median of every point's `t`-nearest neighborhood.
pub fn neighborhood_medians(points: &PointSet, t: usize) -> Result<PointSet> {
    if t == 0 {
        return Err(Error::param("neighborhood size must be at least 1"));
    }
    let dim = points.dim();
    let coords: Vec<f64> = nearest_neighbors(points, t)
        .into_par_iter()
        .flat_map_iter(|nbrs| {
            (0..dim).map(move |d| {
                let mut col: Vec<f64> = nbrs.iter().map(|&j| points.row(j)[d]).collect();
                col.sort_unstable_by(f64::total_cmp);
                lower_median(&col)
            })
        })
        .collect::<Vec<_>>();
    PointSet::new(dim, coords)
}

/// Median linkage: clusters are joined by the lower median of all their
/// cross distances.
pub fn median_linkage(points: &PointSet) -> Result<Dendrogram> {
    let n = points.len();
    if n < 2 {
        return Err(Error::param(format!("hierarchy needs n >= 2, got {n}")));
    }
    let base = pairwise_distances(points);
    let mut lists: Vec<Vec<f64>> = base.iter().map(|&d| vec![d]).collect();
    let merges = greedy_agglomerate(n, base, |ctx| {
        let ac = condensed_index(n, ctx.a.min(ctx.c), ctx.a.max(ctx.c));
        let bc = condensed_index(n, ctx.b.min(ctx.c), ctx.b.max(ctx.c));
        let from_b = std::mem::take(&mut lists[bc]);
        lists[ac] = merge_sorted(&lists[ac], &from_b);
        lower_median(&lists[ac])
    });
    Dendrogram::new(n, merges)
}

/// Neighborhood-median linkage: median linkage between the neighborhood
/// medians of the points.
pub fn median_neighborhood_hierarchy(points: &PointSet, t: usize) -> Result<Dendrogram> {
    median_linkage(&neighborhood_medians(points, t)?)
}

/// Latest state of the merge sequence with exactly `k` clusters of size at
/// least `min_size`; `None` when no such state exists.
fn prune_step(dendrogram: &Dendrogram, k: usize, min_size: usize) -> Option<usize> {
    let n = dendrogram.n_leaves();
    let mut size: Vec<usize> = vec![0; 2 * n];
    size[1..=n].fill(1);
    let mut big = if min_size <= 1 { n } else { 0 };
    let mut found = (big == k).then_some(0);
    for (s, m) in dendrogram.merges().iter().enumerate() {
        let (l, r) = (size[m.left], size[m.right]);
        let merged = l + r;
        size[n + 1 + s] = merged;
        big -= usize::from(l >= min_size) + usize::from(r >= min_size);
        big += usize::from(merged >= min_size);
        if big == k {
            found = Some(s + 1);
        }
    }
    found
}

/// Labels of the `k` large clusters after `steps` merges; members of
/// smaller clusters get label 0.
fn pruned_labels(dendrogram: &Dendrogram, steps: usize, min_size: usize) -> Result<ClusterLabeling> {
    let mut uf = dendrogram.partition_after(steps);
    let n = dendrogram.n_leaves();
    let raw = uf.component_labels();
    let sizes = {
        let mut s = vec![0usize; n + 1];
        for &l in &raw {
            s[l] += 1;
        }
        s
    };
    let kept: Vec<usize> = raw
        .iter()
        .map(|&l| if sizes[l] >= min_size { l } else { 0 })
        .collect();
    relabel(&kept)
}

/// Robust hierarchy on a seeded subsample of `points.points()`, pruned to
/// `target_k` clusters and extended to all rows.
pub fn robust_cluster(
    points: &CounterfactualMatrix,
    params: &GoodNeighborhoodParams,
    target_k: usize,
    seed: u64,
) -> Result<(Hierarchy, ClusterLabeling)> {
    robust_cluster_points(points.points(), params, target_k, seed)
}

/// [`robust_cluster`] on a bare point set.
pub fn robust_cluster_points(
    points: &PointSet,
    params: &GoodNeighborhoodParams,
    target_k: usize,
    seed: u64,
) -> Result<(Hierarchy, ClusterLabeling)> {
    params.validate()?;
    let n = points.len();
    let n0 = params.subsample_n;
    if n0 > n {
        return Err(Error::param(format!(
            "subsample size {n0} exceeds the {n} available points"
        )));
    }
    if target_k == 0 || target_k > n0 {
        return Err(Error::param(format!("target k = {target_k} outside 1..={n0}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subsample = index::sample(&mut rng, n, n0).into_vec();
    subsample.sort_unstable();
    let sub = points.select(&subsample);

    let t = params.neighborhood_size(target_k);
    let core = sparsest_removed(&sub, t, params.trimmed(target_k));
    let core_points = sub.select(&core);
    let dendrogram = median_neighborhood_hierarchy(&core_points, t)?;
    let degenerate = core_points.rows().all(|r| r == core_points.row(0));
    let n_core = core.len();
    let (pruning_step, min_size, core_labels) = if degenerate {
        (n_core - 1, 1, ClusterLabeling::new(vec![1; n_core])?)
    } else {
        let min_size = params.min_cluster_size();
        match prune_step(&dendrogram, target_k, min_size) {
            Some(step) => (step, min_size, pruned_labels(&dendrogram, step, min_size)?),
            None => {
                let step = n_core - target_k;
                (step, 1, dendrogram.cut(target_k)?)
            }
        }
    };
    let mut sub_labels = vec![0; n0];
    for (&pos, &l) in core.iter().zip(core_labels.labels()) {
        sub_labels[pos] = l;
    }
    let hierarchy = Hierarchy {
        subsample,
        points: sub,
        core,
        dendrogram,
        t,
        votes: t,
        min_cluster_size: min_size,
        pruning_step,
        subsample_labels: ClusterLabeling::new(sub_labels)?,
        degenerate,
    };
    let labels = hierarchy.extend(points)?;
    Ok((hierarchy, labels))
}

/// Fraction of points misassigned under the best one-to-one matching of
/// predicted labels to true labels. Label 0 is a class like any other.
pub fn pruning_error(labeling: &ClusterLabeling, truth: &ClusterLabeling) -> Result<f64> {
    if labeling.len() != truth.len() {
        return Err(Error::param(format!(
            "labelings have lengths {} and {}",
            labeling.len(),
            truth.len()
        )));
    }
    let n = labeling.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut confusion = vec![vec![0.0; truth.k_max() + 1]; labeling.k_max() + 1];
    for (&p, &t) in labeling.labels().iter().zip(truth.labels()) {
        confusion[p][t] += 1.0;
    }
    let matched: f64 = max_weight_matching(&confusion)
        .iter()
        .enumerate()
        .filter_map(|(p, t)| t.map(|t| confusion[p][t]))
        .sum();
    Ok(1.0 - matched / n as f64)
}
