//! Point and set distances, and exact agglomerative clustering.
//!
//! All distances are Euclidean. Agglomeration is the textbook greedy
//! procedure: at every step merge the pair of active clusters with the
//! smallest linkage value, breaking exact ties lexicographically on the
//! smallest member index of each cluster.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClusterLabeling, PointSet};
use crate::union_find::UnionFind;

/// Euclidean distance between two vectors of equal length.
pub fn point_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::param(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(euclidean(x, y))
}

#[inline]
pub(crate) fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    squared_euclidean(x, y).sqrt()
}

#[inline]
pub(crate) fn squared_euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// Set-to-set distance used by agglomerative clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkageKind {
    /// Minimum pairwise distance.
    Single,
    /// Mean pairwise distance.
    Average,
    /// Maximum pairwise distance.
    Complete,
}

impl LinkageKind {
    pub const ALL: [LinkageKind; 3] = [
        LinkageKind::Single,
        LinkageKind::Average,
        LinkageKind::Complete,
    ];
}

impl fmt::Display for LinkageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkageKind::Single => "single",
            LinkageKind::Average => "average",
            LinkageKind::Complete => "complete",
        })
    }
}

impl FromStr for LinkageKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(LinkageKind::Single),
            "average" => Ok(LinkageKind::Average),
            "complete" => Ok(LinkageKind::Complete),
            other => Err(Error::param(format!("unknown linkage '{other}'"))),
        }
    }
}

/// Linkage value between two nonempty point sets of the same dimension.
pub fn linkage_distance(s1: &PointSet, s2: &PointSet, kind: LinkageKind) -> Result<f64> {
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::param("linkage between empty point sets"));
    }
    if s1.dim() != s2.dim() {
        return Err(Error::param(format!(
            "dimension mismatch: {} vs {}",
            s1.dim(),
            s2.dim()
        )));
    }
    let pairs = s1
        .rows()
        .flat_map(|x| s2.rows().map(move |y| euclidean(x, y)));
    Ok(match kind {
        LinkageKind::Single => pairs.fold(f64::INFINITY, f64::min),
        LinkageKind::Complete => pairs.fold(0.0, f64::max),
        LinkageKind::Average => pairs.sum::<f64>() / (s1.len() * s2.len()) as f64,
    })
}

/// One agglomeration step. Node ids are 1-based: leaves are `1..=n`, the
/// node created by merge `s` (0-based) is `n + 1 + s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

/// Binary merge tree over `n_leaves` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n_leaves: usize,
    merges: Vec<Merge>,
}

#[derive(Serialize, Deserialize)]
struct DendrogramJson {
    n: usize,
    merges: Vec<(usize, usize, f64)>,
}

impl Dendrogram {
    /// Checks the tree structure: `n - 1` merges, every node used exactly
    /// once as a child, children created before their parent, heights finite
    /// and nonnegative.
    pub fn new(n_leaves: usize, merges: Vec<Merge>) -> Result<Self> {
        if n_leaves == 0 {
            return Err(Error::data("dendrogram needs at least one leaf"));
        }
        if merges.len() != n_leaves - 1 {
            return Err(Error::data(format!(
                "{} merges for {n_leaves} leaves",
                merges.len()
            )));
        }
        let mut used = vec![false; 2 * n_leaves];
        for (s, m) in merges.iter().enumerate() {
            let limit = n_leaves + s;
            for child in [m.left, m.right] {
                if child == 0 || child > limit {
                    return Err(Error::data(format!("merge {s} references node {child}")));
                }
                if std::mem::replace(&mut used[child], true) {
                    return Err(Error::data(format!("node {child} merged twice")));
                }
            }
            if !(m.height.is_finite() && m.height >= 0.0) {
                return Err(Error::data(format!("merge {s} has height {}", m.height)));
            }
        }
        Ok(Self { n_leaves, merges })
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.merges.iter().map(|m| m.height)
    }

    pub fn is_monotone(&self) -> bool {
        self.merges.windows(2).all(|w| w[0].height <= w[1].height)
    }

    /// Leaf members (0-based point indices, ascending) of every node,
    /// indexed by node id; entry 0 is unused.
    pub fn node_members(&self) -> Vec<Vec<usize>> {
        let n = self.n_leaves;
        let mut members: Vec<Vec<usize>> = Vec::with_capacity(2 * n);
        members.push(Vec::new());
        for leaf in 0..n {
            members.push(vec![leaf]);
        }
        for m in &self.merges {
            let mut merged = Vec::with_capacity(members[m.left].len() + members[m.right].len());
            merged.extend_from_slice(&members[m.left]);
            merged.extend_from_slice(&members[m.right]);
            merged.sort_unstable();
            members.push(merged);
        }
        members
    }

    /// Union-find over leaves after applying the first `steps` merges.
    pub(crate) fn partition_after(&self, steps: usize) -> UnionFind {
        let n = self.n_leaves;
        let mut uf = UnionFind::new(n);
        // a representative leaf for every node
        let mut rep: Vec<usize> = (0..n).collect();
        rep.reserve(n);
        for m in &self.merges[..steps] {
            let (a, b) = (rep[m.left - 1], rep[m.right - 1]);
            uf.union(a, b);
            rep.push(a);
        }
        uf
    }

    /// Flat clustering with `k` clusters: undo the last `k - 1` merges and
    /// number components `1..=k` by their smallest member index.
    pub fn cut(&self, k: usize) -> Result<ClusterLabeling> {
        if k == 0 || k > self.n_leaves {
            return Err(Error::param(format!(
                "k = {k} outside 1..={}",
                self.n_leaves
            )));
        }
        let mut uf = self.partition_after(self.n_leaves - k);
        ClusterLabeling::new(uf.component_labels())
    }

    pub fn to_json(&self) -> Result<String> {
        let json = DendrogramJson {
            n: self.n_leaves,
            merges: self
                .merges
                .iter()
                .map(|m| (m.left, m.right, m.height))
                .collect(),
        };
        Ok(serde_json::to_string(&json)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let json: DendrogramJson = serde_json::from_str(s)?;
        Self::new(
            json.n,
            json.merges
                .into_iter()
                .map(|(left, right, height)| Merge {
                    left,
                    right,
                    height,
                })
                .collect(),
        )
    }
}

/// Flat clustering from a dendrogram; see [`Dendrogram::cut`].
pub fn cut(dendrogram: &Dendrogram, k: usize) -> Result<ClusterLabeling> {
    dendrogram.cut(k)
}

/// Condensed upper-triangular index for `a < b < n`.
#[inline]
pub(crate) fn condensed_index(n: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < n);
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

/// Condensed matrix of pairwise Euclidean distances between rows.
pub(crate) fn pairwise_distances(points: &PointSet) -> Vec<f64> {
    use rayon::prelude::*;
    let n = points.len();
    (0..n)
        .into_par_iter()
        .flat_map_iter(|a| {
            let x = points.row(a);
            (a + 1..n).map(move |b| euclidean(x, points.row(b)))
        })
        .collect()
}

/// State visible to a linkage update rule when clusters `a` and `b` merge
/// and the distance to a third cluster `c` must be recomputed.
pub(crate) struct UpdateContext<'a> {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    /// Members of the merged cluster, ascending.
    pub merged: &'a [usize],
    /// Members of `c`, ascending.
    pub other: &'a [usize],
    pub d_ac: f64,
    pub d_bc: f64,
}

/// Greedy agglomeration over a condensed initial distance matrix. Cluster
/// slots are named by their smallest member, so the lexicographic tie-break
/// is a scan in slot order keeping the first strict minimum.
pub(crate) fn greedy_agglomerate<F>(n: usize, mut dist: Vec<f64>, mut update: F) -> Vec<Merge>
where
    F: FnMut(&UpdateContext<'_>) -> f64,
{
    debug_assert_eq!(dist.len(), n * n.saturating_sub(1) / 2);
    let mut active: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut node: Vec<usize> = (1..=n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    while active.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for (pos, &a) in active.iter().enumerate() {
            let row = a * n - a * (a + 1) / 2;
            for &b in &active[pos + 1..] {
                let d = dist[row + b - a - 1];
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        let (height, a, b) = best.expect("at least two active clusters");
        merges.push(Merge {
            left: node[a],
            right: node[b],
            height,
        });
        node[a] = n + merges.len();

        let taken = std::mem::take(&mut members[b]);
        let mut merged = Vec::with_capacity(members[a].len() + taken.len());
        {
            let (x, y) = (&members[a], &taken);
            let (mut i, mut j) = (0, 0);
            while i < x.len() && j < y.len() {
                if x[i] < y[j] {
                    merged.push(x[i]);
                    i += 1;
                } else {
                    merged.push(y[j]);
                    j += 1;
                }
            }
            merged.extend_from_slice(&x[i..]);
            merged.extend_from_slice(&y[j..]);
        }
        active.retain(|&s| s != b);
        for &c in &active {
            if c == a {
                continue;
            }
            let ac = condensed_index(n, a.min(c), a.max(c));
            let bc = condensed_index(n, b.min(c), b.max(c));
            let ctx = UpdateContext {
                a,
                b,
                c,
                merged: &merged,
                other: &members[c],
                d_ac: dist[ac],
                d_bc: dist[bc],
            };
            dist[ac] = update(&ctx);
        }
        members[a] = merged;
    }
    merges
}

/// Mean of `base` distances over all pairs, summed with the cluster holding
/// the smaller smallest member as the outer loop and both in ascending order.
pub(crate) fn canonical_average(n: usize, base: &[f64], x: &[usize], y: &[usize]) -> f64 {
    let (outer, inner) = if x[0] < y[0] { (x, y) } else { (y, x) };
    let mut sum = 0.0;
    for &i in outer {
        for &j in inner {
            sum += if i < j {
                base[condensed_index(n, i, j)]
            } else {
                base[condensed_index(n, j, i)]
            };
        }
    }
    sum / (x.len() * y.len()) as f64
}

/// Agglomerative clustering of the rows of `points`.
pub fn agglomerate(points: &PointSet, kind: LinkageKind) -> Result<Dendrogram> {
    let n = points.len();
    if n < 2 {
        return Err(Error::param(format!("agglomerate needs n >= 2, got {n}")));
    }
    let base = pairwise_distances(points);
    let merges = match kind {
        LinkageKind::Single => greedy_agglomerate(n, base, |c| c.d_ac.min(c.d_bc)),
        LinkageKind::Complete => greedy_agglomerate(n, base, |c| c.d_ac.max(c.d_bc)),
        LinkageKind::Average => {
            let lookup = base.clone();
            greedy_agglomerate(n, base, |c| canonical_average(n, &lookup, c.merged, c.other))
        }
    };
    Dendrogram::new(n, merges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn set(rows: &[&[f64]]) -> PointSet {
        PointSet::from_rows(rows).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(point_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(point_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert!(point_distance(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn singleton_linkages_agree() {
        let a = set(&[&[0.0]]);
        let b = set(&[&[2.0]]);
        for kind in LinkageKind::ALL {
            assert_eq!(linkage_distance(&a, &b, kind).unwrap(), 2.0);
        }
    }

    #[test]
    fn two_by_two_linkages() {
        // pairs: 3, 4, sqrt(10), sqrt(17)
        let a = set(&[&[0.0, 0.0], &[0.0, 1.0]]);
        let b = set(&[&[3.0, 0.0], &[4.0, 0.0]]);
        assert_eq!(linkage_distance(&a, &b, LinkageKind::Single).unwrap(), 3.0);
        assert_relative_eq!(
            linkage_distance(&a, &b, LinkageKind::Complete).unwrap(),
            17f64.sqrt(),
            epsilon = 1e-15
        );
        let avg = (3.0 + 4.0 + 10f64.sqrt() + 17f64.sqrt()) / 4.0;
        assert_relative_eq!(
            linkage_distance(&a, &b, LinkageKind::Average).unwrap(),
            avg,
            epsilon = 1e-12
        );
        assert_relative_eq!(avg, 3.5714, epsilon = 1e-4);
    }

    #[test]
    fn empty_set_rejected() {
        let a = set(&[&[0.0]]);
        let e = PointSet::empty(1).unwrap();
        assert!(linkage_distance(&a, &e, LinkageKind::Single).is_err());
    }

    #[test]
    fn identical_points_merge_at_zero() {
        let p = set(&[&[1.0, 1.0][..]; 5]);
        for kind in LinkageKind::ALL {
            let d = agglomerate(&p, kind).unwrap();
            assert!(d.heights().all(|h| h == 0.0));
            // ties resolved lexicographically: leaf 1 absorbs 2, then 3, ...
            assert_eq!(d.merges()[0].left, 1);
            assert_eq!(d.merges()[0].right, 2);
            assert_eq!(d.merges()[1].left, 6);
            assert_eq!(d.merges()[1].right, 3);
        }
    }

    #[test]
    fn forced_order_single_linkage() {
        let p = set(&[&[0.0], &[1.0], &[10.0]]);
        let d = agglomerate(&p, LinkageKind::Single).unwrap();
        assert_eq!(
            d.merges(),
            &[
                Merge { left: 1, right: 2, height: 1.0 },
                Merge { left: 4, right: 3, height: 9.0 },
            ]
        );
        assert_eq!(d.cut(1).unwrap().labels(), &[1, 1, 1]);
        assert_eq!(d.cut(2).unwrap().labels(), &[1, 1, 2]);
        assert_eq!(d.cut(3).unwrap().labels(), &[1, 2, 3]);
        assert!(d.cut(0).is_err());
        assert!(d.cut(4).is_err());
    }

    #[test]
    fn too_few_points() {
        let p = set(&[&[0.0]]);
        assert!(agglomerate(&p, LinkageKind::Single).is_err());
    }

    #[test]
    fn dendrogram_json_round_trip() {
        let p = set(&[&[0.0], &[1.0], &[10.0], &[10.5]]);
        let d = agglomerate(&p, LinkageKind::Average).unwrap();
        let back = Dendrogram::from_json(&d.to_json().unwrap()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn malformed_dendrogram_rejected() {
        let dup = vec![
            Merge { left: 1, right: 2, height: 0.0 },
            Merge { left: 1, right: 3, height: 1.0 },
        ];
        assert!(Dendrogram::new(3, dup).is_err());
        let forward = vec![
            Merge { left: 1, right: 5, height: 0.0 },
            Merge { left: 2, right: 3, height: 1.0 },
        ];
        assert!(Dendrogram::new(3, forward).is_err());
    }

    fn points(max_n: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-10.0f64..10.0, dim), 1..max_n)
    }

    proptest! {
        #[test]
        fn linkage_ordering_and_symmetry(a in points(8, 3), b in points(8, 3)) {
            let (a, b) = (PointSet::from_rows(&a).unwrap(), PointSet::from_rows(&b).unwrap());
            let s = linkage_distance(&a, &b, LinkageKind::Single).unwrap();
            let m = linkage_distance(&a, &b, LinkageKind::Average).unwrap();
            let c = linkage_distance(&a, &b, LinkageKind::Complete).unwrap();
            prop_assert!(s <= m + 1e-12 && m <= c + 1e-12);
            for kind in LinkageKind::ALL {
                let ab = linkage_distance(&a, &b, kind).unwrap();
                let ba = linkage_distance(&b, &a, kind).unwrap();
                prop_assert!((ab - ba).abs() <= 1e-12 * ab.max(1.0));
            }
        }

        #[test]
        fn singleton_linkage_is_point_distance(x in prop::collection::vec(-5.0f64..5.0, 4), y in prop::collection::vec(-5.0f64..5.0, 4)) {
            let d = point_distance(&x, &y).unwrap();
            let l1: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
            prop_assert!(d <= l1 + 1e-12);
            for kind in LinkageKind::ALL {
                let v = linkage_distance(&set(&[&x]), &set(&[&y]), kind).unwrap();
                prop_assert_eq!(v, d);
            }
        }

        #[test]
        fn heights_never_invert(p in points(30, 2)) {
            prop_assume!(p.len() >= 2);
            let p = PointSet::from_rows(&p).unwrap();
            for kind in LinkageKind::ALL {
                let d = agglomerate(&p, kind).unwrap();
                prop_assert!(d.is_monotone(), "{kind}: {:?}", d.merges());
            }
        }

        #[test]
        fn cut_yields_k_clusters(p in points(20, 2), k in 1usize..20) {
            prop_assume!(p.len() >= 2 && k <= p.len());
            let p = PointSet::from_rows(&p).unwrap();
            let d = agglomerate(&p, LinkageKind::Complete).unwrap();
            let labels = d.cut(k).unwrap();
            prop_assert_eq!(labels.k_max(), k);
            prop_assert_eq!(labels.labels()[0], 1);
        }
    }
}
