#![allow(dead_code)]

use causal_cluster::linkage::{point_distance, LinkageKind, Merge};
use causal_cluster::model::PointSet;
use rand::Rng;

/// Agglomeration that recomputes every cluster-pair linkage from point
/// distances at every step. Clusters are kept ordered by smallest member;
/// ties go to the first pair in that order.
pub fn naive_agglomerate(points: &PointSet, kind: LinkageKind) -> Vec<Merge> {
    let n = points.len();
    let d = |i: usize, j: usize| point_distance(points.row(i), points.row(j)).unwrap();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i + 1, vec![i])).collect();
    let mut merges = Vec::new();
    while clusters.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for x in 0..clusters.len() {
            for y in x + 1..clusters.len() {
                let (a, b) = (&clusters[x].1, &clusters[y].1);
                let value = match kind {
                    LinkageKind::Single => a
                        .iter()
                        .flat_map(|&i| b.iter().map(move |&j| (i, j)))
                        .map(|(i, j)| d(i, j))
                        .fold(f64::INFINITY, f64::min),
                    LinkageKind::Complete => a
                        .iter()
                        .flat_map(|&i| b.iter().map(move |&j| (i, j)))
                        .map(|(i, j)| d(i, j))
                        .fold(0.0, f64::max),
                    LinkageKind::Average => {
                        let mut sum = 0.0;
                        for &i in a {
                            for &j in b {
                                sum += d(i, j);
                            }
                        }
                        sum / (a.len() * b.len()) as f64
                    }
                };
                if best.is_none_or(|(v, _, _)| value < v) {
                    best = Some((value, x, y));
                }
            }
        }
        let (height, x, y) = best.unwrap();
        let (right, taken) = clusters.remove(y);
        let (left, ref mut members) = clusters[x];
        members.extend(taken);
        members.sort_unstable();
        merges.push(Merge { left, right, height });
        clusters[x].0 = n + merges.len();
    }
    merges
}

/// All-pairs Hausdorff distance.
pub fn brute_hausdorff(a: &PointSet, b: &PointSet) -> f64 {
    let directed = |x: &PointSet, y: &PointSet| {
        x.rows()
            .map(|p| {
                y.rows()
                    .map(|q| point_distance(p, q).unwrap())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

pub fn uniform_points<R: Rng>(rng: &mut R, n: usize, dim: usize, scale: f64) -> PointSet {
    let coords = (0..n * dim).map(|_| rng.random_range(-scale..scale)).collect();
    PointSet::new(dim, coords).unwrap()
}

/// Points on an integer lattice, so that many distances tie.
pub fn lattice_points<R: Rng>(rng: &mut R, n: usize, dim: usize, side: i32) -> PointSet {
    let coords = (0..n * dim).map(|_| rng.random_range(0..side) as f64).collect();
    PointSet::new(dim, coords).unwrap()
}

/// Adds independent noise in `[-gamma_a, gamma_a]` to column `a`.
pub fn perturb_box<R: Rng>(rng: &mut R, points: &PointSet, gamma: &[f64]) -> PointSet {
    let coords = points
        .rows()
        .flat_map(|r| r.iter().zip(gamma).map(|(v, g)| v + rng.random_range(-1.0..=1.0) * g).collect::<Vec<_>>())
        .collect();
    PointSet::new(points.dim(), coords).unwrap()
}
