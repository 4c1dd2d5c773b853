//! Evaluation metrics: the linkage perturbation gap, level-set Hausdorff
//! distance, classification error and a rank correlation for trend checks.

use serde::Serialize;

use crate::density::{hausdorff, LevelSetClustering};
use crate::error::{Error, Result};
use crate::linkage::{linkage_distance, LinkageKind};
use crate::model::PointSet;

pub use crate::robust::pruning_error as classification_error;

/// `gap = |D(S1, S2) - D(S1_hat, S2_hat)|` and its bound
/// `2 * sum_a max_i |S_hat[i][a] - S[i][a]|` over both sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prop1Gap {
    pub gap: f64,
    pub bound: f64,
}

impl Prop1Gap {
    pub fn holds(&self) -> bool {
        self.gap <= self.bound
    }
}

fn check_pair(exact: &PointSet, noisy: &PointSet, name: &str) -> Result<()> {
    if exact.len() != noisy.len() || exact.dim() != noisy.dim() {
        return Err(Error::param(format!(
            "{name}: {}x{} does not match its estimate {}x{}",
            exact.len(),
            exact.dim(),
            noisy.len(),
            noisy.dim()
        )));
    }
    Ok(())
}

pub fn prop1_gap(
    s1: &PointSet,
    s2: &PointSet,
    s1_hat: &PointSet,
    s2_hat: &PointSet,
    kind: LinkageKind,
) -> Result<Prop1Gap> {
    check_pair(s1, s1_hat, "S1")?;
    check_pair(s2, s2_hat, "S2")?;
    let d = linkage_distance(s1, s2, kind)?;
    let d_hat = linkage_distance(s1_hat, s2_hat, kind)?;
    let mut sup = vec![0.0f64; s1.dim()];
    for (exact, noisy) in [(s1, s1_hat), (s2, s2_hat)] {
        for (x, y) in exact.rows().zip(noisy.rows()) {
            for (a, (u, v)) in x.iter().zip(y).enumerate() {
                sup[a] = sup[a].max((u - v).abs());
            }
        }
    }
    Ok(Prop1Gap {
        gap: (d - d_hat).abs(),
        bound: 2.0 * sup.iter().sum::<f64>(),
    })
}

/// Hausdorff distance between the retained estimated points and the
/// retained true points. `f64::INFINITY` when exactly one level set is
/// empty (see [`is_disjoint`]), `0` when both are.
pub fn levelset_hausdorff(
    estimate: &LevelSetClustering,
    reference: &LevelSetClustering,
    points_hat: &PointSet,
    points_true: &PointSet,
) -> Result<f64> {
    if estimate.h != reference.h || estimate.t != reference.t {
        return Err(Error::param(format!(
            "level sets differ in (h, t): ({}, {}) vs ({}, {})",
            estimate.h, estimate.t, reference.h, reference.t
        )));
    }
    let in_range = |ls: &LevelSetClustering, pts: &PointSet| {
        ls.labels.len() == pts.len() && ls.retained.iter().all(|&i| i < pts.len())
    };
    if !in_range(estimate, points_hat) || !in_range(reference, points_true) {
        return Err(Error::param("level set does not belong to the given points"));
    }
    match (estimate.retained.is_empty(), reference.retained.is_empty()) {
        (true, true) => Ok(0.0),
        (true, false) | (false, true) => Ok(f64::INFINITY),
        (false, false) => hausdorff(
            &points_hat.select(&estimate.retained),
            &points_true.select(&reference.retained),
        ),
    }
}

/// True for the sentinel returned when exactly one level set is empty.
pub fn is_disjoint(distance: f64) -> bool {
    distance == f64::INFINITY
}

/// Ranks `1..=n` with ties given their average rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties. `None` when
/// either sequence is constant, has fewer than two entries, or the lengths
/// differ.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{level_set_cluster, KernelSpec};
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> PointSet {
        PointSet::new(1, xs.to_vec()).unwrap()
    }

    #[test]
    fn gap_zero_without_perturbation() {
        let s1 = PointSet::from_rows(&[[0.0, 1.0], [2.0, 0.5]]).unwrap();
        let s2 = PointSet::from_rows(&[[3.0, 3.0]]).unwrap();
        for kind in LinkageKind::ALL {
            let g = prop1_gap(&s1, &s2, &s1, &s2, kind).unwrap();
            assert_eq!(g, Prop1Gap { gap: 0.0, bound: 0.0 });
        }
    }

    #[test]
    fn common_shift_is_free_and_bounded() {
        let s1 = line(&[0.0, 1.0]);
        let s2 = line(&[5.0]);
        let shift = |p: &PointSet, g: f64| line(&p.coords().iter().map(|v| v + g).collect::<Vec<_>>());
        for kind in LinkageKind::ALL {
            let g = prop1_gap(&s1, &s2, &shift(&s1, 0.3), &shift(&s2, 0.3), kind).unwrap();
            assert!(g.gap < 1e-12);
            assert!((g.bound - 0.6).abs() < 1e-12);
        }
    }

    #[test]
    fn gap_rejects_mismatched_sizes() {
        let s = line(&[0.0, 1.0]);
        assert!(prop1_gap(&s, &s, &line(&[0.0]), &s, LinkageKind::Single).is_err());
    }

    #[test]
    fn levelset_singletons() {
        let k = KernelSpec::triangular(1).unwrap();
        let a = line(&[0.0]);
        let b = line(&[0.3]);
        let la = level_set_cluster(&a, 1.0, 0.5, &k).unwrap();
        let lb = level_set_cluster(&b, 1.0, 0.5, &k).unwrap();
        assert!((levelset_hausdorff(&lb, &la, &b, &a).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(levelset_hausdorff(&la, &la, &a, &a).unwrap(), 0.0);
    }

    #[test]
    fn levelset_empty_sides() {
        let k = KernelSpec::triangular(1).unwrap();
        let a = line(&[0.0]);
        let full = level_set_cluster(&a, 1.0, 0.5, &k).unwrap();
        let empty = level_set_cluster(&a, 1.0, 5.0, &k).unwrap();
        let mut empty_same_level = empty.clone();
        empty_same_level.t = 0.5;
        let d = levelset_hausdorff(&empty_same_level, &full, &a, &a).unwrap();
        assert!(is_disjoint(d));
        assert_eq!(levelset_hausdorff(&empty, &empty, &a, &a).unwrap(), 0.0);
        assert!(levelset_hausdorff(&empty, &full, &a, &a).is_err());
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]), None);
        // ranks [1, 2.5, 2.5] against [1, 2, 3]
        let r = spearman(&[1.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r - 0.866_025_403_784_438_6).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn gap_within_bound(
            c in prop::collection::vec(-3.0f64..3.0, 12),
            e in prop::collection::vec(-0.5f64..0.5, 12),
        ) {
            let s1 = PointSet::new(2, c[..6].to_vec()).unwrap();
            let s2 = PointSet::new(2, c[6..].to_vec()).unwrap();
            let noisy = |p: &PointSet, off: usize| {
                let v: Vec<f64> = p.coords().iter().zip(&e[off..]).map(|(a, b)| a + b).collect();
                PointSet::new(2, v).unwrap()
            };
            for kind in LinkageKind::ALL {
                let g = prop1_gap(&s1, &s2, &noisy(&s1, 0), &noisy(&s2, 6), kind).unwrap();
                prop_assert!(g.gap <= g.bound + 1e-12);
            }
        }

        #[test]
        fn spearman_in_range(x in prop::collection::vec(-5.0f64..5.0, 2..20)) {
            let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
            if let Some(r) = spearman(&x, &y) {
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
            }
        }
    }
}
