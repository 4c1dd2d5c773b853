//! Plug-in kernel density estimation in the counterfactual mean space and
//! level-set clustering through connected components of the Rips graph.
//!
//! The kernel is the radially symmetric triangular kernel
//! `K(u) = c_q (1 - ||u||)_+`, supported on the closed unit ball and
//! Lipschitz with constant `c_q`.
//!
//! Retained sets are evaluated at the sample points themselves: point `i`
//! is retained at level `t` when `p_hat_h(point_i) > t`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linkage::{euclidean, squared_euclidean};
use crate::model::{ClusterLabeling, PointSet};
use crate::union_find::UnionFind;

/// `Gamma(q / 2)` for a positive integer `q`, by the half-integer recursion.
fn gamma_half(q: usize) -> f64 {
    let (mut value, mut x) = if q % 2 == 0 {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    let target = q as f64 / 2.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    value
}

/// Constant `c_q` making `c_q (1 - ||u||)_+` integrate to one over `R^q`:
/// `c_q = q (q + 1) Gamma(q/2) / (2 pi^(q/2))`.
pub fn kernel_normalizer(q: usize) -> Result<f64> {
    if q < 1 {
        return Err(Error::param("kernel dimension must be at least 1"));
    }
    let qf = q as f64;
    Ok(qf * (qf + 1.0) * gamma_half(q) / (2.0 * std::f64::consts::PI.powf(qf / 2.0)))
}

/// Triangular radial profile `(1 - r)_+` without the normalizer.
#[inline]
pub fn triangular_profile(r: f64) -> f64 {
    (1.0 - r).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSpec {
    dim: usize,
    normalizer: f64,
    lipschitz: f64,
}

impl KernelSpec {
    pub fn triangular(dim: usize) -> Result<Self> {
        let c = kernel_normalizer(dim)?;
        Ok(Self {
            dim,
            normalizer: c,
            lipschitz: c,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `c_q`.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Lipschitz constant `M_K` (equal to `c_q` for the triangular kernel).
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// `K(u)`.
    pub fn eval(&self, u: &[f64]) -> f64 {
        let r = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.normalizer * triangular_profile(r)
    }

    fn check(&self, points: &PointSet) -> Result<()> {
        if points.dim() != self.dim {
            return Err(Error::param(format!(
                "kernel dimension {} does not match points of dimension {}",
                self.dim,
                points.dim()
            )));
        }
        Ok(())
    }
}

fn check_bandwidth(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("bandwidth must be > 0, got {h}")))
    }
}

/// Density scale `c_q / (n h^q)` applied to the sum of kernel profiles.
fn density_scale(n: usize, h: f64, kernel: &KernelSpec) -> f64 {
    kernel.normalizer / (n as f64 * h.powi(kernel.dim as i32))
}

/// Plug-in density estimate
/// `p_hat_h(w) = (1/n) sum_i h^-q K((point_i - w) / h)` at one query.
pub fn kde(points: &PointSet, h: f64, kernel: &KernelSpec, query: &[f64]) -> Result<f64> {
    check_bandwidth(h)?;
    kernel.check(points)?;
    if query.len() != points.dim() {
        return Err(Error::param(format!(
            "query has length {}, points have dimension {}",
            query.len(),
            points.dim()
        )));
    }
    if points.is_empty() {
        return Err(Error::data("density of an empty point set"));
    }
    let sum: f64 = points
        .rows()
        .map(|p| triangular_profile(euclidean(p, query) / h))
        .sum();
    Ok(sum * density_scale(points.len(), h, kernel))
}

/// Uniform grid with cell width `h` for radius-`h` neighbor queries.
///
/// Any two points within distance `h` differ by at most one cell in every
/// coordinate, so scanning the `3^q` surrounding cells finds every neighbor.
pub(crate) struct NeighborGrid<'a> {
    points: &'a PointSet,
    h: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

/// Above this dimension the grid visits too many cells to pay off.
const GRID_MAX_DIM: usize = 4;

impl<'a> NeighborGrid<'a> {
    pub(crate) fn new(points: &'a PointSet, h: f64) -> Self {
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.rows().enumerate() {
            cells.entry(Self::key(p, h)).or_default().push(i);
        }
        Self { points, h, cells }
    }

    fn key(p: &[f64], h: f64) -> Vec<i64> {
        p.iter().map(|v| (v / h).floor() as i64).collect()
    }

    /// Indices of all points in the neighboring cells of `query`, ascending.
    /// A superset of the points within distance `h`.
    pub(crate) fn candidates(&self, query: &[f64]) -> Vec<usize> {
        let center = Self::key(query, self.h);
        let dim = center.len();
        let mut out = Vec::new();
        let mut offset = vec![-1i64; dim];
        loop {
            let cell: Vec<i64> = center.iter().zip(&offset).map(|(c, o)| c + o).collect();
            if let Some(members) = self.cells.get(&cell) {
                out.extend_from_slice(members);
            }
            // odometer over {-1, 0, 1}^dim
            let mut axis = 0;
            while axis < dim {
                offset[axis] += 1;
                if offset[axis] <= 1 {
                    break;
                }
                offset[axis] = -1;
                axis += 1;
            }
            if axis == dim {
                break;
            }
        }
        out.sort_unstable();
        out
    }

    pub(crate) fn points(&self) -> &PointSet {
        self.points
    }
}

/// Density-evaluation strategy. Both produce bit-identical values: the
/// grid sums exactly the nonzero kernel terms, in ascending index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evaluation {
    BruteForce,
    #[default]
    Grid,
}

/// `p_hat_h` at every query row.
pub fn kde_many(
    points: &PointSet,
    h: f64,
    kernel: &KernelSpec,
    queries: &PointSet,
    evaluation: Evaluation,
) -> Result<Vec<f64>> {
    check_bandwidth(h)?;
    kernel.check(points)?;
    if queries.dim() != points.dim() {
        return Err(Error::param("query dimension does not match points"));
    }
    if points.is_empty() {
        return Err(Error::data("density of an empty point set"));
    }
    let scale = density_scale(points.len(), h, kernel);
    let use_grid = evaluation == Evaluation::Grid && points.dim() <= GRID_MAX_DIM;
    let values = if use_grid {
        let grid = NeighborGrid::new(points, h);
        (0..queries.len())
            .into_par_iter()
            .map(|i| {
                let q = queries.row(i);
                let sum: f64 = grid
                    .candidates(q)
                    .into_iter()
                    .map(|j| triangular_profile(euclidean(grid.points().row(j), q) / h))
                    .sum();
                sum * scale
            })
            .collect()
    } else {
        (0..queries.len())
            .into_par_iter()
            .map(|i| {
                let q = queries.row(i);
                let sum: f64 = points
                    .rows()
                    .map(|p| triangular_profile(euclidean(p, q) / h))
                    .sum();
                sum * scale
            })
            .collect()
    };
    Ok(values)
}

/// Rule-of-thumb bandwidth `n^(-1/(q+4))` times the mean per-coordinate
/// sample standard deviation.
pub fn default_bandwidth(points: &PointSet) -> Result<f64> {
    let n = points.len();
    if n < 2 {
        return Err(Error::data("bandwidth rule needs at least two points"));
    }
    let q = points.dim();
    let mut sd_sum = 0.0;
    for j in 0..q {
        let mean = points.rows().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = points.rows().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        sd_sum += var.sqrt();
    }
    let h = (n as f64).powf(-1.0 / (q as f64 + 4.0)) * sd_sum / q as f64;
    if h > 0.0 && h.is_finite() {
        Ok(h)
    } else {
        Err(Error::Numerical("degenerate spread; pass a bandwidth".into()))
    }
}

/// Level-set clusters at bandwidth `h` and level `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetClustering {
    pub h: f64,
    pub t: f64,
    /// Indices with density above `t`, ascending.
    pub retained: Vec<usize>,
    /// Rips-graph components of the retained points; non-retained points
    /// carry the noise label 0.
    pub labels: ClusterLabeling,
}

impl LevelSetClustering {
    pub fn cluster_count(&self) -> usize {
        self.labels.k_max()
    }
}

/// Components of the radius-`h` Rips graph on `subset`, returned as full
/// length labels (0 outside `subset`), numbered by smallest member index.
pub(crate) fn rips_components(
    points: &PointSet,
    subset: &[usize],
    h: f64,
    evaluation: Evaluation,
) -> Vec<usize> {
    let m = subset.len();
    let mut uf = UnionFind::new(m);
    let h2 = h * h;
    let retained = points.select(subset);
    let edges: Vec<(usize, usize)> =
        if evaluation == Evaluation::Grid && points.dim() <= GRID_MAX_DIM {
            let grid = NeighborGrid::new(&retained, h);
            let retained = &retained;
            (0..m)
                .into_par_iter()
                .flat_map_iter(|a| {
                    let pa = retained.row(a);
                    grid.candidates(pa)
                        .into_iter()
                        .filter(move |&b| b > a && squared_euclidean(pa, retained.row(b)) <= h2)
                        .map(move |b| (a, b))
                })
                .collect()
        } else {
            (0..m)
                .into_par_iter()
                .flat_map_iter(|a| {
                    let pa = retained.row(a);
                    let retained = &retained;
                    (a + 1..m)
                        .filter(move |&b| squared_euclidean(pa, retained.row(b)) <= h2)
                        .map(move |b| (a, b))
                })
                .collect()
        };
    for (a, b) in edges {
        uf.union(a, b);
    }
    // subset is ascending, so component order by smallest subset position
    // is order by smallest original index
    let local = uf.component_labels();
    let mut labels = vec![0; points.len()];
    for (pos, &i) in subset.iter().enumerate() {
        labels[i] = local[pos];
    }
    labels
}

fn clustering_from_density(
    points: &PointSet,
    density: &[f64],
    h: f64,
    t: f64,
    evaluation: Evaluation,
) -> Result<LevelSetClustering> {
    let retained: Vec<usize> = (0..points.len()).filter(|&i| density[i] > t).collect();
    let labels = rips_components(points, &retained, h, evaluation);
    Ok(LevelSetClustering {
        h,
        t,
        retained,
        labels: ClusterLabeling::new(labels)?,
    })
}

fn check_level(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("level must be >= 0, got {t}")))
    }
}

/// Retains points with `p_hat_h > t` and labels the connected components of
/// the Rips graph (edges at distance `<= h`) among them.
pub fn level_set_cluster(
    points: &PointSet,
    h: f64,
    t: f64,
    kernel: &KernelSpec,
) -> Result<LevelSetClustering> {
    level_set_cluster_with(points, h, t, kernel, Evaluation::default())
}

pub fn level_set_cluster_with(
    points: &PointSet,
    h: f64,
    t: f64,
    kernel: &KernelSpec,
    evaluation: Evaluation,
) -> Result<LevelSetClustering> {
    check_level(t)?;
    let density = kde_many(points, h, kernel, points, evaluation)?;
    clustering_from_density(points, &density, h, t, evaluation)
}

/// One clustering per level of a strictly increasing grid. Densities are
/// computed once and shared across levels.
pub fn level_sweep(
    points: &PointSet,
    h: f64,
    kernel: &KernelSpec,
    t_grid: &[f64],
) -> Result<Vec<LevelSetClustering>> {
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param("level grid must be strictly increasing"));
    }
    for &t in t_grid {
        check_level(t)?;
    }
    let density = kde_many(points, h, kernel, points, Evaluation::default())?;
    t_grid
        .iter()
        .map(|&t| clustering_from_density(points, &density, h, t, Evaluation::default()))
        .collect()
}

/// Largest distance from a point of `from` to its nearest point of `to`.
fn directed_hausdorff(from: &PointSet, to: &PointSet) -> f64 {
    from.rows()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|x| {
            to.rows()
                .map(|y| squared_euclidean(x, y))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
        .sqrt()
}

/// Hausdorff distance between two nonempty finite point sets.
pub fn hausdorff(a: &PointSet, b: &PointSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::param("Hausdorff distance of an empty set"));
    }
    if a.dim() != b.dim() {
        return Err(Error::param(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}
