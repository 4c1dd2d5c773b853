//! Domain types shared by every module: the raw observation table, point
//! sets in the counterfactual mean space, and flat cluster labelings.
//!
//! Arm labels are 1-based on every public surface. Cluster label `0` is
//! reserved for noise / unassigned points.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One unit of the sample: outcome, treatment arm and covariates.
///
/// The arm is kept as a signed integer so that malformed inputs (label 0,
/// negative labels) survive parsing and can be reported by [`validate_table`].
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: f64,
    pub arm: i64,
    pub x: Vec<f64>,
}

/// The raw sample `(Y, A, X)` with `q` arms and `d` covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationTable {
    rows: Vec<Observation>,
    arms: usize,
    dim: usize,
}

impl ObservationTable {
    /// Wraps rows without checking them; call [`validate_table`] before use.
    pub fn new(rows: Vec<Observation>, arms: usize, dim: usize) -> Self {
        Self { rows, arms, dim }
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Observation {
        &self.rows[i]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Number of treatment arms `q`.
    pub fn arms(&self) -> usize {
        self.arms
    }

    /// Covariate dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Summary produced by [`inspect_table`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub arms: usize,
    pub dim: usize,
    /// Rows per arm; entry `a - 1` counts arm `a`.
    pub arm_counts: Vec<usize>,
    /// Rows whose arm label lies outside `1..=q`.
    pub arm_out_of_range: Vec<usize>,
    /// Rows whose covariate vector does not have length `d`.
    pub dimension_mismatches: Vec<usize>,
    /// `(row, field)` pairs holding NaN or an infinity; field is `y` or `x<j>` (1-based).
    pub non_finite: Vec<(usize, String)>,
}

impl ValidationReport {
    /// Arms in `1..=q` that never appear.
    pub fn empty_arms(&self) -> Vec<usize> {
        self.arm_counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0)
            .map(|(a, _)| a + 1)
            .collect()
    }

    pub fn is_valid(&self) -> bool {
        self.arms >= 1
            && self.dim >= 1
            && self.arm_out_of_range.is_empty()
            && self.dimension_mismatches.is_empty()
            && self.non_finite.is_empty()
            && self.empty_arms().is_empty()
    }

    /// One message per violated invariant, naming the first offending row.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.arms == 0 {
            out.push("arm count q must be at least 1".to_string());
        }
        if self.dim == 0 {
            out.push("covariate dimension d must be at least 1".to_string());
        }
        if let Some(&row) = self.arm_out_of_range.first() {
            out.push(format!("arm out of range at row {row}"));
        }
        if let Some(&row) = self.dimension_mismatches.first() {
            out.push(format!("dimension mismatch at row {row}"));
        }
        if let Some((row, field)) = self.non_finite.first() {
            out.push(format!("non-finite {field} at row {row}"));
        }
        for arm in self.empty_arms() {
            out.push(format!("empty arm {arm}"));
        }
        out
    }
}

/// Collects arm coverage, out-of-range labels, dimension mismatches and
/// non-finite values. Never fails.
pub fn inspect_table(table: &ObservationTable) -> ValidationReport {
    let q = table.arms();
    let d = table.dim();
    let mut report = ValidationReport {
        n: table.len(),
        arms: q,
        dim: d,
        arm_counts: vec![0; q],
        arm_out_of_range: Vec::new(),
        dimension_mismatches: Vec::new(),
        non_finite: Vec::new(),
    };
    for (i, row) in table.rows().iter().enumerate() {
        if row.arm >= 1 && (row.arm as u64) <= q as u64 {
            report.arm_counts[row.arm as usize - 1] += 1;
        } else {
            report.arm_out_of_range.push(i);
        }
        if row.x.len() != d {
            report.dimension_mismatches.push(i);
        }
        if !row.y.is_finite() {
            report.non_finite.push((i, "y".to_string()));
        }
        for (j, v) in row.x.iter().enumerate() {
            if !v.is_finite() {
                report.non_finite.push((i, format!("x{}", j + 1)));
            }
        }
    }
    report
}

/// Succeeds exactly when every table invariant holds.
pub fn validate_table(table: &ObservationTable) -> Result<ValidationReport> {
    let report = inspect_table(table);
    if report.is_valid() {
        Ok(report)
    } else {
        Err(Error::Validation(report.violations()))
    }
}

/// A finite set of points in `R^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::data("point dimension must be at least 1"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::data(format!(
                "{} coordinates do not form rows of length {dim}",
                coords.len()
            )));
        }
        Ok(Self { dim, coords })
    }

    /// Builds a set from explicit rows; all rows must share one length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| Error::data("cannot infer dimension of an empty row list"))?;
        let mut coords = Vec::with_capacity(dim * rows.len());
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::data(format!(
                    "row {i} has length {}, expected {dim}",
                    r.len()
                )));
            }
            coords.extend_from_slice(r);
        }
        Self::new(dim, coords)
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Copies the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.row(i));
        }
        PointSet {
            dim: self.dim,
            coords,
        }
    }

    pub fn all_finite(&self) -> bool {
        self.coords.iter().all(|v| v.is_finite())
    }
}

/// Coordinates of the counterfactual mean space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parametrization {
    /// `(mu_1, ..., mu_q)`.
    Levels,
    /// `(mu_2 - mu_1, ..., mu_q - mu_1)`.
    ContrastsVsArm1,
}

impl Parametrization {
    /// CSV column names for a space built from `arms` treatment arms.
    pub fn column_names(self, arms: usize) -> Vec<String> {
        match self {
            Parametrization::Levels => (1..=arms).map(|a| format!("mu{a}")).collect(),
            Parametrization::ContrastsVsArm1 => (2..=arms).map(|a| format!("tau{a}")).collect(),
        }
    }

    /// Number of columns for a space built from `arms` treatment arms.
    pub fn width(self, arms: usize) -> usize {
        match self {
            Parametrization::Levels => arms,
            Parametrization::ContrastsVsArm1 => arms.saturating_sub(1),
        }
    }
}

impl fmt::Display for Parametrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parametrization::Levels => "levels",
            Parametrization::ContrastsVsArm1 => "contrasts-vs-arm-1",
        })
    }
}

/// Projected units `mu_hat(X_i)`, optionally paired with the ground truth
/// `mu(X_i)` when the data came from a simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterfactualMatrix {
    points: PointSet,
    truth: Option<PointSet>,
    parametrization: Parametrization,
}

impl CounterfactualMatrix {
    pub fn new(
        points: PointSet,
        truth: Option<PointSet>,
        parametrization: Parametrization,
    ) -> Result<Self> {
        if !points.all_finite() {
            return Err(Error::data("counterfactual matrix has non-finite entries"));
        }
        if let Some(t) = &truth {
            if t.dim() != points.dim() || t.len() != points.len() {
                return Err(Error::data(format!(
                    "truth matrix is {}x{}, points are {}x{}",
                    t.len(),
                    t.dim(),
                    points.len(),
                    points.dim()
                )));
            }
            if !t.all_finite() {
                return Err(Error::data("truth matrix has non-finite entries"));
            }
        }
        Ok(Self {
            points,
            truth,
            parametrization,
        })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn truth(&self) -> Option<&PointSet> {
        self.truth.as_ref()
    }

    pub fn parametrization(&self) -> Parametrization {
        self.parametrization
    }

    /// Number of units `n`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of columns.
    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn column_names(&self) -> Vec<String> {
        let arms = match self.parametrization {
            Parametrization::Levels => self.dim(),
            Parametrization::ContrastsVsArm1 => self.dim() + 1,
        };
        self.parametrization.column_names(arms)
    }

    /// Attaches (or replaces) the ground-truth matrix.
    pub fn with_truth(self, truth: PointSet) -> Result<Self> {
        Self::new(self.points, Some(truth), self.parametrization)
    }

    /// Replaces the estimated points, keeping truth and parametrization.
    pub fn with_points(&self, points: PointSet) -> Result<Self> {
        Self::new(points, self.truth.clone(), self.parametrization)
    }

    pub fn into_parts(self) -> (PointSet, Option<PointSet>, Parametrization) {
        (self.points, self.truth, self.parametrization)
    }
}

/// Flat clustering: `labels[i] == 0` is noise, `1..=k_max` are clusters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClusterLabeling {
    labels: Vec<usize>,
    k_max: usize,
}

impl ClusterLabeling {
    /// Checks that every label in `1..=max` is used at least once.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let k_max = labels.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; k_max + 1];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(missing) = (1..=k_max).find(|&l| !seen[l]) {
            return Err(Error::data(format!(
                "cluster label {missing} is unused but {k_max} is present"
            )));
        }
        Ok(Self { labels, k_max })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of (non-noise) clusters.
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 0).count()
    }

    /// Sizes of clusters `1..=k_max`.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k_max];
        for &l in &self.labels {
            if l > 0 {
                sizes[l - 1] += 1;
            }
        }
        sizes
    }

    /// Member indices of cluster `label`.
    pub fn members(&self, label: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| i)
            .collect()
    }
}
