//! Per-arm outcome regressions and projection of units into the
//! counterfactual mean space.
//!
//! Models are trained on one half of a sample split and evaluated on the
//! other half; a model never reads a row from the projection half.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::triangular_profile;
use crate::error::{Error, Result};
use crate::linkage::{euclidean, squared_euclidean};
use crate::model::{
    validate_table, CounterfactualMatrix, ObservationTable, Parametrization, PointSet,
};

/// Disjoint fit / projection index sets (row indices into the table, ascending).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub fit_indices: Vec<usize>,
    pub project_indices: Vec<usize>,
    pub seed: u64,
}

/// Random split with `round(fraction * n)` rows in the fit half.
pub fn make_split(table: &ObservationTable, fraction: f64, seed: u64) -> Result<SplitPlan> {
    split_indices(table.len(), fraction, seed)
}

pub(crate) fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<SplitPlan> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::param(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_fit = (fraction * n as f64).round() as usize;
    let mut fit_indices = order[..n_fit].to_vec();
    let mut project_indices = order[n_fit..].to_vec();
    fit_indices.sort_unstable();
    project_indices.sort_unstable();
    Ok(SplitPlan {
        fit_indices,
        project_indices,
        seed,
    })
}

/// Regression method and its single hyperparameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum RegressionMethod {
    /// Mean outcome of the `k` nearest training covariates.
    Knn { k: usize },
    /// Kernel-weighted mean with the triangular radial kernel
    /// `(1 - ||x - x_i|| / bandwidth)_+` (its normalizer cancels).
    NadarayaWatson { bandwidth: f64 },
}

impl RegressionMethod {
    /// k-NN with `k = ceil(n_arm^(2/3))`.
    pub fn default_knn(n_arm: usize) -> Self {
        RegressionMethod::Knn {
            k: ((n_arm as f64).powf(2.0 / 3.0).ceil() as usize).max(1),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegressionMethod::Knn { .. } => "knn",
            RegressionMethod::NadarayaWatson { .. } => "nadaraya-watson",
        }
    }
}

/// Fitted estimate of `x -> E[Y | X = x, A = arm]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmRegressionModel {
    arm: usize,
    method: RegressionMethod,
    training_rows: Vec<usize>,
    covariates: PointSet,
    outcomes: Vec<f64>,
}

impl ArmRegressionModel {
    pub fn arm(&self) -> usize {
        self.arm
    }

    pub fn method(&self) -> RegressionMethod {
        self.method
    }

    /// Table rows the model was trained on.
    pub fn training_rows(&self) -> &[usize] {
        &self.training_rows
    }

    pub fn predict(&self, query: &[f64]) -> Result<f64> {
        if query.len() != self.covariates.dim() {
            return Err(Error::param(format!(
                "query has length {}, model expects {}",
                query.len(),
                self.covariates.dim()
            )));
        }
        match self.method {
            RegressionMethod::Knn { k } => Ok(self.knn(query, k)),
            RegressionMethod::NadarayaWatson { bandwidth } => self.nadaraya_watson(query, bandwidth),
        }
    }

    fn knn(&self, query: &[f64], k: usize) -> f64 {
        let mut scored: Vec<(f64, usize)> = self
            .covariates
            .rows()
            .enumerate()
            .map(|(i, x)| (squared_euclidean(x, query), i))
            .collect();
        // training rows are stored in ascending table order, so position
        // order is row-index order
        let by_distance_then_row = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, by_distance_then_row);
            scored.truncate(k);
        }
        scored.sort_unstable_by_key(|&(_, i)| i);
        scored.iter().map(|&(_, i)| self.outcomes[i]).sum::<f64>() / k as f64
    }

    fn nadaraya_watson(&self, query: &[f64], bandwidth: f64) -> Result<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for (x, &y) in self.covariates.rows().zip(&self.outcomes) {
            let w = triangular_profile(euclidean(x, query) / bandwidth);
            num += w * y;
            den += w;
        }
        if den > 0.0 {
            Ok(num / den)
        } else {
            Err(Error::Numerical(format!(
                "no training point of arm {} within bandwidth {bandwidth} of the query",
                self.arm
            )))
        }
    }
}

/// Trains the arm-`arm` regression on the fit half of `split`.
pub fn fit_arm(
    table: &ObservationTable,
    arm: usize,
    method: RegressionMethod,
    split: &SplitPlan,
) -> Result<ArmRegressionModel> {
    if arm == 0 || arm > table.arms() {
        return Err(Error::param(format!(
            "arm {arm} outside 1..={}",
            table.arms()
        )));
    }
    let training_rows: Vec<usize> = split
        .fit_indices
        .iter()
        .copied()
        .filter(|&i| table.row(i).arm == arm as i64)
        .collect();
    if training_rows.is_empty() {
        return Err(Error::data(format!("arm {arm} absent from fit split")));
    }
    match method {
        RegressionMethod::Knn { k } => {
            if k == 0 {
                return Err(Error::param("k must be at least 1"));
            }
            if k > training_rows.len() {
                return Err(Error::param(format!(
                    "k = {k} exceeds the {} fit rows of arm {arm}",
                    training_rows.len()
                )));
            }
        }
        RegressionMethod::NadarayaWatson { bandwidth } => {
            if !(bandwidth > 0.0 && bandwidth.is_finite()) {
                return Err(Error::param(format!("bandwidth must be > 0, got {bandwidth}")));
            }
        }
    }
    let rows: Vec<&[f64]> = training_rows.iter().map(|&i| &table.row(i).x[..]).collect();
    let covariates = PointSet::new(table.dim(), rows.concat())?;
    let outcomes = training_rows.iter().map(|&i| table.row(i).y).collect();
    Ok(ArmRegressionModel {
        arm,
        method,
        training_rows,
        covariates,
        outcomes,
    })
}

/// Fits every arm `1..=q`; `method_for(arm, n_arm)` picks each arm's method
/// from its fit-split size.
pub fn fit_all_arms<F>(
    table: &ObservationTable,
    split: &SplitPlan,
    method_for: F,
) -> Result<Vec<ArmRegressionModel>>
where
    F: Fn(usize, usize) -> RegressionMethod + Sync,
{
    validate_table(table)?;
    (1..=table.arms())
        .into_par_iter()
        .map(|arm| {
            let n_arm = split
                .fit_indices
                .iter()
                .filter(|&&i| table.row(i).arm == arm as i64)
                .count();
            fit_arm(table, arm, method_for(arm, n_arm), split)
        })
        .collect()
}

/// Evaluates the arm models at the covariates of every projection-half row.
pub fn project(
    models: &[ArmRegressionModel],
    table: &ObservationTable,
    split: &SplitPlan,
    parametrization: Parametrization,
) -> Result<CounterfactualMatrix> {
    let q = table.arms();
    let mut ordered: Vec<&ArmRegressionModel> = Vec::with_capacity(q);
    for arm in 1..=q {
        let model = models
            .iter()
            .find(|m| m.arm == arm)
            .ok_or_else(|| Error::param(format!("missing model for arm {arm}")))?;
        ordered.push(model);
    }
    let mut in_project = vec![false; table.len()];
    for &i in &split.project_indices {
        in_project[i] = true;
    }
    for m in &ordered {
        if let Some(&leak) = m.training_rows.iter().find(|&&i| in_project[i]) {
            return Err(Error::data(format!(
                "arm {} model was trained on projection row {leak}",
                m.arm
            )));
        }
    }
    if parametrization == Parametrization::ContrastsVsArm1 && q < 2 {
        return Err(Error::param("contrasts need at least two arms"));
    }

    let width = parametrization.width(q);
    let rows: Vec<Vec<f64>> = split
        .project_indices
        .par_iter()
        .map(|&i| {
            let x = &table.row(i).x;
            let levels = ordered
                .iter()
                .map(|m| m.predict(x))
                .collect::<Result<Vec<f64>>>()?;
            Ok(match parametrization {
                Parametrization::Levels => levels,
                Parametrization::ContrastsVsArm1 => {
                    levels[1..].iter().map(|v| v - levels[0]).collect()
                }
            })
        })
        .collect::<Result<_>>()?;
    let points = PointSet::new(width, rows.concat())?;
    CounterfactualMatrix::new(points, None, parametrization)
}

/// Average estimation error of a matrix against its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionError {
    /// `(1/n) sum_i ||mu_hat_i - mu_i||_2`.
    pub mean_l2: f64,
    /// `(1/n) sum_i |mu_hat_a(X_i) - mu_a(X_i)|` for every column `a`.
    pub per_arm_l1: Vec<f64>,
}

impl ProjectionError {
    /// Sum of the per-column L1 errors, which dominates `mean_l2`.
    pub fn l1_total(&self) -> f64 {
        self.per_arm_l1.iter().sum()
    }
}

pub fn empirical_projection_error(matrix: &CounterfactualMatrix) -> Result<ProjectionError> {
    let truth = matrix
        .truth()
        .ok_or_else(|| Error::param("projection error needs a truth matrix"))?;
    let points = matrix.points();
    let n = points.len();
    if n == 0 {
        return Err(Error::data("empty matrix"));
    }
    let mut l2 = 0.0;
    let mut l1 = vec![0.0; points.dim()];
    for (est, tru) in points.rows().zip(truth.rows()) {
        l2 += euclidean(est, tru);
        for (acc, (e, t)) in l1.iter_mut().zip(est.iter().zip(tru)) {
            *acc += (e - t).abs();
        }
    }
    Ok(ProjectionError {
        mean_l2: l2 / n as f64,
        per_arm_l1: l1.into_iter().map(|v| v / n as f64).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Observation;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn table(rows: &[(f64, i64, f64)], arms: usize) -> ObservationTable {
        ObservationTable::new(
            rows.iter()
                .map(|&(y, arm, x)| Observation { y, arm, x: vec![x] })
                .collect(),
            arms,
            1,
        )
    }

    fn everything_fits(n: usize) -> SplitPlan {
        SplitPlan {
            fit_indices: (0..n).collect(),
            project_indices: Vec::new(),
            seed: 0,
        }
    }

    #[test]
    fn split_sizes_and_determinism() {
        let plan = split_indices(10, 0.5, 7).unwrap();
        assert_eq!(plan.fit_indices.len(), 5);
        assert_eq!(plan.project_indices.len(), 5);
        assert!(plan
            .fit_indices
            .iter()
            .all(|i| !plan.project_indices.contains(i)));
        assert_eq!(plan, split_indices(10, 0.5, 7).unwrap());
        assert_ne!(plan, split_indices(10, 0.5, 8).unwrap());
    }

    #[test]
    fn train_test_sizes_honored() {
        let plan = split_indices(23_000, 13_000.0 / 23_000.0, 1).unwrap();
        assert_eq!(plan.fit_indices.len(), 13_000);
        assert_eq!(plan.project_indices.len(), 10_000);
    }

    #[test]
    fn split_fraction_bounds() {
        assert!(split_indices(10, 0.0, 1).is_err());
        assert!(split_indices(10, 1.0, 1).is_err());
        assert!(split_indices(10, f64::NAN, 1).is_err());
    }

    #[test]
    fn constant_outcomes_predict_constant() {
        let t = table(&[(3.0, 1, 0.0), (3.0, 1, 1.0), (3.0, 1, 5.0)], 1);
        let split = everything_fits(3);
        for method in [
            RegressionMethod::Knn { k: 2 },
            RegressionMethod::NadarayaWatson { bandwidth: 10.0 },
        ] {
            let m = fit_arm(&t, 1, method, &split).unwrap();
            assert_relative_eq!(m.predict(&[2.5]).unwrap(), 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn one_nn_returns_own_outcome() {
        let t = table(&[(1.0, 1, 0.0), (7.0, 1, 1.0), (4.0, 1, 2.0)], 1);
        let m = fit_arm(&t, 1, RegressionMethod::Knn { k: 1 }, &everything_fits(3)).unwrap();
        assert_eq!(m.predict(&[1.0]).unwrap(), 7.0);
    }

    #[test]
    fn two_nn_midpoint() {
        // mean of the two neighbors (0 + 2) / 2
        let t = table(&[(0.0, 1, 0.0), (2.0, 1, 1.0), (9.0, 2, 0.5)], 2);
        let m = fit_arm(&t, 1, RegressionMethod::Knn { k: 2 }, &everything_fits(3)).unwrap();
        assert_eq!(m.predict(&[0.5]).unwrap(), 1.0);
        assert_eq!(m.training_rows(), &[0, 1]);
    }

    #[test]
    fn knn_ties_prefer_lower_rows() {
        // x = -1 and x = 1 are equidistant from 0; row 0 wins
        let t = table(&[(5.0, 1, -1.0), (9.0, 1, 1.0)], 1);
        let m = fit_arm(&t, 1, RegressionMethod::Knn { k: 1 }, &everything_fits(2)).unwrap();
        assert_eq!(m.predict(&[0.0]).unwrap(), 5.0);
    }

    #[test]
    fn fit_errors() {
        let t = table(&[(0.0, 1, 0.0), (1.0, 2, 0.0)], 2);
        let split = SplitPlan {
            fit_indices: vec![0],
            project_indices: vec![1],
            seed: 0,
        };
        assert!(matches!(
            fit_arm(&t, 2, RegressionMethod::Knn { k: 1 }, &split),
            Err(Error::InvalidData(_))
        ));
        assert!(fit_arm(&t, 1, RegressionMethod::Knn { k: 2 }, &split).is_err());
        assert!(fit_arm(&t, 1, RegressionMethod::NadarayaWatson { bandwidth: 0.0 }, &split).is_err());
    }

    #[test]
    fn nadaraya_watson_without_support_fails() {
        let t = table(&[(1.0, 1, 0.0)], 1);
        let m = fit_arm(
            &t,
            1,
            RegressionMethod::NadarayaWatson { bandwidth: 0.5 },
            &everything_fits(1),
        )
        .unwrap();
        assert!(matches!(m.predict(&[3.0]), Err(Error::Numerical(_))));
    }

    #[test]
    fn constant_models_project_to_constant_rows() {
        let mut rows = Vec::new();
        for i in 0..8 {
            rows.push((0.0, 1, i as f64));
            rows.push((1.0, 2, i as f64));
        }
        let t = table(&rows, 2);
        let split = split_indices(t.len(), 0.5, 3).unwrap();
        let models = fit_all_arms(&t, &split, |_, _| RegressionMethod::Knn { k: 1 }).unwrap();
        let levels = project(&models, &t, &split, Parametrization::Levels).unwrap();
        assert!(levels.points().rows().all(|r| r == [0.0, 1.0]));
        let contrasts = project(&models, &t, &split, Parametrization::ContrastsVsArm1).unwrap();
        assert_eq!(contrasts.dim(), 1);
        assert!(contrasts.points().rows().all(|r| r == [1.0]));
    }

    #[test]
    fn identical_arms_have_zero_contrasts() {
        let mut rows = Vec::new();
        for i in 0..10 {
            let x = i as f64 * 0.3;
            rows.push((x.sin(), 1, x));
            rows.push((x.sin(), 2, x));
        }
        let t = table(&rows, 2);
        // both arms see the same covariates in the fit half
        let split = SplitPlan {
            fit_indices: (0..16).collect(),
            project_indices: (16..20).collect(),
            seed: 0,
        };
        let models = fit_all_arms(&t, &split, |_, _| RegressionMethod::Knn { k: 2 }).unwrap();
        let c = project(&models, &t, &split, Parametrization::ContrastsVsArm1).unwrap();
        assert!(c.points().coords().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn missing_model_and_leakage_rejected() {
        let t = table(&[(0.0, 1, 0.0), (1.0, 2, 0.0), (0.0, 1, 1.0), (1.0, 2, 1.0)], 2);
        let split = SplitPlan {
            fit_indices: vec![0, 1],
            project_indices: vec![2, 3],
            seed: 0,
        };
        let m1 = fit_arm(&t, 1, RegressionMethod::Knn { k: 1 }, &split).unwrap();
        assert!(project(std::slice::from_ref(&m1), &t, &split, Parametrization::Levels).is_err());

        let everything = everything_fits(4);
        let leaky = fit_arm(&t, 2, RegressionMethod::Knn { k: 1 }, &everything).unwrap();
        assert!(matches!(
            project(&[m1, leaky], &t, &split, Parametrization::Levels),
            Err(Error::InvalidData(_))
        ));
    }

    #[test]
    fn projection_error_examples() {
        let truth = PointSet::from_rows(&[[0.0, 1.0], [2.0, 3.0]]).unwrap();
        let exact =
            CounterfactualMatrix::new(truth.clone(), Some(truth.clone()), Parametrization::Levels)
                .unwrap();
        let e = empirical_projection_error(&exact).unwrap();
        assert_eq!(e.mean_l2, 0.0);
        assert_eq!(e.per_arm_l1, vec![0.0, 0.0]);

        let t1 = PointSet::from_rows(&[[0.0], [1.0], [-2.0]]).unwrap();
        let shifted = PointSet::from_rows(&[[0.5], [1.5], [-1.5]]).unwrap();
        let m = CounterfactualMatrix::new(shifted, Some(t1), Parametrization::Levels).unwrap();
        let e = empirical_projection_error(&m).unwrap();
        assert_relative_eq!(e.mean_l2, 0.5, epsilon = 1e-15);
        assert_relative_eq!(e.per_arm_l1[0], 0.5, epsilon = 1e-15);

        let no_truth = CounterfactualMatrix::new(truth, None, Parametrization::Levels).unwrap();
        assert!(empirical_projection_error(&no_truth).is_err());
    }

    proptest! {
        #[test]
        fn knn_stays_within_outcome_range(
            ys in prop::collection::vec((-10.0f64..10.0, -3.0f64..3.0), 1..30),
            k in 1usize..30,
            query in -5.0f64..5.0,
        ) {
            prop_assume!(k <= ys.len());
            let rows: Vec<_> = ys.iter().map(|&(y, x)| (y, 1, x)).collect();
            let t = table(&rows, 1);
            let m = fit_arm(&t, 1, RegressionMethod::Knn { k }, &everything_fits(rows.len())).unwrap();
            let p = m.predict(&[query]).unwrap();
            let lo = ys.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
            let hi = ys.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        }

        #[test]
        fn mean_l2_bounded_by_l1_sum(
            rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..40),
            noise in prop::collection::vec(-2.0f64..2.0, 120),
        ) {
            let truth = PointSet::from_rows(&rows).unwrap();
            let mut est = truth.clone();
            for (i, v) in est.coords().to_vec().iter().enumerate() {
                est.row_mut(i / 3)[i % 3] = v + noise[i];
            }
            let m = CounterfactualMatrix::new(est, Some(truth), Parametrization::Levels).unwrap();
            let e = empirical_projection_error(&m).unwrap();
            prop_assert!(e.mean_l2 <= e.l1_total() * (1.0 + 1e-12));
        }
    }
}
