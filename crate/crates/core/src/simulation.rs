//! Synthetic counterfactual mean vectors with known cluster structure, and
//! the Gaussian perturbation that stands in for nuisance estimation error.
//!
//! Every generator draws from a single ChaCha8 stream seeded by the config,
//! so identical configs give identical output on every platform.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkage::squared_euclidean;
use crate::model::{
    ClusterLabeling, CounterfactualMatrix, Observation, ObservationTable, Parametrization,
    PointSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimVariant {
    /// Ten truncated-normal clusters on the Voronoi cells of random centers
    /// in `[0, 1]^3`.
    Voronoi10,
    /// Three isotropic Gaussians in `R^2`.
    Gauss3,
}

pub const VORONOI_CENTERS: usize = 10;
pub const VORONOI_DIM: usize = 3;
pub const VORONOI_SIGMA: f64 = 0.05;
/// Minimum distance between Voronoi centers; `0` gives unconstrained uniform centers.
pub const VORONOI_MIN_SEPARATION: f64 = 0.5;
pub const GAUSS3_SIGMA: f64 = 0.2;
pub const GAUSS3_MEANS: [[f64; 2]; 3] = [[0.0, 0.0], [1.5, 0.0], [0.75, 1.3]];
/// Exponents at or above this value mean "no perturbation".
pub const BETA_EXACT: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub seed: u64,
    pub variant: SimVariant,
    /// Perturbation exponent: noise variance `n^-beta`.
    pub beta: f64,
    /// Fraction of points replaced by uniform background noise (Voronoi only).
    pub nu: f64,
    /// Optional bound on `||mu||_2` checked after generation.
    pub b_box: Option<f64>,
    /// Per-coordinate standard deviation of each cluster.
    pub sigma: f64,
    pub min_center_separation: f64,
    /// Overrides `n^-beta` as the perturbation variance.
    pub noise_variance: Option<f64>,
}

impl SimConfig {
    pub fn voronoi(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            variant: SimVariant::Voronoi10,
            beta: BETA_EXACT,
            nu: 0.0,
            b_box: Some(3f64.sqrt()),
            sigma: VORONOI_SIGMA,
            min_center_separation: VORONOI_MIN_SEPARATION,
            noise_variance: None,
        }
    }

    pub fn gauss3(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            variant: SimVariant::Gauss3,
            beta: BETA_EXACT,
            nu: 0.0,
            b_box: None,
            sigma: GAUSS3_SIGMA,
            min_center_separation: 0.0,
            noise_variance: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::param(format!("n must be at least 10, got {}", self.n)));
        }
        if !(0.0..1.0).contains(&self.nu) {
            return Err(Error::param(format!("nu must lie in [0, 1), got {}", self.nu)));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::param(format!("beta must be >= 0, got {}", self.beta)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if !(self.min_center_separation >= 0.0) {
            return Err(Error::param("center separation must be >= 0"));
        }
        if let Some(v) = self.noise_variance {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(format!("noise variance must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Variance of the perturbation applied by [`perturb_config`].
    pub fn perturbation_variance(&self) -> f64 {
        self.noise_variance
            .unwrap_or_else(|| perturbation_variance(self.n, self.beta))
    }
}

/// `n^-beta`, or exactly zero once `beta >= 50`.
pub fn perturbation_variance(n: usize, beta: f64) -> f64 {
    if beta >= BETA_EXACT {
        0.0
    } else {
        (n as f64).powf(-beta)
    }
}

/// `floor(n / k)` per group, the remainder going to the earliest groups.
fn group_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|j| n / k + usize::from(j < n % k)).collect()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform centers in the unit cube, redrawn until pairwise separated.
fn draw_centers(rng: &mut ChaCha8Rng, min_sep: f64) -> Result<Vec<[f64; 3]>> {
    const MAX_ATTEMPTS: usize = 100_000;
    let min_sep2 = min_sep * min_sep;
    let mut centers: Vec<[f64; 3]> = Vec::with_capacity(VORONOI_CENTERS);
    let mut attempts = 0;
    while centers.len() < VORONOI_CENTERS {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(Error::param(format!(
                "could not place {VORONOI_CENTERS} centers {min_sep} apart"
            )));
        }
        let c: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        if centers.iter().all(|o| squared_euclidean(o, &c) >= min_sep2) {
            centers.push(c);
        }
    }
    Ok(centers)
}

/// Index of the strictly nearest center, or `None` on a tie.
pub fn nearest_center<C: AsRef<[f64]>>(point: &[f64], centers: &[C]) -> Option<usize> {
    let mut best = (f64::INFINITY, usize::MAX);
    let mut tied = false;
    for (j, c) in centers.iter().enumerate() {
        let d = squared_euclidean(point, c.as_ref());
        if d < best.0 {
            best = (d, j);
            tied = false;
        } else if d == best.0 {
            tied = true;
        }
    }
    (!tied).then_some(best.1)
}

fn check_bound(points: &PointSet, bound: Option<f64>) -> Result<()> {
    if let Some(b) = bound {
        for (i, row) in points.rows().enumerate() {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > b {
                return Err(Error::data(format!("point {i} has norm {norm} > {b}")));
            }
        }
    }
    Ok(())
}

/// Output of a generator: exact points (`points == truth`), truth labels,
/// and the generating centers.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub matrix: CounterfactualMatrix,
    pub labels: ClusterLabeling,
    pub centers: Vec<Vec<f64>>,
}

pub fn gen_voronoi(config: &SimConfig) -> Result<SimulatedData> {
    config.validate()?;
    if config.variant != SimVariant::Voronoi10 {
        return Err(Error::param("gen_voronoi needs the voronoi10 variant"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let centers = draw_centers(&mut rng, config.min_center_separation)?;
    let mut coords = Vec::with_capacity(config.n * VORONOI_DIM);
    let mut labels = Vec::with_capacity(config.n);
    for (j, size) in group_sizes(config.n, VORONOI_CENTERS).into_iter().enumerate() {
        let c = centers[j];
        for _ in 0..size {
            let p = loop {
                let p = [
                    c[0] + config.sigma * normal(&mut rng),
                    c[1] + config.sigma * normal(&mut rng),
                    c[2] + config.sigma * normal(&mut rng),
                ];
                let inside = p.iter().all(|v| (0.0..=1.0).contains(v));
                if inside && nearest_center(&p, &centers) == Some(j) {
                    break p;
                }
            };
            coords.extend_from_slice(&p);
            labels.push(j + 1);
        }
    }
    let n_noise = (config.nu * config.n as f64).round() as usize;
    let mut noisy = index::sample(&mut rng, config.n, n_noise).into_vec();
    noisy.sort_unstable();
    for i in noisy {
        for v in &mut coords[i * VORONOI_DIM..(i + 1) * VORONOI_DIM] {
            *v = rng.random();
        }
        labels[i] = 0;
    }
    let truth = PointSet::new(VORONOI_DIM, coords)?;
    check_bound(&truth, config.b_box)?;
    Ok(SimulatedData {
        matrix: CounterfactualMatrix::new(truth.clone(), Some(truth), Parametrization::Levels)?,
        labels: ClusterLabeling::new(labels)?,
        centers: centers.iter().map(|c| c.to_vec()).collect(),
    })
}

pub fn gen_gauss3(config: &SimConfig) -> Result<SimulatedData> {
    config.validate()?;
    if config.variant != SimVariant::Gauss3 {
        return Err(Error::param("gen_gauss3 needs the gauss3 variant"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut coords = Vec::with_capacity(config.n * 2);
    let mut labels = Vec::with_capacity(config.n);
    for (j, size) in group_sizes(config.n, 3).into_iter().enumerate() {
        let m = GAUSS3_MEANS[j];
        for _ in 0..size {
            coords.push(m[0] + config.sigma * normal(&mut rng));
            coords.push(m[1] + config.sigma * normal(&mut rng));
            labels.push(j + 1);
        }
    }
    let truth = PointSet::new(2, coords)?;
    check_bound(&truth, config.b_box)?;
    Ok(SimulatedData {
        matrix: CounterfactualMatrix::new(truth.clone(), Some(truth), Parametrization::Levels)?,
        labels: ClusterLabeling::new(labels)?,
        centers: GAUSS3_MEANS.iter().map(|m| m.to_vec()).collect(),
    })
}

/// Dispatches on `config.variant`.
pub fn generate(config: &SimConfig) -> Result<SimulatedData> {
    match config.variant {
        SimVariant::Voronoi10 => gen_voronoi(config),
        SimVariant::Gauss3 => gen_gauss3(config),
    }
}

/// `points = truth + xi` with i.i.d. `xi ~ N(0, variance)` per entry.
pub fn perturb_with_variance(
    matrix: &CounterfactualMatrix,
    variance: f64,
    seed: u64,
) -> Result<CounterfactualMatrix> {
    let truth = matrix
        .truth()
        .ok_or_else(|| Error::param("perturbation needs a truth matrix"))?;
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::param(format!("variance must be >= 0, got {variance}")));
    }
    let mut points = truth.clone();
    if variance > 0.0 {
        let sd = variance.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..points.len() {
            for v in points.row_mut(i) {
                *v += sd * normal(&mut rng);
            }
        }
    }
    matrix.with_points(points)
}

/// Perturbation with variance `n^-beta`, `n` the number of rows.
pub fn perturb(matrix: &CounterfactualMatrix, beta: f64, seed: u64) -> Result<CounterfactualMatrix> {
    if !(beta >= 0.0) {
        return Err(Error::param(format!("beta must be >= 0, got {beta}")));
    }
    perturb_with_variance(matrix, perturbation_variance(matrix.len(), beta), seed)
}

/// Perturbation using the config's variance rule.
pub fn perturb_config(
    matrix: &CounterfactualMatrix,
    config: &SimConfig,
    seed: u64,
) -> Result<CounterfactualMatrix> {
    perturb_with_variance(matrix, config.perturbation_variance(), seed)
}

/// Observational sample whose arm regressions are the coordinates of the
/// given mean vectors: `X_i = mu_i`, `A_i` uniform on `1..=q`,
/// `Y_i = mu_i[A_i] + N(0, outcome_sd^2)`. Lets the regression pipeline be
/// run end to end against a known truth.
pub fn observational_table(truth: &PointSet, outcome_sd: f64, seed: u64) -> Result<ObservationTable> {
    if !(outcome_sd >= 0.0 && outcome_sd.is_finite()) {
        return Err(Error::param(format!("outcome sd must be >= 0, got {outcome_sd}")));
    }
    let q = truth.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = truth
        .rows()
        .map(|mu| {
            let arm = rng.random_range(0..q);
            let y = mu[arm] + outcome_sd * normal(&mut rng);
            Observation {
                y,
                arm: arm as i64 + 1,
                x: mu.to_vec(),
            }
        })
        .collect();
    Ok(ObservationTable::new(rows, q, q))
}
