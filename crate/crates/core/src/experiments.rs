//! Replication runners for the two simulation studies. Each returns a trend
//! table of per-cell means and standard deviations over replications.
//!
//! Replications run in parallel; every random draw comes from a seed
//! derived from the base seed and the replication's coordinates, so tables
//! are identical for any thread count. Within a replication the same data
//! is reused across the `alpha` and `beta` grids.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{level_sweep, KernelSpec};
use crate::error::{Error, Result};
use crate::io::{create_dir, format_number, write_json};
use crate::metrics::levelset_hausdorff;
use crate::robust::{pruning_error, robust_cluster, GoodNeighborhoodParams};
use crate::simulation::{gen_gauss3, gen_voronoi, perturb, SimConfig};

/// Mixes a base seed with replication coordinates (SplitMix64 finalizer).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut z = base;
    for &p in parts {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(p);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return Err(Error::param("reps must be at least 1"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2abConfig {
    pub n: usize,
    pub reps: usize,
    pub alphas: Vec<f64>,
    pub nus: Vec<f64>,
    pub betas: Vec<f64>,
    pub subsample_n: usize,
    pub k: usize,
    pub seed: u64,
}

impl Default for Fig2abConfig {
    fn default() -> Self {
        Self {
            n: 2500,
            reps: 20,
            alphas: vec![0.0, 0.05, 0.1, 0.15, 0.2],
            nus: vec![0.01, 0.05],
            betas: vec![0.5, 2.0],
            subsample_n: 500,
            k: 10,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2abRow {
    pub alpha: f64,
    pub nu: f64,
    pub beta: f64,
    pub mean_error: f64,
    pub sd_error: f64,
    /// Per-replication errors, in replication order.
    #[serde(skip)]
    pub errors: Vec<f64>,
}

/// Voronoi data with `nu` noise, perturbed at each `beta`, clustered by the
/// robust hierarchy at each `alpha`; rows ordered by `(nu, beta, alpha)`.
pub fn run_fig2ab(config: &Fig2abConfig) -> Result<Vec<Fig2abRow>> {
    check_reps(config.reps)?;
    if config.alphas.is_empty() || config.nus.is_empty() || config.betas.is_empty() {
        return Err(Error::param("alpha, nu and beta grids must be nonempty"));
    }
    // errors[nu][rep][beta][alpha]
    let cells: Vec<(usize, usize)> = (0..config.nus.len())
        .flat_map(|v| (0..config.reps).map(move |r| (v, r)))
        .collect();
    let per_rep: Vec<Vec<Vec<f64>>> = cells
        .par_iter()
        .map(|&(v, r)| fig2ab_replication(config, v, r))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (v, &nu) in config.nus.iter().enumerate() {
        for (b, &beta) in config.betas.iter().enumerate() {
            for (a, &alpha) in config.alphas.iter().enumerate() {
                let errors: Vec<f64> = (0..config.reps)
                    .map(|r| per_rep[v * config.reps + r][b][a])
                    .collect();
                let (mean_error, sd_error) = mean_sd(&errors);
                rows.push(Fig2abRow {
                    alpha,
                    nu,
                    beta,
                    mean_error,
                    sd_error,
                    errors,
                });
            }
        }
    }
    Ok(rows)
}

fn fig2ab_replication(config: &Fig2abConfig, v: usize, r: usize) -> Result<Vec<Vec<f64>>> {
    let nu = config.nus[v];
    let mut sim = SimConfig::voronoi(config.n, derive_seed(config.seed, &[1, v as u64, r as u64]));
    sim.nu = nu;
    let data = gen_voronoi(&sim)?;
    let cluster_seed = derive_seed(config.seed, &[3, v as u64, r as u64]);
    config
        .betas
        .iter()
        .enumerate()
        .map(|(b, &beta)| {
            let noise_seed = derive_seed(config.seed, &[2, v as u64, r as u64, b as u64]);
            let matrix = perturb(&data.matrix, beta, noise_seed)?;
            config
                .alphas
                .iter()
                .map(|&alpha| {
                    let params = GoodNeighborhoodParams::new(alpha, nu, config.subsample_n);
                    let (_, labels) = robust_cluster(&matrix, &params, config.k, cluster_seed)?;
                    pruning_error(&labels, &data.labels)
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig2cdConfig {
    pub ts: Vec<f64>,
    pub h: f64,
    pub ns: Vec<usize>,
    pub betas: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
}

impl Default for Fig2cdConfig {
    fn default() -> Self {
        Self {
            ts: vec![0.05, 0.1],
            h: 0.01,
            ns: vec![300, 1000, 3000],
            betas: vec![0.5, 1.0],
            reps: 100,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig2cdRow {
    pub t: f64,
    pub n: usize,
    pub beta: f64,
    /// Mean over replications where both level sets are empty or both are not.
    pub mean_hausdorff: f64,
    pub sd_hausdorff: f64,
    /// Replications where exactly one level set was empty.
    pub skipped: usize,
    /// Mean number of retained estimated points.
    pub mean_retained: f64,
    #[serde(skip)]
    pub distances: Vec<f64>,
}

/// Three-Gaussian data perturbed at each `beta`, level sets at each `t` on
/// the perturbed and true points; rows ordered by `(t, beta, n)`.
pub fn run_fig2cd(config: &Fig2cdConfig) -> Result<Vec<Fig2cdRow>> {
    check_reps(config.reps)?;
    if config.ts.is_empty() || config.ns.is_empty() || config.betas.is_empty() {
        return Err(Error::param("t, n and beta grids must be nonempty"));
    }
    let mut ts = config.ts.clone();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let kernel = KernelSpec::triangular(2)?;
    let cells: Vec<(usize, usize)> = (0..config.ns.len())
        .flat_map(|i| (0..config.reps).map(move |r| (i, r)))
        .collect();
    // outcome[n][rep][beta][t] = (distance, retained)
    let per_rep: Vec<Vec<Vec<(f64, usize)>>> = cells
        .par_iter()
        .map(|&(i, r)| {
            let n = config.ns[i];
            let data = gen_gauss3(&SimConfig::gauss3(n, derive_seed(config.seed, &[1, i as u64, r as u64])))?;
            let truth = data.matrix.points();
            let reference = level_sweep(truth, config.h, &kernel, &ts)?;
            config
                .betas
                .iter()
                .enumerate()
                .map(|(b, &beta)| {
                    let seed = derive_seed(config.seed, &[2, i as u64, r as u64, b as u64]);
                    let noisy = perturb(&data.matrix, beta, seed)?;
                    let estimate = level_sweep(noisy.points(), config.h, &kernel, &ts)?;
                    estimate
                        .iter()
                        .zip(&reference)
                        .map(|(e, rf)| {
                            let d = levelset_hausdorff(e, rf, noisy.points(), truth)?;
                            Ok((d, e.retained.len()))
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &t in &config.ts {
        let ti = ts.iter().position(|&x| x == t).expect("t is in the sorted grid");
        for (b, &beta) in config.betas.iter().enumerate() {
            for (i, &n) in config.ns.iter().enumerate() {
                let outcomes: Vec<(f64, usize)> = (0..config.reps)
                    .map(|r| per_rep[i * config.reps + r][b][ti])
                    .collect();
                let distances: Vec<f64> = outcomes
                    .iter()
                    .map(|o| o.0)
                    .filter(|d| d.is_finite())
                    .collect();
                let (mean_hausdorff, sd_hausdorff) = mean_sd(&distances);
                rows.push(Fig2cdRow {
                    t,
                    n,
                    beta,
                    mean_hausdorff,
                    sd_hausdorff,
                    skipped: config.reps - distances.len(),
                    mean_retained: outcomes.iter().map(|o| o.1 as f64).sum::<f64>()
                        / config.reps as f64,
                    distances,
                });
            }
        }
    }
    Ok(rows)
}

pub fn fig2ab_csv(rows: &[Fig2abRow]) -> String {
    let mut out = String::from("alpha,nu,beta,mean_error,sd_error\n");
    for r in rows {
        out += &format!(
            "{},{},{},{},{}\n",
            format_number(r.alpha),
            format_number(r.nu),
            format_number(r.beta),
            format_number(r.mean_error),
            format_number(r.sd_error)
        );
    }
    out
}

pub fn fig2cd_csv(rows: &[Fig2cdRow]) -> String {
    let mut out = String::from("t,n,beta,mean_hausdorff,sd_hausdorff,skipped,mean_retained\n");
    for r in rows {
        out += &format!(
            "{},{},{},{},{},{},{}\n",
            format_number(r.t),
            r.n,
            format_number(r.beta),
            format_number(r.mean_hausdorff),
            format_number(r.sd_hausdorff),
            r.skipped,
            format_number(r.mean_retained)
        );
    }
    out
}

fn write_outputs<C: Serialize>(dir: &Path, csv: &str, config: &C) -> Result<()> {
    create_dir(dir)?;
    let path = dir.join("trend.csv");
    std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    write_json(&dir.join("config.json"), config)
}

/// Runs fig2ab and writes `trend.csv` and `config.json` into `dir`.
pub fn write_fig2ab(dir: &Path, config: &Fig2abConfig) -> Result<Vec<Fig2abRow>> {
    let rows = run_fig2ab(config)?;
    write_outputs(dir, &fig2ab_csv(&rows), config)?;
    Ok(rows)
}

/// Runs fig2cd and writes `trend.csv` and `config.json` into `dir`.
pub fn write_fig2cd(dir: &Path, config: &Fig2cdConfig) -> Result<Vec<Fig2cdRow>> {
    let rows = run_fig2cd(config)?;
    write_outputs(dir, &fig2cd_csv(&rows), config)?;
    Ok(rows)
}
