//! Robust hierarchy on Voronoi data with background noise: build it on a
//! subsample, prune to k clusters and extend the labels to every point.
//!
//! cargo run --release --example robust_hierarchy

use causal_cluster::robust::{pruning_error, robust_cluster, GoodNeighborhoodParams};
use causal_cluster::simulation::{generate, perturb, SimConfig};

fn main() -> causal_cluster::Result<()> {
    let mut config = SimConfig::voronoi(2500, 5);
    config.nu = 0.05;
    let data = generate(&config)?;

    for (alpha, beta) in [(0.0, 50.0), (0.05, 2.0), (0.1, 0.5)] {
        let matrix = perturb(&data.matrix, beta, 6)?;
        let params = GoodNeighborhoodParams::new(alpha, config.nu, 500);
        let (hierarchy, labels) = robust_cluster(&matrix, &params, 10, 7)?;
        println!(
            "alpha={alpha:<4} beta={beta:<4} t={:<3} trimmed={:<3} pruning={:<12} noise={:<4} error={:.4}",
            hierarchy.neighborhood_size(),
            hierarchy.subsample().len() - hierarchy.core().len(),
            match hierarchy.min_cluster_size() {
                1 => "plain cut".to_owned(),
                m => format!("min size {m}"),
            },
            labels.noise_count(),
            pruning_error(&labels, &data.labels)?
        );
    }

    let clean = generate(&SimConfig::voronoi(2500, 5))?;
    let params = GoodNeighborhoodParams::new(0.0, 0.0, 300);
    let (hierarchy, labels) = robust_cluster(&clean.matrix, &params, 10, 8)?;
    let new_point = [0.5, 0.5, 0.5];
    println!(
        "clean data, n0=300: error {:.4}; a new point at the cube center joins cluster {}",
        pruning_error(&labels, &clean.labels)?,
        hierarchy.assign(&new_point)?
    );
    Ok(())
}
