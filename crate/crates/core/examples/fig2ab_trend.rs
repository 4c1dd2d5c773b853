//! Robust hierarchy error over a grid of alpha, nu and beta, with the
//! rank correlation between alpha and mean error in each (nu, beta) group.
//!
//! cargo run --release --example fig2ab_trend -- [reps]

use causal_cluster::experiments::{fig2ab_csv, run_fig2ab, Fig2abConfig};
use causal_cluster::metrics::spearman;

fn main() -> causal_cluster::Result<()> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let config = Fig2abConfig { reps, ..Fig2abConfig::default() };
    let rows = run_fig2ab(&config)?;
    print!("{}", fig2ab_csv(&rows));
    for group in rows.chunks(config.alphas.len()) {
        let alpha: Vec<f64> = group.iter().map(|r| r.alpha).collect();
        let error: Vec<f64> = group.iter().map(|r| r.mean_error).collect();
        println!("nu={} beta={}: spearman {:?}", group[0].nu, group[0].beta, spearman(&alpha, &error));
    }
    Ok(())
}
