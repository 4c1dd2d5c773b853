//! Hausdorff distance between estimated and exact level sets as n grows.
//!
//! cargo run --release --example fig2cd_trend -- [reps]

use causal_cluster::experiments::{fig2cd_csv, run_fig2cd, Fig2cdConfig};
use causal_cluster::metrics::spearman;

fn main() -> causal_cluster::Result<()> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let config = Fig2cdConfig { reps, ..Fig2cdConfig::default() };
    let rows = run_fig2cd(&config)?;
    print!("{}", fig2cd_csv(&rows));
    for group in rows.chunks(config.ns.len()) {
        let n: Vec<f64> = group.iter().map(|r| r.n as f64).collect();
        let d: Vec<f64> = group.iter().map(|r| r.mean_hausdorff).collect();
        println!("t={} beta={}: spearman {:?}", group[0].t, group[0].beta, spearman(&n, &d));
    }
    Ok(())
}
