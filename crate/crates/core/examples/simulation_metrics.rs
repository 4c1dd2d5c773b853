//! The two synthetic designs, their perturbation scale, and the
//! classification error under the best matching of cluster labels.
//!
//! cargo run --release --example simulation_metrics

use causal_cluster::metrics::classification_error;
use causal_cluster::model::ClusterLabeling;
use causal_cluster::simulation::{generate, perturbation_variance, SimConfig};

fn main() -> causal_cluster::Result<()> {
    let mut voronoi = SimConfig::voronoi(2500, 1);
    voronoi.nu = 0.05;
    let v = generate(&voronoi)?;
    println!(
        "voronoi: {} points in {} dims, cluster sizes {:?}, noise {}",
        v.matrix.len(),
        v.matrix.dim(),
        v.labels.cluster_sizes(),
        v.labels.noise_count()
    );
    let g = generate(&SimConfig::gauss3(900, 1))?;
    println!("gauss3: centers {:?}, sizes {:?}", g.centers, g.labels.cluster_sizes());

    for beta in [0.5, 1.0, 2.0] {
        println!("n=2500 beta={beta}: perturbation variance {:.2e}", perturbation_variance(2500, beta));
    }

    let truth = ClusterLabeling::new(vec![1, 1, 1, 2, 2, 2, 3, 3, 3, 0])?;
    let renamed = ClusterLabeling::new(vec![3, 3, 3, 1, 1, 1, 2, 2, 2, 0])?;
    let one_wrong = ClusterLabeling::new(vec![3, 3, 1, 1, 1, 1, 2, 2, 2, 0])?;
    let noise_as_cluster = ClusterLabeling::new(vec![3, 3, 3, 1, 1, 1, 2, 2, 2, 1])?;
    println!("renamed labels:        {:.2}", classification_error(&renamed, &truth)?);
    println!("one point moved:       {:.2}", classification_error(&one_wrong, &truth)?);
    println!("noise put in a cluster: {:.2}", classification_error(&noise_as_cluster, &truth)?);
    Ok(())
}
