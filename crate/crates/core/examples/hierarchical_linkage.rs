//! Single, average and complete linkage on a noisy three-cluster matrix,
//! and how far a perturbation can move a linkage distance.
//!
//! cargo run --release --example hierarchical_linkage

use causal_cluster::linkage::{agglomerate, linkage_distance, LinkageKind};
use causal_cluster::metrics::{classification_error, prop1_gap};
use causal_cluster::simulation::{generate, perturb, SimConfig};

fn main() -> causal_cluster::Result<()> {
    let data = generate(&SimConfig::gauss3(600, 3))?;
    let noisy = perturb(&data.matrix, 1.0, 4)?;

    for kind in LinkageKind::ALL {
        let tree = agglomerate(noisy.points(), kind)?;
        let labels = tree.cut(3)?;
        let top: Vec<String> = tree.merges().iter().rev().take(3).map(|m| m.height).map(|h| format!("{h:.3}")).collect();
        println!(
            "{kind:?}: sizes {:?}, error {:.4}, top heights {}",
            labels.cluster_sizes(),
            classification_error(&labels, &data.labels)?,
            top.join(" ")
        );
    }

    let first = data.matrix.points().select(&data.labels.members(1));
    let second = data.matrix.points().select(&data.labels.members(2));
    let first_hat = noisy.points().select(&data.labels.members(1));
    let second_hat = noisy.points().select(&data.labels.members(2));
    for kind in LinkageKind::ALL {
        let g = prop1_gap(&first, &second, &first_hat, &second_hat, kind)?;
        println!(
            "{kind:?}: D = {:.4}, |D - D_hat| = {:.4} <= {:.4}",
            linkage_distance(&first, &second, kind)?,
            g.gap,
            g.bound
        );
    }
    Ok(())
}
