//! Level-set clustering with the triangular kernel: the estimated level
//! set from a perturbed matrix against the one from the exact means.
//!
//! cargo run --release --example density_level_sets

use causal_cluster::density::{default_bandwidth, kde, level_sweep, KernelSpec};
use causal_cluster::metrics::{is_disjoint, levelset_hausdorff};
use causal_cluster::simulation::{generate, perturb, SimConfig};

fn main() -> causal_cluster::Result<()> {
    let data = generate(&SimConfig::gauss3(1500, 21))?;
    let truth = data.matrix.points();
    let noisy = perturb(&data.matrix, 1.0, 22)?;
    let kernel = KernelSpec::triangular(truth.dim())?;
    let h = default_bandwidth(truth)?;
    println!("bandwidth {h:.4}, density at the first center {:.4}", kde(truth, h, &kernel, &data.centers[0])?);

    let levels = [0.05, 0.2, 0.5, 1.0, 2.0];
    let exact = level_sweep(truth, h, &kernel, &levels)?;
    let estimated = level_sweep(noisy.points(), h, &kernel, &levels)?;
    for (e, r) in estimated.iter().zip(&exact) {
        let d = levelset_hausdorff(e, r, noisy.points(), truth)?;
        let shown = if is_disjoint(d) { "disjoint".to_owned() } else { format!("{d:.4}") };
        println!(
            "t={:<4} retained {:>4}/{:<4} clusters {:>2}/{:<2} hausdorff {shown}",
            e.t,
            e.retained.len(),
            r.retained.len(),
            e.cluster_count(),
            r.cluster_count()
        );
    }
    Ok(())
}
