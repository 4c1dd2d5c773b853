//! Fit one regression per treatment arm on half of an observational table
//! and project the other half into the space of counterfactual means.
//!
//! cargo run --release --example nuisance_projection

use causal_cluster::model::Parametrization;
use causal_cluster::regression::{
    empirical_projection_error, fit_all_arms, make_split, project, RegressionMethod,
};
use causal_cluster::simulation::{generate, observational_table, SimConfig};

fn main() -> causal_cluster::Result<()> {
    let data = generate(&SimConfig::gauss3(2000, 11))?;
    let table = observational_table(data.matrix.points(), 0.1, 12)?;
    let split = make_split(&table, 0.5, 13)?;
    let truth = data.matrix.points().select(&split.project_indices);

    for (name, method) in [
        ("knn (default k)", None),
        ("nadaraya-watson h=0.3", Some(RegressionMethod::NadarayaWatson { bandwidth: 0.3 })),
    ] {
        let models = fit_all_arms(&table, &split, |_, n_arm| {
            method.unwrap_or_else(|| RegressionMethod::default_knn(n_arm))
        })?;
        let matrix = project(&models, &table, &split, Parametrization::Levels)?;
        let err = empirical_projection_error(&matrix.with_truth(truth.clone())?)?;
        println!(
            "{name:<24} projected {} units, mean l2 error {:.4}, per-arm l1 {:?}",
            split.project_indices.len(),
            err.mean_l2,
            err.per_arm_l1.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
        );
    }

    let models = fit_all_arms(&table, &split, |_, n| RegressionMethod::default_knn(n))?;
    let contrasts = project(&models, &table, &split, Parametrization::ContrastsVsArm1)?;
    println!("contrast columns: {:?}", contrasts.column_names());
    println!("first unit: {:?}", contrasts.points().row(0));
    Ok(())
}

