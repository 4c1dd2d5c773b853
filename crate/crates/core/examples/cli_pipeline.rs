//! The command-line pipeline driven in-process: simulate, fit, cluster and
//! score, writing everything under a temporary directory.
//!
//! cargo run --release --example cli_pipeline

use causal_cluster::cli::run;

fn main() {
    let dir = std::env::temp_dir().join("causal-cluster-pipeline");
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let steps: Vec<Vec<String>> = vec![
        vec!["simulate", "gauss3", "--n", "600", "--seed", "1", "--beta", "1", "--out", &p("sim")],
        vec!["fit", "--input", &p("sim/observations.csv"), "--out", &p("m.csv"), "--seed", "2",
             "--truth", &p("sim/truth.csv"), "--truth-out", &p("m_true.csv")],
        vec!["cluster", "hier", "--input", &p("m.csv"), "--linkage", "average", "--k", "3", "--out", &p("hier")],
        vec!["cluster", "density", "--input", &p("m.csv"), "--h", "0.3", "--t", "0.3", "--out", &p("dens")],
        vec!["cluster", "density", "--input", &p("m_true.csv"), "--h", "0.3", "--t", "0.3", "--out", &p("dens_true")],
        vec!["metrics", "hausdorff", "--estimate", &p("m.csv"), "--reference", &p("m_true.csv"),
             "--estimate-labels", &p("dens/labels.csv"), "--reference-labels", &p("dens_true/labels.csv")],
        vec!["metrics", "class-error", "--labels", &p("hier/labels.csv"), "--truth", &p("dens_true/labels.csv")],
    ]
    .into_iter()
    .map(|s| s.into_iter().map(str::to_owned).collect())
    .collect();
    for step in steps {
        println!("$ causal-cluster {}", step.join(" "));
        let code = run(std::iter::once("causal-cluster".to_owned()).chain(step));
        if code != 0 {
            std::process::exit(code);
        }
    }
}
