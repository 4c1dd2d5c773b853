//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code:
//! 0 success, 1 usage or parameter error, 2 data or I/O error,
//! 3 numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::density::{default_bandwidth, level_sweep, KernelSpec};
use crate::error::{Error, Result};
use crate::experiments::{write_fig2ab, write_fig2cd, Fig2abConfig, Fig2cdConfig};
use crate::io;
use crate::linkage::{agglomerate, LinkageKind};
use crate::metrics::{is_disjoint, levelset_hausdorff, prop1_gap};
use crate::model::{validate_table, ClusterLabeling, Parametrization, PointSet};
use crate::regression::{fit_all_arms, make_split, project, RegressionMethod};
use crate::robust::{pruning_error, robust_cluster_points, GoodNeighborhoodParams};
use crate::simulation::{
    generate, observational_table, perturb_config, SimConfig, SimVariant, GAUSS3_SIGMA,
    VORONOI_MIN_SEPARATION, VORONOI_SIGMA,
};

#[derive(Parser, Debug)]
#[command(
    name = "causal-cluster",
    version,
    about = "Cluster units by their counterfactual mean outcome vectors"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "CC_THREADS")]
    threads: Option<usize>,
    /// Print errors as a JSON record on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate synthetic data with known clusters.
    Simulate(SimulateArgs),
    /// Fit per-arm regressions and project units into the mean space.
    Fit(FitArgs),
    /// Cluster a counterfactual matrix.
    #[command(subcommand)]
    Cluster(ClusterCommand),
    /// Compute one metric and print it as JSON.
    #[command(subcommand)]
    Metrics(MetricsCommand),
    /// Run a replication study and write a trend table.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Variant {
    Voronoi,
    Gauss3,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(value_enum)]
    variant: Variant,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Fraction of points replaced by uniform noise (voronoi only).
    #[arg(long, default_value_t = 0.0)]
    nu: f64,
    /// Perturbation exponent: noise variance n^-beta (>= 50 means none).
    #[arg(long, default_value_t = 50.0)]
    beta: f64,
    /// Perturbation variance, overriding --beta.
    #[arg(long)]
    noise_variance: Option<f64>,
    /// Per-coordinate cluster standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    /// Minimum distance between Voronoi centers.
    #[arg(long)]
    min_separation: Option<f64>,
    /// Outcome noise standard deviation in observations.csv.
    #[arg(long, default_value_t = 0.1)]
    outcome_noise: f64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Method {
    Knn,
    Nw,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ParamArg {
    Levels,
    ContrastsVsArm1,
}

impl From<ParamArg> for Parametrization {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::Levels => Parametrization::Levels,
            ParamArg::ContrastsVsArm1 => Parametrization::ContrastsVsArm1,
        }
    }
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Observation table CSV (y,a,x1,...,xd).
    #[arg(long)]
    input: PathBuf,
    /// Output matrix CSV; a JSON sidecar is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Number of arms (defaults to the largest arm label).
    #[arg(long)]
    arms: Option<usize>,
    #[arg(long, value_enum, default_value_t = Method::Knn)]
    method: Method,
    /// Neighbors for knn (defaults to ceil(n_arm^(2/3))).
    #[arg(long)]
    k: Option<usize>,
    /// Bandwidth for nw.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Share of rows used for fitting.
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ParamArg::Levels)]
    parametrization: ParamArg,
    /// Ground-truth matrix aligned with the input rows.
    #[arg(long, requires = "truth_out")]
    truth: Option<PathBuf>,
    /// Where to write the truth rows of the projection half.
    #[arg(long, requires = "truth")]
    truth_out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum ClusterCommand {
    /// Agglomerative clustering cut at k clusters.
    Hier(HierArgs),
    /// Robust hierarchy on a subsample, extended to all points.
    RobustHier(RobustArgs),
    /// Level-set clustering of a kernel density estimate.
    Density(DensityArgs),
}

#[derive(Args, Debug)]
struct HierArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    linkage: LinkageKind,
    #[arg(long)]
    k: usize,
    /// Output directory (labels.csv, dendrogram.json).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RobustArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    nu: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long)]
    subsample: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    seed: u64,
    /// Neighborhood size override.
    #[arg(long)]
    t: Option<usize>,
    /// True labels CSV for the error report.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Output directory (labels.csv, report.json).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[arg(long)]
    input: PathBuf,
    /// Bandwidth (defaults to a normal-reference rule).
    #[arg(long)]
    h: Option<f64>,
    /// Density level.
    #[arg(long)]
    t: f64,
    /// Extra levels a:b:step summarized in the report.
    #[arg(long)]
    t_grid: Option<String>,
    /// Output directory (labels.csv, report.json).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum MetricsCommand {
    /// Linkage gap between exact and perturbed set pairs, with its bound.
    Prop1Gap(GapArgs),
    /// Hausdorff distance between two (optionally label-filtered) point sets.
    Hausdorff(HausdorffArgs),
    /// Classification error under the best label matching.
    ClassError(ClassErrorArgs),
}

#[derive(Args, Debug)]
struct GapArgs {
    #[arg(long)]
    s1: PathBuf,
    #[arg(long)]
    s2: PathBuf,
    #[arg(long)]
    s1_hat: PathBuf,
    #[arg(long)]
    s2_hat: PathBuf,
    #[arg(long)]
    linkage: LinkageKind,
}

#[derive(Args, Debug)]
struct HausdorffArgs {
    #[arg(long)]
    estimate: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    /// Only points with a nonzero label in this file are used.
    #[arg(long)]
    estimate_labels: Option<PathBuf>,
    #[arg(long)]
    reference_labels: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassErrorArgs {
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Subcommand, Debug)]
enum ExperimentCommand {
    /// Robust hierarchy error against alpha, nu and beta.
    Fig2ab(Fig2abArgs),
    /// Level-set Hausdorff distance against n, t and beta.
    Fig2cd(Fig2cdArgs),
}

#[derive(Args, Debug)]
struct Fig2abArgs {
    #[arg(long, default_value_t = 2500)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.05, 0.1, 0.15, 0.2])]
    alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.05])]
    nus: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 2.0])]
    betas: Vec<f64>,
    #[arg(long, default_value_t = 500)]
    subsample: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct Fig2cdArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1])]
    ts: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [300, 1000, 3000])]
    ns: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0])]
    betas: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter(_) => 1,
        Error::InvalidData(_)
        | Error::Validation(_)
        | Error::Io { .. }
        | Error::Csv(_)
        | Error::Json(_) => 2,
        Error::Numerical(_) => 3,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Results go to files or stdout, errors to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let json_errors = args.iter().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
            if code != 0 && json_errors {
                report(&Error::param(e.to_string().trim().to_owned()), 1, true);
            } else {
                let _ = e.print();
            }
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err((err, json)) => {
            let code = exit_code(&err);
            report(&err, code, json);
            code
        }
    }
}

fn report(err: &Error, code: i32, json: bool) {
    if json {
        let record = json!({ "error": err.kind(), "message": err.to_string(), "exit_code": code });
        eprintln!("{record}");
    } else {
        eprintln!("error: {err}");
    }
}

fn execute(cli: Cli) -> std::result::Result<(), (Error, bool)> {
    let json = cli.json_errors;
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err((Error::param("--threads must be at least 1"), json));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Cluster(ClusterCommand::Hier(a)) => hier(a),
        Command::Cluster(ClusterCommand::RobustHier(a)) => robust(a),
        Command::Cluster(ClusterCommand::Density(a)) => density(a),
        Command::Metrics(MetricsCommand::Prop1Gap(a)) => gap(a),
        Command::Metrics(MetricsCommand::Hausdorff(a)) => hausdorff_cmd(a),
        Command::Metrics(MetricsCommand::ClassError(a)) => class_error(a),
        Command::Experiment(ExperimentCommand::Fig2ab(a)) => fig2ab(a),
        Command::Experiment(ExperimentCommand::Fig2cd(a)) => fig2cd(a),
    };
    result.map_err(|e| (e, json))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut config = match a.variant {
        Variant::Voronoi => SimConfig::voronoi(a.n, a.seed),
        Variant::Gauss3 => SimConfig::gauss3(a.n, a.seed),
    };
    if matches!(a.variant, Variant::Gauss3) && a.nu != 0.0 {
        return Err(Error::param("--nu applies to the voronoi variant only"));
    }
    config.nu = a.nu;
    config.beta = a.beta;
    config.noise_variance = a.noise_variance;
    config.sigma = a.sigma.unwrap_or(match config.variant {
        SimVariant::Voronoi10 => VORONOI_SIGMA,
        SimVariant::Gauss3 => GAUSS3_SIGMA,
    });
    if let Some(sep) = a.min_separation {
        if config.variant != SimVariant::Voronoi10 {
            return Err(Error::param("--min-separation applies to the voronoi variant only"));
        }
        config.min_center_separation = sep;
    } else if config.variant == SimVariant::Voronoi10 {
        config.min_center_separation = VORONOI_MIN_SEPARATION;
    }
    let data = generate(&config)?;
    let perturbed = perturb_config(&data.matrix, &config, config.seed.wrapping_add(1))?;
    let truth = data.matrix.points();
    let header = Parametrization::Levels.column_names(truth.dim());
    let table = observational_table(truth, a.outcome_noise, config.seed.wrapping_add(2))?;
    io::create_dir(&a.out)?;
    io::write_points(&a.out.join("points.csv"), &header, perturbed.points())?;
    io::write_points(&a.out.join("truth.csv"), &header, truth)?;
    io::write_labels(&a.out.join("labels.csv"), &data.labels)?;
    io::write_observations(&a.out.join("observations.csv"), &table)?;
    io::write_json(
        &a.out.join("config.json"),
        &json!({
            "config": config,
            "perturbation_variance": config.perturbation_variance(),
            "outcome_noise": a.outcome_noise,
            "centers": data.centers,
        }),
    )
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn fit(a: FitArgs) -> Result<()> {
    let table = io::read_observations(&a.input, a.arms)?;
    let report = validate_table(&table)?;
    let split = make_split(&table, a.fraction, a.seed)?;
    let fixed = match (a.method, a.k, a.bandwidth) {
        (Method::Knn, Some(k), None) => Some(RegressionMethod::Knn { k }),
        (Method::Knn, None, None) => None,
        (Method::Nw, None, Some(bandwidth)) => Some(RegressionMethod::NadarayaWatson { bandwidth }),
        (Method::Nw, _, None) => return Err(Error::param("--method nw needs --bandwidth")),
        (Method::Knn, _, Some(_)) => return Err(Error::param("--bandwidth applies to nw only")),
        (Method::Nw, Some(_), _) => return Err(Error::param("--k applies to knn only")),
    };
    let models = fit_all_arms(&table, &split, |_, n_arm| {
        fixed.unwrap_or_else(|| RegressionMethod::default_knn(n_arm))
    })?;
    let parametrization = Parametrization::from(a.parametrization);
    let matrix = project(&models, &table, &split, parametrization)?;
    io::write_points(&a.out, &matrix.column_names(), matrix.points())?;

    let methods: Vec<_> = models
        .iter()
        .map(|m| json!({ "arm": m.arm(), "method": m.method(), "training_rows": m.training_rows().len() }))
        .collect();
    let mut sidecar = json!({
        "input": a.input,
        "arms": table.arms(),
        "rows": report.n,
        "arm_counts": report.arm_counts,
        "parametrization": parametrization,
        "fraction": a.fraction,
        "seed": a.seed,
        "models": methods,
        "split": split,
    });

    if let (Some(truth_path), Some(truth_out)) = (&a.truth, &a.truth_out) {
        let (truth_all, truth_param) = io::read_matrix(truth_path)?;
        if truth_param != Parametrization::Levels || truth_all.dim() != table.arms() {
            return Err(Error::data("--truth must hold mu1..muq for every arm"));
        }
        if truth_all.len() != table.len() {
            return Err(Error::data(format!(
                "--truth has {} rows, the table {}",
                truth_all.len(),
                table.len()
            )));
        }
        let selected = truth_all.select(&split.project_indices);
        let truth = match parametrization {
            Parametrization::Levels => selected,
            Parametrization::ContrastsVsArm1 => {
                let coords: Vec<f64> = selected
                    .rows()
                    .flat_map(|r| r[1..].iter().map(|v| v - r[0]).collect::<Vec<_>>())
                    .collect();
                PointSet::new(parametrization.width(table.arms()), coords)?
            }
        };
        io::write_points(truth_out, &matrix.column_names(), &truth)?;
        let with_truth = matrix.with_truth(truth)?;
        let error = crate::regression::empirical_projection_error(&with_truth)?;
        sidecar["projection_error"] = serde_json::to_value(error)?;
    }
    io::write_json(&sidecar_path(&a.out), &sidecar)
}

fn read_input(path: &Path) -> Result<PointSet> {
    Ok(io::read_matrix(path)?.0)
}

fn hier(a: HierArgs) -> Result<()> {
    let points = read_input(&a.input)?;
    let dendrogram = agglomerate(&points, a.linkage)?;
    let labels = dendrogram.cut(a.k)?;
    io::create_dir(&a.out)?;
    io::write_labels(&a.out.join("labels.csv"), &labels)?;
    let path = a.out.join("dendrogram.json");
    std::fs::write(&path, dendrogram.to_json()? + "\n").map_err(|e| Error::io(&path, e))
}

#[derive(Serialize)]
struct RobustReport<'a> {
    params: &'a GoodNeighborhoodParams,
    k: usize,
    seed: u64,
    t: usize,
    votes: usize,
    min_cluster_size: usize,
    degenerate: bool,
    subsample: &'a [usize],
    trimmed: usize,
    cluster_sizes: Vec<usize>,
    noise: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<f64>,
}

fn robust(a: RobustArgs) -> Result<()> {
    let points = read_input(&a.input)?;
    let params = GoodNeighborhoodParams {
        alpha: a.alpha,
        nu: a.nu,
        delta: a.delta,
        subsample_n: a.subsample,
        neighborhood: a.t,
    };
    let (hierarchy, labels) = robust_cluster_points(&points, &params, a.k, a.seed)?;
    let error = match &a.truth {
        Some(path) => Some(pruning_error(&labels, &io::read_labels(path)?)?),
        None => None,
    };
    if hierarchy.is_degenerate() {
        eprintln!("warning: all subsample points coincide; returning a single cluster");
    }
    io::create_dir(&a.out)?;
    io::write_labels(&a.out.join("labels.csv"), &labels)?;
    io::write_json(
        &a.out.join("report.json"),
        &RobustReport {
            params: &params,
            k: a.k,
            seed: a.seed,
            t: hierarchy.neighborhood_size(),
            votes: hierarchy.votes(),
            min_cluster_size: hierarchy.min_cluster_size(),
            degenerate: hierarchy.is_degenerate(),
            subsample: hierarchy.subsample(),
            trimmed: hierarchy.subsample().len() - hierarchy.core().len(),
            cluster_sizes: labels.cluster_sizes(),
            noise: labels.noise_count(),
            error,
        },
    )
}

/// Parses `a:b:step` into `a, a + step, ...` up to `b`.
fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::param(format!("--t-grid expects a:b:step, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(Error::param("--t-grid has too many levels"));
    }
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

#[derive(Serialize)]
struct LevelSummary {
    t: f64,
    retained: usize,
    clusters: usize,
    cluster_sizes: Vec<usize>,
}

fn density(a: DensityArgs) -> Result<()> {
    let points = read_input(&a.input)?;
    let h = match a.h {
        Some(h) => h,
        None => default_bandwidth(&points)?,
    };
    let kernel = KernelSpec::triangular(points.dim())?;
    let mut levels = vec![a.t];
    if let Some(spec) = &a.t_grid {
        levels.extend(parse_grid(spec)?);
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let sweep = level_sweep(&points, h, &kernel, &levels)?;
    let main = sweep
        .iter()
        .find(|c| c.t == a.t)
        .expect("requested level is in the sweep");
    let summary = |c: &crate::density::LevelSetClustering| LevelSummary {
        t: c.t,
        retained: c.retained.len(),
        clusters: c.cluster_count(),
        cluster_sizes: c.labels.cluster_sizes(),
    };
    io::create_dir(&a.out)?;
    io::write_labels(&a.out.join("labels.csv"), &main.labels)?;
    let mut report = json!({
        "h": h,
        "t": a.t,
        "n": points.len(),
        "kernel": kernel,
        "retained": main.retained.len(),
        "clusters": main.cluster_count(),
        "cluster_sizes": main.labels.cluster_sizes(),
    });
    if a.t_grid.is_some() {
        let levels: Vec<LevelSummary> = sweep.iter().map(summary).collect();
        report["sweep"] = serde_json::to_value(levels)?;
    }
    io::write_json(&a.out.join("report.json"), &report)
}

fn gap(a: GapArgs) -> Result<()> {
    let read = |p: &Path| io::read_points(p).map(|(_, pts)| pts);
    let g = prop1_gap(
        &read(&a.s1)?,
        &read(&a.s2)?,
        &read(&a.s1_hat)?,
        &read(&a.s2_hat)?,
        a.linkage,
    )?;
    print_json(&json!({
        "metric": "prop1-gap",
        "linkage": a.linkage,
        "gap": g.gap,
        "bound": g.bound,
        "holds": g.holds(),
    }))
}

/// Wraps a point set and optional labels as a level set at a fixed level.
fn as_level_set(points: &PointSet, labels: Option<ClusterLabeling>) -> Result<crate::density::LevelSetClustering> {
    let labels = match labels {
        Some(l) if l.len() != points.len() => {
            return Err(Error::data(format!(
                "labels have {} rows, points {}",
                l.len(),
                points.len()
            )))
        }
        Some(l) => l,
        None => ClusterLabeling::new(vec![1; points.len()])?,
    };
    let retained = (0..points.len()).filter(|&i| labels.labels()[i] != 0).collect();
    Ok(crate::density::LevelSetClustering {
        h: 0.0,
        t: 0.0,
        retained,
        labels,
    })
}

fn hausdorff_cmd(a: HausdorffArgs) -> Result<()> {
    let (_, est) = io::read_points(&a.estimate)?;
    let (_, reference) = io::read_points(&a.reference)?;
    if est.dim() != reference.dim() {
        return Err(Error::data("point sets differ in dimension"));
    }
    let read_labels = |p: &Option<PathBuf>| p.as_deref().map(io::read_labels).transpose();
    let e = as_level_set(&est, read_labels(&a.estimate_labels)?)?;
    let r = as_level_set(&reference, read_labels(&a.reference_labels)?)?;
    let d = levelset_hausdorff(&e, &r, &est, &reference)?;
    let outcome = if is_disjoint(d) {
        "disjoint"
    } else if e.retained.is_empty() {
        "both-empty"
    } else {
        "finite"
    };
    print_json(&json!({
        "metric": "hausdorff",
        "hausdorff": if d.is_finite() { Some(d) } else { None },
        "outcome": outcome,
        "estimate_points": e.retained.len(),
        "reference_points": r.retained.len(),
    }))
}

fn class_error(a: ClassErrorArgs) -> Result<()> {
    let labels = io::read_labels(&a.labels)?;
    let truth = io::read_labels(&a.truth)?;
    let error = pruning_error(&labels, &truth)?;
    print_json(&json!({ "metric": "class-error", "error": error, "n": labels.len() }))
}

fn fig2ab(a: Fig2abArgs) -> Result<()> {
    let config = Fig2abConfig {
        n: a.n,
        reps: a.reps,
        alphas: a.alphas,
        nus: a.nus,
        betas: a.betas,
        subsample_n: a.subsample,
        k: a.k,
        seed: a.seed,
    };
    write_fig2ab(&a.out, &config).map(|_| ())
}

fn fig2cd(a: Fig2cdArgs) -> Result<()> {
    let config = Fig2cdConfig {
        ts: a.ts,
        h: a.h,
        ns: a.ns,
        betas: a.betas,
        reps: a.reps,
        seed: a.seed,
    };
    write_fig2cd(&a.out, &config).map(|_| ())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap().len(), 3);
        assert_eq!(parse_grid("1:1:0.5").unwrap(), vec![1.0]);
        assert!(parse_grid("1:0:0.5").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn usage_errors_exit_one_and_help_exits_zero() {
        assert_eq!(run(["causal-cluster", "--help"]), 0);
        assert_eq!(run(["causal-cluster", "cluster", "hier", "--help"]), 0);
        assert_eq!(run(["causal-cluster", "bogus"]), 1);
        assert_eq!(run(["causal-cluster", "simulate", "voronoi"]), 1);
    }

    #[test]
    fn missing_file_exits_two() {
        let code = run([
            "causal-cluster",
            "cluster",
            "hier",
            "--input",
            "/nonexistent/m.csv",
            "--linkage",
            "single",
            "--k",
            "2",
            "--out",
            "/tmp/unused",
        ]);
        assert_eq!(code, 2);
    }
}
