//! Command-line front end: argument parsing, configuration resolution and
//! the benchmark report.
//!
//! Configuration precedence is defaults, then the `--config` file, then
//! flags. Report lines are `key=value`; lines starting with `timing` carry
//! wall-clock figures and are the only ones that differ between identical
//! runs.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sce_core::cut::brute_force_sparsest_cut;
use sce_core::data::{load_dataset, load_features, load_graph, read_labels, write_labels};
use sce_core::eval::{logistic_probe, make_splits, mean_std, ProbeConfig};
use sce_core::graph::write_edge_list;
use sce_core::training::{smoothed_inputs, train_on_inputs, LossKind, TrainConfig};
use sce_core::SmoothingOperator;
use sce_core::{
    embed, gen_features, gen_sbm, write_matrix, Aggregator, CutObjective, Dataset, Matrix,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] sce_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            CliError::Invalid(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "sce",
    version,
    about = "Contrastive graph embeddings from negative samples"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the k-step smoothed features.
    Smooth(SmoothArgs),
    /// Train an encoder and write node embeddings.
    Train(TrainArgs),
    /// Score an embedding file with the logistic probe.
    Evaluate(EvaluateArgs),
    /// Exhaustive sparsest cut of a small graph.
    Cut(CutArgs),
    /// Generate a stochastic block model dataset.
    GenSbm(GenSbmArgs),
    /// Train, then probe over random splits and print a report.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
pub struct SmoothArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Hyperparameter flags; unset flags fall back to the config file, then to
/// the built-in defaults.
#[derive(Debug, Default, Args)]
pub struct Hyper {
    /// `key = value` file with training settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Layer widths including the input width, e.g. `32,16`.
    #[arg(long)]
    pub dims: Option<String>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub neg_per_node: Option<usize>,
    /// Rows per mini-batch step; 0 trains full-batch.
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, value_parser = ["none", "concat", "mean", "max"])]
    pub aggregator: Option<String>,
    #[arg(long, value_parser = ["sce", "negative"])]
    pub loss: Option<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Embedding output (binary matrix format).
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub hyper: Hyper,
}

#[derive(Debug, Default, Args)]
pub struct ProbeArgs {
    #[arg(long, default_value_t = 20)]
    pub per_class: usize,
    #[arg(long, default_value_t = 10)]
    pub splits: usize,
    /// Z-score embedding columns before fitting the probe.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub probe: ProbeArgs,
}

#[derive(Debug, Args)]
pub struct CutArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Objective: `phi` (min side) or `phi_prime` (product of sides).
    #[arg(long, default_value = "phi_prime")]
    pub variant: String,
}

#[derive(Debug, Args)]
pub struct GenSbmArgs {
    /// Block sizes, e.g. `200,200`.
    #[arg(long, default_value = "200,200")]
    pub sizes: String,
    #[arg(long, default_value_t = 0.05)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.005)]
    pub p_out: f64,
    #[arg(long, default_value_t = 32)]
    pub feature_dim: usize,
    #[arg(long, default_value_t = 0.0)]
    pub signal: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; receives `graph.txt`, `features.bin`, `labels.txt`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Also write the trained embeddings here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub hyper: Hyper,
    #[command(flatten)]
    pub probe: ProbeArgs,
}

/// Parses `argv` (including the program name).
pub fn parse_args<I, S>(argv: I) -> CliResult<Command>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    Ok(Cli::try_parse_from(argv)?.command)
}

/// Defaults, overlaid by the config file, overlaid by flags. Empty `dims`
/// defaults to `[f, 512]`.
pub fn resolve_config(hyper: &Hyper, feature_cols: usize) -> CliResult<TrainConfig> {
    let mut config = TrainConfig::default();
    if let Some(path) = &hyper.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        config
            .apply_text(&text)
            .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    }
    let flags: [(&str, Option<String>); 11] = [
        ("seed", hyper.seed.map(|v| v.to_string())),
        ("k", hyper.k.map(|v| v.to_string())),
        ("dims", hyper.dims.clone()),
        ("lr", hyper.lr.map(|v| v.to_string())),
        ("alpha", hyper.alpha.map(|v| v.to_string())),
        ("beta", hyper.beta.map(|v| v.to_string())),
        ("epochs", hyper.epochs.map(|v| v.to_string())),
        ("neg_per_node", hyper.neg_per_node.map(|v| v.to_string())),
        ("batch_size", hyper.batch_size.map(|v| v.to_string())),
        ("aggregator", hyper.aggregator.clone()),
        ("loss", hyper.loss.clone()),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            config
                .set(key, &v)
                .map_err(|e| CliError::Invalid(format!("--{}: {e}", key.replace('_', "-"))))?;
        }
    }
    if config.dims.is_empty() {
        config.dims = vec![feature_cols, 512];
    }
    Ok(config)
}

/// Trains and embeds; returns the embedding and the training seconds.
pub fn train_embeddings(
    graph: &sce_core::Graph,
    features: &Matrix,
    config: &TrainConfig,
) -> CliResult<(Matrix, f64, Vec<f64>)> {
    config.validate(graph.num_nodes(), features.cols())?;
    let start = Instant::now();
    let inputs = smoothed_inputs(graph, features, config)?;
    let out = train_on_inputs(&inputs, config)?;
    let z = embed(&inputs, &out.params, config.aggregator)?;
    let seconds = start.elapsed().as_secs_f64();
    let mut history = vec![out.initial_loss];
    history.extend(out.loss_history);
    Ok((z, seconds, history))
}

/// Outcome of [`run_benchmark`].
#[derive(Clone, Debug)]
pub struct BenchmarkReport {
    pub dataset: String,
    pub nodes: usize,
    pub edges: usize,
    pub config: TrainConfig,
    pub accuracies: Vec<f64>,
    pub micro_f1s: Vec<f64>,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub train_seconds: f64,
    pub embeddings: Matrix,
}

impl BenchmarkReport {
    pub fn accuracy(&self) -> (f64, f64) {
        mean_std(&self.accuracies)
    }

    pub fn micro_f1(&self) -> (f64, f64) {
        mean_std(&self.micro_f1s)
    }

    /// Report text; one `key=value` record per line.
    pub fn render(&self) -> String {
        let c = &self.config;
        let dims: Vec<String> = c.dims.iter().map(usize::to_string).collect();
        let mut s = String::new();
        let _ = writeln!(
            s,
            "dataset={} nodes={} edges={}",
            self.dataset, self.nodes, self.edges
        );
        let _ = writeln!(
            s,
            "config k={} dims={} lr={} alpha={} beta={} epochs={} neg_per_node={} batch_size={} aggregator={} loss={} seed={}",
            c.k, dims.join(","), c.lr, c.alpha, c.beta, c.epochs, c.neg_per_node, c.batch_size, c.aggregator, c.loss, c.seed
        );
        let _ = writeln!(
            s,
            "loss initial={:e} final={:e}",
            self.initial_loss, self.final_loss
        );
        for (i, (a, f)) in self.accuracies.iter().zip(&self.micro_f1s).enumerate() {
            let _ = writeln!(s, "split={i} accuracy={a:.6} micro_f1={f:.6}");
        }
        let (am, asd) = self.accuracy();
        let (fm, fsd) = self.micro_f1();
        let _ = writeln!(s, "accuracy_mean={am:.6} accuracy_std={asd:.6}");
        let _ = writeln!(s, "micro_f1_mean={fm:.6} micro_f1_std={fsd:.6}");
        let _ = writeln!(
            s,
            "summary accuracy={:.2}±{:.2} micro_f1={:.2}±{:.2} splits={}",
            am * 100.0,
            asd * 100.0,
            fm * 100.0,
            fsd * 100.0,
            self.accuracies.len()
        );
        let _ = writeln!(s, "timing_train_seconds={:.6}", self.train_seconds);
        s
    }
}

/// Drops the `timing…` lines of a rendered report.
pub fn strip_timing(report: &str) -> String {
    report
        .lines()
        .filter(|l| !l.starts_with("timing"))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// Trains on the dataset and probes the embeddings over `num_splits` random
/// splits with `per_class` training labels per class.
pub fn run_benchmark(
    dataset: &Dataset<f64>,
    config: &TrainConfig,
    per_class: usize,
    num_splits: usize,
    probe: &ProbeConfig,
) -> CliResult<BenchmarkReport> {
    let labels = dataset
        .labels
        .as_ref()
        .ok_or_else(|| CliError::Invalid("benchmark needs labels".into()))?;
    let (z, train_seconds, history) = train_embeddings(&dataset.graph, &dataset.features, config)?;
    let splits = make_splits(labels, per_class, num_splits, config.seed)?;
    let mut accuracies = Vec::with_capacity(splits.len());
    let mut micro_f1s = Vec::with_capacity(splits.len());
    for split in &splits {
        let r = logistic_probe(&z, split, probe)?;
        accuracies.push(r.accuracy);
        micro_f1s.push(r.micro_f1);
    }
    Ok(BenchmarkReport {
        dataset: dataset.name.clone(),
        nodes: dataset.graph.num_nodes(),
        edges: dataset.graph.num_edges(),
        config: config.clone(),
        accuracies,
        micro_f1s,
        initial_loss: history[0],
        final_loss: *history.last().expect("nonempty"),
        train_seconds,
        embeddings: z,
    })
}

fn probe_config(args: &ProbeArgs) -> ProbeConfig {
    ProbeConfig {
        standardize: args.standardize,
        ..ProbeConfig::default()
    }
}

fn save_matrix(m: &Matrix, path: &Path) -> CliResult<()> {
    let mut sink = BufWriter::new(File::create(path).map_err(|e| {
        CliError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?);
    write_matrix(m, &mut sink)?;
    sink.flush()?;
    Ok(())
}

fn parse_list<T: std::str::FromStr>(flag: &str, value: &str) -> CliResult<Vec<T>> {
    value
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Invalid(format!("--{flag}: bad list entry {t:?}")))
        })
        .collect()
}

/// Executes a parsed command, writing human-readable output to `out`.
pub fn run<W: Write>(command: Command, out: &mut W) -> CliResult<()> {
    match command {
        Command::Smooth(a) => {
            let graph = load_graph(&a.graph)?;
            let features: Matrix = load_features(&a.features)?;
            if features.rows() != graph.num_nodes() {
                return Err(CliError::Invalid(format!(
                    "{} has {} rows, graph has {} nodes",
                    a.features.display(),
                    features.rows(),
                    graph.num_nodes()
                )));
            }
            let smoothed = SmoothingOperator::new(&graph, a.k).smooth(&features)?;
            save_matrix(&smoothed, &a.out)?;
            writeln!(
                out,
                "smoothed rows={} cols={} k={}",
                smoothed.rows(),
                smoothed.cols(),
                a.k
            )?;
        }
        Command::Train(a) => {
            let data: Dataset<f64> = load_dataset(&a.graph, &a.features, None)?;
            let config = resolve_config(&a.hyper, data.features.cols())?;
            let (z, seconds, history) = train_embeddings(&data.graph, &data.features, &config)?;
            save_matrix(&z, &a.out)?;
            writeln!(
                out,
                "embeddings rows={} cols={} path={}",
                z.rows(),
                z.cols(),
                a.out.display()
            )?;
            writeln!(
                out,
                "loss initial={:e} final={:e}",
                history[0],
                history.last().expect("nonempty")
            )?;
            writeln!(out, "timing_train_seconds={seconds:.6}")?;
        }
        Command::Evaluate(a) => {
            let z: Matrix = load_features(&a.embeddings)?;
            let labels = read_labels(std::io::BufReader::new(File::open(&a.labels)?))?;
            if labels.len() != z.rows() {
                return Err(CliError::Invalid(format!(
                    "{} has {} labels, embeddings have {} rows",
                    a.labels.display(),
                    labels.len(),
                    z.rows()
                )));
            }
            let splits = make_splits(&labels, a.probe.per_class, a.probe.splits, a.seed)?;
            let probe = probe_config(&a.probe);
            let mut accs = Vec::new();
            let mut f1s = Vec::new();
            for (i, split) in splits.iter().enumerate() {
                let r = logistic_probe(&z, split, &probe)?;
                writeln!(
                    out,
                    "split={i} accuracy={:.6} micro_f1={:.6}",
                    r.accuracy, r.micro_f1
                )?;
                accs.push(r.accuracy);
                f1s.push(r.micro_f1);
            }
            let (am, asd) = mean_std(&accs);
            let (fm, fsd) = mean_std(&f1s);
            writeln!(out, "accuracy_mean={am:.6} accuracy_std={asd:.6}")?;
            writeln!(out, "micro_f1_mean={fm:.6} micro_f1_std={fsd:.6}")?;
        }
        Command::Cut(a) => {
            let objective: CutObjective = a.variant.parse()?;
            let graph = load_graph(&a.graph)?;
            let r = brute_force_sparsest_cut(&graph, objective)?;
            let members: Vec<String> = r.best_set.members().iter().map(usize::to_string).collect();
            writeln!(
                out,
                "objective={} value={} exact={} set={}",
                objective.name(),
                r.value,
                r.ratio,
                members.join(",")
            )?;
        }
        Command::GenSbm(a) => {
            let sizes: Vec<usize> = parse_list("sizes", &a.sizes)?;
            let (graph, labels) = gen_sbm(&sizes, a.p_in, a.p_out, a.seed)?;
            let features: Matrix = gen_features(&labels, a.feature_dim, a.signal, a.noise, a.seed)?;
            fs::create_dir_all(&a.out)?;
            let mut g = BufWriter::new(File::create(a.out.join("graph.txt"))?);
            writeln!(g, "# nodes={}", graph.num_nodes())?;
            write_edge_list(&graph, &mut g)?;
            g.flush()?;
            save_matrix(&features, &a.out.join("features.bin"))?;
            let labels: Vec<Option<usize>> = labels.into_iter().map(Some).collect();
            let mut l = BufWriter::new(File::create(a.out.join("labels.txt"))?);
            write_labels(&labels, &mut l)?;
            l.flush()?;
            writeln!(
                out,
                "sbm nodes={} edges={} blocks={} dir={}",
                graph.num_nodes(),
                graph.num_edges(),
                sizes.len(),
                a.out.display()
            )?;
        }
        Command::Benchmark(a) => {
            let data = load_dataset(&a.graph, &a.features, Some(&a.labels))?;
            let config = resolve_config(&a.hyper, data.features.cols())?;
            let report = run_benchmark(
                &data,
                &config,
                a.probe.per_class,
                a.probe.splits,
                &probe_config(&a.probe),
            )?;
            if let Some(path) = &a.out {
                save_matrix(&report.embeddings, path)?;
            }
            out.write_all(report.render().as_bytes())?;
        }
    }
    Ok(())
}

/// Names accepted by `--aggregator` and `--loss`, in help order.
pub fn choices() -> (Vec<&'static str>, Vec<&'static str>) {
    (
        [
            Aggregator::None,
            Aggregator::Concat,
            Aggregator::Mean,
            Aggregator::Max,
        ]
        .iter()
        .map(|a| a.name())
        .collect(),
        [LossKind::Sce, LossKind::NegativeDistance]
            .iter()
            .map(|l| l.name())
            .collect(),
    )
}
