//! `tleak` subcommands.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use tleak_core::clustering::{clustering_accuracy, KMeansConfig};
use tleak_core::kernels::{BandwidthPolicy, KernelFamily, KernelSpec};
use tleak_core::leakage::{pseudo_leakage_from, self_leakage, transfer_leakage, BootstrapConfig};
use tleak_core::splits::{build_splits, validate_manifest, ClassHierarchy, Selection, SplitConfig};
use tleak_core::synth::{gen_mixture, MixtureSpec};
use tleak_core::LabelVector;

use crate::error::{CliError, Result};
use crate::format::{encode_label_csv, load_embeddings, load_labels, save_embeddings, Loaded};
use crate::parallel;
use crate::report::ReportDocument;
use crate::write_atomic;

#[derive(Parser, Debug)]
#[command(name = "tleak", version, about = "Transfer leakage between labeled representations and novel classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Transfer (or self) leakage of a labeled embedding file.
    Compute(ComputeArgs),
    /// Leakage with k-means pseudo labels.
    Pseudo(PseudoArgs),
    /// Point estimate plus bootstrap replicates.
    Bootstrap(BootstrapArgs),
    /// Clustering accuracy between two label files.
    Acc(AccArgs),
    /// k-means clustering of an embedding file.
    Kmeans(KMeansCmdArgs),
    /// Labeled/unlabeled split manifest from a class hierarchy.
    Splits(SplitArgs),
    /// Synthetic Gaussian mixture.
    Synth(SynthArgs),
    /// Leakage and k-means accuracy across mixture separations (CSV).
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Family {
    Gaussian,
    Laplacian,
    Linear,
}

#[derive(Args, Debug, Clone, Serialize)]
struct KernelArgs {
    #[arg(long, value_enum, default_value_t = Family::Gaussian)]
    kernel: Family,
    /// `median` or a positive fixed bandwidth.
    #[arg(long, default_value = "median")]
    bandwidth: String,
    /// Seed for the median-heuristic row subsample.
    #[arg(long, default_value_t = 0)]
    bandwidth_seed: u64,
}

impl KernelArgs {
    fn spec(&self) -> Result<KernelSpec> {
        let family = match self.kernel {
            Family::Gaussian => KernelFamily::Gaussian,
            Family::Laplacian => KernelFamily::Laplacian,
            Family::Linear => KernelFamily::Linear,
        };
        let bandwidth = if self.bandwidth == "median" {
            BandwidthPolicy::Median { seed: self.bandwidth_seed }
        } else {
            let value: f64 = self.bandwidth.parse().map_err(|_| {
                CliError::Usage(format!("--bandwidth must be `median` or a number, got {:?}", self.bandwidth))
            })?;
            BandwidthPolicy::Fixed { value }
        };
        let spec = KernelSpec::new(family, bandwidth);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct KMeansArgs {
    #[arg(long, default_value_t = 10)]
    n_init: usize,
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
}

impl KMeansArgs {
    fn config(&self, k: usize, seed: u64) -> KMeansConfig {
        KMeansConfig { k, max_iters: self.max_iters, tol: self.tol, seed, n_init: self.n_init }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct OutArgs {
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave the creation time out of the report.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Transfer,
    #[value(name = "self")]
    #[serde(rename = "self")]
    SelfLeak,
}

#[derive(Args, Debug, Serialize)]
struct ComputeArgs {
    #[arg(long)]
    data: PathBuf,
    /// Label file; defaults to labels stored with the data.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Transfer)]
    mode: Mode,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    output: OutArgs,
}

#[derive(Args, Debug, Serialize)]
struct PseudoArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    k: usize,
    /// Optional ground truth; adds clustering accuracy to the report.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// k-means seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    kmeans: KMeansArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    output: OutArgs,
}

#[derive(Args, Debug, Serialize)]
struct BootstrapArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Resample within each class.
    #[arg(long)]
    stratified: bool,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    output: OutArgs,
}

#[derive(Args, Debug, Serialize)]
struct AccArgs {
    #[arg(long = "true")]
    truth: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Also write the full result as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct KMeansCmdArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    kmeans: KMeansArgs,
    /// JSON result (centroids, assignment, inertia); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Assignment as a one-column label CSV.
    #[arg(long)]
    labels_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SelectionArg {
    Positional,
    Seeded,
}

#[derive(Args, Debug, Serialize)]
struct SplitArgs {
    #[arg(long)]
    hierarchy: PathBuf,
    /// Superclasses per half.
    #[arg(long)]
    half: usize,
    /// Labeled subclasses per superclass.
    #[arg(long)]
    labeled: usize,
    /// Unlabeled subclasses per superclass.
    #[arg(long)]
    unlabeled: usize,
    /// Emit the mixed labeled set L1.5.
    #[arg(long)]
    mixed: bool,
    #[arg(long, value_enum, default_value_t = SelectionArg::Positional)]
    selection: SelectionArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SynthArgs {
    #[arg(long)]
    classes: usize,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    sep: f64,
    #[arg(long)]
    per_class: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `.csv` writes CSV, anything else TLK binary.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2,4")]
    seps: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    classes: usize,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 400)]
    per_class: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Mixture seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    kmeans_seed: u64,
    #[command(flatten)]
    kmeans: KMeansArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = parallel::pool_from_env().and_then(|pool| pool.install(|| dispatch(cli.command)));
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Compute(a) => compute(a),
        Command::Pseudo(a) => pseudo(a),
        Command::Bootstrap(a) => bootstrap(a),
        Command::Acc(a) => acc(a),
        Command::Kmeans(a) => kmeans(a),
        Command::Splits(a) => splits(a),
        Command::Synth(a) => synth(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn config<T: Serialize>(command: &str, args: &T) -> serde_json::Value {
    json!({ "command": command, "args": args })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn labeled(data: &Path, labels: Option<&Path>) -> Result<(Loaded, LabelVector)> {
    let loaded = load_embeddings(data)?;
    let y = match labels {
        Some(p) => load_labels(p)?,
        None => loaded.labels.clone().ok_or_else(|| {
            CliError::Usage(format!("{} has no labels; pass --labels", data.display()))
        })?,
    };
    Ok((loaded, y))
}

fn write_report(doc: ReportDocument, output: &OutArgs) -> Result<()> {
    let value = doc.report.value;
    emit(output.out.as_deref(), &doc.to_json())?;
    if output.out.is_some() {
        println!("{value}");
    }
    Ok(())
}

fn compute(a: ComputeArgs) -> Result<()> {
    let (loaded, y) = labeled(&a.data, a.labels.as_deref())?;
    let spec = a.kernel.spec()?;
    let report = match a.mode {
        Mode::Transfer => transfer_leakage(&loaded.data, &y, &spec)?,
        Mode::SelfLeak => self_leakage(&loaded.data, &y, &spec)?,
    };
    write_report(ReportDocument::new(report, config("compute", &a), !a.output.no_timestamp), &a.output)
}

fn pseudo(a: PseudoArgs) -> Result<()> {
    let loaded = load_embeddings(&a.data)?;
    let truth = match &a.labels {
        Some(p) => Some(load_labels(p)?),
        None => loaded.labels.clone(),
    };
    let spec = a.kernel.spec()?;
    let cfg = a.kmeans.config(a.k, a.seed);
    if a.k == 0 || a.k > loaded.data.rows() {
        return Err(tleak_core::Error::Input(format!("k = {} must lie in [1, {}]", a.k, loaded.data.rows())).into());
    }
    let clusters = parallel::kmeans(&loaded.data, &cfg)?;
    let mut report = pseudo_leakage_from(&loaded.data, &clusters, &cfg, &spec)?;
    if let Some(truth) = truth {
        report.accuracy = Some(clustering_accuracy(&truth, &clusters.assignment)?);
    }
    write_report(ReportDocument::new(report, config("pseudo", &a), !a.output.no_timestamp), &a.output)
}

fn bootstrap(a: BootstrapArgs) -> Result<()> {
    let (loaded, y) = labeled(&a.data, a.labels.as_deref())?;
    let spec = a.kernel.spec()?;
    let cfg = BootstrapConfig { replicates: a.replicates, seed: a.seed, stratified: a.stratified };
    let report = parallel::bootstrap_leakage(&loaded.data, &y, &spec, &cfg)?;
    write_report(ReportDocument::new(report, config("bootstrap", &a), !a.output.no_timestamp), &a.output)
}

fn acc(a: AccArgs) -> Result<()> {
    let truth = load_labels(&a.truth)?;
    let pred = load_labels(&a.pred)?;
    let result = clustering_accuracy(&truth, &pred)?;
    println!("{}", result.accuracy);
    if let Some(out) = &a.out {
        write_atomic(out, pretty(&json!({ "accuracy": result, "config": config("acc", &a) })).as_bytes())?;
    }
    Ok(())
}

fn kmeans(a: KMeansCmdArgs) -> Result<()> {
    let loaded = load_embeddings(&a.data)?;
    let cfg = a.kmeans.config(a.k, a.seed);
    let result = parallel::kmeans(&loaded.data, &cfg)?;
    if let Some(path) = &a.labels_out {
        write_atomic(path, encode_label_csv(&result.assignment).as_bytes())?;
    }
    emit(a.out.as_deref(), &pretty(&json!({ "kmeans": result, "config": config("kmeans", &a) })))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.into(), source })
}

fn splits(a: SplitArgs) -> Result<()> {
    let h: ClassHierarchy = read_json(&a.hierarchy)?;
    let cfg = SplitConfig {
        half_size: a.half,
        labeled_per_super: a.labeled,
        unlabeled_per_super: a.unlabeled,
        make_mixed: a.mixed,
        seed: a.seed,
        selection: match a.selection {
            SelectionArg::Positional => Selection::Positional,
            SelectionArg::Seeded => Selection::Seeded,
        },
    };
    let manifest = build_splits(&h, &cfg)?;
    let check = validate_manifest(&manifest, &h);
    if !check.passed {
        return Err(tleak_core::Error::Degenerate(format!(
            "generated manifest failed validation: {}",
            check.violations.join("; ")
        ))
        .into());
    }
    emit(a.out.as_deref(), &pretty(&manifest))
}

fn synth(a: SynthArgs) -> Result<()> {
    let spec = MixtureSpec {
        num_classes: a.classes,
        dim: a.dim,
        separation: a.sep,
        per_class: a.per_class,
        sigma: a.sigma,
        seed: a.seed,
    };
    let (data, labels) = gen_mixture(&spec)?;
    save_embeddings(&a.out, &data, Some(&labels))
}

fn sweep(a: SweepArgs) -> Result<()> {
    let spec = a.kernel.spec()?;
    let cfg = a.kmeans.config(a.classes, a.kmeans_seed);
    let mut out = String::from("separation,leakage,kmeans_accuracy\n");
    for &sep in &a.seps {
        let mix = MixtureSpec {
            num_classes: a.classes,
            dim: a.dim,
            separation: sep,
            per_class: a.per_class,
            sigma: a.sigma,
            seed: a.seed,
        };
        let (data, y) = gen_mixture(&mix)?;
        let leak = transfer_leakage(&data, &y, &spec)?.value;
        let clusters = parallel::kmeans(&data, &cfg)?;
        let accuracy = clustering_accuracy(&y, &clusters.assignment)?.accuracy;
        out.push_str(&format!("{sep},{leak},{accuracy}\n"));
    }
    emit(a.out.as_deref(), &out)
}
