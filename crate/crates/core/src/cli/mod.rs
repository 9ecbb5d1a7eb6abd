//! The `acan` command line.
//!
//! Every option can also come from a `--config` file of `key = value`
//! lines using the long flag names; flags win over file entries, which win
//! over defaults. Each command writes `<out>.manifest` listing every
//! effective value, and that manifest is itself a valid `--config` file.
//!
//! Exit codes: 0 success, 1 runtime or check failure, 2 usage or config
//! error, 3 training divergence.

mod config;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::checks::{format_table, run_suite, SuiteOptions};
use crate::data::{content_hash, generate_synthetic, load_csv, save_csv, Dataset, Split, SynthConfig};
use crate::error::{Error, Result};
use crate::eval::{
    dataset_confusion, evaluate, export_embeddings, inter_camera_discrepancy,
    off_diagonal_uniformity, EvalOptions, MetricSplit, Protocol,
};
use crate::numeric::{Matrix, ModelFile, Network};
use crate::objectives::Scheme;
use crate::trainer::{Checkpoint, TrainConfig, TrainLogEntry, Trainer};

pub use config::{manifest_path, ConfigFile, List, Manifest, Resolver};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "acan", version, about = "Adversarial camera alignment experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic multi-camera dataset.
    Synth(SynthArgs),
    /// Train a network.
    Train(TrainArgs),
    /// Evaluate retrieval and alignment.
    Eval(EvalArgs),
    /// Run the gradient-check suite.
    Gradcheck(GradcheckArgs),
    /// Write the camera confusion matrix.
    Confusion(ConfusionArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV; metadata goes to the `.meta.json` sidecar.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub cameras: Option<usize>,
    /// Train identities per camera.
    #[arg(long)]
    pub identities: Option<usize>,
    /// Samples per identity and camera.
    #[arg(long)]
    pub per: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub shift: Option<f64>,
    /// Within-identity noise σ.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Evaluation identities seen by every camera.
    #[arg(long)]
    pub overlap: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// grl, oce, ace or none.
    #[arg(long)]
    pub scheme: Option<Scheme>,
    /// Output model JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON Lines training log; defaults to `<out>` with a `.log.jsonl` extension.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub margin: Option<f64>,
    /// Identities per PK batch.
    #[arg(long)]
    pub persons: Option<usize>,
    /// Samples per identity in a PK batch.
    #[arg(long)]
    pub images_per_person: Option<usize>,
    #[arg(long)]
    pub adversarial_batch_base: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Comma-separated 0-based epochs.
    #[arg(long)]
    pub lr_decay_epochs: Option<List<usize>>,
    #[arg(long)]
    pub lr_decay_factor: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated hidden layer widths.
    #[arg(long)]
    pub hidden: Option<List<usize>>,
    #[arg(long)]
    pub embedding_dim: Option<usize>,
    /// Write `<out>` with a `.ckpt.json` extension every N epochs (0: never).
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Continue from a checkpoint written with the same settings.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output report JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Samples for the discrepancy and confusion metrics: test or train.
    #[arg(long)]
    pub split: Option<MetricSplit>,
    #[arg(long)]
    pub max_rank: Option<usize>,
    /// cross-camera or all-gallery.
    #[arg(long)]
    pub protocol: Option<Protocol>,
    /// Also export every sample's embedding to this CSV.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Random instances per op.
    #[arg(long)]
    pub instances: Option<usize>,
    /// Optional JSON report; a manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConfusionArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub split: Option<MetricSplit>,
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Divergence { .. } => EXIT_DIVERGENCE,
        Error::InvalidConfig(_) | Error::InvalidArgument(_) | Error::Dimension { .. } => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Diagnostics go to standard error.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut stdout = std::io::stdout().lock();
    match run(cli.command, &mut stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs a parsed command, writing its report to `out`. Returns the exit code
/// for outcomes that are not errors, such as a failed gradient check.
pub fn run(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Synth(a) => cmd_synth(a, out),
        Command::Train(a) => cmd_train(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Gradcheck(a) => cmd_gradcheck(a, out),
        Command::Confusion(a) => cmd_confusion(a, out),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<Option<ConfigFile>> {
    path.as_deref()
        .map(ConfigFile::load)
        .transpose()
        .map_err(usage)
}

/// Config problems are usage errors whatever their underlying kind.
fn usage(e: Error) -> Error {
    match e {
        Error::InvalidConfig(_) => e,
        other => Error::InvalidConfig(other.to_string()),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn file_hash(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn cmd_synth(a: SynthArgs, out: &mut dyn Write) -> Result<i32> {
    let file = load_config(&a.config)?;
    let d = SynthConfig::default();
    let mut r = Resolver::new(file.as_ref());
    let path: PathBuf = r.require("out", a.out.map(PathValue)).map_err(usage)?.0;
    let cfg = SynthConfig {
        cameras: r.get("cameras", a.cameras, d.cameras).map_err(usage)?,
        identities_per_camera: r.get("identities", a.identities, d.identities_per_camera).map_err(usage)?,
        samples_per_identity: r.get("per", a.per, d.samples_per_identity).map_err(usage)?,
        input_dim: r.get("dim", a.dim, d.input_dim).map_err(usage)?,
        camera_shift_scale: r.get("shift", a.shift, d.camera_shift_scale).map_err(usage)?,
        identity_spread: r.get("noise", a.noise, d.identity_spread).map_err(usage)?,
        cross_camera_overlap: r.get("overlap", a.overlap, d.cross_camera_overlap).map_err(usage)?,
        seed: r.get("seed", a.seed, d.seed).map_err(usage)?,
    };
    let values = r.finish().map_err(usage)?;
    let ds = generate_synthetic(&cfg)?;
    save_csv(&ds, &path)?;
    let all: Vec<usize> = (0..ds.len()).collect();
    let d_inter = inter_camera_discrepancy(&ds.features(&all), &ds.cameras(&all), ds.num_cameras())?;
    let hash = content_hash(&ds);
    Manifest {
        command: "synth".into(),
        comments: vec![("dataset_sha256".into(), hash)],
        values,
    }
    .save(&manifest_path(&path))?;
    writeln!(
        out,
        "samples={} train={} query={} gallery={} cameras={} dim={} d_inter_camera={:.6}",
        ds.len(),
        ds.split_indices(Split::Train).len(),
        ds.split_indices(Split::Query).len(),
        ds.split_indices(Split::Gallery).len(),
        ds.num_cameras(),
        ds.input_dim(),
        d_inter
    )
    .map_err(Error::from)?;
    Ok(EXIT_OK)
}

/// Path wrapper so paths go through the same resolver as other values.
#[derive(Debug, Clone)]
struct PathValue(PathBuf);

impl std::fmt::Display for PathValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0.display())
    }
}

impl std::str::FromStr for PathValue {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(PathValue(PathBuf::from(s)))
    }
}

fn path_arg(r: &mut Resolver<'_>, key: &str, flag: Option<PathBuf>) -> Result<PathBuf> {
    r.require(key, flag.map(PathValue)).map(|d| d.0).map_err(usage)
}

fn load_model(path: &Path) -> Result<Network> {
    ModelFile::load(path)?.to_network().map_err(|e| e.with_path(path))
}

/// Keeps log lines of epochs before `epoch`, so a resumed run's log matches
/// an uninterrupted one.
fn truncate_log(path: &Path, epoch: usize) -> Result<()> {
    let f = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return fs::write(path, "").map_err(io_err(path));
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut kept = String::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let entry: TrainLogEntry = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: Some(path.to_path_buf()),
            line: Some(i as u64 + 1),
            message: e.to_string(),
        })?;
        if entry.epoch < epoch {
            kept += &line;
            kept.push('\n');
        }
    }
    fs::write(path, kept).map_err(io_err(path))
}

fn cmd_train(a: TrainArgs, out: &mut dyn Write) -> Result<i32> {
    let file = load_config(&a.config)?;
    let d = TrainConfig::default();
    let mut r = Resolver::new(file.as_ref());
    let data = path_arg(&mut r, "data", a.data)?;
    let scheme: Scheme = r.require("scheme", a.scheme).map_err(usage)?;
    let model_path = path_arg(&mut r, "out", a.out)?;
    let default_log = model_path.with_extension("log.jsonl");
    let log_path = r.get("log", a.log.map(PathValue), PathValue(default_log)).map_err(usage)?.0;
    let cfg = TrainConfig {
        scheme,
        lambda: r.get("lambda", a.lambda, d.lambda).map_err(usage)?,
        margin: r.get("margin", a.margin, d.margin).map_err(usage)?,
        persons: r.get("persons", a.persons, d.persons).map_err(usage)?,
        images_per_person: r.get("images-per-person", a.images_per_person, d.images_per_person).map_err(usage)?,
        adversarial_batch_base: r
            .get("adversarial-batch-base", a.adversarial_batch_base, d.adversarial_batch_base)
            .map_err(usage)?,
        epochs: r.get("epochs", a.epochs, d.epochs).map_err(usage)?,
        learning_rate: r.get("lr", a.lr, d.learning_rate).map_err(usage)?,
        lr_decay_epochs: r
            .get("lr-decay-epochs", a.lr_decay_epochs, List(d.lr_decay_epochs.clone()))
            .map_err(usage)?
            .0,
        lr_decay_factor: r.get("lr-decay-factor", a.lr_decay_factor, d.lr_decay_factor).map_err(usage)?,
        seed: r.get("seed", a.seed, d.seed).map_err(usage)?,
        hidden_widths: r.get("hidden", a.hidden, List(d.hidden_widths.clone())).map_err(usage)?.0,
        embedding_dim: r.get("embedding-dim", a.embedding_dim, d.embedding_dim).map_err(usage)?,
    };
    let checkpoint_every = r.get("checkpoint-every", a.checkpoint_every, 0usize).map_err(usage)?;
    let resume = r.optional("resume", a.resume.map(PathValue)).map_err(usage)?.map(|d| d.0);
    let values = r.finish().map_err(usage)?;
    cfg.validate()?;

    let ds = load_csv(&data)?;
    let mut trainer = match &resume {
        None => Trainer::new(&ds, cfg.clone())?,
        Some(p) => {
            let ckpt = Checkpoint::load(p)?;
            if ckpt.config != cfg {
                return Err(Error::InvalidConfig(format!(
                    "{} was written with different training settings",
                    p.display()
                )));
            }
            Trainer::resume(&ds, &ckpt)?
        }
    };
    Manifest {
        command: "train".into(),
        comments: vec![("dataset_sha256".into(), content_hash(&ds))],
        values,
    }
    .save(&manifest_path(&model_path))?;

    let log_file = if resume.is_some() {
        truncate_log(&log_path, trainer.epoch())?;
        fs::OpenOptions::new().append(true).open(&log_path)
    } else {
        File::create(&log_path)
    }
    .map_err(io_err(&log_path))?;
    let mut log = BufWriter::new(log_file);
    let ckpt_path = model_path.with_extension("ckpt.json");
    let result = (|| -> Result<()> {
        while !trainer.is_finished() {
            trainer.run_epoch(&mut |e| {
                let line = serde_json::to_string(e).expect("log entry serializes");
                writeln!(log, "{line}").map_err(io_err(&log_path))
            })?;
            if checkpoint_every > 0 && trainer.epoch() % checkpoint_every == 0 {
                log.flush().map_err(io_err(&log_path))?;
                trainer.checkpoint().save(&ckpt_path)?;
            }
        }
        Ok(())
    })();
    log.flush().map_err(io_err(&log_path))?;
    if let Err(Error::Divergence { epoch, iteration, quantity, snapshot }) = result {
        let snap_path = model_path.with_extension("diverged.json");
        ModelFile::new(&snapshot, cfg.seed, cfg.scheme).save(&snap_path)?;
        return Err(Error::Divergence { epoch, iteration, quantity, snapshot });
    }
    result?;
    let net = trainer.into_network();
    ModelFile::new(&net, cfg.seed, cfg.scheme).save(&model_path)?;
    writeln!(
        out,
        "trained scheme={} epochs={} model={} log={}",
        cfg.scheme,
        cfg.epochs,
        model_path.display(),
        log_path.display()
    )
    .map_err(Error::from)?;
    Ok(EXIT_OK)
}

fn check_model_fits(net: &Network, ds: &Dataset, model: &Path) -> Result<()> {
    if net.input_dim() != ds.input_dim() || net.num_cameras() != ds.num_cameras() {
        return Err(Error::InvalidConfig(format!(
            "model {} takes {} features for {} cameras but the dataset has {} features and {} cameras",
            model.display(),
            net.input_dim(),
            net.num_cameras(),
            ds.input_dim(),
            ds.num_cameras()
        )));
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs, out: &mut dyn Write) -> Result<i32> {
    let file = load_config(&a.config)?;
    let d = EvalOptions::default();
    let mut r = Resolver::new(file.as_ref());
    let data = path_arg(&mut r, "data", a.data)?;
    let model = path_arg(&mut r, "model", a.model)?;
    let report_path = path_arg(&mut r, "out", a.out)?;
    let opts = EvalOptions {
        metric_split: r.get("split", a.split, d.metric_split).map_err(usage)?,
        max_rank: r.get("max-rank", a.max_rank, d.max_rank).map_err(usage)?,
        protocol: r.get("protocol", a.protocol, d.protocol).map_err(usage)?,
    };
    let embeddings = r.optional("embeddings", a.embeddings.map(PathValue)).map_err(usage)?.map(|d| d.0);
    let values = r.finish().map_err(usage)?;
    if opts.max_rank == 0 {
        return Err(Error::InvalidConfig("--max-rank must be positive".into()));
    }

    let ds = load_csv(&data)?;
    let net = load_model(&model)?;
    check_model_fits(&net, &ds, &model)?;
    let report = evaluate(&net, &ds, &opts)?;
    fs::write(&report_path, report.to_json() + "\n").map_err(io_err(&report_path))?;
    if let Some(p) = &embeddings {
        export_embeddings(&net, &ds, p)?;
    }
    Manifest {
        command: "eval".into(),
        comments: vec![
            ("dataset_sha256".into(), content_hash(&ds)),
            ("model_sha256".into(), file_hash(&model)?),
        ],
        values,
    }
    .save(&manifest_path(&report_path))?;
    writeln!(out, "{}", report.summary_line()).map_err(Error::from)?;
    Ok(EXIT_OK)
}

fn cmd_gradcheck(a: GradcheckArgs, out: &mut dyn Write) -> Result<i32> {
    let file = load_config(&a.config)?;
    let d = SuiteOptions::default();
    let mut r = Resolver::new(file.as_ref());
    let opts = SuiteOptions {
        seed: r.get("seed", a.seed, d.seed).map_err(usage)?,
        tolerance: r.get("tol", a.tol, d.tolerance).map_err(usage)?,
        instances: r.get("instances", a.instances, d.instances).map_err(usage)?,
        step: d.step,
    };
    let report_path = r.optional("out", a.out.map(PathValue)).map_err(usage)?.map(|d| d.0);
    let values = r.finish().map_err(usage)?;
    if !(opts.tolerance > 0.0) || opts.instances == 0 {
        return Err(Error::InvalidConfig("--tol and --instances must be positive".into()));
    }
    let reports = run_suite(&opts)?;
    let failed = reports.iter().filter(|r| !r.passed).count();
    write!(out, "{}", format_table(&reports)).map_err(Error::from)?;
    writeln!(
        out,
        "{} of {} ops passed ({} instances each, seed {})",
        reports.len() - failed,
        reports.len(),
        opts.instances,
        opts.seed
    )
    .map_err(Error::from)?;
    if let Some(p) = &report_path {
        let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
        fs::write(p, json + "\n").map_err(io_err(p))?;
        Manifest { command: "gradcheck".into(), comments: vec![], values }.save(&manifest_path(p))?;
    }
    Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
}

fn write_confusion_csv(path: &Path, m: &Matrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let header: Vec<String> = (0..m.cols()).map(|k| format!("p{k}")).collect();
    writeln!(w, "camera,{}", header.join(",")).map_err(io_err(path))?;
    for (c, row) in m.row_iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{c},{}", cells.join(",")).map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn cmd_confusion(a: ConfusionArgs, out: &mut dyn Write) -> Result<i32> {
    let file = load_config(&a.config)?;
    let mut r = Resolver::new(file.as_ref());
    let data = path_arg(&mut r, "data", a.data)?;
    let model = path_arg(&mut r, "model", a.model)?;
    let csv_path = path_arg(&mut r, "out", a.out)?;
    let split = r.get("split", a.split, MetricSplit::Test).map_err(usage)?;
    let values = r.finish().map_err(usage)?;

    let ds = load_csv(&data)?;
    let net = load_model(&model)?;
    check_model_fits(&net, &ds, &model)?;
    let conf = dataset_confusion(&net, &ds, split)?;
    let score = off_diagonal_uniformity(&conf)?;
    write_confusion_csv(&csv_path, &conf)?;
    Manifest {
        command: "confusion".into(),
        comments: vec![
            ("dataset_sha256".into(), content_hash(&ds)),
            ("model_sha256".into(), file_hash(&model)?),
            ("off_diagonal_uniformity".into(), score.to_string()),
        ],
        values,
    }
    .save(&manifest_path(&csv_path))?;
    writeln!(out, "off_diagonal_uniformity={score:.6}").map_err(Error::from)?;
    Ok(EXIT_OK)
}
