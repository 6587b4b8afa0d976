//! `attrcons` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, refusing to
//! overwrite an existing output), 2 on data or validation errors. Every file
//! is written to a temporary sibling first and renamed into place.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::consolidate::{
    consolidate_dataset, correct_labels, read_consolidation_csv, write_changelog_csv,
    write_consolidation_csv, write_provenance_json, ConsolidationConfig, Strategy,
    SubjectAttributes,
};
use crate::error::Error;
use crate::inconsistency::{audit_labels_with, dataset_im_with, ImOptions, ImReport};
use crate::model::{
    load_annotations, load_predictions, write_annotations_csv, AttributeSchema, Dataset,
    ImageRecord, PredictionFormat, SubjectGroup,
};
use crate::quality::{
    score_dataset, score_group, write_quality_csv, GroupQuality, QualityScorer, QualityWeights,
};
use crate::synth::{run_experiment, ExperimentConfig};

/// Log filter variable, e.g. `ATTRCONS_LOG=debug`.
pub const LOG_ENV: &str = "ATTRCONS_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "attrcons",
    version,
    about = "Subject-level facial attribute consolidation and label auditing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inconsistency measure of classifier predictions per subject and attribute
    Im(ImArgs),
    /// Image quality features, scores and per-subject ranks
    Quality(QualityArgs),
    /// One attribute vector per subject by confidence or quality selection
    Consolidate(ConsolidateArgs),
    /// Inconsistency measure of annotated labels
    Audit(AuditArgs),
    /// Replace inconsistent stable-attribute labels with subject-level decisions
    Correct(CorrectArgs),
    /// Synthetic strategy / top-k comparison experiment
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Confidence,
    Quality,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Confidence => Strategy::Confidence,
            StrategyArg::Quality => Strategy::Quality,
        }
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Attribute schema JSON; defaults to the 40 CelebA attributes
    #[arg(long, value_name = "F")]
    pub schema: Option<PathBuf>,
    /// Output file; without it results go to stdout
    #[arg(long, value_name = "F")]
    pub out: Option<PathBuf>,
    /// Machine-readable output format
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Overwrite existing output files
    #[arg(long)]
    pub force: bool,
    /// Worker threads (default: available cores); output does not depend on it
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Seed for every random draw
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ImArgs {
    /// Prediction file (.csv or .jsonl)
    #[arg(long, value_name = "F")]
    pub predictions: PathBuf,
    /// Leave out subjects with fewer images
    #[arg(long, value_name = "M", default_value_t = 1)]
    pub min_group_size: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Annotation CSV with 0/1 labels
    #[arg(long, value_name = "F")]
    pub annotations: PathBuf,
    #[arg(long, value_name = "M", default_value_t = 1)]
    pub min_group_size: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct QualityArgs {
    /// Prediction file naming images, subjects, sources and landmarks
    #[arg(long, value_name = "F", required_unless_present = "images")]
    pub predictions: Option<PathBuf>,
    /// Image root; without --predictions, laid out as DIR/<subject>/<image>.pgm
    #[arg(long, value_name = "DIR")]
    pub images: Option<PathBuf>,
    /// Feature weights JSON; omitted features keep their defaults
    #[arg(long, value_name = "F")]
    pub weights: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SelectionArgs {
    /// Criterion used to rank a subject's images
    #[arg(long, value_enum, default_value = "confidence")]
    pub strategy: StrategyArg,
    /// Images majority-voted per attribute; clamped to the group size
    #[arg(long = "top-k", value_name = "K", default_value_t = 1)]
    pub top_k: usize,
    /// Feature weights JSON for --strategy quality
    #[arg(long, value_name = "F")]
    pub weights: Option<PathBuf>,
    /// Image root used to score quality when features are not cached
    #[arg(long, value_name = "DIR")]
    pub images: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConsolidateArgs {
    #[arg(long, value_name = "F")]
    pub predictions: PathBuf,
    #[command(flatten)]
    pub selection: SelectionArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CorrectArgs {
    /// Annotation CSV with 0/1 labels
    #[arg(long, value_name = "F")]
    pub annotations: PathBuf,
    /// Consolidation CSV produced by `consolidate`
    #[arg(
        long,
        value_name = "F",
        required_unless_present = "predictions",
        conflicts_with = "predictions"
    )]
    pub consolidated: Option<PathBuf>,
    /// Consolidate these predictions instead of reading --consolidated
    #[arg(long, value_name = "F")]
    pub predictions: Option<PathBuf>,
    #[command(flatten)]
    pub selection: SelectionArgs,
    /// Only emit the change-log
    #[arg(long)]
    pub dry_run: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Experiment config JSON; omitted fields take defaults
    #[arg(long, value_name = "F")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn"))
        .format_timestamp(None)
        .try_init();

    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 1,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };

    match execute(cli.command) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn common(cmd: &Command) -> &CommonArgs {
    match cmd {
        Command::Im(a) => &a.common,
        Command::Audit(a) => &a.common,
        Command::Quality(a) => &a.common,
        Command::Consolidate(a) => &a.common,
        Command::Correct(a) => &a.common,
        Command::Synth(a) => &a.common,
    }
}

fn execute(cmd: Command) -> CliResult<()> {
    let jobs = common(&cmd).jobs;
    if jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cmd {
        Command::Im(a) => cmd_im(a),
        Command::Audit(a) => cmd_audit(a),
        Command::Quality(a) => cmd_quality(a),
        Command::Consolidate(a) => cmd_consolidate(a),
        Command::Correct(a) => cmd_correct(a),
        Command::Synth(a) => cmd_synth(a),
    })
}

fn load_schema(common: &CommonArgs) -> CliResult<AttributeSchema> {
    Ok(match &common.schema {
        Some(path) => AttributeSchema::load(path)?,
        None => AttributeSchema::celeba(),
    })
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Data(Error::io(path, e)))
}

fn read_predictions(path: &Path, schema: &AttributeSchema) -> CliResult<Dataset> {
    log::info!("reading predictions from {}", path.display());
    Ok(load_predictions(
        open(path)?,
        schema,
        PredictionFormat::from_path(path),
    )?)
}

fn read_annotations(path: &Path, schema: &AttributeSchema) -> CliResult<Dataset> {
    log::info!("reading annotations from {}", path.display());
    Ok(load_annotations(open(path)?, schema)?)
}

fn load_weights(path: Option<&PathBuf>) -> CliResult<QualityWeights> {
    Ok(match path {
        Some(p) => QualityWeights::load(p)?,
        None => QualityWeights::default(),
    })
}

/// `report.csv` + `provenance` → `report.provenance.json`.
fn sidecar(out: &Path, tag: &str, ext: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{tag}.{ext}"))
}

fn check_writable(paths: &[&Path], force: bool) -> CliResult<()> {
    for path in paths {
        if path.exists() && !force {
            return Err(CliError::Usage(format!(
                "{} already exists; pass --force to overwrite",
                path.display()
            )));
        }
    }
    Ok(())
}

/// Writes through a temporary file in the target directory, then renames it.
fn write_atomic(
    path: &Path,
    body: impl FnOnce(&mut dyn Write) -> crate::Result<()>,
) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io_err = |e: io::Error| CliError::Data(Error::io(path, e));
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        body(&mut w)?;
        w.flush().map_err(io_err)?;
    }
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn write_output(
    path: Option<&Path>,
    body: impl FnOnce(&mut dyn Write) -> crate::Result<()>,
) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, body),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush().map_err(|e| CliError::Data(e.into()))?;
            Ok(())
        }
    }
}

/// Report timestamp: `SOURCE_DATE_EPOCH` when set (reproducible outputs),
/// otherwise the current time.
fn report_timestamp() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse::<i64>().ok());
    let time = match secs.and_then(|s| chrono::DateTime::from_timestamp(s, 0)) {
        Some(t) => t,
        None => chrono::Utc::now(),
    };
    time.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn dataset_id(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn emit_im(report: &ImReport, common: &CommonArgs, input: &Path) -> CliResult<()> {
    if let Some(out) = &common.out {
        check_writable(&[out], common.force)?;
    }
    let format = match (common.format, &common.out) {
        (Some(f), _) => Some(f),
        (None, Some(_)) => Some(OutputFormat::Csv),
        (None, None) => None,
    };
    let id = dataset_id(input);
    write_output(common.out.as_deref(), |w| match format {
        Some(OutputFormat::Csv) => report.write_csv(w),
        Some(OutputFormat::Json) => report.write_json(w, &id, &report_timestamp()),
        None => report.write_text(w),
    })
}

fn cmd_im(args: ImArgs) -> CliResult<()> {
    let schema = load_schema(&args.common)?;
    let dataset = read_predictions(&args.predictions, &schema)?;
    let report = dataset_im_with(
        &dataset,
        ImOptions {
            min_group_size: args.min_group_size,
        },
    )?;
    emit_im(&report, &args.common, &args.predictions)
}

fn cmd_audit(args: AuditArgs) -> CliResult<()> {
    let schema = load_schema(&args.common)?;
    let annotations = read_annotations(&args.annotations, &schema)?;
    let report = audit_labels_with(
        &annotations,
        ImOptions {
            min_group_size: args.min_group_size,
        },
    )?;
    emit_im(&report, &args.common, &args.annotations)
}

fn is_image_file(path: &Path) -> bool {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("pgm") => true,
        Some("png" | "jpg" | "jpeg") => cfg!(feature = "image-decode"),
        _ => false,
    }
}

fn sorted_entries(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Data(Error::io(dir, e)))?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<io::Result<Vec<_>>>()
        .map_err(|e| CliError::Data(Error::io(dir, e)))?;
    entries.sort();
    Ok(entries)
}

/// Groups from a directory tree: each subdirectory is a subject; images placed
/// directly in the root form one group named after the root.
fn groups_from_directory(root: &Path) -> CliResult<Vec<SubjectGroup>> {
    let mut groups = Vec::new();
    let mut loose = Vec::new();
    let root_name = dataset_id(root);
    let record = |path: &Path, subject: &str| {
        let image_id = path
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        let mut r = ImageRecord::new(image_id, subject, Vec::new());
        r.source = Some(path.to_string_lossy().into_owned());
        r
    };
    for path in sorted_entries(root)? {
        if path.is_dir() {
            let subject = dataset_id(&path);
            let images: Vec<ImageRecord> = sorted_entries(&path)?
                .into_iter()
                .filter(|p| p.is_file() && is_image_file(p))
                .map(|p| record(&p, &subject))
                .collect();
            if !images.is_empty() {
                groups.push(SubjectGroup::new(subject, images)?);
            }
        } else if is_image_file(&path) {
            loose.push(record(&path, &root_name));
        }
    }
    if !loose.is_empty() {
        groups.push(SubjectGroup::new(root_name, loose)?);
    }
    if groups.is_empty() {
        return Err(CliError::Data(Error::EmptyDataset));
    }
    Ok(groups)
}

fn cmd_quality(args: QualityArgs) -> CliResult<()> {
    let mut scorer = QualityScorer::new(load_weights(args.weights.as_ref())?);
    if let Some(dir) = &args.images {
        scorer = scorer.with_image_root(dir);
    }
    if let Some(out) = &args.common.out {
        check_writable(&[out], args.common.force)?;
    }
    let scored: Vec<GroupQuality> = match &args.predictions {
        Some(path) => {
            let schema = load_schema(&args.common)?;
            score_dataset(&read_predictions(path, &schema)?, &scorer)?
        }
        None => {
            use rayon::prelude::*;
            let root = args.images.as_deref().expect("clap requires --images here");
            let groups = groups_from_directory(root)?;
            groups
                .par_iter()
                .map(|g| score_group(g, &scorer))
                .collect::<crate::Result<Vec<_>>>()?
        }
    };
    write_output(args.common.out.as_deref(), |w| match args.common.format {
        Some(OutputFormat::Json) => {
            serde_json::to_writer_pretty(&mut *w, &scored)?;
            w.write_all(b"\n")?;
            Ok(())
        }
        _ => write_quality_csv(&scored, w),
    })
}

fn consolidate_with(
    dataset: &Dataset,
    selection: &SelectionArgs,
) -> CliResult<(ConsolidationConfig, Vec<SubjectAttributes>)> {
    let weights = load_weights(selection.weights.as_ref())?;
    let config = ConsolidationConfig::new(selection.strategy.into(), selection.top_k)
        .map_err(|e| CliError::Usage(e.to_string()))?
        .with_weights(weights);
    let scores: Option<Vec<Vec<f64>>> = match (config.strategy, &selection.images) {
        (Strategy::Quality, Some(dir)) => {
            let scorer = QualityScorer::new(weights).with_image_root(dir);
            let scored = score_dataset(dataset, &scorer)?;
            Some(
                scored
                    .iter()
                    .zip(dataset.groups())
                    .map(|(q, g)| q.scores_by_index(g.len()))
                    .collect(),
            )
        }
        _ => None,
    };
    let subjects = consolidate_dataset(dataset, &config, scores.as_deref())?;
    Ok((config, subjects))
}

fn cmd_consolidate(args: ConsolidateArgs) -> CliResult<()> {
    let schema = load_schema(&args.common)?;
    let common = &args.common;
    let provenance_path = match (&common.out, common.format) {
        (Some(out), None | Some(OutputFormat::Csv)) => Some(sidecar(out, "provenance", "json")),
        _ => None,
    };
    let mut targets: Vec<&Path> = common.out.iter().map(PathBuf::as_path).collect();
    targets.extend(provenance_path.as_deref());
    check_writable(&targets, common.force)?;

    let dataset = read_predictions(&args.predictions, &schema)?;
    let (config, subjects) = consolidate_with(&dataset, &args.selection)?;
    match common.format {
        Some(OutputFormat::Json) => write_output(common.out.as_deref(), |w| {
            write_provenance_json(&schema, &config, &subjects, w)
        }),
        _ => {
            write_output(common.out.as_deref(), |w| {
                write_consolidation_csv(&schema, &subjects, w)
            })?;
            if let Some(p) = &provenance_path {
                write_atomic(p, |w| write_provenance_json(&schema, &config, &subjects, w))?;
            }
            Ok(())
        }
    }
}

fn cmd_correct(args: CorrectArgs) -> CliResult<()> {
    let schema = load_schema(&args.common)?;
    let common = &args.common;
    let changelog_path = match (&common.out, args.dry_run) {
        (Some(out), false) => Some(sidecar(out, "changes", "csv")),
        _ => None,
    };
    let mut targets: Vec<&Path> = common.out.iter().map(PathBuf::as_path).collect();
    targets.extend(changelog_path.as_deref());
    check_writable(&targets, common.force)?;

    let annotations = read_annotations(&args.annotations, &schema)?;
    let consolidated = match (&args.consolidated, &args.predictions) {
        (Some(path), _) => read_consolidation_csv(open(path)?, &schema)?,
        (None, Some(path)) => {
            consolidate_with(&read_predictions(path, &schema)?, &args.selection)?.1
        }
        (None, None) => unreachable!("clap requires one of --consolidated / --predictions"),
    };
    let correction = correct_labels(&annotations, &consolidated, &schema)?;
    log::info!("{} label(s) changed", correction.changes.len());

    let write_changes = |w: &mut dyn Write| match common.format {
        Some(OutputFormat::Json) => {
            serde_json::to_writer_pretty(&mut *w, &correction.changes)?;
            w.write_all(b"\n")?;
            Ok(())
        }
        _ => write_changelog_csv(&correction.changes, w),
    };
    if args.dry_run {
        return write_output(common.out.as_deref(), write_changes);
    }
    write_output(common.out.as_deref(), |w| {
        write_annotations_csv(&correction.dataset, w)
    })?;
    match &changelog_path {
        Some(p) => write_atomic(p, write_changes),
        None => {
            eprintln!("{} label(s) changed", correction.changes.len());
            Ok(())
        }
    }
}

fn cmd_synth(args: SynthArgs) -> CliResult<()> {
    let schema = load_schema(&args.common)?;
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.common.seed {
        config.seeds = vec![seed];
    }
    if let Some(out) = &args.common.out {
        check_writable(&[out], args.common.force)?;
    }
    let report = run_experiment(&schema, &config)?;
    let format = match (args.common.format, &args.common.out) {
        (Some(f), _) => Some(f),
        (None, Some(_)) => Some(OutputFormat::Csv),
        (None, None) => None,
    };
    write_output(args.common.out.as_deref(), |w| match format {
        Some(OutputFormat::Csv) => report.write_csv(w),
        Some(OutputFormat::Json) => report.write_json(w),
        None => report.write_text(w),
    })
}
