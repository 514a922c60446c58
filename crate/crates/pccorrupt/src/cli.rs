//! The `pccorrupt` command line: dataset conversion, suite generation,
//! single-kind application, batch augmentation, metric evaluation, suite
//! verification and inspection rendering.
//!
//! Exit codes: 0 success, 2 usage/input error, 3 generation failure,
//! 4 evaluation incompleteness (missing variants or integrity mismatches).
//!
//! Every flag can also be supplied through a JSON config file (`--config`);
//! precedence is flag > config > default, and the seed additionally falls
//! back to the `PCCORRUPT_SEED` environment variable (flag wins).

use crate::augment::{pointwolf_deform, wolfmix, DeformConfig, MixConfig, MixedLabel};
use crate::corrupt::{CorruptionKind, SeverityTable, ALL_KINDS};
use crate::dataset::{
    self, generate_suite, read_pcb, verify_suite, write_pcb, CompositeRequest, Dataset,
    DatasetError, LabelMap, SuiteOptions,
};
use crate::geom::PointCloud;
use crate::metrics::{
    build_report, dgcnn_baseline, evaluate_suite, load_predictions, markdown_report,
    MetricsError, OaTable,
};
use crate::render::{export_highlight_ply, highlight_mask, svg_projections};
use crate::rng::{derive_stream, RandomSource, SeedContext, DOMAIN_AUGMENT};
use clap::{Args, CommandFactory, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GENERATION: i32 = 3;
pub const EXIT_INCOMPLETE: i32 = 4;

pub const SEED_ENV_VAR: &str = "PCCORRUPT_SEED";

#[derive(Parser)]
#[command(
    name = "pccorrupt",
    version,
    about = "Deterministic point cloud corruption suites, augmentation and robustness metrics"
)]
struct Cli {
    /// JSON config file mirroring every flag (precedence: flag > config > default)
    #[arg(long, global = true, value_name = "JSON")]
    config: Option<PathBuf>,
    /// Worker threads (0 or unset: all available); output bytes never depend on it
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert PLY or CSV point files into a single PCB dataset
    Convert(ConvertArgs),
    /// Generate the clean + 35-variant suite with a hashed manifest
    GenSuite(GenSuiteArgs),
    /// Apply one corruption kind at one level to every sample
    Corrupt(CorruptArgs),
    /// Deform-and-mix augmentation over paired samples with label mixing
    Augment(AugmentArgs),
    /// Compute CE/mCE/RCE/RmCE from predictions or an accuracy table
    Eval(EvalArgs),
    /// Re-check the hashes and cardinalities of a generated suite
    Verify(VerifyArgs),
    /// Emit bundled baseline accuracy tables
    Baseline(BaselineArgs),
    /// Render one sample as SVG projections or a colored PLY
    Render(RenderArgs),
}

#[derive(Args)]
struct ConvertArgs {
    /// Input file; repeat for several files
    #[arg(long, value_name = "PATH", num_args = 1..)]
    input: Vec<PathBuf>,
    /// Read every *.<format> file in this directory (sorted by name)
    #[arg(long, value_name = "DIR", conflicts_with = "input")]
    input_dir: Option<PathBuf>,
    /// Input format: ply | csv
    #[arg(long, value_name = "FMT")]
    format: Option<String>,
    /// Output PCB path
    #[arg(long, value_name = "PCB")]
    output: Option<PathBuf>,
    /// CSV mapping file name -> class id
    #[arg(long, value_name = "CSV")]
    labels: Option<PathBuf>,
    /// Optional JSON array of class names to validate label ids against
    #[arg(long, value_name = "JSON")]
    label_map: Option<PathBuf>,
}

#[derive(Args)]
struct GenSuiteArgs {
    /// Clean dataset (PCB)
    #[arg(long, value_name = "PCB")]
    clean: Option<PathBuf>,
    /// Global seed, decimal or 0x-hex (also PCCORRUPT_SEED)
    #[arg(long, value_name = "U64")]
    seed: Option<String>,
    /// Suite output directory (created atomically)
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// JSON severity table overriding any subset of the defaults
    #[arg(long, value_name = "JSON")]
    severity: Option<PathBuf>,
    /// Also emit a composite variant: SIZExLEVEL, e.g. 3x2
    #[arg(long, value_name = "SxL")]
    composite: Option<String>,
}

#[derive(Args)]
struct CorruptArgs {
    /// Input dataset (PCB)
    #[arg(long, value_name = "PCB")]
    input: Option<PathBuf>,
    /// Corruption kind (scale, jitter, drop_global, drop_local, add_global, add_local, rotate)
    #[arg(long, value_name = "NAME")]
    kind: Option<String>,
    /// Severity level 1-5
    #[arg(long, value_name = "LEVEL")]
    level: Option<u8>,
    /// Global seed, decimal or 0x-hex (also PCCORRUPT_SEED)
    #[arg(long, value_name = "U64")]
    seed: Option<String>,
    /// Output PCB path
    #[arg(long, value_name = "PCB")]
    output: Option<PathBuf>,
    /// JSON severity table overriding any subset of the defaults
    #[arg(long, value_name = "JSON")]
    severity: Option<PathBuf>,
}

#[derive(Args)]
struct AugmentArgs {
    /// Input dataset (PCB, uniform point counts)
    #[arg(long, value_name = "PCB")]
    input: Option<PathBuf>,
    /// Global seed, decimal or 0x-hex (also PCCORRUPT_SEED)
    #[arg(long, value_name = "U64")]
    seed: Option<String>,
    /// Output PCB path
    #[arg(long, value_name = "PCB")]
    output: Option<PathBuf>,
    /// JSON sidecar with the mixed labels
    #[arg(long, value_name = "JSON")]
    labels_out: Option<PathBuf>,
    /// Pairing policy: shuffle (seeded) | sequential
    #[arg(long, value_name = "POLICY")]
    pairing: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    /// Suite directory produced by gen-suite
    #[arg(long, value_name = "DIR")]
    suite_dir: Option<PathBuf>,
    /// Directory of prediction CSVs (clean.csv + <kind>_<level>.csv)
    #[arg(long, value_name = "DIR")]
    pred_dir: Option<PathBuf>,
    /// Baseline accuracy table JSON (default: bundled DGCNN table)
    #[arg(long, value_name = "JSON")]
    baseline: Option<PathBuf>,
    /// Report output JSON
    #[arg(long, value_name = "JSON")]
    out: Option<PathBuf>,
    /// Optional markdown table output
    #[arg(long, value_name = "MD")]
    markdown: Option<PathBuf>,
    /// Shortcut: score a ready-made accuracy table instead of predictions
    #[arg(long, value_name = "JSON", conflicts_with_all = ["suite_dir", "pred_dir"])]
    oa_table: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite directory to verify
    #[arg(long, value_name = "DIR")]
    dir: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(subcommand)]
    which: BaselineCmd,
}

#[derive(Subcommand)]
enum BaselineCmd {
    /// Write the bundled DGCNN mean-form accuracy table
    EmitDgcnn {
        /// Output JSON path
        #[arg(long, value_name = "JSON")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RenderArgs {
    /// Input dataset (PCB)
    #[arg(long, value_name = "PCB")]
    input: Option<PathBuf>,
    /// Sample index
    #[arg(long, value_name = "I")]
    index: Option<usize>,
    /// Output mode: svg | ply
    #[arg(long, value_name = "MODE")]
    mode: Option<String>,
    /// Output path
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Reference PCB; points absent from its same-index sample are drawn red
    #[arg(long, value_name = "PCB")]
    highlight_from: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SeedValue {
    Number(u64),
    Text(String),
}

impl SeedValue {
    fn to_u64(&self) -> Result<u64, String> {
        match self {
            SeedValue::Number(n) => Ok(*n),
            SeedValue::Text(s) => parse_seed(s),
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct FileConfig {
    seed: Option<SeedValue>,
    threads: Option<usize>,
    convert: Option<ConvertConfig>,
    gen_suite: Option<GenSuiteConfig>,
    corrupt: Option<CorruptConfig>,
    augment: Option<AugmentConfig>,
    eval: Option<EvalConfig>,
    verify: Option<VerifyConfig>,
    render: Option<RenderConfig>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct ConvertConfig {
    input: Option<Vec<PathBuf>>,
    input_dir: Option<PathBuf>,
    format: Option<String>,
    output: Option<PathBuf>,
    labels: Option<PathBuf>,
    label_map: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct GenSuiteConfig {
    clean: Option<PathBuf>,
    seed: Option<SeedValue>,
    out_dir: Option<PathBuf>,
    severity: Option<PathBuf>,
    composite: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct CorruptConfig {
    input: Option<PathBuf>,
    kind: Option<String>,
    level: Option<u8>,
    seed: Option<SeedValue>,
    output: Option<PathBuf>,
    severity: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct AugmentConfig {
    input: Option<PathBuf>,
    seed: Option<SeedValue>,
    output: Option<PathBuf>,
    labels_out: Option<PathBuf>,
    pairing: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct EvalConfig {
    suite_dir: Option<PathBuf>,
    pred_dir: Option<PathBuf>,
    baseline: Option<PathBuf>,
    out: Option<PathBuf>,
    markdown: Option<PathBuf>,
    oa_table: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct VerifyConfig {
    dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RenderConfig {
    input: Option<PathBuf>,
    index: Option<usize>,
    mode: Option<String>,
    output: Option<PathBuf>,
    highlight_from: Option<PathBuf>,
}

/// A usage-level failure carrying its exit code.
#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }

    fn generation(message: impl Into<String>) -> Self {
        CliError { code: EXIT_GENERATION, message: message.into() }
    }

    fn incomplete(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INCOMPLETE, message: message.into() }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::usage(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

/// Parse a seed given as decimal or 0x-prefixed hex.
pub fn parse_seed(text: &str) -> Result<u64, String> {
    let text = text.trim();
    let parsed = if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else {
        text.parse()
    };
    parsed.map_err(|_| format!("invalid seed `{text}` (expected decimal or 0x-hex u64)"))
}

fn resolve_seed(flag: &Option<String>, config: &Option<SeedValue>, global: &Option<SeedValue>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return parse_seed(s).map_err(CliError::usage);
    }
    if let Some(v) = config.as_ref().or(global.as_ref()) {
        return v.to_u64().map_err(CliError::usage);
    }
    if let Ok(s) = std::env::var(SEED_ENV_VAR) {
        return parse_seed(&s).map_err(CliError::usage);
    }
    Err(CliError::usage(format!(
        "no seed given (use --seed, the config `seed` field, or {SEED_ENV_VAR})"
    )))
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::usage(format!("missing required value for {flag}")))
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let bytes = fs::read(path)
                .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_slice(&bytes)
                .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))
        }
    }
}

fn load_severity(path: &Option<PathBuf>) -> Result<SeverityTable, CliError> {
    let Some(path) = path else { return Ok(SeverityTable::default()) };
    let bytes = fs::read(path)
        .map_err(|e| CliError::usage(format!("cannot read severity table {}: {e}", path.display())))?;
    let table: SeverityTable = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::usage(format!("bad severity table {}: {e}", path.display())))?;
    table.validate().map_err(CliError::usage)?;
    Ok(table)
}

fn parse_composite(text: &str) -> Result<CompositeRequest, CliError> {
    let err = || CliError::usage(format!("bad composite spec `{text}` (expected SIZExLEVEL, e.g. 3x2)"));
    let (size, level) = text.split_once('x').ok_or_else(err)?;
    let size: usize = size.trim().parse().map_err(|_| err())?;
    let level: u8 = level.trim().parse().map_err(|_| err())?;
    if !(1..=7).contains(&size) || !(1..=5).contains(&level) {
        return Err(err());
    }
    Ok(CompositeRequest { size, level })
}

/// Run with the given argument vector and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { EXIT_OK } else { EXIT_USAGE };
            let _ = e.print();
            return code;
        }
    };
    let config = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.message);
            return e.code;
        }
    };
    let threads = cli.threads.or(config.threads).unwrap_or(0);
    let result = match &cli.command {
        Command::Convert(args) => cmd_convert(args, &config),
        Command::GenSuite(args) => cmd_gen_suite(args, &config, threads),
        Command::Corrupt(args) => cmd_corrupt(args, &config, threads),
        Command::Augment(args) => cmd_augment(args, &config, threads),
        Command::Eval(args) => cmd_eval(args, &config),
        Command::Verify(args) => cmd_verify(args, &config),
        Command::Baseline(args) => cmd_baseline(args),
        Command::Render(args) => cmd_render(args, &config),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn parse_label_csv(path: &Path) -> Result<BTreeMap<String, u16>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read labels {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line == "filename,label") {
            continue;
        }
        let (name, id) = line
            .split_once(',')
            .ok_or_else(|| CliError::usage(format!("{}:{}: not `filename,label`", path.display(), lineno + 1)))?;
        let id: u16 = id.trim().parse().map_err(|_| {
            CliError::usage(format!("{}:{}: bad label id `{id}`", path.display(), lineno + 1))
        })?;
        map.insert(name.trim().to_string(), id);
    }
    Ok(map)
}

fn import_csv_points(path: &Path) -> Result<PointCloud, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.chars().any(|c| c.is_alphabetic())) {
            continue; // header or blank
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 3 {
            return Err(CliError::usage(format!(
                "{}:{}: expected `x,y,z`",
                path.display(),
                lineno + 1
            )));
        }
        let parse = |v: &str| -> Result<f64, CliError> {
            v.parse().map_err(|_| {
                CliError::usage(format!("{}:{}: bad coordinate `{v}`", path.display(), lineno + 1))
            })
        };
        points.push(crate::geom::Point3::new(
            parse(cols[0])?,
            parse(cols[1])?,
            parse(cols[2])?,
        ));
    }
    PointCloud::new(points)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn cmd_convert(args: &ConvertArgs, config: &FileConfig) -> CliResult {
    let section = config.convert.as_ref();
    let format = args
        .format
        .clone()
        .or_else(|| section.and_then(|c| c.format.clone()))
        .unwrap_or_else(|| "ply".into());
    if format != "ply" && format != "csv" {
        return Err(CliError::usage(format!("unknown format `{format}` (expected ply or csv)")));
    }
    let output = require(
        args.output.clone().or_else(|| section.and_then(|c| c.output.clone())),
        "--output",
    )?;
    let labels_path = require(
        args.labels.clone().or_else(|| section.and_then(|c| c.labels.clone())),
        "--labels",
    )?;

    let mut inputs: Vec<PathBuf> = if !args.input.is_empty() {
        args.input.clone()
    } else if let Some(dir) = args.input_dir.clone().or_else(|| section.and_then(|c| c.input_dir.clone())) {
        let mut found = Vec::new();
        for entry in fs::read_dir(&dir)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", dir.display())))?
        {
            let path = entry.map_err(|e| CliError::usage(e.to_string()))?.path();
            if path.extension().and_then(|e| e.to_str()) == Some(format.as_str()) {
                found.push(path);
            }
        }
        found
    } else if let Some(list) = section.and_then(|c| c.input.clone()) {
        list
    } else {
        return Err(CliError::usage("no inputs: use --input or --input-dir"));
    };
    inputs.sort();
    if inputs.is_empty() {
        return Err(CliError::usage("no input files found"));
    }

    let label_table = parse_label_csv(&labels_path)?;
    let mut clouds = Vec::with_capacity(inputs.len());
    let mut labels = Vec::with_capacity(inputs.len());
    for path in &inputs {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let label = *label_table
            .get(&name)
            .ok_or_else(|| CliError::usage(format!("no label row for file `{name}`")))?;
        let cloud = match format.as_str() {
            "ply" => dataset::import_ply(path)
                .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?,
            _ => import_csv_points(path)?,
        };
        clouds.push(cloud);
        labels.push(label);
    }
    let dataset = Dataset::new(clouds, labels)?;
    if let Some(map_path) = args.label_map.clone().or_else(|| section.and_then(|c| c.label_map.clone())) {
        let map = LabelMap::load(&map_path)?;
        map.validate(&dataset)?;
    }
    write_pcb(&output, &dataset)?;
    println!("wrote {} ({} samples)", output.display(), dataset.len());
    Ok(())
}

fn cmd_gen_suite(args: &GenSuiteArgs, config: &FileConfig, threads: usize) -> CliResult {
    let section = config.gen_suite.as_ref();
    let clean = require(
        args.clean.clone().or_else(|| section.and_then(|c| c.clean.clone())),
        "--clean",
    )?;
    let out_dir = require(
        args.out_dir.clone().or_else(|| section.and_then(|c| c.out_dir.clone())),
        "--out-dir",
    )?;
    let seed = resolve_seed(
        &args.seed,
        &section.and_then(|c| c.seed.as_ref().map(clone_seed)),
        &config.seed.as_ref().map(clone_seed),
    )?;
    let severity = load_severity(
        &args.severity.clone().or_else(|| section.and_then(|c| c.severity.clone())),
    )?;
    let composite = match args
        .composite
        .clone()
        .or_else(|| section.and_then(|c| c.composite.clone()))
    {
        Some(text) => Some(parse_composite(&text)?),
        None => None,
    };

    let opts = SuiteOptions { seed, severity, composite, threads };
    let manifest = generate_suite(&clean, &out_dir, &opts)
        .map_err(|e| CliError::generation(e.to_string()))?;
    println!("{}", out_dir.join(dataset::MANIFEST_NAME).display());
    println!(
        "suite: {} variants, seed {}, severity {}",
        manifest.entries.len(),
        manifest.global_seed,
        &manifest.severity_hash[..12]
    );
    Ok(())
}

fn clone_seed(v: &SeedValue) -> SeedValue {
    match v {
        SeedValue::Number(n) => SeedValue::Number(*n),
        SeedValue::Text(s) => SeedValue::Text(s.clone()),
    }
}

fn cmd_corrupt(args: &CorruptArgs, config: &FileConfig, threads: usize) -> CliResult {
    let section = config.corrupt.as_ref();
    let input = require(
        args.input.clone().or_else(|| section.and_then(|c| c.input.clone())),
        "--input",
    )?;
    let output = require(
        args.output.clone().or_else(|| section.and_then(|c| c.output.clone())),
        "--output",
    )?;
    let kind_text = require(
        args.kind.clone().or_else(|| section.and_then(|c| c.kind.clone())),
        "--kind",
    )?;
    let kind: CorruptionKind = kind_text.parse().map_err(|_| {
        let valid: Vec<&str> = ALL_KINDS.iter().map(|k| k.name()).collect();
        CliError::usage(format!(
            "unknown kind `{kind_text}`; valid kinds: {}",
            valid.join(", ")
        ))
    })?;
    let level = require(args.level.or_else(|| section.and_then(|c| c.level)), "--level")?;
    if !(1..=5).contains(&level) {
        return Err(CliError::usage(format!("level {level} out of range 1..=5")));
    }
    let seed = resolve_seed(
        &args.seed,
        &section.and_then(|c| c.seed.as_ref().map(clone_seed)),
        &config.seed.as_ref().map(clone_seed),
    )?;
    let severity = load_severity(
        &args.severity.clone().or_else(|| section.and_then(|c| c.severity.clone())),
    )?;

    let clean = read_pcb(&input)?;
    let opts = SuiteOptions { seed, severity, composite: None, threads };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::usage(e.to_string()))?;
    let variant = pool
        .install(|| dataset::corrupt_variant(&clean, kind, level, &opts))
        .map_err(|e| CliError::usage(e.to_string()))?;
    write_pcb(&output, &variant)?;
    println!("wrote {} ({} samples)", output.display(), variant.len());
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct SidecarEntry {
    a_label: u16,
    b_label: u16,
    a_weight: f64,
}

fn sidecar_entry(label: &MixedLabel) -> SidecarEntry {
    let entries = label.entries();
    match entries {
        [(a, w)] => SidecarEntry { a_label: *a, b_label: *a, a_weight: *w },
        [(a, wa), (b, _)] => SidecarEntry { a_label: *a, b_label: *b, a_weight: *wa },
        _ => unreachable!("labels have one or two entries"),
    }
}

fn cmd_augment(args: &AugmentArgs, config: &FileConfig, threads: usize) -> CliResult {
    let section = config.augment.as_ref();
    let input = require(
        args.input.clone().or_else(|| section.and_then(|c| c.input.clone())),
        "--input",
    )?;
    let output = require(
        args.output.clone().or_else(|| section.and_then(|c| c.output.clone())),
        "--output",
    )?;
    let labels_out = require(
        args.labels_out.clone().or_else(|| section.and_then(|c| c.labels_out.clone())),
        "--labels-out",
    )?;
    let pairing = args
        .pairing
        .clone()
        .or_else(|| section.and_then(|c| c.pairing.clone()))
        .unwrap_or_else(|| "shuffle".into());
    if pairing != "shuffle" && pairing != "sequential" {
        return Err(CliError::usage(format!(
            "unknown pairing `{pairing}` (expected shuffle or sequential)"
        )));
    }
    let seed = resolve_seed(
        &args.seed,
        &section.and_then(|c| c.seed.as_ref().map(clone_seed)),
        &config.seed.as_ref().map(clone_seed),
    )?;

    let dataset = read_pcb(&input)?;
    let n = dataset.len();
    if n < 2 {
        return Err(CliError::usage("augmentation needs at least 2 samples"));
    }
    let count = dataset.clouds[0].len();
    if dataset.clouds.iter().any(|c| c.len() != count) {
        return Err(CliError::usage("augmentation needs uniform point counts (ragged input)"));
    }

    // order + consecutive pairs; each sample is the A of exactly one pair,
    // an odd leftover is deformed without mixing
    let order: Vec<usize> = if pairing == "shuffle" {
        let ctx = SeedContext::new(seed, DOMAIN_AUGMENT, 0, u32::MAX)
            .map_err(|e| CliError::usage(e.to_string()))?;
        derive_stream(&ctx).permutation(n)
    } else {
        (0..n).collect()
    };
    let mut buddy: Vec<Option<usize>> = vec![None; n];
    for pair in order.chunks_exact(2) {
        buddy[pair[0]] = Some(pair[1]);
        buddy[pair[1]] = Some(pair[0]);
    }

    let dcfg = DeformConfig::default();
    let mcfg = MixConfig { n_max: MixConfig::default().n_max.min(count), ..Default::default() };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::usage(e.to_string()))?;
    let results: Result<Vec<(PointCloud, MixedLabel)>, String> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let ctx = SeedContext::new(seed, DOMAIN_AUGMENT, 0, i as u32)
                    .map_err(|e| e.to_string())?;
                let mut rng = derive_stream(&ctx);
                match buddy[i] {
                    Some(b) => wolfmix(
                        &dataset.clouds[i],
                        dataset.labels[i],
                        &dataset.clouds[b],
                        dataset.labels[b],
                        &dcfg,
                        &mcfg,
                        &mut rng,
                    )
                    .map_err(|e| e.to_string()),
                    None => {
                        let mut sub = rng.split();
                        let cloud = pointwolf_deform(&dataset.clouds[i], &dcfg, &mut sub)
                            .map_err(|e| e.to_string())?;
                        Ok((cloud, MixedLabel::pure(dataset.labels[i])))
                    }
                }
            })
            .collect()
    });
    let results = results.map_err(CliError::usage)?;

    let clouds: Vec<PointCloud> = results.iter().map(|(c, _)| c.clone()).collect();
    // the PCB label is the dominant class; the sidecar keeps the full mix
    let labels: Vec<u16> = results
        .iter()
        .map(|(_, label)| {
            let entries = label.entries();
            entries
                .iter()
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .map(|(l, _)| *l)
                .unwrap_or(entries[0].0)
        })
        .collect();
    write_pcb(&output, &Dataset::new(clouds, labels)?)?;

    let sidecar: Vec<SidecarEntry> = results.iter().map(|(_, l)| sidecar_entry(l)).collect();
    let mut json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| CliError::usage(e.to_string()))?;
    json.push('\n');
    fs::write(&labels_out, json)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", labels_out.display())))?;
    println!("wrote {} and {}", output.display(), labels_out.display());
    Ok(())
}

fn cmd_eval(args: &EvalArgs, config: &FileConfig) -> CliResult {
    let section = config.eval.as_ref();
    let baseline = match args
        .baseline
        .clone()
        .or_else(|| section.and_then(|c| c.baseline.clone()))
    {
        Some(path) => OaTable::load(&path).map_err(|e| CliError::usage(e.to_string()))?,
        None => dgcnn_baseline(),
    };

    let oa_table = args.oa_table.clone().or_else(|| section.and_then(|c| c.oa_table.clone()));
    let report = if let Some(table_path) = oa_table {
        let method = OaTable::load(&table_path).map_err(|e| CliError::usage(e.to_string()))?;
        build_report(&method, &baseline).map_err(|e| CliError::usage(e.to_string()))?
    } else {
        let suite_dir = require(
            args.suite_dir.clone().or_else(|| section.and_then(|c| c.suite_dir.clone())),
            "--suite-dir",
        )?;
        let pred_dir = require(
            args.pred_dir.clone().or_else(|| section.and_then(|c| c.pred_dir.clone())),
            "--pred-dir",
        )?;
        let predictions = load_predictions(&pred_dir).map_err(|e| match e {
            MetricsError::MissingVariant(_) => CliError::incomplete(e.to_string()),
            other => CliError::usage(other.to_string()),
        })?;
        evaluate_suite(&suite_dir, &predictions, &baseline).map_err(|e| match e {
            MetricsError::MissingVariant(_) => CliError::incomplete(e.to_string()),
            other => CliError::usage(other.to_string()),
        })?
    };

    let out = require(args.out.clone().or_else(|| section.and_then(|c| c.out.clone())), "--out")?;
    let mut json = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::usage(e.to_string()))?;
    json.push('\n');
    fs::write(&out, json)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", out.display())))?;
    if let Some(md) = args.markdown.clone().or_else(|| section.and_then(|c| c.markdown.clone())) {
        fs::write(&md, markdown_report(&report))
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", md.display())))?;
    }
    println!("mCE {:.3} RmCE {:.3}", report.mce, report.rmce);
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, config: &FileConfig) -> CliResult {
    let dir = require(
        args.dir.clone().or_else(|| config.verify.as_ref().and_then(|c| c.dir.clone())),
        "--dir",
    )?;
    let report = verify_suite(&dir)?;
    if report.is_clean() {
        println!("verified: zero mismatches");
        Ok(())
    } else {
        for issue in &report.issues {
            println!("{issue}");
        }
        Err(CliError::incomplete(format!("{} mismatch(es)", report.issues.len())))
    }
}

fn cmd_baseline(args: &BaselineArgs) -> CliResult {
    match &args.which {
        BaselineCmd::EmitDgcnn { out } => {
            let out = require(out.clone(), "--out")?;
            let mut json = serde_json::to_string_pretty(&dgcnn_baseline())
                .map_err(|e| CliError::usage(e.to_string()))?;
            json.push('\n');
            fs::write(&out, json)
                .map_err(|e| CliError::usage(format!("cannot write {}: {e}", out.display())))?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn cmd_render(args: &RenderArgs, config: &FileConfig) -> CliResult {
    let section = config.render.as_ref();
    let input = require(
        args.input.clone().or_else(|| section.and_then(|c| c.input.clone())),
        "--input",
    )?;
    let index = require(args.index.or_else(|| section.and_then(|c| c.index)), "--index")?;
    let mode = args
        .mode
        .clone()
        .or_else(|| section.and_then(|c| c.mode.clone()))
        .unwrap_or_else(|| "svg".into());
    if mode != "svg" && mode != "ply" {
        return Err(CliError::usage(format!("unknown mode `{mode}` (expected svg or ply)")));
    }
    let output = require(
        args.output.clone().or_else(|| section.and_then(|c| c.output.clone())),
        "--output",
    )?;

    let dataset = read_pcb(&input)?;
    let cloud = dataset
        .clouds
        .get(index)
        .ok_or_else(|| {
            CliError::usage(format!("index {index} out of range for {} samples", dataset.len()))
        })?;

    let highlight = match args
        .highlight_from
        .clone()
        .or_else(|| section.and_then(|c| c.highlight_from.clone()))
    {
        Some(ref_path) => {
            let reference = read_pcb(&ref_path)?;
            let ref_cloud = reference.clouds.get(index).ok_or_else(|| {
                CliError::usage(format!(
                    "index {index} out of range for reference with {} samples",
                    reference.len()
                ))
            })?;
            highlight_mask(cloud, ref_cloud)
        }
        None => vec![false; cloud.len()],
    };

    match mode.as_str() {
        "svg" => {
            fs::write(&output, svg_projections(cloud, &highlight))
                .map_err(|e| CliError::usage(format!("cannot write {}: {e}", output.display())))?;
        }
        _ => export_highlight_ply(&output, cloud, &highlight)?,
    }
    println!("wrote {}", output.display());
    Ok(())
}

/// Long help text of the root command and every subcommand, used by the
/// golden help test and `--help`.
pub fn full_help_text() -> String {
    let mut root = Cli::command();
    let mut out = root.render_long_help().to_string();
    for sub in root.get_subcommands_mut() {
        out.push_str("\n---\n");
        out.push_str(&sub.render_long_help().to_string());
        for nested in sub.get_subcommands_mut() {
            out.push_str("\n---\n");
            out.push_str(&nested.render_long_help().to_string());
        }
    }
    out
}
