//! File formats and suite orchestration: the PCB container, an ascii PLY
//! subset, full-suite generation with a hashed manifest, and suite
//! verification.
//!
//! PCB layout (all integers little-endian):
//!
//! ```text
//! magic   b"PCB1"
//! flags   u32            bit 0: ragged counts present
//! n       u32            number of samples
//! pps     u32            points per sample (0 if ragged)
//! counts  u32[n]         only if ragged
//! labels  u16[n]
//! coords  f32[3]*total   sample-major, point-major, axis-minor
//! ```
//!
//! Coordinates are computed in `f64` throughout the library and rounded to
//! `f32` exactly at serialization, so a suite is a deterministic function of
//! (clean bytes, seed, severity table).

use crate::corrupt::{
    apply, apply_composite, expected_count, sample_composite, CorruptError, CorruptionKind,
    CorruptionSpec, SeverityTable, ALL_KINDS,
};
use crate::geom::{GeomError, Point3, PointCloud};
use crate::rng::{derive_stream, SeedContext, DOMAIN_COMPOSITE};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const PCB_MAGIC: &[u8; 4] = b"PCB1";
const FLAG_RAGGED: u32 = 1;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("bad magic bytes (expected \"PCB1\")")]
    BadMagic,
    #[error("file truncated")]
    TruncatedFile,
    #[error("trailing bytes after payload")]
    TrailingBytes,
    #[error("sample or point count exceeds the format limits")]
    CountOverflow,
    #[error("{clouds} clouds but {labels} labels")]
    LabelArityMismatch { clouds: usize, labels: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: u16, classes: usize },
    #[error("unsupported PLY: {0}")]
    UnsupportedPly(String),
    #[error("no manifest.json in {0}")]
    ManifestMissing(PathBuf),
    #[error("bad manifest: {0}")]
    BadManifest(String),
    #[error("output directory {0} already exists and is not empty")]
    OutputExists(PathBuf),
    #[error("invalid severity table: {0}")]
    InvalidSeverity(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Corrupt(#[from] CorruptError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An in-memory labeled dataset: one class id per cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub clouds: Vec<PointCloud>,
    pub labels: Vec<u16>,
}

impl Dataset {
    pub fn new(clouds: Vec<PointCloud>, labels: Vec<u16>) -> Result<Self, DatasetError> {
        if clouds.len() != labels.len() {
            return Err(DatasetError::LabelArityMismatch {
                clouds: clouds.len(),
                labels: labels.len(),
            });
        }
        Ok(Dataset { clouds, labels })
    }

    pub fn len(&self) -> usize {
        self.clouds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clouds.is_empty()
    }
}

/// Ordered class names; the index is the label id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelMap {
    pub names: Vec<String>,
}

impl LabelMap {
    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let map: LabelMap = serde_json::from_slice(&fs::read(path)?)?;
        let mut seen = std::collections::HashSet::new();
        for name in &map.names {
            if !seen.insert(name) {
                return Err(DatasetError::BadManifest(format!("duplicate class name `{name}`")));
            }
        }
        Ok(map)
    }

    pub fn save(&self, path: &Path) -> Result<(), DatasetError> {
        fs::write(path, serde_json::to_string_pretty(&self)?)?;
        Ok(())
    }

    pub fn validate(&self, dataset: &Dataset) -> Result<(), DatasetError> {
        let classes = self.names.len();
        for &label in &dataset.labels {
            if label as usize >= classes {
                return Err(DatasetError::LabelOutOfRange { label, classes });
            }
        }
        Ok(())
    }
}

/// Serialize a dataset to PCB bytes. Deterministic: equal datasets encode to
/// equal bytes.
pub fn encode_pcb(dataset: &Dataset) -> Result<Vec<u8>, DatasetError> {
    let n = dataset.len();
    if n > u32::MAX as usize {
        return Err(DatasetError::CountOverflow);
    }
    let counts: Vec<usize> = dataset.clouds.iter().map(|c| c.len()).collect();
    if counts.iter().any(|&c| c > u32::MAX as usize) {
        return Err(DatasetError::CountOverflow);
    }
    let ragged = counts.windows(2).any(|w| w[0] != w[1]);
    let total: usize = counts.iter().sum();

    let mut out = Vec::with_capacity(16 + n * 6 + total * 12);
    out.extend_from_slice(PCB_MAGIC);
    out.extend_from_slice(&(if ragged { FLAG_RAGGED } else { 0 }).to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    let pps = if ragged || n == 0 { 0 } else { counts[0] as u32 };
    out.extend_from_slice(&pps.to_le_bytes());
    if ragged {
        for &c in &counts {
            out.extend_from_slice(&(c as u32).to_le_bytes());
        }
    }
    for &label in &dataset.labels {
        out.extend_from_slice(&label.to_le_bytes());
    }
    for cloud in &dataset.clouds {
        for p in cloud.points() {
            out.extend_from_slice(&(p.x as f32).to_le_bytes());
            out.extend_from_slice(&(p.y as f32).to_le_bytes());
            out.extend_from_slice(&(p.z as f32).to_le_bytes());
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], DatasetError> {
        let end = self.pos.checked_add(len).ok_or(DatasetError::TruncatedFile)?;
        if end > self.bytes.len() {
            return Err(DatasetError::TruncatedFile);
        }
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, DatasetError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u16(&mut self) -> Result<u16, DatasetError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, DatasetError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn decode_pcb(bytes: &[u8]) -> Result<Dataset, DatasetError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != PCB_MAGIC {
        return Err(DatasetError::BadMagic);
    }
    let flags = r.u32()?;
    let n = r.u32()? as usize;
    let pps = r.u32()? as usize;
    let counts: Vec<usize> = if flags & FLAG_RAGGED != 0 {
        (0..n).map(|_| r.u32().map(|c| c as usize)).collect::<Result<_, _>>()?
    } else {
        vec![pps; n]
    };
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        labels.push(r.u16()?);
    }
    let mut clouds = Vec::with_capacity(n);
    for &count in &counts {
        let mut points = Vec::with_capacity(count);
        for _ in 0..count {
            let x = r.f32()? as f64;
            let y = r.f32()? as f64;
            let z = r.f32()? as f64;
            points.push(Point3::new(x, y, z));
        }
        clouds.push(PointCloud::new(points)?);
    }
    if r.pos != bytes.len() {
        return Err(DatasetError::TrailingBytes);
    }
    Dataset::new(clouds, labels)
}

pub fn write_pcb(path: &Path, dataset: &Dataset) -> Result<(), DatasetError> {
    fs::write(path, encode_pcb(dataset)?)?;
    Ok(())
}

pub fn read_pcb(path: &Path) -> Result<Dataset, DatasetError> {
    decode_pcb(&fs::read(path)?)
}

/// Write one cloud as ascii PLY, optionally with a uchar RGB per point
/// (e.g. marking appended points for external viewers). Coordinates are
/// rounded to `f32` like the PCB format.
pub fn export_ply(
    path: &Path,
    cloud: &PointCloud,
    colors: Option<&[[u8; 3]]>,
) -> Result<(), DatasetError> {
    if let Some(colors) = colors {
        if colors.len() != cloud.len() {
            return Err(DatasetError::LabelArityMismatch {
                clouds: cloud.len(),
                labels: colors.len(),
            });
        }
    }
    let mut out = Vec::new();
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    writeln!(out, "element vertex {}", cloud.len())?;
    writeln!(out, "property float x")?;
    writeln!(out, "property float y")?;
    writeln!(out, "property float z")?;
    if colors.is_some() {
        writeln!(out, "property uchar red")?;
        writeln!(out, "property uchar green")?;
        writeln!(out, "property uchar blue")?;
    }
    writeln!(out, "end_header")?;
    for (i, p) in cloud.points().iter().enumerate() {
        match colors {
            Some(c) => writeln!(
                out,
                "{} {} {} {} {} {}",
                p.x as f32, p.y as f32, p.z as f32, c[i][0], c[i][1], c[i][2]
            )?,
            None => writeln!(out, "{} {} {}", p.x as f32, p.y as f32, p.z as f32)?,
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read an ascii PLY with float x, y, z vertex properties. Extra scalar
/// vertex properties are ignored; binary files, list-typed vertex properties
/// and missing coordinates are rejected.
pub fn import_ply(path: &Path) -> Result<PointCloud, DatasetError> {
    let text = fs::read_to_string(path)
        .map_err(|_| DatasetError::UnsupportedPly("not an ascii file".into()))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(DatasetError::UnsupportedPly("missing `ply` magic line".into()));
    }

    struct Element {
        name: String,
        count: usize,
        properties: Vec<(String, String)>, // (type, name)
    }
    let mut elements: Vec<Element> = Vec::new();
    let mut format_seen = false;
    for line in lines.by_ref() {
        let line = line.trim();
        if line == "end_header" {
            break;
        }
        let mut words = line.split_whitespace();
        match words.next() {
            Some("format") => {
                let rest: Vec<&str> = words.collect();
                if rest.first() != Some(&"ascii") {
                    return Err(DatasetError::UnsupportedPly(format!(
                        "format `{}` (only ascii 1.0)",
                        rest.join(" ")
                    )));
                }
                format_seen = true;
            }
            Some("comment") | Some("obj_info") => {}
            Some("element") => {
                let name = words.next().unwrap_or_default().to_string();
                let count: usize = words
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| DatasetError::UnsupportedPly("bad element line".into()))?;
                elements.push(Element { name, count, properties: Vec::new() });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| DatasetError::UnsupportedPly("property before element".into()))?;
                let ty = words.next().unwrap_or_default().to_string();
                let rest: Vec<&str> = words.collect();
                let name = rest.last().unwrap_or(&"").to_string();
                element.properties.push((ty, name));
            }
            Some(other) => {
                return Err(DatasetError::UnsupportedPly(format!("unknown header line `{other}`")))
            }
            None => {}
        }
    }
    if !format_seen {
        return Err(DatasetError::UnsupportedPly("missing format line".into()));
    }
    let vertex_pos = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| DatasetError::UnsupportedPly("no vertex element".into()))?;

    let vertex = &elements[vertex_pos];
    if vertex.properties.iter().any(|(ty, _)| ty == "list") {
        return Err(DatasetError::UnsupportedPly("list-typed vertex property".into()));
    }
    let coord_col = |axis: &str| -> Result<usize, DatasetError> {
        vertex
            .properties
            .iter()
            .position(|(ty, name)| name == axis && (ty == "float" || ty == "float32" || ty == "double" || ty == "float64"))
            .ok_or_else(|| DatasetError::UnsupportedPly(format!("missing float property `{axis}`")))
    };
    let (cx, cy, cz) = (coord_col("x")?, coord_col("y")?, coord_col("z")?);

    // skip data lines of elements declared before vertex
    for element in &elements[..vertex_pos] {
        for _ in 0..element.count {
            lines.next().ok_or(DatasetError::UnsupportedPly("truncated data".into()))?;
        }
    }
    let mut points = Vec::with_capacity(vertex.count);
    for _ in 0..vertex.count {
        let line = lines
            .next()
            .ok_or_else(|| DatasetError::UnsupportedPly("truncated vertex data".into()))?;
        let cols: Vec<&str> = line.split_whitespace().collect();
        let parse = |col: usize| -> Result<f64, DatasetError> {
            cols.get(col)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| DatasetError::UnsupportedPly(format!("bad vertex line `{line}`")))
        };
        points.push(Point3::new(parse(cx)?, parse(cy)?, parse(cz)?));
    }
    Ok(PointCloud::new(points)?)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Hash of the canonical JSON serialization of a severity table.
pub fn severity_hash(table: &SeverityTable) -> Result<String, DatasetError> {
    Ok(sha256_hex(serde_json::to_string(table)?.as_bytes()))
}

/// Extra composite variant emitted next to the 35 atomic ones: each sample
/// receives a random subset of `size` distinct kinds, all at `level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeRequest {
    pub size: usize,
    pub level: u8,
}

/// The generation parameters that affect output bytes; echoed into the
/// manifest verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub severity: SeverityTable,
    pub composite: Option<CompositeRequest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub kind: String,
    pub level: u8,
    pub path: String,
    pub samples: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub tool_version: String,
    pub global_seed: u64,
    pub severity_hash: String,
    pub config: SuiteConfig,
    pub entries: Vec<ManifestEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub struct SuiteOptions {
    pub seed: u64,
    pub severity: SeverityTable,
    pub composite: Option<CompositeRequest>,
    /// Worker threads; 0 means all available. Output bytes do not depend on
    /// this value.
    pub threads: usize,
}

impl SuiteOptions {
    pub fn new(seed: u64) -> Self {
        SuiteOptions { seed, severity: SeverityTable::default(), composite: None, threads: 0 }
    }
}

pub(crate) fn corrupt_variant(
    clean: &Dataset,
    kind: CorruptionKind,
    level: u8,
    opts: &SuiteOptions,
) -> Result<Dataset, DatasetError> {
    let spec = CorruptionSpec::new(kind, level)?;
    let clouds: Result<Vec<PointCloud>, CorruptError> = clean
        .clouds
        .par_iter()
        .enumerate()
        .map(|(i, cloud)| {
            let ctx = SeedContext::new(opts.seed, kind.code(), level, i as u32)
                .map_err(CorruptError::from)?;
            apply(&spec, cloud, &opts.severity, &mut derive_stream(&ctx))
        })
        .collect();
    Dataset::new(clouds?, clean.labels.clone())
}

fn composite_variant(
    clean: &Dataset,
    request: &CompositeRequest,
    opts: &SuiteOptions,
) -> Result<Dataset, DatasetError> {
    let clouds: Result<Vec<PointCloud>, CorruptError> = clean
        .clouds
        .par_iter()
        .enumerate()
        .map(|(i, cloud)| {
            let ctx = SeedContext::new(opts.seed, DOMAIN_COMPOSITE, request.level, i as u32)
                .map_err(CorruptError::from)?;
            let mut rng = derive_stream(&ctx);
            let specs = sample_composite(&mut rng, request.size, request.level)?;
            apply_composite(&specs, cloud, &opts.severity, &mut rng)
        })
        .collect();
    Dataset::new(clouds?, clean.labels.clone())
}

struct TempDirGuard {
    path: PathBuf,
    armed: bool,
}

impl Drop for TempDirGuard {
    fn drop(&mut self) {
        if self.armed {
            let _ = fs::remove_dir_all(&self.path);
        }
    }
}

/// Generate the full suite: `clean.pcb` (a byte copy of the input), the 35
/// atomic variants named `<kind>_<level>.pcb`, any requested composite
/// variant, and `manifest.json`, written atomically (temp dir + rename).
///
/// Sample `i` of variant `(kind, level)` uses the stream derived from
/// `(seed, kind, level, i)`, so output bytes are independent of generation
/// order and thread count.
pub fn generate_suite(
    clean_path: &Path,
    out_dir: &Path,
    opts: &SuiteOptions,
) -> Result<Manifest, DatasetError> {
    opts.severity.validate().map_err(DatasetError::InvalidSeverity)?;
    if let Some(request) = &opts.composite {
        if request.size < 1 || request.size > 7 || !(1..=5).contains(&request.level) {
            return Err(DatasetError::BadManifest(format!(
                "composite request {}x{} out of range",
                request.size, request.level
            )));
        }
    }
    let clean_bytes = fs::read(clean_path)?;
    let clean = decode_pcb(&clean_bytes)?;

    if out_dir.exists() {
        if fs::read_dir(out_dir)?.next().is_some() {
            return Err(DatasetError::OutputExists(out_dir.to_path_buf()));
        }
        fs::remove_dir(out_dir)?;
    }
    let parent = out_dir.parent().filter(|p| !p.as_os_str().is_empty());
    let stem = out_dir.file_name().ok_or_else(|| {
        DatasetError::Io(std::io::Error::other("output path has no final component"))
    })?;
    let tmp = parent.unwrap_or(Path::new(".")).join(format!(
        ".{}.tmp.{}",
        stem.to_string_lossy(),
        std::process::id()
    ));
    fs::create_dir_all(&tmp)?;
    let mut guard = TempDirGuard { path: tmp.clone(), armed: true };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| DatasetError::ThreadPool(e.to_string()))?;

    let mut entries = Vec::new();
    fs::write(tmp.join("clean.pcb"), &clean_bytes)?;
    entries.push(ManifestEntry {
        kind: "clean".into(),
        level: 0,
        path: "clean.pcb".into(),
        samples: clean.len(),
        sha256: sha256_hex(&clean_bytes),
    });

    for kind in ALL_KINDS {
        for level in 1..=5u8 {
            let variant = pool.install(|| corrupt_variant(&clean, kind, level, opts))?;
            let bytes = encode_pcb(&variant)?;
            let name = format!("{}_{}.pcb", kind.name(), level);
            fs::write(tmp.join(&name), &bytes)?;
            entries.push(ManifestEntry {
                kind: kind.name().into(),
                level,
                path: name,
                samples: variant.len(),
                sha256: sha256_hex(&bytes),
            });
        }
    }

    if let Some(request) = &opts.composite {
        let variant = pool.install(|| composite_variant(&clean, request, opts))?;
        let bytes = encode_pcb(&variant)?;
        let name = format!("composite_{}x{}.pcb", request.size, request.level);
        fs::write(tmp.join(&name), &bytes)?;
        entries.push(ManifestEntry {
            kind: "composite".into(),
            level: request.level,
            path: name,
            samples: variant.len(),
            sha256: sha256_hex(&bytes),
        });
    }

    let manifest = Manifest {
        format_version: 1,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        global_seed: opts.seed,
        severity_hash: severity_hash(&opts.severity)?,
        config: SuiteConfig {
            seed: opts.seed,
            severity: opts.severity.clone(),
            composite: opts.composite,
        },
        entries,
    };
    let mut manifest_json = serde_json::to_string_pretty(&manifest)?;
    manifest_json.push('\n');
    fs::write(tmp.join(MANIFEST_NAME), manifest_json)?;

    fs::rename(&tmp, out_dir)?;
    guard.armed = false;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq)]
pub enum VerifyIssue {
    MissingFile { path: String },
    HashMismatch { path: String },
    SampleCountMismatch { path: String, expected: usize, actual: usize },
    CardinalityViolation { path: String, sample: usize, expected: usize, actual: usize },
    Undecodable { path: String, reason: String },
}

impl fmt::Display for VerifyIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyIssue::MissingFile { path } => write!(f, "{path}: file missing"),
            VerifyIssue::HashMismatch { path } => write!(f, "{path}: sha256 mismatch"),
            VerifyIssue::SampleCountMismatch { path, expected, actual } => {
                write!(f, "{path}: {actual} samples, manifest says {expected}")
            }
            VerifyIssue::CardinalityViolation { path, sample, expected, actual } => {
                write!(f, "{path}: sample {sample} has {actual} points, expected {expected}")
            }
            VerifyIssue::Undecodable { path, reason } => write!(f, "{path}: {reason}"),
        }
    }
}

#[derive(Debug, Default)]
pub struct VerifyReport {
    pub issues: Vec<VerifyIssue>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Recompute every manifest hash and every cardinality invariant of a suite
/// directory, listing all mismatches.
pub fn verify_suite(dir: &Path) -> Result<VerifyReport, DatasetError> {
    let manifest_path = dir.join(MANIFEST_NAME);
    if !manifest_path.exists() {
        return Err(DatasetError::ManifestMissing(dir.to_path_buf()));
    }
    let manifest: Manifest = serde_json::from_slice(&fs::read(&manifest_path)?)
        .map_err(|e| DatasetError::BadManifest(e.to_string()))?;
    manifest.config.severity.validate().map_err(DatasetError::InvalidSeverity)?;

    let mut report = VerifyReport::default();
    let mut clean_counts: Option<Vec<usize>> = None;

    // first pass locates the clean entry so cardinality rules have a reference
    if let Some(clean_entry) = manifest.entries.iter().find(|e| e.kind == "clean") {
        if let Ok(bytes) = fs::read(dir.join(&clean_entry.path)) {
            if let Ok(dataset) = decode_pcb(&bytes) {
                clean_counts = Some(dataset.clouds.iter().map(|c| c.len()).collect());
            }
        }
    }

    for entry in &manifest.entries {
        let path = dir.join(&entry.path);
        let bytes = match fs::read(&path) {
            Ok(bytes) => bytes,
            Err(_) => {
                report.issues.push(VerifyIssue::MissingFile { path: entry.path.clone() });
                continue;
            }
        };
        if sha256_hex(&bytes) != entry.sha256 {
            report.issues.push(VerifyIssue::HashMismatch { path: entry.path.clone() });
        }
        let dataset = match decode_pcb(&bytes) {
            Ok(d) => d,
            Err(e) => {
                report.issues.push(VerifyIssue::Undecodable {
                    path: entry.path.clone(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        if dataset.len() != entry.samples {
            report.issues.push(VerifyIssue::SampleCountMismatch {
                path: entry.path.clone(),
                expected: entry.samples,
                actual: dataset.len(),
            });
        }
        let Some(clean_counts) = &clean_counts else { continue };
        if dataset.len() != clean_counts.len() {
            continue; // sample count issue already recorded
        }
        for (i, cloud) in dataset.clouds.iter().enumerate() {
            let expected = match entry.kind.as_str() {
                "clean" => clean_counts[i],
                "composite" => {
                    let Some(request) = &manifest.config.composite else { continue };
                    let ctx = SeedContext::new(
                        manifest.global_seed,
                        DOMAIN_COMPOSITE,
                        request.level,
                        i as u32,
                    )
                    .map_err(CorruptError::from)?;
                    let mut rng = derive_stream(&ctx);
                    let specs = sample_composite(&mut rng, request.size, request.level)?;
                    let mut n = clean_counts[i];
                    for spec in &specs {
                        n = expected_count(spec.kind, spec.level, &manifest.config.severity, n)?;
                    }
                    n
                }
                name => match name.parse::<CorruptionKind>() {
                    Ok(kind) => expected_count(
                        kind,
                        entry.level,
                        &manifest.config.severity,
                        clean_counts[i],
                    )?,
                    Err(_) => continue,
                },
            };
            if cloud.len() != expected {
                report.issues.push(VerifyIssue::CardinalityViolation {
                    path: entry.path.clone(),
                    sample: i,
                    expected,
                    actual: cloud.len(),
                });
            }
        }
    }
    Ok(report)
}
