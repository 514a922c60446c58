//! Robustness metrics over classifier accuracies: per-kind error normalized
//! by a baseline (CE), its mean over the seven kinds (mCE), and the relative
//! variants measuring drop from clean accuracy (RCE / RmCE).
//!
//! For one kind, with `OA_l` the overall accuracy at severity level `l`:
//!
//! ```text
//! CE  = Σ_l (1 − OA_l)        / Σ_l (1 − OA_l^baseline)
//! RCE = Σ_l (OA_clean − OA_l) / Σ_l (OA_clean^baseline − OA_l^baseline)
//! ```
//!
//! A table may carry the five per-level accuracies or just their mean; both
//! numerator and denominator are sums over the same five levels, so the two
//! forms are algebraically interchangeable.

use crate::corrupt::{CorruptionKind, ALL_KINDS};
use crate::dataset::{self, DatasetError, Manifest, MANIFEST_NAME};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("length mismatch: {expected} labels vs {got} predictions")]
    LengthMismatch { expected: usize, got: usize },
    #[error("empty input")]
    Empty,
    #[error("baseline has zero error on `{0}`; CE is undefined")]
    PerfectBaseline(CorruptionKind),
    #[error("baseline accuracy does not drop on `{0}`; RCE is undefined")]
    BaselineNoDrop(CorruptionKind),
    #[error("accuracy value out of [0, 1]: {0}")]
    ValueOutOfRange(f64),
    #[error("expected exactly {expected} values, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("table is missing corruption `{0}`")]
    IncompleteTable(CorruptionKind),
    #[error("table entry `{0}` must carry either `mean` or `levels`")]
    AmbiguousEntry(String),
    #[error("missing prediction files: {}", .0.join(", "))]
    MissingVariant(Vec<String>),
    #[error("bad prediction file {path}: {reason}")]
    BadPrediction { path: String, reason: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-corruption accuracy data: the five per-level values, or their mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CorruptionOa {
    Mean(f64),
    Levels([f64; 5]),
}

impl CorruptionOa {
    fn validate(&self) -> Result<(), MetricsError> {
        let check = |v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(MetricsError::ValueOutOfRange(v))
            }
        };
        match self {
            CorruptionOa::Mean(v) => check(*v),
            CorruptionOa::Levels(levels) => levels.iter().try_for_each(|v| check(*v)),
        }
    }

    /// Mean accuracy over the five levels.
    pub fn mean(&self) -> f64 {
        match self {
            CorruptionOa::Mean(v) => *v,
            CorruptionOa::Levels(levels) => levels.iter().sum::<f64>() / 5.0,
        }
    }

    /// `Σ_l (1 − OA_l)`, the CE numerator/denominator.
    fn error_mass(&self) -> f64 {
        match self {
            CorruptionOa::Mean(v) => 5.0 * (1.0 - v),
            CorruptionOa::Levels(levels) => levels.iter().map(|v| 1.0 - v).sum(),
        }
    }

    /// `Σ_l (OA_clean − OA_l)`, the RCE numerator/denominator.
    fn drop_mass(&self, clean: f64) -> f64 {
        match self {
            CorruptionOa::Mean(v) => 5.0 * (clean - v),
            CorruptionOa::Levels(levels) => levels.iter().map(|v| clean - v).sum(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OaEntryRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<[f64; 5]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OaTableRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    clean: f64,
    corruptions: BTreeMap<CorruptionKind, OaEntryRepr>,
}

/// Clean accuracy plus per-corruption accuracies for all seven kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OaTableRepr", into = "OaTableRepr")]
pub struct OaTable {
    pub name: Option<String>,
    pub clean: f64,
    pub corruptions: BTreeMap<CorruptionKind, CorruptionOa>,
}

impl OaTable {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if !(0.0..=1.0).contains(&self.clean) {
            return Err(MetricsError::ValueOutOfRange(self.clean));
        }
        for kind in ALL_KINDS {
            match self.corruptions.get(&kind) {
                None => return Err(MetricsError::IncompleteTable(kind)),
                Some(entry) => entry.validate()?,
            }
        }
        Ok(())
    }

    fn get(&self, kind: CorruptionKind) -> Result<&CorruptionOa, MetricsError> {
        self.corruptions.get(&kind).ok_or(MetricsError::IncompleteTable(kind))
    }

    /// Mean accuracy over all corruptions and levels.
    pub fn mean_oa(&self) -> f64 {
        ALL_KINDS.iter().map(|k| self.corruptions[k].mean()).sum::<f64>() / ALL_KINDS.len() as f64
    }

    pub fn from_json(text: &str) -> Result<Self, MetricsError> {
        let table: OaTable = serde_json::from_str(text)?;
        table.validate()?;
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, MetricsError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

impl TryFrom<OaTableRepr> for OaTable {
    type Error = String;

    fn try_from(repr: OaTableRepr) -> Result<Self, String> {
        let mut corruptions = BTreeMap::new();
        for (kind, entry) in repr.corruptions {
            let data = match (entry.mean, entry.levels) {
                (Some(mean), None) => CorruptionOa::Mean(mean),
                (None, Some(levels)) => CorruptionOa::Levels(levels),
                _ => return Err(format!("entry `{kind}` must carry exactly one of mean/levels")),
            };
            corruptions.insert(kind, data);
        }
        Ok(OaTable { name: repr.name, clean: repr.clean, corruptions })
    }
}

impl From<OaTable> for OaTableRepr {
    fn from(table: OaTable) -> Self {
        OaTableRepr {
            name: table.name,
            clean: table.clean,
            corruptions: table
                .corruptions
                .into_iter()
                .map(|(kind, data)| {
                    let entry = match data {
                        CorruptionOa::Mean(v) => OaEntryRepr { mean: Some(v), levels: None },
                        CorruptionOa::Levels(l) => OaEntryRepr { mean: None, levels: Some(l) },
                    };
                    (kind, entry)
                })
                .collect(),
        }
    }
}

/// The reference baseline bundled with the toolkit: DGCNN mean-form
/// accuracies (clean 0.926), sufficient for CE/mCE/RCE/RmCE because the
/// metrics only consume per-corruption error sums.
pub fn dgcnn_baseline() -> OaTable {
    let values = [
        (CorruptionKind::Scale, 0.906),
        (CorruptionKind::Jitter, 0.684),
        (CorruptionKind::DropGlobal, 0.752),
        (CorruptionKind::DropLocal, 0.793),
        (CorruptionKind::AddGlobal, 0.705),
        (CorruptionKind::AddLocal, 0.725),
        (CorruptionKind::Rotate, 0.785),
    ];
    OaTable {
        name: Some("dgcnn".into()),
        clean: 0.926,
        corruptions: values.into_iter().map(|(k, v)| (k, CorruptionOa::Mean(v))).collect(),
    }
}

/// Fraction of indices where prediction equals label.
pub fn overall_accuracy(predictions: &[u16], labels: &[u16]) -> Result<f64, MetricsError> {
    if predictions.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            expected: labels.len(),
            got: predictions.len(),
        });
    }
    if labels.is_empty() {
        return Err(MetricsError::Empty);
    }
    let correct = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(correct as f64 / labels.len() as f64)
}

/// CE for one corruption: the method's summed error over the five levels,
/// normalized by the baseline's.
pub fn corruption_error(
    kind: CorruptionKind,
    method: &CorruptionOa,
    baseline: &CorruptionOa,
) -> Result<f64, MetricsError> {
    method.validate()?;
    baseline.validate()?;
    let denom = baseline.error_mass();
    if denom <= 0.0 {
        return Err(MetricsError::PerfectBaseline(kind));
    }
    Ok(method.error_mass() / denom)
}

/// RCE for one corruption: the drop from clean accuracy, normalized by the
/// baseline's drop. A baseline that does not degrade is an error, not a
/// sign flip.
pub fn relative_ce(
    kind: CorruptionKind,
    method_clean: f64,
    method: &CorruptionOa,
    baseline_clean: f64,
    baseline: &CorruptionOa,
) -> Result<f64, MetricsError> {
    method.validate()?;
    baseline.validate()?;
    let denom = baseline.drop_mass(baseline_clean);
    if denom <= 0.0 {
        return Err(MetricsError::BaselineNoDrop(kind));
    }
    Ok(method.drop_mass(method_clean) / denom)
}

/// Arithmetic mean of exactly seven per-corruption CE values.
pub fn mean_ce(ces: &[f64]) -> Result<f64, MetricsError> {
    if ces.len() != ALL_KINDS.len() {
        return Err(MetricsError::WrongArity { expected: ALL_KINDS.len(), got: ces.len() });
    }
    Ok(ces.iter().sum::<f64>() / ces.len() as f64)
}

/// Per-corruption slice of a [`MetricsReport`]. `inverse_ce` is the radar
/// value 1/CE (absent when CE is zero); `mean_oa` is the other radar series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionMetrics {
    pub kind: CorruptionKind,
    pub ce: f64,
    pub rce: f64,
    pub mean_oa: f64,
    pub inverse_ce: Option<f64>,
}

/// Full metric report for one method against one baseline. Corruption rows
/// are in the fixed report order (Scale, Jitter, Drop-G, Drop-L, Add-G,
/// Add-L, Rotate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    pub baseline: String,
    pub clean_oa: f64,
    pub mean_oa: f64,
    pub mce: f64,
    pub rmce: f64,
    pub per_corruption: Vec<CorruptionMetrics>,
}

/// Compute every CE/RCE, mCE, RmCE and the radar series.
pub fn build_report(method: &OaTable, baseline: &OaTable) -> Result<MetricsReport, MetricsError> {
    method.validate()?;
    baseline.validate()?;
    let mut per_corruption = Vec::with_capacity(ALL_KINDS.len());
    let mut ces = Vec::with_capacity(ALL_KINDS.len());
    let mut rces = Vec::with_capacity(ALL_KINDS.len());
    for kind in ALL_KINDS {
        let m = method.get(kind)?;
        let b = baseline.get(kind)?;
        let ce = corruption_error(kind, m, b)?;
        let rce = relative_ce(kind, method.clean, m, baseline.clean, b)?;
        ces.push(ce);
        rces.push(rce);
        per_corruption.push(CorruptionMetrics {
            kind,
            ce,
            rce,
            mean_oa: m.mean(),
            inverse_ce: (ce > 0.0).then(|| 1.0 / ce),
        });
    }
    Ok(MetricsReport {
        method: method.name.clone().unwrap_or_else(|| "method".into()),
        baseline: baseline.name.clone().unwrap_or_else(|| "baseline".into()),
        clean_oa: method.clean,
        mean_oa: method.mean_oa(),
        mce: mean_ce(&ces)?,
        rmce: mean_ce(&rces)?,
        per_corruption,
    })
}

/// Markdown table mirroring the standard column layout (OA, mCE, then the
/// seven corruptions); one CE row and one RCE row. Values are shown with
/// three decimals, round-half-to-even; the JSON report keeps full precision.
pub fn markdown_report(report: &MetricsReport) -> String {
    let mut out = String::new();
    let _ = write!(out, "| Method | OA | mOA | mCE |");
    for c in &report.per_corruption {
        let _ = write!(out, " {} |", c.kind);
    }
    let _ = writeln!(out);
    let _ = write!(out, "|---|---|---|---|");
    for _ in &report.per_corruption {
        let _ = write!(out, "---|");
    }
    let _ = writeln!(out);
    let _ = write!(
        out,
        "| {} (CE) | {:.3} | {:.3} | {:.3} |",
        report.method, report.clean_oa, report.mean_oa, report.mce
    );
    for c in &report.per_corruption {
        let _ = write!(out, " {:.3} |", c.ce);
    }
    let _ = writeln!(out);
    let _ = write!(out, "| {} (RCE) | | | {:.3} |", report.method, report.rmce);
    for c in &report.per_corruption {
        let _ = write!(out, " {:.3} |", c.rce);
    }
    let _ = writeln!(out);
    out
}

/// Predicted class ids per suite variant, aligned to sample index.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub clean: Vec<u16>,
    pub variants: BTreeMap<(CorruptionKind, u8), Vec<u16>>,
}

/// Names of the prediction files a complete set must provide.
pub fn required_prediction_files() -> Vec<String> {
    let mut names = vec!["clean.csv".to_string()];
    for kind in ALL_KINDS {
        for level in 1..=5u8 {
            names.push(format!("{}_{}.csv", kind.name(), level));
        }
    }
    names
}

fn parse_prediction_csv(path: &Path) -> Result<Vec<u16>, MetricsError> {
    let display = path.display().to_string();
    let bad = |reason: &str| MetricsError::BadPrediction {
        path: display.clone(),
        reason: reason.to_string(),
    };
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next().map(str::trim) {
        Some("index,pred") => {}
        _ => return Err(bad("missing `index,pred` header")),
    }
    let mut rows: Vec<(usize, u16)> = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (idx, pred) = line.split_once(',').ok_or_else(|| bad("row is not `index,pred`"))?;
        let idx: usize = idx.trim().parse().map_err(|_| bad("bad index"))?;
        let pred: u16 = pred.trim().parse().map_err(|_| bad("bad prediction"))?;
        rows.push((idx, pred));
    }
    let n = rows.len();
    let mut out = vec![None; n];
    for (idx, pred) in rows {
        let slot = out.get_mut(idx).ok_or_else(|| bad("index out of range"))?;
        if slot.replace(pred).is_some() {
            return Err(bad("duplicate index"));
        }
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

/// Load `clean.csv` plus the 35 `<kind>_<level>.csv` files; reports every
/// missing file at once.
pub fn load_predictions(dir: &Path) -> Result<PredictionSet, MetricsError> {
    let missing: Vec<String> = required_prediction_files()
        .into_iter()
        .filter(|name| !dir.join(name).exists())
        .collect();
    if !missing.is_empty() {
        return Err(MetricsError::MissingVariant(missing));
    }
    let clean = parse_prediction_csv(&dir.join("clean.csv"))?;
    let mut variants = BTreeMap::new();
    for kind in ALL_KINDS {
        for level in 1..=5u8 {
            let name = format!("{}_{}.csv", kind.name(), level);
            variants.insert((kind, level), parse_prediction_csv(&dir.join(name))?);
        }
    }
    Ok(PredictionSet { clean, variants })
}

/// Score a prediction set against the labels of a generated suite and fold
/// the per-variant accuracies into a levels-form table and a full report.
pub fn evaluate_suite(
    suite_dir: &Path,
    predictions: &PredictionSet,
    baseline: &OaTable,
) -> Result<MetricsReport, MetricsError> {
    let manifest_path = suite_dir.join(MANIFEST_NAME);
    if !manifest_path.exists() {
        return Err(MetricsError::Dataset(DatasetError::ManifestMissing(
            suite_dir.to_path_buf(),
        )));
    }
    let manifest: Manifest = serde_json::from_slice(&fs::read(&manifest_path)?)
        .map_err(|e| MetricsError::Dataset(DatasetError::BadManifest(e.to_string())))?;
    let labels_of = |kind: &str, level: u8| -> Result<Vec<u16>, MetricsError> {
        let entry = manifest
            .entries
            .iter()
            .find(|e| e.kind == kind && e.level == level)
            .ok_or_else(|| {
                MetricsError::Dataset(DatasetError::BadManifest(format!(
                    "manifest lacks {kind} level {level}"
                )))
            })?;
        Ok(dataset::read_pcb(&suite_dir.join(&entry.path))?.labels)
    };

    let clean_oa = overall_accuracy(&predictions.clean, &labels_of("clean", 0)?)?;
    let mut corruptions = BTreeMap::new();
    for kind in ALL_KINDS {
        let mut levels = [0.0; 5];
        for level in 1..=5u8 {
            let preds = predictions
                .variants
                .get(&(kind, level))
                .ok_or_else(|| {
                    MetricsError::MissingVariant(vec![format!("{}_{}.csv", kind.name(), level)])
                })?;
            levels[level as usize - 1] = overall_accuracy(preds, &labels_of(kind.name(), level)?)?;
        }
        corruptions.insert(kind, CorruptionOa::Levels(levels));
    }
    let method = OaTable { name: Some("submitted".into()), clean: clean_oa, corruptions };
    build_report(&method, baseline)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The published mean-form accuracy row used as the canonical worked
    /// example (clean 0.907).
    pub(crate) fn pointnet_table() -> OaTable {
        let values = [
            (CorruptionKind::Scale, 0.881),
            (CorruptionKind::Jitter, 0.797),
            (CorruptionKind::DropGlobal, 0.876),
            (CorruptionKind::DropLocal, 0.778),
            (CorruptionKind::AddGlobal, 0.121),
            (CorruptionKind::AddLocal, 0.562),
            (CorruptionKind::Rotate, 0.591),
        ];
        OaTable {
            name: Some("pointnet".into()),
            clean: 0.907,
            corruptions: values.into_iter().map(|(k, v)| (k, CorruptionOa::Mean(v))).collect(),
        }
    }

    #[test]
    fn overall_accuracy_basics() {
        assert_eq!(overall_accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        let oa = overall_accuracy(&[0, 1, 2], &[0, 1, 3]).unwrap();
        assert!((oa - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(overall_accuracy(&[], &[]), Err(MetricsError::Empty)));
        assert!(matches!(
            overall_accuracy(&[1], &[1, 2]),
            Err(MetricsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn overall_accuracy_matches_recount_oracle() {
        let mut rng = crate::rng::RandomStream::from_u64_seed(5);
        use crate::rng::RandomSource;
        let labels: Vec<u16> =
            (0..2468).map(|_| rng.next_int_inclusive(0, 39).unwrap() as u16).collect();
        let preds: Vec<u16> =
            (0..2468).map(|_| rng.next_int_inclusive(0, 39).unwrap() as u16).collect();
        let oa = overall_accuracy(&preds, &labels).unwrap();
        let mut correct = 0usize;
        for i in 0..labels.len() {
            if labels[i] == preds[i] {
                correct += 1;
            }
        }
        assert_eq!(oa, correct as f64 / 2468.0);
    }

    #[test]
    fn published_ce_row_reproduced() {
        let method = pointnet_table();
        let baseline = dgcnn_baseline();
        let expected = [1.266, 0.642, 0.500, 1.072, 2.980, 1.593, 1.902];
        for (kind, want) in ALL_KINDS.iter().zip(expected) {
            let ce = corruption_error(
                *kind,
                &method.corruptions[kind],
                &baseline.corruptions[kind],
            )
            .unwrap();
            assert!((ce - want).abs() < 0.001, "{kind}: {ce} vs {want}");
        }
        let report = build_report(&method, &baseline).unwrap();
        assert!((report.mce - 1.422).abs() < 0.001, "mCE {}", report.mce);
        assert!((report.rmce - 1.488).abs() < 0.001, "RmCE {}", report.rmce);
        let rce_scale = report.per_corruption[0].rce;
        let rce_jitter = report.per_corruption[1].rce;
        assert!((rce_scale - 1.300).abs() < 0.001);
        assert!((rce_jitter - 0.455).abs() < 0.001);
    }

    #[test]
    fn baseline_against_itself_is_exactly_one() {
        let baseline = dgcnn_baseline();
        let report = build_report(&baseline, &baseline).unwrap();
        assert_eq!(report.mce, 1.0);
        assert_eq!(report.rmce, 1.0);
        for c in &report.per_corruption {
            assert_eq!(c.ce, 1.0);
            assert_eq!(c.rce, 1.0);
        }
        assert!((report.mean_oa - 0.764).abs() < 0.001);
    }

    #[test]
    fn mean_and_levels_forms_agree() {
        let levels = [0.91, 0.88, 0.83, 0.75, 0.60];
        let mean = levels.iter().sum::<f64>() / 5.0;
        let baseline = CorruptionOa::Levels([0.9, 0.85, 0.8, 0.7, 0.6]);
        let kind = CorruptionKind::Scale;
        let a = corruption_error(kind, &CorruptionOa::Levels(levels), &baseline).unwrap();
        let b = corruption_error(kind, &CorruptionOa::Mean(mean), &baseline).unwrap();
        assert!((a - b).abs() < 1e-12);
        let a = relative_ce(kind, 0.93, &CorruptionOa::Levels(levels), 0.92, &baseline).unwrap();
        let b = relative_ce(kind, 0.93, &CorruptionOa::Mean(mean), 0.92, &baseline).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn ce_is_scale_consistent() {
        let kind = CorruptionKind::Jitter;
        let method = CorruptionOa::Mean(0.8);
        let baseline = CorruptionOa::Mean(0.7);
        let ce = corruption_error(kind, &method, &baseline).unwrap();
        for c in [0.5, 2.0, 3.25] {
            let scaled_m = CorruptionOa::Mean(1.0 - c * 0.2);
            let scaled_b = CorruptionOa::Mean(1.0 - c * 0.3);
            let scaled = corruption_error(kind, &scaled_m, &scaled_b).unwrap();
            assert!((scaled - ce).abs() < 1e-12, "c={c}: {scaled} vs {ce}");
        }
    }

    #[test]
    fn degenerate_baselines_are_errors() {
        let kind = CorruptionKind::Rotate;
        assert!(matches!(
            corruption_error(kind, &CorruptionOa::Mean(0.5), &CorruptionOa::Mean(1.0)),
            Err(MetricsError::PerfectBaseline(_))
        ));
        assert!(matches!(
            relative_ce(kind, 0.9, &CorruptionOa::Mean(0.5), 0.9, &CorruptionOa::Mean(0.95)),
            Err(MetricsError::BaselineNoDrop(_))
        ));
        assert!(matches!(
            corruption_error(kind, &CorruptionOa::Mean(1.5), &CorruptionOa::Mean(0.5)),
            Err(MetricsError::ValueOutOfRange(_))
        ));
    }

    #[test]
    fn mean_ce_arity() {
        assert_eq!(mean_ce(&[1.0; 7]).unwrap(), 1.0);
        assert!(matches!(
            mean_ce(&[1.0; 6]),
            Err(MetricsError::WrongArity { expected: 7, got: 6 })
        ));
    }

    #[test]
    fn oa_table_json_round_trip_and_validation() {
        let json = serde_json::to_string(&dgcnn_baseline()).unwrap();
        let back = OaTable::from_json(&json).unwrap();
        assert_eq!(back, dgcnn_baseline());

        // unknown keys rejected
        assert!(OaTable::from_json(r#"{"clean": 0.9, "corruptions": {}, "x": 1}"#).is_err());
        // incomplete table rejected
        let err = OaTable::from_json(r#"{"clean": 0.9, "corruptions": {}}"#).unwrap_err();
        assert!(matches!(err, MetricsError::IncompleteTable(_)));
        // levels form accepted
        let json = r#"{
            "clean": 0.9,
            "corruptions": {
                "scale": {"levels": [0.9, 0.8, 0.7, 0.6, 0.5]},
                "jitter": {"mean": 0.8}, "drop_global": {"mean": 0.8},
                "drop_local": {"mean": 0.8}, "add_global": {"mean": 0.8},
                "add_local": {"mean": 0.8}, "rotate": {"mean": 0.8}
            }
        }"#;
        let table = OaTable::from_json(json).unwrap();
        assert!((table.corruptions[&CorruptionKind::Scale].mean() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn markdown_layout_matches_report_order() {
        let report = build_report(&pointnet_table(), &dgcnn_baseline()).unwrap();
        let md = markdown_report(&report);
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].contains("| scale |"));
        assert!(lines[2].contains("| 1.422 |"));
        assert!(lines[2].contains("| 2.980 |"));
        assert!(lines[3].contains("| 1.488 |"));
    }

    #[test]
    fn prediction_csv_parsing() {
        let dir = tempfile::TempDir::new().unwrap();
        let path = dir.path().join("clean.csv");
        std::fs::write(&path, "index,pred\n2,7\n0,3\n1,3\n").unwrap();
        assert_eq!(parse_prediction_csv(&path).unwrap(), vec![3, 3, 7]);

        std::fs::write(&path, "0,3\n").unwrap();
        assert!(matches!(
            parse_prediction_csv(&path),
            Err(MetricsError::BadPrediction { .. })
        ));
        std::fs::write(&path, "index,pred\n0,3\n0,4\n").unwrap();
        assert!(matches!(
            parse_prediction_csv(&path),
            Err(MetricsError::BadPrediction { .. })
        ));
    }

    #[test]
    fn load_predictions_reports_all_missing() {
        let dir = tempfile::TempDir::new().unwrap();
        std::fs::write(dir.path().join("clean.csv"), "index,pred\n0,0\n").unwrap();
        let err = load_predictions(dir.path()).unwrap_err();
        match err {
            MetricsError::MissingVariant(names) => {
                assert_eq!(names.len(), 35);
                assert!(names.contains(&"add_local_5.csv".to_string()));
            }
            other => panic!("unexpected: {other}"),
        }
    }
}
