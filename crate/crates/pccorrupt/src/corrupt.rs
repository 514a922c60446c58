//! The seven atomic test-time corruptions at five severity levels, plus the
//! composite sampler.
//!
//! Every operation takes an explicit random source and is a pure function of
//! `(cloud, level, stream state)`. Draw orders are fixed and documented per
//! operation; they are part of the contract so independent implementations
//! can be compared bit-for-bit.
//!
//! These operations are out-of-distribution test perturbations: nothing in
//! the augmentation module may call into this module (enforced by a static
//! dependency test).

use crate::geom::{
    euler_rotation_matrix, knn_indices, normalize_unit_sphere, GeomError, Point3, PointCloud,
};
use crate::rng::{RandomSource, RngError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CorruptError {
    #[error("severity level {0} out of range 1..=5")]
    InvalidLevel(u8),
    #[error("cloud of {got} points is too small (needs {needed})")]
    CloudTooSmall { needed: usize, got: usize },
    #[error("drop would remove every point")]
    EmptyResult,
    #[error("duplicate corruption kind {0} in composite spec")]
    DuplicateKind(CorruptionKind),
    #[error("composite spec list must not be empty")]
    EmptySpecList,
    #[error("composite size {0} out of range 1..=7")]
    InvalidCompositeSize(usize),
    #[error("unknown corruption kind `{0}`")]
    UnknownKind(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Rng(#[from] RngError),
}

/// The seven atomic corruptions. Integer codes 0–6 in this order are stable;
/// they appear in seed contexts and in suite manifests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CorruptionKind {
    Scale,
    Jitter,
    DropGlobal,
    DropLocal,
    AddGlobal,
    AddLocal,
    Rotate,
}

/// All seven kinds in code order (also the report/table column order).
pub const ALL_KINDS: [CorruptionKind; 7] = [
    CorruptionKind::Scale,
    CorruptionKind::Jitter,
    CorruptionKind::DropGlobal,
    CorruptionKind::DropLocal,
    CorruptionKind::AddGlobal,
    CorruptionKind::AddLocal,
    CorruptionKind::Rotate,
];

impl CorruptionKind {
    pub fn code(&self) -> u8 {
        match self {
            CorruptionKind::Scale => 0,
            CorruptionKind::Jitter => 1,
            CorruptionKind::DropGlobal => 2,
            CorruptionKind::DropLocal => 3,
            CorruptionKind::AddGlobal => 4,
            CorruptionKind::AddLocal => 5,
            CorruptionKind::Rotate => 6,
        }
    }

    pub fn from_code(code: u8) -> Option<CorruptionKind> {
        ALL_KINDS.get(code as usize).copied()
    }

    /// Stable name used in file names, manifests and CLI flags.
    pub fn name(&self) -> &'static str {
        match self {
            CorruptionKind::Scale => "scale",
            CorruptionKind::Jitter => "jitter",
            CorruptionKind::DropGlobal => "drop_global",
            CorruptionKind::DropLocal => "drop_local",
            CorruptionKind::AddGlobal => "add_global",
            CorruptionKind::AddLocal => "add_local",
            CorruptionKind::Rotate => "rotate",
        }
    }
}

impl std::fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CorruptionKind {
    type Err = CorruptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_KINDS
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| CorruptError::UnknownKind(s.to_string()))
    }
}

impl Serialize for CorruptionKind {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for CorruptionKind {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One corruption at one severity level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    pub level: u8,
}

impl CorruptionSpec {
    pub fn new(kind: CorruptionKind, level: u8) -> Result<Self, CorruptError> {
        check_level(level)?;
        Ok(CorruptionSpec { kind, level })
    }
}

fn check_level(level: u8) -> Result<usize, CorruptError> {
    if (1..=5).contains(&level) {
        Ok(level as usize - 1)
    } else {
        Err(CorruptError::InvalidLevel(level))
    }
}

/// Severity parameters for all seven corruptions. The defaults are the
/// benchmark's canonical values; overriding any of them is recorded in the
/// suite manifest via the table hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeverityTable {
    /// Jitter noise sigma per level.
    pub jitter_sigma: [f64; 5],
    /// Scale bound S per level; each axis draws from U(1/S, S).
    pub scale_s: [f64; 5],
    /// Rotation bound theta (radians) per level; angles draw from U(−θ, θ).
    pub rotate_theta: [f64; 5],
    /// Fraction of points removed by Drop-Global per level.
    pub drop_global_rho: [f64; 5],
    /// Points removed by Drop-Local per level.
    pub drop_local_k: [u32; 5],
    /// Points added by Add-Global per level.
    pub add_global_k: [u32; 5],
    /// Points added by Add-Local per level.
    pub add_local_k: [u32; 5],
    /// Inclusive range for the cluster count C.
    pub cluster_count_range: [u32; 2],
    /// Range for the per-cluster sigma of Add-Local.
    pub add_local_sigma_range: [f64; 2],
}

impl Default for SeverityTable {
    fn default() -> Self {
        use std::f64::consts::PI;
        SeverityTable {
            jitter_sigma: [0.01, 0.02, 0.03, 0.04, 0.05],
            scale_s: [1.6, 1.7, 1.8, 1.9, 2.0],
            rotate_theta: [PI / 30.0, PI / 15.0, PI / 10.0, PI / 7.5, PI / 6.0],
            drop_global_rho: [0.25, 0.375, 0.5, 0.675, 0.75],
            drop_local_k: [100, 200, 300, 400, 500],
            add_global_k: [10, 20, 30, 40, 50],
            add_local_k: [100, 200, 300, 400, 500],
            cluster_count_range: [1, 8],
            add_local_sigma_range: [0.075, 0.125],
        }
    }
}

impl SeverityTable {
    pub fn validate(&self) -> Result<(), String> {
        fn increasing_f(name: &str, a: &[f64; 5]) -> Result<(), String> {
            if a.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                return Err(format!("{name}: values must be finite and positive"));
            }
            if a.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("{name}: values must be strictly increasing"));
            }
            Ok(())
        }
        fn increasing_u(name: &str, a: &[u32; 5]) -> Result<(), String> {
            if a[0] == 0 {
                return Err(format!("{name}: values must be positive"));
            }
            if a.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("{name}: values must be strictly increasing"));
            }
            Ok(())
        }
        increasing_f("jitter_sigma", &self.jitter_sigma)?;
        increasing_f("scale_s", &self.scale_s)?;
        increasing_f("rotate_theta", &self.rotate_theta)?;
        increasing_f("drop_global_rho", &self.drop_global_rho)?;
        if self.drop_global_rho[4] >= 1.0 {
            return Err("drop_global_rho: values must be below 1".into());
        }
        if self.scale_s[0] <= 1.0 {
            return Err("scale_s: values must exceed 1".into());
        }
        increasing_u("drop_local_k", &self.drop_local_k)?;
        increasing_u("add_global_k", &self.add_global_k)?;
        increasing_u("add_local_k", &self.add_local_k)?;
        let [clo, chi] = self.cluster_count_range;
        if clo < 1 || clo > chi {
            return Err("cluster_count_range: need 1 <= lo <= hi".into());
        }
        let [slo, shi] = self.add_local_sigma_range;
        if !(slo.is_finite() && shi.is_finite()) || slo <= 0.0 || slo >= shi {
            return Err("add_local_sigma_range: need 0 < lo < hi".into());
        }
        Ok(())
    }
}

/// Cluster layout shared by Drop-Local and Add-Local. `centers` and `sigmas`
/// are populated by Add-Local only; Drop-Local picks its centers one at a
/// time while points are being removed.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPlan {
    pub sizes: Vec<usize>,
    pub centers: Vec<usize>,
    pub sigmas: Vec<f64>,
}

impl ClusterPlan {
    pub fn cluster_count(&self) -> usize {
        self.sizes.len()
    }
}

/// Split `total` into `clusters` parts of size >= 1, uniformly over all such
/// compositions: draw `clusters − 1` distinct cut points from `{1..total−1}`
/// (rejecting duplicates), sort them, and take successive differences.
pub fn compose_cluster_sizes<R: RandomSource>(
    rng: &mut R,
    clusters: usize,
    total: usize,
) -> Result<Vec<usize>, CorruptError> {
    debug_assert!(clusters >= 1 && total >= clusters);
    if clusters == 1 {
        return Ok(vec![total]);
    }
    let mut cuts: Vec<usize> = Vec::with_capacity(clusters - 1);
    while cuts.len() < clusters - 1 {
        let v = rng.next_int_inclusive(1, total as i64 - 1)? as usize;
        if !cuts.contains(&v) {
            cuts.push(v);
        }
    }
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(clusters);
    let mut prev = 0;
    for c in cuts {
        sizes.push(c - prev);
        prev = c;
    }
    sizes.push(total - prev);
    Ok(sizes)
}

fn draw_cluster_count<R: RandomSource>(
    rng: &mut R,
    table: &SeverityTable,
    total: usize,
) -> Result<usize, CorruptError> {
    let [lo, hi] = table.cluster_count_range;
    let c = rng.next_int_inclusive(lo as i64, hi as i64)? as usize;
    // a cluster cannot be smaller than one point
    Ok(c.min(total))
}

/// Add independent Gaussian noise to every coordinate. Draws proceed
/// point-major, axis-minor (x, y, z for point 0, then point 1, ...).
pub fn jitter<R: RandomSource>(
    cloud: &PointCloud,
    level: u8,
    table: &SeverityTable,
    rng: &mut R,
) -> Result<PointCloud, CorruptError> {
    let sigma = table.jitter_sigma[check_level(level)?];
    let mut out = Vec::with_capacity(cloud.len());
    for p in cloud.points() {
        let x = rng.next_gaussian(p.x, sigma)?;
        let y = rng.next_gaussian(p.y, sigma)?;
        let z = rng.next_gaussian(p.z, sigma)?;
        out.push(Point3::new(x, y, z));
    }
    Ok(PointCloud::from_vec_unchecked(out))
}

/// Scale each axis independently by `U(1/S, S)` (drawn in x, y, z order),
/// then re-normalize to the unit sphere.
pub fn scale<R: RandomSource>(
    cloud: &PointCloud,
    level: u8,
    table: &SeverityTable,
    rng: &mut R,
) -> Result<PointCloud, CorruptError> {
    let s = table.scale_s[check_level(level)?];
    let sx = rng.next_uniform(1.0 / s, s)?;
    let sy = rng.next_uniform(1.0 / s, s)?;
    let sz = rng.next_uniform(1.0 / s, s)?;
    let factors = Point3::new(sx, sy, sz);
    let scaled: Vec<Point3> = cloud.points().iter().map(|p| p.mul_axes(&factors)).collect();
    Ok(normalize_unit_sphere(&PointCloud::from_vec_unchecked(scaled))?)
}

/// Rotate about the origin by Euler angles drawn `U(−θ, θ)` in α, β, γ order.
pub fn rotate<R: RandomSource>(
    cloud: &PointCloud,
    level: u8,
    table: &SeverityTable,
    rng: &mut R,
) -> Result<PointCloud, CorruptError> {
    let theta = table.rotate_theta[check_level(level)?];
    let alpha = rng.next_uniform(-theta, theta)?;
    let beta = rng.next_uniform(-theta, theta)?;
    let gamma = rng.next_uniform(-theta, theta)?;
    let r = euler_rotation_matrix(alpha, beta, gamma)?;
    Ok(PointCloud::from_vec_unchecked(
        cloud.points().iter().map(|p| r.apply(p)).collect(),
    ))
}

/// Shuffle all points, then drop the trailing `floor(N·ρ)`; survivors stay
/// in shuffled order.
pub fn drop_global<R: RandomSource>(
    cloud: &PointCloud,
    level: u8,
    table: &SeverityTable,
    rng: &mut R,
) -> Result<PointCloud, CorruptError> {
    let rho = table.drop_global_rho[check_level(level)?];
    let n = cloud.len();
    if n < 2 {
        return Err(CorruptError::CloudTooSmall { needed: 2, got: n });
    }
    let dropped = (n as f64 * rho).floor() as usize;
    if dropped >= n {
        return Err(CorruptError::EmptyResult);
    }
    let perm = rng.permutation(n);
    let points = cloud.points();
    Ok(PointCloud::from_vec_unchecked(
        perm[..n - dropped].iter().map(|&i| points[i]).collect(),
    ))
}

/// Remove `K` points as `C` nearest-neighbour clusters. For each cluster a
/// surviving point is drawn uniformly and removed together with its
/// `N_i − 1` nearest neighbours *among the current survivors*; k-NN is
/// re-queried after every cluster. Survivors keep their original relative
/// order.
///
/// Draw order: cluster count, then the `C − 1` composition cuts, then one
/// surviving-index draw per cluster.
pub fn drop_local<R: RandomSource>(
    cloud: &PointCloud,
    level: u8,
    table: &SeverityTable,
    rng: &mut R,
) -> Result<PointCloud, CorruptError> {
    let k = table.drop_local_k[check_level(level)?] as usize;
    let n = cloud.len();
    if n <= k {
        return Err(CorruptError::CloudTooSmall { needed: k + 1, got: n });
    }
    let clusters = draw_cluster_count(rng, table, k)?;
    let sizes = compose_cluster_sizes(rng, clusters, k)?;

    let mut alive: Vec<Point3> = cloud.points().to_vec();
    for size in sizes {
        let center = rng.next_int_inclusive(0, alive.len() as i64 - 1)? as usize;
        let current = PointCloud::from_vec_unchecked(alive.clone());
        let doomed = knn_indices(&current, center, size)?;
        let mut mask = vec![true; alive.len()];
        for idx in doomed {
            mask[idx] = false;
        }
        let mut keep = mask.iter();
        alive.retain(|_| *keep.next().unwrap());
    }
    debug_assert_eq!(alive.len(), n - k);
    Ok(PointCloud::from_vec_unchecked(alive))
}

/// Append `K` points drawn uniformly inside the unit sphere; the original
/// points are preserved as an unmodified prefix.
pub fn add_global<R: RandomSource>(
    cloud: &PointCloud,
    level: u8,
    table: &SeverityTable,
    rng: &mut R,
) -> Result<PointCloud, CorruptError> {
    let k = table.add_global_k[check_level(level)?] as usize;
    let mut out = cloud.points().to_vec();
    for _ in 0..k {
        let [x, y, z] = rng.point_in_unit_sphere();
        out.push(Point3::new(x, y, z));
    }
    Ok(PointCloud::from_vec_unchecked(out))
}

/// Append `K` points as `C` Gaussian clusters centred on existing points.
/// No renormalization is applied, so cluster points may leave the unit
/// sphere.
///
/// Draw order: index permutation, cluster count (the first `C` shuffled
/// indices become centers), composition cuts, one sigma per cluster, then
/// per appended point three Gaussians in x, y, z order, clusters in order.
pub fn add_local<R: RandomSource>(
    cloud: &PointCloud,
    level: u8,
    table: &SeverityTable,
    rng: &mut R,
) -> Result<PointCloud, CorruptError> {
    let k = table.add_local_k[check_level(level)?] as usize;
    let n = cloud.len();
    let min_points = table.cluster_count_range[1] as usize;
    if n < min_points {
        return Err(CorruptError::CloudTooSmall { needed: min_points, got: n });
    }
    let perm = rng.permutation(n);
    let clusters = draw_cluster_count(rng, table, k)?;
    let sizes = compose_cluster_sizes(rng, clusters, k)?;
    let centers: Vec<usize> = perm[..clusters].to_vec();
    let [slo, shi] = table.add_local_sigma_range;
    let mut sigmas = Vec::with_capacity(clusters);
    for _ in 0..clusters {
        sigmas.push(rng.next_uniform(slo, shi)?);
    }
    let plan = ClusterPlan { sizes, centers, sigmas };

    let points = cloud.points();
    let mut out = points.to_vec();
    out.reserve(k);
    for i in 0..plan.cluster_count() {
        let mu = points[plan.centers[i]];
        let sigma = plan.sigmas[i];
        for _ in 0..plan.sizes[i] {
            let x = rng.next_gaussian(mu.x, sigma)?;
            let y = rng.next_gaussian(mu.y, sigma)?;
            let z = rng.next_gaussian(mu.z, sigma)?;
            out.push(Point3::new(x, y, z));
        }
    }
    Ok(PointCloud::from_vec_unchecked(out))
}

/// Dispatch to the operation named by `spec`; bit-identical to calling it
/// directly.
pub fn apply<R: RandomSource>(
    spec: &CorruptionSpec,
    cloud: &PointCloud,
    table: &SeverityTable,
    rng: &mut R,
) -> Result<PointCloud, CorruptError> {
    match spec.kind {
        CorruptionKind::Scale => scale(cloud, spec.level, table, rng),
        CorruptionKind::Jitter => jitter(cloud, spec.level, table, rng),
        CorruptionKind::DropGlobal => drop_global(cloud, spec.level, table, rng),
        CorruptionKind::DropLocal => drop_local(cloud, spec.level, table, rng),
        CorruptionKind::AddGlobal => add_global(cloud, spec.level, table, rng),
        CorruptionKind::AddLocal => add_local(cloud, spec.level, table, rng),
        CorruptionKind::Rotate => rotate(cloud, spec.level, table, rng),
    }
}

/// Apply a list of pairwise-distinct corruptions sequentially, threading one
/// stream left to right.
pub fn apply_composite<R: RandomSource>(
    specs: &[CorruptionSpec],
    cloud: &PointCloud,
    table: &SeverityTable,
    rng: &mut R,
) -> Result<PointCloud, CorruptError> {
    if specs.is_empty() {
        return Err(CorruptError::EmptySpecList);
    }
    for (i, spec) in specs.iter().enumerate() {
        if specs[..i].iter().any(|s| s.kind == spec.kind) {
            return Err(CorruptError::DuplicateKind(spec.kind));
        }
    }
    let mut out = apply(&specs[0], cloud, table, rng)?;
    for spec in &specs[1..] {
        out = apply(spec, &out, table, rng)?;
    }
    Ok(out)
}

/// Draw a uniformly random subset of `size` distinct kinds (the first `size`
/// entries of a 7-element permutation, kept in drawn order) and assign every
/// one the given level.
pub fn sample_composite<R: RandomSource>(
    rng: &mut R,
    size: usize,
    level: u8,
) -> Result<Vec<CorruptionSpec>, CorruptError> {
    if size < 1 || size > ALL_KINDS.len() {
        return Err(CorruptError::InvalidCompositeSize(size));
    }
    check_level(level)?;
    let perm = rng.permutation(ALL_KINDS.len());
    Ok(perm[..size]
        .iter()
        .map(|&i| CorruptionSpec { kind: ALL_KINDS[i], level })
        .collect())
}

/// Exact output cardinality for one corruption of an `n`-point cloud.
pub fn expected_count(
    kind: CorruptionKind,
    level: u8,
    table: &SeverityTable,
    n: usize,
) -> Result<usize, CorruptError> {
    let idx = check_level(level)?;
    Ok(match kind {
        CorruptionKind::Scale | CorruptionKind::Jitter | CorruptionKind::Rotate => n,
        CorruptionKind::DropGlobal => n - (n as f64 * table.drop_global_rho[idx]).floor() as usize,
        CorruptionKind::DropLocal => n - table.drop_local_k[idx] as usize,
        CorruptionKind::AddGlobal => n + table.add_global_k[idx] as usize,
        CorruptionKind::AddLocal => n + table.add_local_k[idx] as usize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_stream, RandomStream, SeedContext};
    use crate::test_stubs::{IdentityDraws, Scripted};
    use std::collections::HashSet;

    fn table() -> SeverityTable {
        SeverityTable::default()
    }

    fn stream(seed: u64) -> RandomStream {
        RandomStream::from_u64_seed(seed)
    }

    /// Deterministic pseudo-random test cloud of n points.
    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = stream(seed ^ 0x9e37);
        let pts = (0..n)
            .map(|_| {
                let [x, y, z] = rng.point_in_unit_sphere();
                Point3::new(x, y, z)
            })
            .collect();
        normalize_unit_sphere(&PointCloud::new(pts).unwrap()).unwrap()
    }

    fn as_bits(p: &Point3) -> (u64, u64, u64) {
        (p.x.to_bits(), p.y.to_bits(), p.z.to_bits())
    }

    #[test]
    fn kind_codes_and_names_are_stable() {
        for (code, kind) in ALL_KINDS.iter().enumerate() {
            assert_eq!(kind.code() as usize, code);
            assert_eq!(CorruptionKind::from_code(code as u8), Some(*kind));
            assert_eq!(kind.name().parse::<CorruptionKind>().unwrap(), *kind);
        }
        assert!("foo".parse::<CorruptionKind>().is_err());
    }

    #[test]
    fn severity_table_serde_partial_override() {
        let t: SeverityTable =
            serde_json::from_str(r#"{"jitter_sigma": [0.1, 0.2, 0.3, 0.4, 0.5]}"#).unwrap();
        assert_eq!(t.jitter_sigma[0], 0.1);
        assert_eq!(t.scale_s, table().scale_s);
        assert!(t.validate().is_ok());
        assert!(serde_json::from_str::<SeverityTable>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn severity_table_validation() {
        assert!(table().validate().is_ok());
        let mut t = table();
        t.jitter_sigma = [0.05, 0.04, 0.03, 0.02, 0.01];
        assert!(t.validate().is_err());
        let mut t = table();
        t.drop_global_rho = [0.25, 0.375, 0.5, 0.675, 1.5];
        assert!(t.validate().is_err());
    }

    #[test]
    fn invalid_levels_rejected() {
        let c = random_cloud(16, 1);
        for level in [0u8, 6] {
            assert_eq!(
                jitter(&c, level, &table(), &mut stream(0)).unwrap_err(),
                CorruptError::InvalidLevel(level)
            );
            assert!(matches!(
                apply(
                    &CorruptionSpec { kind: CorruptionKind::Jitter, level },
                    &c,
                    &table(),
                    &mut stream(0)
                ),
                Err(CorruptError::InvalidLevel(_))
            ));
        }
        assert!(CorruptionSpec::new(CorruptionKind::Scale, 6).is_err());
    }

    #[test]
    fn jitter_with_zero_noise_is_identity() {
        let c = random_cloud(64, 2);
        let mut rng = Scripted::mean_gaussians();
        let out = jitter(&c, 3, &table(), &mut rng).unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn jitter_preserves_count_and_matches_sigma() {
        let t = table();
        let mut pooled = Vec::new();
        for i in 0..200u64 {
            let c = random_cloud(256, 100 + i);
            let mut rng = stream(7000 + i);
            let out = jitter(&c, 3, &t, &mut rng).unwrap();
            assert_eq!(out.len(), c.len());
            for (a, b) in c.points().iter().zip(out.points()) {
                pooled.push(b.x - a.x);
                pooled.push(b.y - a.y);
                pooled.push(b.z - a.z);
            }
        }
        let n = pooled.len() as f64;
        let mean = pooled.iter().sum::<f64>() / n;
        let var = pooled.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        assert!((std - 0.03).abs() < 0.0003, "pooled std {std}");
    }

    #[test]
    fn scale_identity_factors_fix_normalized_cloud() {
        let c = random_cloud(64, 3);
        let mut rng = Scripted::uniforms(vec![1.0, 1.0, 1.0]);
        let out = scale(&c, 2, &table(), &mut rng).unwrap();
        for (a, b) in c.points().iter().zip(out.points()) {
            assert!(a.dist(b) < 1e-9);
        }
    }

    #[test]
    fn scale_renormalizes_and_reproduces_recorded_factors() {
        let c = random_cloud(200, 4);
        let mut rng = stream(999);
        let mut probe = rng.clone();
        let s = table().scale_s[4];
        let sx = probe.next_uniform(1.0 / s, s).unwrap();
        let sy = probe.next_uniform(1.0 / s, s).unwrap();
        let sz = probe.next_uniform(1.0 / s, s).unwrap();

        let out = scale(&c, 5, &table(), &mut rng).unwrap();
        assert_eq!(out.len(), c.len());
        assert!((out.max_norm() - 1.0).abs() < 1e-9);

        let extent = |cl: &PointCloud, axis: usize| {
            let vals: Vec<f64> = cl
                .points()
                .iter()
                .map(|p| match axis {
                    0 => p.x,
                    1 => p.y,
                    _ => p.z,
                })
                .collect();
            vals.iter().cloned().fold(f64::MIN, f64::max)
                - vals.iter().cloned().fold(f64::MAX, f64::min)
        };
        let rx = extent(&out, 0) / extent(&c, 0);
        let ry = extent(&out, 1) / extent(&c, 1);
        let rz = extent(&out, 2) / extent(&c, 2);
        assert!((rx / rz - sx / sz).abs() < 1e-9);
        assert!((ry / rz - sy / sz).abs() < 1e-9);
    }

    #[test]
    fn rotate_zero_angles_is_identity() {
        let c = random_cloud(64, 5);
        let mut rng = Scripted::uniforms(vec![0.0, 0.0, 0.0]);
        assert_eq!(rotate(&c, 1, &table(), &mut rng).unwrap(), c);
    }

    #[test]
    fn rotate_preserves_pairwise_distances_and_bounds_angles() {
        let c = random_cloud(40, 6);
        let mut rng = stream(321);
        let mut probe = rng.clone();
        let theta = table().rotate_theta[4];
        for _ in 0..3 {
            let a = probe.next_uniform(-theta, theta).unwrap();
            assert!(a.abs() <= std::f64::consts::PI / 6.0);
        }
        let out = rotate(&c, 5, &table(), &mut rng).unwrap();
        for i in 0..c.len() {
            for j in (i + 1)..c.len() {
                let before = c.points()[i].dist(&c.points()[j]);
                let after = out.points()[i].dist(&out.points()[j]);
                assert!((after - before).abs() <= 1e-9 * before.max(1.0));
            }
        }
    }

    #[test]
    fn drop_global_counts_and_subset() {
        let c = random_cloud(1024, 7);
        let out1 = drop_global(&c, 1, &table(), &mut stream(1)).unwrap();
        assert_eq!(out1.len(), 768);
        let out4 = drop_global(&c, 4, &table(), &mut stream(2)).unwrap();
        assert_eq!(out4.len(), 333);

        let input: HashSet<_> = c.points().iter().map(as_bits).collect();
        assert!(out4.points().iter().all(|p| input.contains(&as_bits(p))));

        let tiny = PointCloud::from_coords(&[[0.0, 0.0, 1.0]]).unwrap();
        assert!(matches!(
            drop_global(&tiny, 1, &table(), &mut stream(3)),
            Err(CorruptError::CloudTooSmall { .. })
        ));
    }

    #[test]
    fn drop_local_counts_subset_and_order() {
        let c = random_cloud(1024, 8);
        let out = drop_local(&c, 2, &table(), &mut stream(11)).unwrap();
        assert_eq!(out.len(), 824);

        let input: HashSet<_> = c.points().iter().map(as_bits).collect();
        assert!(out.points().iter().all(|p| input.contains(&as_bits(p))));

        // survivors keep their original relative order
        let mut cursor = 0usize;
        for p in out.points() {
            let target = as_bits(p);
            while cursor < c.len() && as_bits(&c.points()[cursor]) != target {
                cursor += 1;
            }
            assert!(cursor < c.len(), "survivor out of order");
            cursor += 1;
        }

        let small = random_cloud(100, 9);
        assert!(matches!(
            drop_local(&small, 2, &table(), &mut stream(4)),
            Err(CorruptError::CloudTooSmall { .. })
        ));
    }

    #[test]
    fn drop_local_single_cluster_equals_knn_ball_removal() {
        let c = random_cloud(300, 10);
        let k = table().drop_local_k[0] as usize; // 100
        // scripted draws: C = 1, no cuts, center index 17
        let mut rng = Scripted::ints(vec![1, 17]);
        let out = drop_local(&c, 1, &table(), &mut rng).unwrap();

        let ball: HashSet<usize> = knn_indices(&c, 17, k).unwrap().into_iter().collect();
        let expected: Vec<Point3> = c
            .points()
            .iter()
            .enumerate()
            .filter(|(i, _)| !ball.contains(i))
            .map(|(_, p)| *p)
            .collect();
        assert_eq!(out.points(), expected.as_slice());
    }

    #[test]
    fn add_global_appends_inside_unit_sphere() {
        let c = random_cloud(1024, 12);
        let out = add_global(&c, 5, &table(), &mut stream(13)).unwrap();
        assert_eq!(out.len(), 1074);
        assert_eq!(&out.points()[..1024], c.points());
        for p in &out.points()[1024..] {
            assert!(p.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn add_local_counts_and_center_coincidence() {
        let c = random_cloud(1024, 14);
        let out = add_local(&c, 1, &table(), &mut stream(15)).unwrap();
        assert_eq!(out.len(), 1124);
        assert_eq!(&out.points()[..1024], c.points());

        // with zero-noise Gaussians every appended point sits on its center
        let mut rng = Scripted::mean_gaussians();
        let out = add_local(&c, 1, &table(), &mut rng).unwrap();
        let input: HashSet<_> = c.points().iter().map(as_bits).collect();
        for p in &out.points()[1024..] {
            assert!(input.contains(&as_bits(p)));
        }

        let tiny = random_cloud(4, 16);
        assert!(matches!(
            add_local(&tiny, 1, &table(), &mut stream(5)),
            Err(CorruptError::CloudTooSmall { .. })
        ));
    }

    #[test]
    fn add_local_cluster_sigma_statistics() {
        let t = table();
        let mut normalized = Vec::new();
        for i in 0..1000u64 {
            let c = random_cloud(64, 20_000 + i);
            let mut rng = stream(30_000 + i);
            // replicate the op's leading draws to recover the cluster plan
            let mut probe = rng.clone();
            let perm = probe.permutation(c.len());
            let clusters = draw_cluster_count(&mut probe, &t, 100).unwrap();
            let sizes = compose_cluster_sizes(&mut probe, clusters, 100).unwrap();
            let centers: Vec<usize> = perm[..clusters].to_vec();
            let mut sigmas = Vec::new();
            for _ in 0..clusters {
                sigmas.push(probe.next_uniform(0.075, 0.125).unwrap());
            }

            let out = add_local(&c, 1, &t, &mut rng).unwrap();
            let mut offset = c.len();
            for (ci, &size) in sizes.iter().enumerate() {
                let mu = c.points()[centers[ci]];
                for p in &out.points()[offset..offset + size] {
                    let d = p.sub(&mu);
                    normalized.push(d.x / sigmas[ci]);
                    normalized.push(d.y / sigmas[ci]);
                    normalized.push(d.z / sigmas[ci]);
                }
                offset += size;
            }
        }
        let n = normalized.len() as f64;
        let mean = normalized.iter().sum::<f64>() / n;
        let std =
            (normalized.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((std - 1.0).abs() < 0.05, "normalized std {std}");
    }

    #[test]
    fn compose_sizes_uniform_over_compositions() {
        let mut rng = stream(55);
        let mut counts = std::collections::HashMap::new();
        let trials = 200_000;
        for _ in 0..trials {
            let sizes = compose_cluster_sizes(&mut rng, 2, 5).unwrap();
            assert_eq!(sizes.iter().sum::<usize>(), 5);
            assert!(sizes.iter().all(|&s| s >= 1));
            *counts.entry(sizes).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 4);
        for (sizes, c) in counts {
            let f = c as f64 / trials as f64;
            assert!((f - 0.25).abs() < 0.005, "{sizes:?}: {f}");
        }
    }

    #[test]
    fn apply_dispatch_is_bit_exact() {
        let c = random_cloud(640, 17);
        for kind in ALL_KINDS {
            let spec = CorruptionSpec { kind, level: 3 };
            let mut a = stream(77);
            let mut b = stream(77);
            let via_apply = apply(&spec, &c, &table(), &mut a).unwrap();
            let direct = match kind {
                CorruptionKind::Scale => scale(&c, 3, &table(), &mut b),
                CorruptionKind::Jitter => jitter(&c, 3, &table(), &mut b),
                CorruptionKind::DropGlobal => drop_global(&c, 3, &table(), &mut b),
                CorruptionKind::DropLocal => drop_local(&c, 3, &table(), &mut b),
                CorruptionKind::AddGlobal => add_global(&c, 3, &table(), &mut b),
                CorruptionKind::AddLocal => add_local(&c, 3, &table(), &mut b),
                CorruptionKind::Rotate => rotate(&c, 3, &table(), &mut b),
            }
            .unwrap();
            assert_eq!(via_apply, direct);
        }
    }

    #[test]
    fn composite_cardinality_and_validation() {
        let c = random_cloud(1024, 18);
        let specs = [
            CorruptionSpec { kind: CorruptionKind::DropGlobal, level: 1 },
            CorruptionSpec { kind: CorruptionKind::AddGlobal, level: 1 },
        ];
        let out = apply_composite(&specs, &c, &table(), &mut stream(19)).unwrap();
        assert_eq!(out.len(), 778);

        let single = [CorruptionSpec { kind: CorruptionKind::Jitter, level: 2 }];
        let mut a = stream(20);
        let mut b = stream(20);
        assert_eq!(
            apply_composite(&single, &c, &table(), &mut a).unwrap(),
            apply(&single[0], &c, &table(), &mut b).unwrap()
        );

        let dup = [
            CorruptionSpec { kind: CorruptionKind::Jitter, level: 2 },
            CorruptionSpec { kind: CorruptionKind::Jitter, level: 3 },
        ];
        assert_eq!(
            apply_composite(&dup, &c, &table(), &mut stream(21)).unwrap_err(),
            CorruptError::DuplicateKind(CorruptionKind::Jitter)
        );
        assert_eq!(
            apply_composite(&[], &c, &table(), &mut stream(22)).unwrap_err(),
            CorruptError::EmptySpecList
        );

        // determinism under cloned streams
        let mut a = stream(23);
        let mut b = a.clone();
        assert_eq!(
            apply_composite(&specs, &c, &table(), &mut a).unwrap(),
            apply_composite(&specs, &c, &table(), &mut b).unwrap()
        );
    }

    #[test]
    fn composite_sampler_draws_distinct_kinds() {
        let mut rng = stream(24);
        for size in 1..=7 {
            let specs = sample_composite(&mut rng, size, 4).unwrap();
            assert_eq!(specs.len(), size);
            let kinds: HashSet<_> = specs.iter().map(|s| s.kind).collect();
            assert_eq!(kinds.len(), size);
            assert!(specs.iter().all(|s| s.level == 4));
        }
        assert!(sample_composite(&mut rng, 0, 1).is_err());
        assert!(sample_composite(&mut rng, 8, 1).is_err());
    }

    #[test]
    fn expected_count_matches_reality() {
        let t = table();
        for n in [1024usize, 777, 2048] {
            let c = random_cloud(n, n as u64);
            for kind in ALL_KINDS {
                for level in 1..=5u8 {
                    let spec = CorruptionSpec { kind, level };
                    let expected = expected_count(kind, level, &t, n).unwrap();
                    let out = apply(&spec, &c, &t, &mut stream(n as u64 + level as u64)).unwrap();
                    assert_eq!(out.len(), expected, "{kind} L{level} N={n}");
                }
            }
        }
    }

    #[test]
    fn identity_stub_covers_all_ranges() {
        // IdentityDraws maps every symmetric range to 0 and positive ranges to 1
        let mut rng = IdentityDraws::new(0);
        assert_eq!(rng.next_uniform(-0.25, 0.25).unwrap(), 0.0);
        assert_eq!(rng.next_uniform(1.0, 3.0).unwrap(), 1.0);
        assert_eq!(rng.next_gaussian(0.7, 0.1).unwrap(), 0.7);
        assert_eq!(rng.next_int_inclusive(1, 8).unwrap(), 1);
    }

    #[test]
    fn suite_reproducibility_through_seed_contexts() {
        let c = random_cloud(640, 25);
        let gen = |seed: u64| -> Vec<PointCloud> {
            let mut out = Vec::new();
            for kind in ALL_KINDS {
                for level in 1..=5u8 {
                    let ctx = SeedContext::new(seed, kind.code(), level, 7).unwrap();
                    let mut rng = derive_stream(&ctx);
                    out.push(
                        apply(
                            &CorruptionSpec { kind, level },
                            &c,
                            &SeverityTable::default(),
                            &mut rng,
                        )
                        .unwrap(),
                    );
                }
            }
            out
        };
        assert_eq!(gen(42), gen(42));
    }
}
