//! Training-time augmentation: anchor-based local deformation, rigid subset
//! mixing with label mixing, and the conventional train-protocol transforms.
//!
//! This module is deliberately self-contained on top of `geom` and `rng`.
//! It must never call into the test-suite perturbation engine; a static
//! dependency test enforces that boundary.

use crate::geom::{
    farthest_point_sample, knn_indices, normalize_unit_sphere, GeomError, Point3, PointCloud,
};
use crate::rng::{RandomSource, RngError};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AugmentError {
    #[error("cloud of {got} points is too small (needs {needed})")]
    CloudTooSmall { needed: usize, got: usize },
    #[error("paired clouds must have equal counts ({a} vs {b})")]
    CountMismatch { a: usize, b: usize },
    #[error("n_max = {n_max} exceeds cloud size {count}")]
    NMaxTooLarge { n_max: usize, count: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Rng(#[from] RngError),
}

/// Parameters of the anchor-based local deformation.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformConfig {
    /// Number of anchor points selected by farthest point sampling.
    pub num_anchors: usize,
    /// Gaussian kernel bandwidth h, in model units.
    pub kernel_bandwidth: f64,
    /// Per-axis local rotation bound, in degrees.
    pub max_local_rotation_deg: f64,
    /// Per-axis local scale upper bound; scales draw from U(1, max).
    pub max_local_scale: f64,
    /// Per-axis local translation bound, in model units.
    pub max_local_translation: f64,
}

impl Default for DeformConfig {
    fn default() -> Self {
        DeformConfig {
            num_anchors: 4,
            kernel_bandwidth: 0.5,
            max_local_rotation_deg: 10.0,
            max_local_scale: 3.0,
            max_local_translation: 0.25,
        }
    }
}

impl DeformConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        if self.num_anchors == 0 {
            return Err(AugmentError::InvalidConfig("num_anchors must be >= 1".into()));
        }
        for (name, v) in [
            ("kernel_bandwidth", self.kernel_bandwidth),
            ("max_local_rotation_deg", self.max_local_rotation_deg),
            ("max_local_translation", self.max_local_translation),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(AugmentError::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if !self.max_local_scale.is_finite() || self.max_local_scale <= 1.0 {
            return Err(AugmentError::InvalidConfig("max_local_scale must exceed 1".into()));
        }
        Ok(())
    }
}

/// Parameters of the rigid mixing step.
#[derive(Debug, Clone, PartialEq)]
pub struct MixConfig {
    /// Probability that a pair is mixed at all.
    pub mix_probability: f64,
    /// Shape of the symmetric Beta distribution for the mix ratio.
    pub beta: f64,
    /// Maximum number of points transplanted between the pair.
    pub n_max: usize,
}

impl Default for MixConfig {
    fn default() -> Self {
        MixConfig { mix_probability: 0.5, beta: 1.0, n_max: 512 }
    }
}

impl MixConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        if !(0.0..=1.0).contains(&self.mix_probability) {
            return Err(AugmentError::InvalidConfig("mix_probability must be in [0, 1]".into()));
        }
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return Err(AugmentError::InvalidConfig("beta must be positive".into()));
        }
        if self.n_max == 0 {
            return Err(AugmentError::InvalidConfig("n_max must be >= 1".into()));
        }
        Ok(())
    }
}

/// A probability distribution over at most two class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedLabel {
    entries: Vec<(u16, f64)>,
}

impl MixedLabel {
    pub fn pure(label: u16) -> Self {
        MixedLabel { entries: vec![(label, 1.0)] }
    }

    pub fn mixed(label_a: u16, weight_a: f64, label_b: u16, weight_b: f64) -> Self {
        MixedLabel { entries: vec![(label_a, weight_a), (label_b, weight_b)] }
    }

    /// `(label, weight)` pairs; one entry for pure labels, two otherwise.
    pub fn entries(&self) -> &[(u16, f64)] {
        &self.entries
    }

    pub fn is_mixed(&self) -> bool {
        self.entries.len() == 2 && self.entries[1].1 > 0.0
    }

    /// Simplex invariant: weights non-negative and summing to 1.
    pub fn weight_error(&self) -> f64 {
        if self.entries.iter().any(|(_, w)| *w < 0.0) {
            return f64::INFINITY;
        }
        (self.entries.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs()
    }
}

/// Gaussian kernel weights of every point against every anchor, each row
/// normalized to sum 1. Rows whose kernels all underflow below 1e−12 fall
/// back to uniform weights.
pub(crate) fn kernel_weights(points: &[Point3], anchors: &[Point3], bandwidth: f64) -> Vec<Vec<f64>> {
    let denom = 2.0 * bandwidth * bandwidth;
    points
        .iter()
        .map(|p| {
            let kernels: Vec<f64> =
                anchors.iter().map(|a| (-p.dist_sq(a) / denom).exp()).collect();
            let max = kernels.iter().cloned().fold(0.0, f64::max);
            if max < 1e-12 {
                vec![1.0 / anchors.len() as f64; anchors.len()]
            } else {
                let sum: f64 = kernels.iter().sum();
                kernels.into_iter().map(|k| k / sum).collect()
            }
        })
        .collect()
}

struct AnchorTransform {
    anchor: Point3,
    rotation: crate::geom::RotationMatrix,
    scale: Point3,
    translation: Point3,
}

impl AnchorTransform {
    fn apply(&self, p: &Point3) -> Point3 {
        // rotate, then scale, then translate, all about the anchor
        let local = self.rotation.apply(&p.sub(&self.anchor));
        self.anchor.add(&local.mul_axes(&self.scale)).add(&self.translation)
    }
}

/// Smooth local deformation: anchors are chosen by farthest point sampling
/// from a stream-drawn start index, each anchor samples an independent local
/// transform, and every point moves to the kernel-weighted blend of its
/// images. The result is re-normalized to the unit sphere; count and order
/// are preserved.
///
/// Draw order: one start-index draw, then per anchor (in selection order)
/// three rotation angles, three scales and three translations.
pub fn pointwolf_deform<R: RandomSource>(
    cloud: &PointCloud,
    cfg: &DeformConfig,
    rng: &mut R,
) -> Result<PointCloud, AugmentError> {
    cfg.validate()?;
    let n = cloud.len();
    if n < cfg.num_anchors {
        return Err(AugmentError::CloudTooSmall { needed: cfg.num_anchors, got: n });
    }
    let start = rng.next_int_inclusive(0, n as i64 - 1)? as usize;
    let anchor_idx = farthest_point_sample(cloud, cfg.num_anchors, start)?;
    let points = cloud.points();
    let anchors: Vec<Point3> = anchor_idx.iter().map(|&i| points[i]).collect();

    let rot_bound = cfg.max_local_rotation_deg.to_radians();
    let mut transforms = Vec::with_capacity(anchors.len());
    for &anchor in &anchors {
        let rx = rng.next_uniform(-rot_bound, rot_bound)?;
        let ry = rng.next_uniform(-rot_bound, rot_bound)?;
        let rz = rng.next_uniform(-rot_bound, rot_bound)?;
        let sx = rng.next_uniform(1.0, cfg.max_local_scale)?;
        let sy = rng.next_uniform(1.0, cfg.max_local_scale)?;
        let sz = rng.next_uniform(1.0, cfg.max_local_scale)?;
        let tx = rng.next_uniform(-cfg.max_local_translation, cfg.max_local_translation)?;
        let ty = rng.next_uniform(-cfg.max_local_translation, cfg.max_local_translation)?;
        let tz = rng.next_uniform(-cfg.max_local_translation, cfg.max_local_translation)?;
        transforms.push(AnchorTransform {
            anchor,
            rotation: crate::geom::euler_rotation_matrix(rx, ry, rz)?,
            scale: Point3::new(sx, sy, sz),
            translation: Point3::new(tx, ty, tz),
        });
    }

    let weights = kernel_weights(points, &anchors, cfg.kernel_bandwidth);
    let deformed: Vec<Point3> = points
        .iter()
        .zip(&weights)
        .map(|(p, w)| {
            let mut out = Point3::ORIGIN;
            for (t, &wa) in transforms.iter().zip(w) {
                out = out.add(&t.apply(p).scale(wa));
            }
            out
        })
        .collect();
    Ok(normalize_unit_sphere(&PointCloud::from_vec_unchecked(deformed))?)
}

/// Draw from a symmetric Beta(beta, beta). `beta == 1` is the uniform
/// special case (one draw); otherwise Jöhnk's method draws uniform pairs
/// until acceptance.
fn draw_mix_ratio<R: RandomSource>(rng: &mut R, beta: f64) -> Result<f64, RngError> {
    if beta == 1.0 {
        return rng.next_uniform(0.0, 1.0);
    }
    let exponent = 1.0 / beta;
    loop {
        let x = rng.next_uniform(0.0, 1.0)?.powf(exponent);
        let y = rng.next_uniform(0.0, 1.0)?.powf(exponent);
        if x + y <= 1.0 && x + y > 0.0 {
            return Ok(x / (x + y));
        }
    }
}

/// Rigidly transplant a neighbourhood of `cloud_b` into `cloud_a`.
///
/// A mix ratio λ ~ Beta(β, β) sets the subset size `n = floor(λ·n_max)`.
/// When `n > 0`, the `n` nearest neighbours of a random point of B are
/// translated (rigidly, preserving their pairwise distances) so their
/// centroid lands on the centroid of the removed `n`-neighbourhood of a
/// random point of A. Output count always equals the input count; the label
/// weights are `1 − n/N` and `n/N`.
///
/// Draw order: λ, then the B query index, then the A query index.
pub fn rsmix<R: RandomSource>(
    cloud_a: &PointCloud,
    label_a: u16,
    cloud_b: &PointCloud,
    label_b: u16,
    cfg: &MixConfig,
    rng: &mut R,
) -> Result<(PointCloud, MixedLabel), AugmentError> {
    cfg.validate()?;
    let n_points = cloud_a.len();
    if cloud_b.len() != n_points {
        return Err(AugmentError::CountMismatch { a: n_points, b: cloud_b.len() });
    }
    if cfg.n_max > n_points {
        return Err(AugmentError::NMaxTooLarge { n_max: cfg.n_max, count: n_points });
    }

    let lambda = draw_mix_ratio(rng, cfg.beta)?;
    let n = ((lambda * cfg.n_max as f64).floor() as usize).min(cfg.n_max);
    if n == 0 {
        return Ok((cloud_a.clone(), MixedLabel::pure(label_a)));
    }

    let query_b = rng.next_int_inclusive(0, n_points as i64 - 1)? as usize;
    let subset_b = knn_indices(cloud_b, query_b, n)?;
    let query_a = rng.next_int_inclusive(0, n_points as i64 - 1)? as usize;
    let removed_a: std::collections::HashSet<usize> =
        knn_indices(cloud_a, query_a, n)?.into_iter().collect();

    fn centroid_of(cloud: &PointCloud, indices: impl Iterator<Item = usize>) -> Point3 {
        let mut acc = Point3::ORIGIN;
        let mut count = 0usize;
        for i in indices {
            acc = acc.add(&cloud.points()[i]);
            count += 1;
        }
        acc.scale(1.0 / count as f64)
    }
    let centroid_b = centroid_of(cloud_b, subset_b.iter().copied());
    let centroid_a = centroid_of(cloud_a, removed_a.iter().copied());
    let shift = centroid_a.sub(&centroid_b);

    let mut out: Vec<Point3> = cloud_a
        .points()
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed_a.contains(i))
        .map(|(_, p)| *p)
        .collect();
    out.extend(subset_b.iter().map(|&i| cloud_b.points()[i].add(&shift)));
    debug_assert_eq!(out.len(), n_points);

    let weight_b = n as f64 / n_points as f64;
    Ok((
        PointCloud::from_vec_unchecked(out),
        MixedLabel::mixed(label_a, 1.0 - weight_b, label_b, weight_b),
    ))
}

/// Deform both clouds, then mix them with probability `mix_probability`.
///
/// Stream discipline (normative for reproducibility): two child streams are
/// split off in A-then-B order and drive the two deformations; the mix
/// decision and all mix draws then come from the parent stream.
pub fn wolfmix<R: RandomSource>(
    cloud_a: &PointCloud,
    label_a: u16,
    cloud_b: &PointCloud,
    label_b: u16,
    dcfg: &DeformConfig,
    mcfg: &MixConfig,
    rng: &mut R,
) -> Result<(PointCloud, MixedLabel), AugmentError> {
    if cloud_a.len() != cloud_b.len() {
        return Err(AugmentError::CountMismatch { a: cloud_a.len(), b: cloud_b.len() });
    }
    mcfg.validate()?;
    let mut stream_a = rng.split();
    let mut stream_b = rng.split();
    let deformed_a = pointwolf_deform(cloud_a, dcfg, &mut stream_a)?;
    let deformed_b = pointwolf_deform(cloud_b, dcfg, &mut stream_b)?;
    let u = rng.next_uniform(0.0, 1.0)?;
    if u < mcfg.mix_probability {
        rsmix(&deformed_a, label_a, &deformed_b, label_b, mcfg, rng)
    } else {
        Ok((deformed_a, MixedLabel::pure(label_a)))
    }
}

/// Conventional train-protocol transform: per-axis scale U(2/3, 3/2) then
/// per-axis translation U(−0.2, 0.2), with no renormalization.
pub fn conventional_augment<R: RandomSource>(
    cloud: &PointCloud,
    rng: &mut R,
) -> Result<PointCloud, AugmentError> {
    let sx = rng.next_uniform(2.0 / 3.0, 1.5)?;
    let sy = rng.next_uniform(2.0 / 3.0, 1.5)?;
    let sz = rng.next_uniform(2.0 / 3.0, 1.5)?;
    let tx = rng.next_uniform(-0.2, 0.2)?;
    let ty = rng.next_uniform(-0.2, 0.2)?;
    let tz = rng.next_uniform(-0.2, 0.2)?;
    let s = Point3::new(sx, sy, sz);
    let t = Point3::new(tx, ty, tz);
    Ok(PointCloud::from_vec_unchecked(
        cloud.points().iter().map(|p| p.mul_axes(&s).add(&t)).collect(),
    ))
}
