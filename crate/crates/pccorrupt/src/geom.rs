//! Geometric kernels shared by the corruption and augmentation pipelines:
//! unit-sphere normalization, exact k-NN, farthest point sampling and Euler
//! rotations.
//!
//! Everything here is a pure function of its inputs and computes in `f64`.
//! Tie-breaking is always "lower index wins" so results are total functions
//! of the input.

use thiserror::Error;

/// Minimum cloud extent (max distance from centroid) accepted by
/// [`normalize_unit_sphere`].
pub const DEGENERACY_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("point cloud must contain at least one point")]
    EmptyCloud,
    #[error("point {index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },
    #[error("degenerate cloud: all points coincide")]
    DegenerateCloud,
    #[error("index {index} out of range for cloud of {count} points")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("k = {k} exceeds cloud size {count}")]
    KTooLarge { k: usize, count: usize },
    #[error("m = {m} exceeds cloud size {count}")]
    MTooLarge { m: usize, count: usize },
    #[error("non-finite rotation angle")]
    NonFiniteAngle,
}

/// A point in 3-space, always in model units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn add(&self, other: &Point3) -> Point3 {
        Point3::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn sub(&self, other: &Point3) -> Point3 {
        Point3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn scale(&self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }

    /// Component-wise product, used for anisotropic scaling.
    pub fn mul_axes(&self, s: &Point3) -> Point3 {
        Point3::new(self.x * s.x, self.y * s.y, self.z * s.z)
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist_sq(&self, other: &Point3) -> f64 {
        self.sub(other).norm_sq()
    }

    pub fn dist(&self, other: &Point3) -> f64 {
        self.dist_sq(other).sqrt()
    }
}

/// An ordered point cloud. Order is semantically irrelevant to classification
/// but is preserved bit-for-bit by every operation that does not explicitly
/// shuffle; that is part of the determinism contract.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
}

impl PointCloud {
    /// Validates the type invariants: at least one point, all coordinates finite.
    pub fn new(points: Vec<Point3>) -> Result<Self, GeomError> {
        if points.is_empty() {
            return Err(GeomError::EmptyCloud);
        }
        if let Some(index) = points.iter().position(|p| !p.is_finite()) {
            return Err(GeomError::NonFinitePoint { index });
        }
        Ok(PointCloud { points })
    }

    /// Constructor for operation outputs whose finiteness follows from the
    /// finiteness of their inputs.
    pub(crate) fn from_vec_unchecked(points: Vec<Point3>) -> Self {
        debug_assert!(!points.is_empty());
        debug_assert!(points.iter().all(|p| p.is_finite()));
        PointCloud { points }
    }

    pub fn from_coords(coords: &[[f64; 3]]) -> Result<Self, GeomError> {
        Self::new(coords.iter().map(|c| Point3::new(c[0], c[1], c[2])).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn centroid(&self) -> Point3 {
        let mut acc = Point3::ORIGIN;
        for p in &self.points {
            acc = acc.add(p);
        }
        acc.scale(1.0 / self.points.len() as f64)
    }

    /// Largest point norm (distance from the origin).
    pub fn max_norm(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

/// A proper rotation: orthonormal with determinant +1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix {
    /// Row-major entries; applied to column vectors as `y = R x`.
    pub m: [[f64; 3]; 3],
}

impl RotationMatrix {
    pub const IDENTITY: RotationMatrix = RotationMatrix {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub fn apply(&self, p: &Point3) -> Point3 {
        let m = &self.m;
        Point3::new(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z,
            m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
            m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z,
        )
    }

    /// Max elementwise deviation of `RᵀR` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let m = &self.m;
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                // (RᵀR)[i][j] = Σ_k m[k][i]·m[k][j]
                let mut dot = 0.0;
                for row in m {
                    dot += row[i] * row[j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// Center the cloud at its centroid and scale so the farthest point has norm
/// exactly 1. Shape is preserved up to translation and uniform scale; point
/// order is preserved.
pub fn normalize_unit_sphere(cloud: &PointCloud) -> Result<PointCloud, GeomError> {
    let centroid = cloud.centroid();
    let centered: Vec<Point3> = cloud.points().iter().map(|p| p.sub(&centroid)).collect();
    let max_norm = centered.iter().map(|p| p.norm()).fold(0.0, f64::max);
    if max_norm <= DEGENERACY_EPS {
        return Err(GeomError::DegenerateCloud);
    }
    let inv = 1.0 / max_norm;
    Ok(PointCloud::from_vec_unchecked(
        centered.into_iter().map(|p| p.scale(inv)).collect(),
    ))
}

/// Exact k-nearest-neighbour query by brute force over squared distances.
///
/// The query index itself is always the first result; the remaining
/// candidates are ordered by squared Euclidean distance to the query point
/// with ties broken by lower index. Exhaustive `O(N)` scan by design: at the
/// cloud sizes this library targets it is sub-millisecond and has no
/// spatial-index nondeterminism.
pub fn knn_indices(cloud: &PointCloud, query_index: usize, k: usize) -> Result<Vec<usize>, GeomError> {
    let n = cloud.len();
    if query_index >= n {
        return Err(GeomError::IndexOutOfRange { index: query_index, count: n });
    }
    if k < 1 || k > n {
        return Err(GeomError::KTooLarge { k, count: n });
    }
    let query = cloud.points()[query_index];
    let mut rest: Vec<(f64, usize)> = cloud
        .points()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != query_index)
        .map(|(i, p)| (p.dist_sq(&query), i))
        .collect();
    let take = k - 1;
    if take > 0 && take < rest.len() {
        rest.select_nth_unstable_by(take - 1, |a, b| a.partial_cmp(b).unwrap());
        rest.truncate(take);
    }
    rest.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = Vec::with_capacity(k);
    out.push(query_index);
    out.extend(rest.iter().take(take).map(|&(_, i)| i));
    Ok(out)
}

/// Greedy farthest point sampling.
///
/// The first selected index is `start_index`; each subsequent selection
/// maximizes the minimum squared distance to the already-selected set, ties
/// broken by lower index. Returns `m` distinct indices in selection order.
pub fn farthest_point_sample(
    cloud: &PointCloud,
    m: usize,
    start_index: usize,
) -> Result<Vec<usize>, GeomError> {
    let n = cloud.len();
    if start_index >= n {
        return Err(GeomError::IndexOutOfRange { index: start_index, count: n });
    }
    if m < 1 || m > n {
        return Err(GeomError::MTooLarge { m, count: n });
    }
    let points = cloud.points();
    let mut selected = Vec::with_capacity(m);
    selected.push(start_index);
    let mut min_dist_sq: Vec<f64> = points
        .iter()
        .map(|p| p.dist_sq(&points[start_index]))
        .collect();
    while selected.len() < m {
        let mut best = usize::MAX;
        let mut best_d = -1.0;
        for (i, &d) in min_dist_sq.iter().enumerate() {
            if d > best_d {
                best_d = d;
                best = i;
            }
        }
        selected.push(best);
        for (i, d) in min_dist_sq.iter_mut().enumerate() {
            let nd = points[i].dist_sq(&points[best]);
            if nd < *d {
                *d = nd;
            }
        }
    }
    Ok(selected)
}

/// Rotation from Euler angles with the convention `R = R_z(γ)·R_y(β)·R_x(α)`
/// acting on column vectors (extrinsic rotations about the fixed axes, X
/// first, then Y, then Z).
pub fn euler_rotation_matrix(alpha: f64, beta: f64, gamma: f64) -> Result<RotationMatrix, GeomError> {
    if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
        return Err(GeomError::NonFiniteAngle);
    }
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    let rx = [[1.0, 0.0, 0.0], [0.0, ca, -sa], [0.0, sa, ca]];
    let ry = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
    let rz = [[cg, -sg, 0.0], [sg, cg, 0.0], [0.0, 0.0, 1.0]];
    Ok(RotationMatrix { m: mat_mul(&rz, &mat_mul(&ry, &rx)) })
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}
