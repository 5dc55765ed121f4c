//! Cameras, fundamental matrices and the diagonalization of the epipolar
//! constraint.
//!
//! The epipolar form `(x1;1)^T F (x2;1)` is rewritten as a quadratic form
//! `(x;1)^T Q(F) (x;1)` in the stacked point `x = (x1; x2)`. When the top-left
//! 2x2 block of `F` is invertible, `Q(F)` has a one-dimensional kernel spanned
//! by `(k(F); 1)`, where `k(F)` stacks the two epipoles, and the constraint
//! becomes `(x - k)^T P(F) (x - k) = 0` with `P(F)` the top-left 4x4 block.
//! Diagonalizing `P(F) = R diag(a1, -a1, a2, -a2) R^T` gives the local
//! coordinates `y = R^T (x - k)` used by every solver in this crate.

use nalgebra::{Matrix2, Matrix3, Matrix3x4, Matrix4, Matrix5, Vector2, Vector3, Vector4};

use crate::error::{Result, TriangulationError};

const CAMERA_RANK_TOL: f64 = 1e-12;
const ROTATION_TOL: f64 = 1e-9;
const RANK_TWO_TOL: f64 = 1e-10;
const SINGULAR_F22_TOL: f64 = 1e-12;
const COINCIDENT_TOL: f64 = 1e-12;

/// A projective camera `x ~ C (X; 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraMatrix {
    entries: Matrix3x4<f64>,
    calibrated: bool,
}

impl CameraMatrix {
    /// Wraps a full-rank 3x4 matrix. The camera is flagged as calibrated when
    /// its left 3x3 block is a rotation.
    pub fn new(entries: Matrix3x4<f64>) -> Result<Self> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(TriangulationError::NonFinite);
        }
        let sv = entries.singular_values();
        let max = sv.max();
        if max == 0.0 || sv.min() <= CAMERA_RANK_TOL * max {
            return Err(TriangulationError::RankDeficientCamera);
        }
        let left = entries.fixed_view::<3, 3>(0, 0).into_owned();
        Ok(Self {
            entries,
            calibrated: is_rotation(&left),
        })
    }

    /// Builds the calibrated camera `[R | t]`.
    pub fn from_pose(rotation: &Matrix3<f64>, translation: &Vector3<f64>) -> Result<Self> {
        if !is_rotation(rotation) {
            return Err(TriangulationError::NotARotation);
        }
        let mut entries = Matrix3x4::zeros();
        entries.fixed_view_mut::<3, 3>(0, 0).copy_from(rotation);
        entries.set_column(3, translation);
        Self::new(entries)
    }

    /// Reads 12 row-major numbers.
    pub fn from_row_major(values: &[f64]) -> Result<Self> {
        if values.len() != 12 {
            return Err(TriangulationError::RankDeficientCamera);
        }
        Self::new(Matrix3x4::from_row_slice(values))
    }

    pub fn entries(&self) -> &Matrix3x4<f64> {
        &self.entries
    }

    pub fn is_calibrated(&self) -> bool {
        self.calibrated
    }

    pub fn to_row_major(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for r in 0..3 {
            for c in 0..4 {
                out[4 * r + c] = self.entries[(r, c)];
            }
        }
        out
    }

    /// Homogeneous camera center, the right null vector of the camera,
    /// computed from signed 3x3 minors.
    pub fn center(&self) -> Vector4<f64> {
        let mut c = Vector4::zeros();
        for skip in 0..4 {
            let mut m = Matrix3::zeros();
            let mut col = 0;
            for j in 0..4 {
                if j == skip {
                    continue;
                }
                m.set_column(col, &self.entries.column(j));
                col += 1;
            }
            let sign = if skip % 2 == 0 { 1.0 } else { -1.0 };
            c[skip] = sign * m.determinant();
        }
        c
    }

    /// Euclidean center, `None` for cameras with a singular left block.
    pub fn finite_center(&self) -> Option<Vector3<f64>> {
        let c = self.center();
        let scale = c.norm();
        if c[3].abs() <= 1e-14 * scale {
            return None;
        }
        Some(c.xyz() / c[3])
    }

    /// Projects a 3D point. Returns `None` when the point maps to infinity.
    pub fn project(&self, point: &Vector3<f64>) -> Option<Vector2<f64>> {
        let h = self.entries * point.push(1.0);
        if h[2].abs() <= f64::EPSILON * h.norm() {
            return None;
        }
        Some(Vector2::new(h[0] / h[2], h[1] / h[2]))
    }

    /// Depth sign of a point: positive when it lies in front of the camera.
    pub fn depth(&self, point: &Vector3<f64>) -> f64 {
        let left = self.entries.fixed_view::<3, 3>(0, 0);
        let w = (self.entries * point.push(1.0))[2];
        w * left.determinant().signum()
    }

    /// Direction of the viewing ray through an image point.
    pub fn ray_direction(&self, pixel: &Vector2<f64>) -> Result<Vector3<f64>> {
        let left = self.entries.fixed_view::<3, 3>(0, 0).into_owned();
        let inv = left
            .try_inverse()
            .ok_or(TriangulationError::InfiniteCamera)?;
        Ok(inv * pixel.push(1.0))
    }
}

fn is_rotation(m: &Matrix3<f64>) -> bool {
    (m.transpose() * m - Matrix3::identity()).norm() <= ROTATION_TOL
        && (m.determinant() - 1.0).abs() <= ROTATION_TOL
}

/// A rank-2 fundamental matrix in the convention `(x1;1)^T F (x2;1) = 0`,
/// where `x1` lives in the first image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalMatrix {
    f: Matrix3<f64>,
}

impl FundamentalMatrix {
    /// Validates and rescales to unit Frobenius norm. Already normalized
    /// input is kept bit for bit.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let f = Self::new_unscaled(m)?.f;
        let norm = f.norm();
        if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(Self { f });
        }
        Ok(Self { f: f / norm })
    }

    /// Validates without rescaling.
    pub fn new_unscaled(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(TriangulationError::NonFinite);
        }
        let norm = m.norm();
        if norm == 0.0 {
            return Err(TriangulationError::NotRankTwo(0.0));
        }
        let det = m.determinant();
        if det.abs() > RANK_TWO_TOL * norm.powi(3) {
            return Err(TriangulationError::NotRankTwo(det));
        }
        Ok(Self { f: m })
    }

    /// Reads 9 row-major numbers.
    pub fn from_row_major(values: &[f64]) -> Result<Self> {
        if values.len() != 9 {
            return Err(TriangulationError::NotRankTwo(f64::NAN));
        }
        Self::new(Matrix3::from_row_slice(values))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.f
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                out[3 * r + c] = self.f[(r, c)];
            }
        }
        out
    }

    pub fn f22(&self) -> Matrix2<f64> {
        self.f.fixed_view::<2, 2>(0, 0).into_owned()
    }

    /// Right column of the top block, `F[0..2, 2]`.
    pub fn fh(&self) -> Vector2<f64> {
        Vector2::new(self.f[(0, 2)], self.f[(1, 2)])
    }

    /// Bottom row of the left block, `F[2, 0..2]`, stored as a column.
    pub fn fv(&self) -> Vector2<f64> {
        Vector2::new(self.f[(2, 0)], self.f[(2, 1)])
    }

    pub fn f33(&self) -> f64 {
        self.f[(2, 2)]
    }

    /// Epipolar residual `(x1;1)^T F (x2;1)`.
    pub fn residual(&self, x1: &Vector2<f64>, x2: &Vector2<f64>) -> f64 {
        x1.push(1.0).dot(&(self.f * x2.push(1.0)))
    }

    pub fn q_matrix(&self) -> Matrix5<f64> {
        build_q(&self.f)
    }

    pub fn diagonalize(&self) -> Result<DiagonalizedProblem> {
        diagonalize(&self.f)
    }
}

/// The symmetric 5x5 matrix with `(x;1)^T Q (x;1) = (x1;1)^T F (x2;1)`.
///
/// Accepts any 3x3 matrix; rank 2 is not required here.
pub fn build_q(f: &Matrix3<f64>) -> Matrix5<f64> {
    let mut q = Matrix5::zeros();
    for i in 0..2 {
        for j in 0..2 {
            q[(i, 2 + j)] = 0.5 * f[(i, j)];
            q[(2 + j, i)] = 0.5 * f[(i, j)];
        }
        q[(i, 4)] = 0.5 * f[(i, 2)];
        q[(4, i)] = 0.5 * f[(i, 2)];
        q[(2 + i, 4)] = 0.5 * f[(2, i)];
        q[(4, 2 + i)] = 0.5 * f[(2, i)];
    }
    q[(4, 4)] = f[(2, 2)];
    q
}

/// Fundamental matrix of a camera pair in the `(x1;1)^T F (x2;1) = 0`
/// convention, built from the 4x4 bilinear minors of the stacked cameras.
pub fn fundamental_from_cameras(c1: &CameraMatrix, c2: &CameraMatrix) -> Result<FundamentalMatrix> {
    let p1 = c1.entries();
    let p2 = c2.entries();
    let mut f = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut m = Matrix4::zeros();
            let mut row = 0;
            for r in (0..3).filter(|&r| r != i) {
                m.set_row(row, &p1.row(r));
                row += 1;
            }
            for r in (0..3).filter(|&r| r != j) {
                m.set_row(row, &p2.row(r));
                row += 1;
            }
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            f[(i, j)] = sign * m.determinant();
        }
    }
    let scale = p1.norm_squared() * p2.norm_squared();
    if f.norm() <= COINCIDENT_TOL * scale {
        return Err(TriangulationError::CoincidentCenters);
    }
    FundamentalMatrix::new(f)
}

/// The constraint `sum_i q_i y_i^2 = 0` together with the change of
/// coordinates that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalizedProblem {
    /// Larger eigenvalue magnitude of `P(F)`, half the top singular value of `F22`.
    pub a1: f64,
    /// Smaller eigenvalue magnitude, `a2 <= a1`.
    pub a2: f64,
    /// Stacked epipoles `k(F) = (-F22^{-T} Fv^T; -F22^{-1} Fh)`.
    pub kernel: Vector4<f64>,
    /// Orthogonal `R` with `R^T P(F) R = diag(a1, -a1, a2, -a2)`.
    pub basis: Matrix4<f64>,
}

impl DiagonalizedProblem {
    /// Signed eigenvalues `(a1, -a1, a2, -a2)`.
    pub fn q(&self) -> Vector4<f64> {
        Vector4::new(self.a1, -self.a1, self.a2, -self.a2)
    }

    /// `y = R^T (x - k)`.
    pub fn to_local(&self, x: &Vector4<f64>) -> Vector4<f64> {
        self.basis.tr_mul(&(x - self.kernel))
    }

    /// Maps a local residual back to image coordinates, `e -> R e`.
    pub fn from_local(&self, e: &Vector4<f64>) -> Vector4<f64> {
        self.basis * e
    }

    /// Inverse of [`to_local`](Self::to_local) on points.
    pub fn point_from_local(&self, y: &Vector4<f64>) -> Vector4<f64> {
        self.kernel + self.basis * y
    }

    pub fn eigenvalue_ratio(&self) -> f64 {
        crate::bounds::eigenvalue_ratio(self.a1, self.a2)
    }
}

/// Diagonalizes `P(F)` through the SVD of `F22`.
///
/// With `F22 = U S V^T`, the vectors `(u_i; +-v_i)/sqrt(2)` are eigenvectors of
/// `P(F)` with eigenvalues `+-s_i/2`.
pub fn diagonalize(f: &Matrix3<f64>) -> Result<DiagonalizedProblem> {
    let f22: Matrix2<f64> = f.fixed_view::<2, 2>(0, 0).into_owned();
    let det = f22.determinant();
    if det.abs() < SINGULAR_F22_TOL * f22.norm_squared() || f22.norm_squared() == 0.0 {
        return Err(TriangulationError::SingularF22);
    }
    let inv = f22.try_inverse().ok_or(TriangulationError::SingularF22)?;
    let fh = Vector2::new(f[(0, 2)], f[(1, 2)]);
    let fv = Vector2::new(f[(2, 0)], f[(2, 1)]);
    let e1 = -(inv.transpose() * fv);
    let e2 = -(inv * fh);
    let kernel = Vector4::new(e1[0], e1[1], e2[0], e2[1]);

    let svd = f22.svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v");
    let sv = svd.singular_values;
    let (first, second) = if sv[0] >= sv[1] { (0, 1) } else { (1, 0) };

    let column = |idx: usize, sign: f64| -> Vector4<f64> {
        let ui = u.column(idx);
        let vi = v_t.row(idx);
        let mut c = Vector4::new(ui[0], ui[1], sign * vi[0], sign * vi[1]) / 2f64.sqrt();
        let max = c.amax();
        if let Some(lead) = c.iter().find(|x| x.abs() > 1e-12 * max) {
            if *lead < 0.0 {
                c = -c;
            }
        }
        c
    };
    let basis = Matrix4::from_columns(&[
        column(first, 1.0),
        column(first, -1.0),
        column(second, 1.0),
        column(second, -1.0),
    ]);

    Ok(DiagonalizedProblem {
        a1: 0.5 * sv[first],
        a2: 0.5 * sv[second],
        kernel,
        basis,
    })
}

/// `sum_i q_i y_i^2`.
pub fn constraint_value(q: &Vector4<f64>, y: &Vector4<f64>) -> f64 {
    q.iter().zip(y.iter()).map(|(qi, yi)| qi * yi * yi).sum()
}

/// A measured point pair, optionally with ground-truth projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub x1: Vector2<f64>,
    pub x2: Vector2<f64>,
    pub ground_truth: Option<(Vector2<f64>, Vector2<f64>)>,
}

impl Correspondence {
    pub fn new(x1: Vector2<f64>, x2: Vector2<f64>) -> Self {
        Self {
            x1,
            x2,
            ground_truth: None,
        }
    }

    pub fn with_ground_truth(mut self, g1: Vector2<f64>, g2: Vector2<f64>) -> Self {
        self.ground_truth = Some((g1, g2));
        self
    }

    pub fn from_stacked(x: &Vector4<f64>) -> Self {
        Self::new(Vector2::new(x[0], x[1]), Vector2::new(x[2], x[3]))
    }

    pub fn stacked(&self) -> Vector4<f64> {
        Vector4::new(self.x1[0], self.x1[1], self.x2[0], self.x2[1])
    }

    /// Euclidean distance in the stacked 4D space.
    pub fn distance(&self, other: &Correspondence) -> f64 {
        (self.stacked() - other.stacked()).norm()
    }

    /// Distance to the ground-truth projections, when present.
    pub fn distance_to_ground_truth(&self) -> Option<f64> {
        self.ground_truth.map(|(g1, g2)| {
            ((self.x1 - g1).norm_squared() + (self.x2 - g2).norm_squared()).sqrt()
        })
    }
}
