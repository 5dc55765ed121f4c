//! Reference correctors and 3D point recovery.
//!
//! * Sampson: a single first-order step along the gradient of the epipolar
//!   residual.
//! * Lindstrom's `niter2`: two fixed-form Lagrangian updates, after
//!   P. Lindstrom, "Triangulation Made Easy", CVPR 2010. The update
//!   formulas come from that publication.
//! * Midpoint and linear (DLT) triangulation from the raw measurements.
//!
//! [`TwoView`] bundles a camera pair (or just a fundamental matrix) and
//! dispatches any [`Method`], including the weighted and exact correctors.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Matrix3x4, Matrix4, Vector2, Vector3, Vector4};

use crate::critical::triangulate_exact_with;
use crate::epipolar::{
    fundamental_from_cameras, CameraMatrix, Correspondence, DiagonalizedProblem, FundamentalMatrix,
};
use crate::error::{Result, TriangulationError};
use crate::weighted::triangulate_weighted_with;

const PARALLEL_TOL: f64 = 1e-10;
const INFINITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Weighted,
    Exact,
    Sampson,
    Lindstrom,
    Midpoint,
    Dlt,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Weighted,
        Method::Exact,
        Method::Sampson,
        Method::Lindstrom,
        Method::Midpoint,
        Method::Dlt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Weighted => "weighted",
            Method::Exact => "exact",
            Method::Sampson => "sampson",
            Method::Lindstrom => "lindstrom",
            Method::Midpoint => "midpoint",
            Method::Dlt => "dlt",
        }
    }

    /// Whether the method needs the camera matrices, not just `F`.
    pub fn needs_cameras(self) -> bool {
        matches!(self, Method::Midpoint | Method::Dlt)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangulationResult {
    pub corrected: Correspondence,
    pub point3d: Option<Vector3<f64>>,
    /// `||x_hat - x_tilde||^2`.
    pub cost2d: f64,
    pub method: Method,
}

impl TriangulationResult {
    fn from_correction(method: Method, original: &Correspondence, x_hat: Vector4<f64>) -> Self {
        let mut corrected = Correspondence::from_stacked(&x_hat);
        corrected.ground_truth = original.ground_truth;
        Self {
            corrected,
            point3d: None,
            cost2d: (x_hat - original.stacked()).norm_squared(),
            method,
        }
    }
}

/// Epipolar residual and its gradient with respect to `(x1, x2)`.
fn residual_and_gradient(f: &FundamentalMatrix, c: &Correspondence) -> (f64, Vector4<f64>) {
    let m = f.matrix();
    let h1 = c.x1.push(1.0);
    let h2 = c.x2.push(1.0);
    let line1 = m * h2;
    let line2 = m.tr_mul(&h1);
    (
        h1.dot(&line1),
        Vector4::new(line1[0], line1[1], line2[0], line2[1]),
    )
}

fn gradient_too_small(f: &FundamentalMatrix, c: &Correspondence, grad: &Vector4<f64>) -> bool {
    grad.norm() <= 1e-14 * f.matrix().norm() * (1.0 + c.stacked().amax())
}

/// First-order (Sampson) distance `|g| / ||grad g||`.
pub fn sampson_error(f: &FundamentalMatrix, c: &Correspondence) -> Result<f64> {
    let (g, grad) = residual_and_gradient(f, c);
    if gradient_too_small(f, c, &grad) {
        return Err(TriangulationError::ZeroGradient);
    }
    Ok(g.abs() / grad.norm())
}

pub fn sampson_correct(f: &FundamentalMatrix, c: &Correspondence) -> Result<TriangulationResult> {
    let (g, grad) = residual_and_gradient(f, c);
    if gradient_too_small(f, c, &grad) {
        return Err(TriangulationError::ZeroGradient);
    }
    let x_hat = c.stacked() - grad * (g / grad.norm_squared());
    Ok(TriangulationResult::from_correction(Method::Sampson, c, x_hat))
}

/// Lindstrom's two-iteration corrector.
pub fn lindstrom_niter2(f: &FundamentalMatrix, c: &Correspondence) -> Result<TriangulationResult> {
    let m = f.matrix();
    let f22 = f.f22();
    let h1 = c.x1.push(1.0);
    let h2 = c.x2.push(1.0);
    let mut n1: Vector2<f64> = (m * h2).xy();
    let mut n2: Vector2<f64> = (m.tr_mul(&h1)).xy();
    let a = n1.dot(&(f22 * n2));
    let b = 0.5 * (n1.norm_squared() + n2.norm_squared());
    let residual = h1.dot(&(m * h2));
    let disc = b * b - a * residual;
    if disc < 0.0 {
        return Err(TriangulationError::NumericalBreakdown(
            "negative discriminant in the first update",
        ));
    }
    let d = disc.sqrt();
    if b + d <= 0.0 {
        return Err(TriangulationError::NumericalBreakdown("vanishing gradient"));
    }
    let mut lambda = residual / (b + d);
    let dx1 = n1 * lambda;
    let dx2 = n2 * lambda;
    n1 -= f22 * dx2;
    n2 -= f22.tr_mul(&dx1);
    let norm = n1.norm_squared() + n2.norm_squared();
    if norm <= 0.0 {
        return Err(TriangulationError::NumericalBreakdown(
            "vanishing gradient after the first update",
        ));
    }
    lambda *= 2.0 * d / norm;
    let x1 = c.x1 - n1 * lambda;
    let x2 = c.x2 - n2 * lambda;
    let x_hat = Vector4::new(x1[0], x1[1], x2[0], x2[1]);
    Ok(TriangulationResult::from_correction(Method::Lindstrom, c, x_hat))
}

/// Linear triangulation of a pair that already satisfies the epipolar
/// constraint. Image coordinates are normalized by a common similarity
/// (centroid at the origin, mean distance `sqrt(2)`) before solving.
pub fn recover_point(
    c1: &CameraMatrix,
    c2: &CameraMatrix,
    corrected: &Correspondence,
) -> Result<Vector3<f64>> {
    let centroid = 0.5 * (corrected.x1 + corrected.x2);
    let mean_dist = 0.5 * (corrected.x1 - corrected.x2).norm();
    let scale = if mean_dist > 1e-12 * (1.0 + centroid.norm()) {
        2f64.sqrt() / mean_dist
    } else {
        1.0
    };
    let t = Matrix3::new(
        scale,
        0.0,
        -scale * centroid[0],
        0.0,
        scale,
        -scale * centroid[1],
        0.0,
        0.0,
        1.0,
    );
    let normalize = |x: &Vector2<f64>| (t * x.push(1.0)).xy();

    let mut a = Matrix4::zeros();
    let rows = |p: &Matrix3x4<f64>, x: &Vector2<f64>| {
        let p = t * p;
        let x = normalize(x);
        [
            p.row(2) * x[0] - p.row(0),
            p.row(2) * x[1] - p.row(1),
        ]
    };
    for (k, row) in rows(c1.entries(), &corrected.x1)
        .into_iter()
        .chain(rows(c2.entries(), &corrected.x2))
        .enumerate()
    {
        let n = row.norm();
        a.set_row(k, &(if n > 0.0 { row / n } else { row }));
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("svd computed with v");
    let (imin, _) = svd.singular_values.argmin();
    let h = v_t.row(imin).transpose();
    if h[3].abs() <= INFINITY_TOL * h.norm() {
        return Err(TriangulationError::PointAtInfinity);
    }
    Ok(h.xyz() / h[3])
}

pub fn midpoint_triangulate(
    c1: &CameraMatrix,
    c2: &CameraMatrix,
    c: &Correspondence,
) -> Result<TriangulationResult> {
    let o1 = c1.finite_center().ok_or(TriangulationError::InfiniteCamera)?;
    let o2 = c2.finite_center().ok_or(TriangulationError::InfiniteCamera)?;
    let d1 = c1.ray_direction(&c.x1)?;
    let d2 = c2.ray_direction(&c.x2)?;
    let w0 = o1 - o2;
    let (a, b, cc) = (d1.dot(&d1), d1.dot(&d2), d2.dot(&d2));
    let (d, e) = (d1.dot(&w0), d2.dot(&w0));
    let denom = a * cc - b * b;
    if denom <= PARALLEL_TOL * PARALLEL_TOL * a * cc {
        return Err(TriangulationError::ParallelRays);
    }
    let t1 = (b * e - cc * d) / denom;
    let t2 = (a * e - b * d) / denom;
    let mid = 0.5 * ((o1 + d1 * t1) + (o2 + d2 * t2));
    project_result(Method::Midpoint, c1, c2, c, mid)
}

pub fn dlt_triangulate(
    c1: &CameraMatrix,
    c2: &CameraMatrix,
    c: &Correspondence,
) -> Result<TriangulationResult> {
    let x = recover_point(c1, c2, c)?;
    project_result(Method::Dlt, c1, c2, c, x)
}

fn project_result(
    method: Method,
    c1: &CameraMatrix,
    c2: &CameraMatrix,
    c: &Correspondence,
    point: Vector3<f64>,
) -> Result<TriangulationResult> {
    let p1 = c1.project(&point).ok_or(TriangulationError::PointAtInfinity)?;
    let p2 = c2.project(&point).ok_or(TriangulationError::PointAtInfinity)?;
    let mut r = TriangulationResult::from_correction(
        method,
        c,
        Vector4::new(p1[0], p1[1], p2[0], p2[1]),
    );
    r.point3d = Some(point);
    Ok(r)
}

/// An image pair ready for triangulation: `F`, its diagonalization and,
/// optionally, the cameras.
#[derive(Debug, Clone)]
pub struct TwoView {
    pub cameras: Option<(CameraMatrix, CameraMatrix)>,
    pub fundamental: FundamentalMatrix,
    pub diagonalized: std::result::Result<DiagonalizedProblem, TriangulationError>,
}

impl TwoView {
    pub fn from_cameras(c1: CameraMatrix, c2: CameraMatrix) -> Result<Self> {
        let fundamental = fundamental_from_cameras(&c1, &c2)?;
        Ok(Self {
            cameras: Some((c1, c2)),
            fundamental,
            diagonalized: fundamental.diagonalize(),
        })
    }

    pub fn from_fundamental(fundamental: FundamentalMatrix) -> Self {
        Self {
            cameras: None,
            fundamental,
            diagonalized: fundamental.diagonalize(),
        }
    }

    pub fn diagonalized(&self) -> Result<&DiagonalizedProblem> {
        self.diagonalized.as_ref().map_err(|e| e.clone())
    }

    /// Applies `method`; corrector outputs get a 3D point when cameras are known.
    pub fn apply(&self, method: Method, c: &Correspondence) -> Result<TriangulationResult> {
        let f = &self.fundamental;
        let mut result = match method {
            Method::Weighted => {
                let w = triangulate_weighted_with(self.diagonalized()?, c)?;
                TriangulationResult::from_correction(method, c, w.corrected.stacked())
            }
            Method::Exact => {
                let e = triangulate_exact_with(self.diagonalized()?, c)?;
                TriangulationResult::from_correction(method, c, e.corrected.stacked())
            }
            Method::Sampson => sampson_correct(f, c)?,
            Method::Lindstrom => lindstrom_niter2(f, c)?,
            Method::Midpoint | Method::Dlt => {
                let (c1, c2) = self.cameras.as_ref().ok_or(TriangulationError::MissingCameras)?;
                return if method == Method::Midpoint {
                    midpoint_triangulate(c1, c2, c)
                } else {
                    dlt_triangulate(c1, c2, c)
                };
            }
        };
        if let Some((c1, c2)) = &self.cameras {
            result.point3d = recover_point(c1, c2, &result.corrected).ok();
        }
        Ok(result)
    }
}
