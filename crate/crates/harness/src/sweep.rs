//! Cost of correcting a correspondence onto each pair of corresponding
//! epipolar lines.
//!
//! The line through the first epipole `e1` with direction
//! `d1 = (cos t, sin t)` corresponds to the line through `e2` with direction
//! `d2` orthogonal to `F22^T d1`. Together they span a 2D affine plane
//! `k + span{(d1; 0), (0; d2)}` in the stacked coordinates, and the
//! feasible set is the union of these planes over `t` in `[0, pi)`.
//! For each angle the sweep records the squared distance of the measurement
//! to that plane and its weighted counterpart with the weights
//! `(a1, nu a1, a2, nu a2)` of the weighted solver at `nu = T / S`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{Matrix2, Vector2, Vector4};
use twoview::weighted::{optimal_nu, weights};
use twoview::{Correspondence, DiagonalizedProblem, FundamentalMatrix};

use crate::error::{HarnessError, Result};

pub const DEFAULT_ANGLES: usize = 3600;

/// Per-angle costs for one correspondence.
#[derive(Debug, Clone)]
pub struct Sweeper {
    f22: Matrix2<f64>,
    diag: DiagonalizedProblem,
    /// `x_tilde - k` in image coordinates.
    offset: Vector4<f64>,
    lambda: Vector4<f64>,
    /// Weight ratio; 1 when `T / S` is undefined.
    pub nu: f64,
}

impl Sweeper {
    pub fn new(f: &FundamentalMatrix, c: &Correspondence) -> Result<Self> {
        let diag = f.diagonalize()?;
        let x = c.stacked();
        let y = diag.to_local(&x);
        let nu = optimal_nu(&y, diag.a1, diag.a2).unwrap_or(1.0);
        Ok(Self {
            f22: f.f22(),
            diag,
            offset: x - diag.kernel,
            lambda: weights(diag.a1, diag.a2, nu),
            nu,
        })
    }

    fn plane(&self, angle: f64) -> (Vector4<f64>, Vector4<f64>) {
        let d1 = Vector2::new(angle.cos(), angle.sin());
        let g = self.f22.tr_mul(&d1);
        let d2 = Vector2::new(-g[1], g[0]).normalize();
        (
            Vector4::new(d1[0], d1[1], 0.0, 0.0),
            Vector4::new(0.0, 0.0, d2[0], d2[1]),
        )
    }

    /// Squared distance to the plane at `angle`.
    pub fn unweighted(&self, angle: f64) -> f64 {
        let (u, v) = self.plane(angle);
        let w = &self.offset;
        (w.norm_squared() - u.dot(w).powi(2) - v.dot(w).powi(2)).max(0.0)
    }

    /// Minimal `sum lambda_i eps_i^2` over the plane at `angle`, computed in
    /// local coordinates.
    pub fn weighted(&self, angle: f64) -> f64 {
        let (u, v) = self.plane(angle);
        let r = self.diag.basis.transpose();
        let (u, v, y) = (r * u, r * v, r * self.offset);
        let l = &self.lambda;
        let ip = |a: &Vector4<f64>, b: &Vector4<f64>| a.component_mul(l).dot(b);
        let gram = Matrix2::new(ip(&u, &u), ip(&u, &v), ip(&v, &u), ip(&v, &v));
        let rhs = Vector2::new(ip(&u, &y), ip(&v, &y));
        let coef = gram.lu().solve(&rhs).unwrap_or_else(Vector2::zeros);
        (ip(&y, &y) - rhs.dot(&coef)).max(0.0)
    }

    /// Angle of the epipolar line through the first image point.
    pub fn angle_of(&self, x1: &Vector2<f64>) -> f64 {
        let d = x1 - self.diag.kernel.xy();
        d[1].atan2(d[0]).rem_euclid(PI)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub angles: Vec<f64>,
    pub unweighted: Vec<f64>,
    pub weighted: Vec<f64>,
    pub nu: f64,
}

/// Number of strict local minima of a periodic sampled curve.
pub fn count_local_minima(values: &[f64]) -> usize {
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let prev = values[(i + n - 1) % n];
            let next = values[(i + 1) % n];
            values[i] < prev && values[i] <= next
        })
        .count()
}

impl SweepTable {
    pub fn unweighted_minima(&self) -> usize {
        count_local_minima(&self.unweighted)
    }

    pub fn weighted_minima(&self) -> usize {
        count_local_minima(&self.weighted)
    }

    /// `(angle, cost)` of the smallest sample of a curve.
    pub fn argmin(curve: &[f64], angles: &[f64]) -> (f64, f64) {
        let (i, v) = curve
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty sweep");
        (angles[i], *v)
    }

    /// Writes `angle,unweighted,weighted`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["angle", "unweighted", "weighted"])?;
        for i in 0..self.angles.len() {
            w.write_record([
                self.angles[i].to_string(),
                self.unweighted[i].to_string(),
                self.weighted[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples `n_angles` equally spaced angles in `[0, pi)`.
pub fn sweep_epipolar_cost(
    f: &FundamentalMatrix,
    c: &Correspondence,
    n_angles: usize,
) -> Result<SweepTable> {
    if n_angles < 2 {
        return Err(HarnessError::Input("the sweep needs at least two angles".into()));
    }
    let sweeper = Sweeper::new(f, c)?;
    let angles: Vec<f64> = (0..n_angles).map(|i| PI * i as f64 / n_angles as f64).collect();
    Ok(SweepTable {
        unweighted: angles.iter().map(|&t| sweeper.unweighted(t)).collect(),
        weighted: angles.iter().map(|&t| sweeper.weighted(t)).collect(),
        angles,
        nu: sweeper.nu,
    })
}
