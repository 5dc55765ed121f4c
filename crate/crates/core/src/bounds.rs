//! Bounds on the optimal error and the square-root-free inlier predicate.
//!
//! With `h1 = a1 y1^2 + a2 y3^2`, `h2 = a1 y2^2 + a2 y4^2` and
//! `alpha = (sqrt(h1) - sqrt(h2))^2`, the optimal error `E` satisfies
//!
//! ```text
//! sqrt(alpha / (2 max a)) <= E <= sqrt(alpha h_y / (S + T)) <= sqrt(alpha / (2 min a))
//! ```
//!
//! where `h_y = (y1^2 + y3^2)(y2^2 + y4^2)`. The middle term is the cost of
//! the weighted minimizer at the optimal weight ratio.

use nalgebra::Vector4;

use crate::error::{Result, TriangulationError};
use crate::weighted::{alpha_plus, halves, DEGENERATE_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBounds {
    /// `None` when the data is degenerate (`delta` vanishes).
    pub best_upper: Option<f64>,
    pub lower: f64,
    pub upper: f64,
    /// `sqrt(max(a1, a2) / min(a1, a2))`, also `upper / lower`.
    pub ratio: f64,
    pub alpha_plus: f64,
}

impl ErrorBounds {
    pub fn best_upper(&self) -> Result<f64> {
        self.best_upper.ok_or(TriangulationError::DegenerateData(
            "best upper bound undefined for vanishing delta",
        ))
    }

    /// Whether `lower <= value <= best_upper <= upper`, with relative slack `tol`.
    pub fn sandwiches(&self, value: f64, tol: f64) -> bool {
        let slack = tol * self.upper.max(value);
        let ordered = self.lower <= value + slack && value <= self.upper + slack;
        match self.best_upper {
            Some(b) => ordered && value <= b + slack && b <= self.upper + slack,
            None => ordered,
        }
    }
}

pub fn error_bounds(y: &Vector4<f64>, a1: f64, a2: f64) -> Result<ErrorBounds> {
    if !(a1 > 0.0 && a2 > 0.0 && a1.is_finite() && a2.is_finite()) {
        return Err(TriangulationError::InvalidWeights);
    }
    let (h1, h2) = halves(y, a1, a2);
    let alpha = alpha_plus(h1, h2);
    let (amin, amax) = (a1.min(a2), a1.max(a2));
    let lower = (alpha / (2.0 * amax)).sqrt();
    let upper = (alpha / (2.0 * amin)).sqrt();

    let delta = h1 * h2;
    let best_upper = if delta <= DEGENERATE_TOL * amax * amax * y.norm_squared().powi(2) {
        None
    } else {
        let odd = y[0] * y[0] + y[2] * y[2];
        let even = y[1] * y[1] + y[3] * y[3];
        let s = odd * h2;
        let t = even * h1;
        // (alpha / delta) * S T / (S + T) with S T = odd * even * delta
        Some((alpha * odd * even / (s + t)).sqrt())
    };

    Ok(ErrorBounds {
        best_upper,
        lower,
        upper,
        ratio: eigenvalue_ratio(a1, a2),
        alpha_plus: alpha,
    })
}

/// `sqrt(max(a1, a2) / min(a1, a2))`.
pub fn eigenvalue_ratio(a1: f64, a2: f64) -> f64 {
    (a1.max(a2) / a1.min(a2)).sqrt()
}

/// `|sqrt(alpha) - sqrt(beta)| < r` without square roots.
///
/// For `alpha + beta >= r^2` the predicate is equivalent to
/// `(alpha + beta - r^2)^2 < 4 alpha beta`; below that the squared form flips
/// sign and the point is always an inlier.
pub fn inlier_check_fast(alpha: f64, beta: f64, r: f64) -> bool {
    let r2 = r * r;
    let sum = alpha + beta;
    if sum < r2 {
        return true;
    }
    let d = sum - r2;
    d * d < 4.0 * alpha * beta
}

/// Reference predicate with explicit square roots.
pub fn inlier_check_naive(alpha: f64, beta: f64, r: f64) -> bool {
    (alpha.sqrt() - beta.sqrt()).abs() < r
}

/// Whether the upper bound `sqrt(alpha^+ / (2 min a))` is below `r`, using
/// [`inlier_check_fast`] on the two constraint halves.
pub fn upper_bound_below(y: &Vector4<f64>, a1: f64, a2: f64, r: f64) -> bool {
    let (h1, h2) = halves(y, a1, a2);
    let scale = 2.0 * a1.min(a2);
    inlier_check_fast(h1 / scale, h2 / scale, r)
}
