//! Critical points of the weighted problem for arbitrary positive weights.
//!
//! Stationarity gives `w_i eps_i = s q_i (y_i + eps_i)`, i.e.
//! `eps_i = s q_i y_i / (w_i - s q_i)`. Substituting into the constraint and
//! clearing denominators yields the numerator
//!
//! ```text
//! N(s) = sum_i q_i w_i^2 y_i^2 prod_{j != i} (w_j - s q_j)^2,
//! ```
//!
//! of degree 6. When `(w1, w3)` or `(w2, w4)` is proportional to `(a1, a2)`
//! the corresponding linear factors divide `N` and are removed, leaving a
//! polynomial of degree 4, or 2 when both pairs are proportional.

use nalgebra::Vector4;

use crate::epipolar::{Correspondence, DiagonalizedProblem, FundamentalMatrix};
use crate::error::{Result, TriangulationError};
use crate::poly;
use crate::weighted;

/// Default relative tolerance for the proportionality tests.
pub const CLASSIFY_TOL: f64 = 1e-9;
/// Relative size below which the post-deflation leading coefficient vanishes.
pub const LEAD_TOL: f64 = 1e-12;
/// Roots with `|w_i - s q_i| < POLE_TOL * w_i` are discarded.
pub const POLE_TOL: f64 = 1e-10;

/// Positive weights `(w1, w2, w3, w4)` applied to the local residuals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightVector([f64; 4]);

impl WeightVector {
    pub fn new(lambda: [f64; 4]) -> Result<Self> {
        if lambda.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(Self(lambda))
        } else {
            Err(TriangulationError::InvalidWeights)
        }
    }

    pub fn unit() -> Self {
        Self([1.0; 4])
    }

    /// `(mu a1, nu a1, mu a2, nu a2)`.
    pub fn structured(a1: f64, a2: f64, mu: f64, nu: f64) -> Result<Self> {
        Self::new([mu * a1, nu * a1, mu * a2, nu * a2])
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::from(self.0)
    }
}

/// Which weight pair is proportional to `(a1, a2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightPair {
    /// `(w1, w3)`, paired with the positive eigenvalues.
    Odd,
    /// `(w2, w4)`, paired with the negative eigenvalues.
    Even,
}

impl WeightPair {
    fn indices(self) -> [usize; 2] {
        match self {
            WeightPair::Odd => [0, 2],
            WeightPair::Even => [1, 3],
        }
    }
}

/// Classification of a weight vector relative to `(a1, a2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightCase {
    /// `w = (mu a1, nu a1, mu a2, nu a2)`; two critical points.
    CaseI { mu: f64, nu: f64 },
    /// Exactly one pair is proportional; four critical points.
    CaseII { pair: WeightPair, scale: f64 },
    /// Six critical points.
    CaseIII,
}

impl WeightCase {
    pub fn degree_class(&self) -> DegreeClass {
        match self {
            WeightCase::CaseI { .. } => DegreeClass::Two,
            WeightCase::CaseII { .. } => DegreeClass::Four,
            WeightCase::CaseIII => DegreeClass::Six,
        }
    }

    /// 1, 2 or 3.
    pub fn index(&self) -> u8 {
        match self {
            WeightCase::CaseI { .. } => 1,
            WeightCase::CaseII { .. } => 2,
            WeightCase::CaseIII => 3,
        }
    }

    fn deflated_pairs(&self) -> Vec<WeightPair> {
        match self {
            WeightCase::CaseI { .. } => vec![WeightPair::Odd, WeightPair::Even],
            WeightCase::CaseII { pair, .. } => vec![*pair],
            WeightCase::CaseIII => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeClass {
    Two,
    Four,
    Six,
}

impl DegreeClass {
    pub fn degree(self) -> usize {
        match self {
            DegreeClass::Two => 2,
            DegreeClass::Four => 4,
            DegreeClass::Six => 6,
        }
    }
}

fn proportional(w_first: f64, w_second: f64, a1: f64, a2: f64, tol: f64) -> bool {
    (w_first * a2 - w_second * a1).abs() <= tol * (w_first * a2 + w_second * a1)
}

pub fn classify_weights(a1: f64, a2: f64, lambda: &WeightVector, tol: f64) -> WeightCase {
    let [w1, w2, w3, w4] = lambda.0;
    let odd = proportional(w1, w3, a1, a2, tol);
    let even = proportional(w2, w4, a1, a2, tol);
    match (odd, even) {
        (true, true) => WeightCase::CaseI {
            mu: (w1 + w3) / (a1 + a2),
            nu: (w2 + w4) / (a1 + a2),
        },
        (true, false) => WeightCase::CaseII {
            pair: WeightPair::Odd,
            scale: (w1 + w3) / (a1 + a2),
        },
        (false, true) => WeightCase::CaseII {
            pair: WeightPair::Even,
            scale: (w2 + w4) / (a1 + a2),
        },
        (false, false) => WeightCase::CaseIII,
    }
}

/// The cleared numerator `N(s)` before any deflation, ascending coefficients.
pub fn critical_numerator(y: &Vector4<f64>, a1: f64, a2: f64, lambda: &WeightVector) -> Vec<f64> {
    let q = [a1, -a1, a2, -a2];
    let w = lambda.0;
    // (w_j - s q_j)^2
    let squares: Vec<Vec<f64>> = (0..4)
        .map(|j| {
            let f = [w[j], -q[j]];
            poly::multiply(&f, &f)
        })
        .collect();
    let mut out = vec![0.0; 7];
    for i in 0..4 {
        let mut term = vec![q[i] * w[i] * w[i] * y[i] * y[i]];
        for (j, sq) in squares.iter().enumerate() {
            if j != i {
                term = poly::multiply(&term, sq);
            }
        }
        poly::add_assign(&mut out, &term);
    }
    out
}

/// Deflated critical polynomial together with its classification.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPolynomial {
    /// Ascending coefficients.
    pub coeffs: Vec<f64>,
    pub case: WeightCase,
    /// Indices `i` of the factors `(w_i - s q_i)` that were divided out.
    pub deflated_factors: Vec<usize>,
    /// Synthetic-division remainders, one per deflated factor.
    pub remainders: Vec<f64>,
}

impl CriticalPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree_class(&self) -> DegreeClass {
        self.case.degree_class()
    }

    pub fn evaluate(&self, s: f64) -> f64 {
        poly::evaluate(&self.coeffs, s)
    }

    /// Real roots of the deflated polynomial, poles included.
    pub fn real_roots(&self) -> Vec<f64> {
        if self.degree() <= 2 {
            let c = &self.coeffs;
            let mut r = poly::quadratic_real_roots(
                c.get(2).copied().unwrap_or(0.0),
                c.get(1).copied().unwrap_or(0.0),
                c[0],
            );
            r.sort_by(f64::total_cmp);
            r
        } else {
            poly::real_roots(&self.coeffs)
        }
    }
}

pub fn build_critical_polynomial(
    y: &Vector4<f64>,
    a1: f64,
    a2: f64,
    lambda: &WeightVector,
) -> Result<CriticalPolynomial> {
    build_critical_polynomial_with_tol(y, a1, a2, lambda, CLASSIFY_TOL)
}

pub fn build_critical_polynomial_with_tol(
    y: &Vector4<f64>,
    a1: f64,
    a2: f64,
    lambda: &WeightVector,
    tol: f64,
) -> Result<CriticalPolynomial> {
    if !(a1 > 0.0 && a2 > 0.0 && a1.is_finite() && a2.is_finite()) {
        return Err(TriangulationError::InvalidWeights);
    }
    let case = classify_weights(a1, a2, lambda, tol);
    let q = [a1, -a1, a2, -a2];
    let w = lambda.0;
    let mut coeffs = critical_numerator(y, a1, a2, lambda);
    let mut deflated_factors = Vec::new();
    let mut remainders = Vec::new();
    for pair in case.deflated_pairs() {
        for i in pair.indices() {
            let (quotient, rem) = poly::divide_by_linear(&coeffs, w[i], q[i]);
            coeffs = quotient;
            deflated_factors.push(i);
            remainders.push(rem);
        }
    }
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let lead = *coeffs.last().expect("non-empty polynomial");
    if scale == 0.0 || lead.abs() <= LEAD_TOL * scale {
        return Err(TriangulationError::VanishingLead);
    }
    Ok(CriticalPolynomial {
        coeffs,
        case,
        deflated_factors,
        remainders,
    })
}

/// A real critical point of the weighted problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub s: f64,
    pub eps: Vector4<f64>,
    pub weighted_cost: f64,
    pub unweighted_cost: f64,
}

pub fn real_critical_points(
    p: &CriticalPolynomial,
    y: &Vector4<f64>,
    a1: f64,
    a2: f64,
    lambda: &WeightVector,
) -> Vec<CriticalPoint> {
    let q = [a1, -a1, a2, -a2];
    let w = lambda.0;
    let wv = lambda.as_vector();
    p.real_roots()
        .into_iter()
        .filter(|s| (0..4).all(|i| (w[i] - s * q[i]).abs() >= POLE_TOL * w[i]))
        .map(|s| refine_on_constraint(s, y, &q, &w))
        .map(|s| {
            let eps = Vector4::from_fn(|i, _| s * q[i] * y[i] / (w[i] - s * q[i]));
            CriticalPoint {
                s,
                eps,
                weighted_cost: eps.component_mul(&eps).dot(&wv),
                unweighted_cost: eps.norm_squared(),
            }
        })
        .collect()
}

/// Newton steps on `g(s) = sum q_i (w_i y_i / (w_i - s q_i))^2`, whose zeros
/// are the critical points. Near a pole `g` is far better conditioned than the
/// numerator polynomial. Steps are kept only while `|g|` decreases.
fn refine_on_constraint(mut s: f64, y: &Vector4<f64>, q: &[f64; 4], w: &[f64; 4]) -> f64 {
    let eval = |s: f64| {
        let mut g = 0.0;
        let mut dg = 0.0;
        for i in 0..4 {
            let t = w[i] - s * q[i];
            let z = w[i] * y[i] / t;
            g += q[i] * z * z;
            dg += 2.0 * q[i] * q[i] * z * z / t;
        }
        (g, dg)
    };
    let (mut g, mut dg) = eval(s);
    for _ in 0..4 {
        if dg == 0.0 || !dg.is_finite() {
            break;
        }
        let next = s - g / dg;
        let (gn, dgn) = eval(next);
        if !(gn.abs() < g.abs()) {
            break;
        }
        (s, g, dg) = (next, gn, dgn);
    }
    s
}

/// Global minimizer of the unweighted problem in local coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution {
    pub eps: Vector4<f64>,
    /// Optimal squared error `sum eps_i^2`.
    pub cost: f64,
    /// Optimal error `sqrt(cost)`.
    pub error: f64,
    /// Number of real critical points considered.
    pub n_critical: usize,
    pub degree: usize,
}

/// Exact unweighted optimum. Inputs are rescaled so that `max(a) = 1` and
/// `||y|| = 1` before the polynomial is formed; neither rescaling changes
/// the minimizer up to the factor `||y||`.
pub fn optimal_unweighted(y: &Vector4<f64>, a1: f64, a2: f64) -> Result<ExactSolution> {
    if !(a1 > 0.0 && a2 > 0.0 && a1.is_finite() && a2.is_finite()) {
        return Err(TriangulationError::InvalidWeights);
    }
    let norm = y.norm();
    if norm == 0.0 {
        return Ok(ExactSolution {
            eps: Vector4::zeros(),
            cost: 0.0,
            error: 0.0,
            n_critical: 1,
            degree: 0,
        });
    }
    let amax = a1.max(a2);
    let (b1, b2) = (a1 / amax, a2 / amax);
    let yn = y / norm;
    let lambda = WeightVector::unit();

    let (points, degree) = match build_critical_polynomial(&yn, b1, b2, &lambda) {
        Ok(p) => (real_critical_points(&p, &yn, b1, b2, &lambda), p.degree()),
        Err(TriangulationError::VanishingLead)
            if matches!(classify_weights(b1, b2, &lambda, CLASSIFY_TOL), WeightCase::CaseI { .. }) =>
        {
            // The quadratic degenerated to a linear equation; the closed form
            // handles that limit.
            let sol = weighted::solve_weighted(&yn, b1, b1, 1.0)?;
            let point = CriticalPoint {
                s: sol.s_plus,
                eps: sol.eps_plus,
                weighted_cost: sol.unweighted_cost_plus,
                unweighted_cost: sol.unweighted_cost_plus,
            };
            (vec![point], 1)
        }
        Err(e) => return Err(e),
    };

    let best = points
        .iter()
        .min_by(|a, b| {
            a.unweighted_cost
                .total_cmp(&b.unweighted_cost)
                .then(a.s.abs().total_cmp(&b.s.abs()))
        })
        .ok_or(TriangulationError::NumericalBreakdown(
            "no real critical point found",
        ))?;
    let eps = best.eps * norm;
    let cost = eps.norm_squared();
    Ok(ExactSolution {
        eps,
        cost,
        error: cost.sqrt(),
        n_critical: points.len(),
        degree,
    })
}

/// Output of the exact corrector in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactTriangulation {
    pub corrected: Correspondence,
    /// `||x_hat - x_tilde||^2`.
    pub cost: f64,
    pub local: Vector4<f64>,
    pub solution: ExactSolution,
}

pub fn triangulate_exact(f: &FundamentalMatrix, c: &Correspondence) -> Result<ExactTriangulation> {
    let d = f.diagonalize()?;
    triangulate_exact_with(&d, c)
}

pub fn triangulate_exact_with(
    d: &DiagonalizedProblem,
    c: &Correspondence,
) -> Result<ExactTriangulation> {
    let x = c.stacked();
    let y = d.to_local(&x);
    let solution = optimal_unweighted(&y, d.a1, d.a2)?;
    let x_hat = x + d.from_local(&solution.eps);
    let mut corrected = Correspondence::from_stacked(&x_hat);
    corrected.ground_truth = c.ground_truth;
    Ok(ExactTriangulation {
        corrected,
        cost: (x_hat - x).norm_squared(),
        local: y,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epipolar::constraint_value;
    use crate::weighted::{quadratic_data, solve_weighted};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_y(rng: &mut ChaCha8Rng) -> Vector4<f64> {
        Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn classification_examples() {
        let (a1, a2) = (0.7, 0.3);
        let w = WeightVector::new([a1, a1, a2, a2]).unwrap();
        match classify_weights(a1, a2, &w, 1e-12) {
            WeightCase::CaseI { mu, nu } => {
                assert_relative_eq!(mu, 1.0, epsilon = 1e-15);
                assert_relative_eq!(nu, 1.0, epsilon = 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
        let w = WeightVector::new([2.0, 7.0, 1.0, 5.0]).unwrap();
        assert_eq!(
            classify_weights(2.0, 1.0, &w, 1e-12),
            WeightCase::CaseII {
                pair: WeightPair::Odd,
                scale: 1.0
            }
        );
        let w = WeightVector::new([3.0, 7.0, 1.0, 5.0]).unwrap();
        assert_eq!(classify_weights(2.0, 1.0, &w, 1e-12), WeightCase::CaseIII);
        assert!(WeightVector::new([1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn numerator_leading_coefficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let y = rand_y(&mut rng);
            let (a1, a2) = (rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
            let l: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.1..3.0));
            let n = critical_numerator(&y, a1, a2, &WeightVector::new(l).unwrap());
            let expected = a1.powi(3)
                * a2.powi(3)
                * (a2 * l[0].powi(2) * y[0].powi(2) - a2 * l[1].powi(2) * y[1].powi(2)
                    + a1 * l[2].powi(2) * y[2].powi(2)
                    - a1 * l[3].powi(2) * y[3].powi(2));
            assert_relative_eq!(n[6], expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn numerator_at_first_pole() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let y = rand_y(&mut rng);
            let (a1, a2) = (rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
            let l: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.1..3.0));
            let n = critical_numerator(&y, a1, a2, &WeightVector::new(l).unwrap());
            let got = poly::evaluate(&n, l[0] / a1);
            let expected = a1.powi(-3)
                * l[0].powi(2)
                * (l[0] + l[1]).powi(2)
                * y[0].powi(2)
                * (a1 * l[3] + a2 * l[0]).powi(2)
                * (a1 * l[2] - a2 * l[0]).powi(2);
            assert_relative_eq!(got, expected, max_relative = 1e-8);
        }
    }

    #[test]
    fn case_one_reduces_to_the_weighted_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..500 {
            let y = rand_y(&mut rng);
            let (a1, a2) = (rng.random_range(0.1..1.0), rng.random_range(0.1..1.0));
            let nu = rng.random_range(0.1..3.0);
            let w = WeightVector::structured(a1, a2, 1.0, nu).unwrap();
            let p = build_critical_polynomial(&y, a1, a2, &w).unwrap();
            assert_eq!(p.degree(), 2);
            let d = quadratic_data(&y, a1, a2, nu);
            let scale = (a1 * a2).powi(2);
            let expected = [d.c, d.b, d.a];
            let max = expected.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (got, exp) in p.coeffs.iter().zip(expected) {
                assert!((got / scale - exp).abs() <= 1e-12 * max);
            }
            let pts = real_critical_points(&p, &y, a1, a2, &w);
            assert_eq!(pts.len(), 2);
            let sol = solve_weighted(&y, a1, a2, nu).unwrap();
            let plus = pts.iter().min_by(|a, b| a.weighted_cost.total_cmp(&b.weighted_cost)).unwrap();
            assert!((plus.s - sol.s_plus).abs() < 1e-10 * (1.0 + sol.s_plus.abs()));
        }
    }

    #[test]
    fn case_two_value_at_mu() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..200 {
            let y = rand_y(&mut rng);
            let (a1, a2) = (rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
            let mu = rng.random_range(0.1..3.0);
            let (l2, l4) = (rng.random_range(0.1..3.0), rng.random_range(0.1..3.0));
            let w = WeightVector::new([mu * a1, l2, mu * a2, l4]).unwrap();
            let p = build_critical_polynomial(&y, a1, a2, &w).unwrap();
            assert_eq!(p.degree(), 4);
            assert_eq!(p.deflated_factors, vec![0, 2]);
            let expected = a1
                * a2
                * mu.powi(2)
                * (a1 * mu + l2).powi(2)
                * (a2 * mu + l4).powi(2)
                * (a1 * y[0].powi(2) + a2 * y[2].powi(2));
            assert!(expected > 0.0);
            assert_relative_eq!(p.evaluate(mu), expected, max_relative = 1e-9);
        }
    }

    #[test]
    fn generic_weights_have_six_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..500 {
            let y = rand_y(&mut rng);
            let (a1, a2) = (rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
            let l: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.1..3.0));
            let w = WeightVector::new(l).unwrap();
            let p = build_critical_polynomial(&y, a1, a2, &w).unwrap();
            assert_eq!(p.degree(), 6);
            assert_eq!(poly::roots(&p.coeffs).len(), 6);
            let (_, rem) = poly::divide_by_linear(&p.coeffs, l[0], a1);
            let scale = p.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            assert!(rem.abs() > 1e-8 * scale);
            let n_real = p.real_roots().len();
            assert!([2, 4, 6].contains(&n_real), "{n_real} real roots");
        }
    }

    #[test]
    fn on_model_point_is_critical_at_zero() {
        // 0.5 (0.36 - 0.04) + 0.09 - 0.25 = 0
        let y = Vector4::new(0.6, 0.2, 0.3, 0.5);
        let (a1, a2) = (0.5, 1.0);
        let q = Vector4::new(a1, -a1, a2, -a2);
        assert!(constraint_value(&q, &y).abs() < 1e-15);
        let w = WeightVector::new([0.3, 1.1, 2.0, 0.7]).unwrap();
        let p = build_critical_polynomial(&y, a1, a2, &w).unwrap();
        let pts = real_critical_points(&p, &y, a1, a2, &w);
        assert!(pts.iter().any(|c| c.s.abs() < 1e-12 && c.weighted_cost < 1e-24));
        let sol = optimal_unweighted(&y, a1, a2).unwrap();
        assert!(sol.cost < 1e-28);
    }

    #[test]
    fn worked_example_through_degree_six_path() {
        let y = Vector4::new(2.0, 1.0, 0.0, 0.0);
        let sol = optimal_unweighted(&y, 1.0, 1.0).unwrap();
        assert_eq!(sol.degree, 2);
        assert_relative_eq!(sol.cost, 0.5, epsilon = 1e-14);
        assert_relative_eq!(sol.error, 0.5f64.sqrt(), epsilon = 1e-14);
        // Slightly unequal eigenvalues go through the sextic and stay close.
        let sol6 = optimal_unweighted(&y, 1.0, 1.0 - 1e-6).unwrap();
        assert_eq!(sol6.degree, 6);
        assert!((sol6.cost - 0.5).abs() < 1e-5);
    }

    #[test]
    fn exact_never_worse_than_weighted() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..2000 {
            let y = rand_y(&mut rng);
            let (a1, a2) = (rng.random_range(0.05..1.0), rng.random_range(0.05..1.0));
            let exact = optimal_unweighted(&y, a1, a2).unwrap();
            let nu = weighted::optimal_nu(&y, a1, a2).unwrap();
            let w = solve_weighted(&y, a1, a2, nu).unwrap();
            assert!(exact.cost <= w.unweighted_cost_plus * (1.0 + 1e-12));
            let q = Vector4::new(a1, -a1, a2, -a2);
            let cv = constraint_value(&q, &(y + exact.eps));
            assert!(cv.abs() < 1e-9 * y.norm_squared());
        }
    }

    #[test]
    fn equal_eigenvalues_match_weighted_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        for _ in 0..500 {
            let y = rand_y(&mut rng);
            let a = rng.random_range(0.05..1.0);
            let exact = optimal_unweighted(&y, a, a).unwrap();
            let nu = weighted::optimal_nu(&y, a, a).unwrap();
            let w = solve_weighted(&y, a, a, nu).unwrap();
            assert!((exact.cost - w.unweighted_cost_plus).abs() <= 1e-10 * (1.0 + exact.cost));
        }
    }
}
