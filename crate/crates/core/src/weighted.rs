//! Closed-form solution of the reweighted triangulation problem.
//!
//! In local coordinates the correction `eps` minimizes `sum_i w_i eps_i^2`
//! subject to `sum_i q_i (y_i + eps_i)^2 = 0`. For weights of the form
//! `w = (a1, nu a1, a2, nu a2)` the critical equation collapses to the
//! quadratic `A s^2 + B s + C = 0`, and the two critical points are
//! `eps_i = s q_i y_i / (w_i - s q_i)`. The root with the smaller weighted
//! cost also has the smaller unweighted cost, and `nu = T / S` minimizes the
//! unweighted cost over the whole family.

use nalgebra::Vector4;

use crate::epipolar::{Correspondence, DiagonalizedProblem, FundamentalMatrix};
use crate::error::{Result, TriangulationError};

/// Relative threshold on `delta` below which the data is degenerate.
pub const DEGENERATE_TOL: f64 = 1e-14;
/// `|A| < LINEAR_TOL (|B| + |C|)` is solved as a linear equation.
pub const LINEAR_TOL: f64 = 1e-12;

/// Coefficients and derived scalars of the weighted critical quadratic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticData {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `B^2 - 4AC`, evaluated directly from the coefficients.
    pub discriminant: f64,
    /// `(a1 y1^2 + a2 y3^2)(a1 y2^2 + a2 y4^2)`.
    pub delta: f64,
    /// `S = (y1^2 + y3^2)(a1 y2^2 + a2 y4^2)`.
    pub s_factor: f64,
    /// `T = (y2^2 + y4^2)(a1 y1^2 + a2 y3^2)`.
    pub t_factor: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub nu: f64,
}

/// The two halves `(a1 y1^2 + a2 y3^2, a1 y2^2 + a2 y4^2)` of the constraint.
pub(crate) fn halves(y: &Vector4<f64>, a1: f64, a2: f64) -> (f64, f64) {
    (
        a1 * y[0] * y[0] + a2 * y[2] * y[2],
        a1 * y[1] * y[1] + a2 * y[3] * y[3],
    )
}

/// `alpha^+ = (sqrt(h1) - sqrt(h2))^2`, evaluated without cancellation.
pub(crate) fn alpha_plus(h1: f64, h2: f64) -> f64 {
    let sum = h1.sqrt() + h2.sqrt();
    if sum == 0.0 {
        return 0.0;
    }
    let d = (h1 - h2) / sum;
    d * d
}

pub fn quadratic_data(y: &Vector4<f64>, a1: f64, a2: f64, nu: f64) -> QuadraticData {
    let (h1, h2) = halves(y, a1, a2);
    let a = h1 - nu * nu * h2;
    let b = 2.0 * nu * (h1 + nu * h2);
    let c = nu * nu * (h1 - h2);
    let alpha_minus = {
        let s = h1.sqrt() + h2.sqrt();
        s * s
    };
    QuadraticData {
        a,
        b,
        c,
        discriminant: b * b - 4.0 * a * c,
        delta: h1 * h2,
        s_factor: (y[0] * y[0] + y[2] * y[2]) * h2,
        t_factor: (y[1] * y[1] + y[3] * y[3]) * h1,
        alpha_plus: alpha_plus(h1, h2),
        alpha_minus,
        nu,
    }
}

/// Both critical points of the weighted problem, `+` being the minimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSolution {
    pub nu: f64,
    pub s_plus: f64,
    /// Infinite when the quadratic degenerates to a linear equation; the
    /// matching critical point is then the apex `eps = -y`.
    pub s_minus: f64,
    pub eps_plus: Vector4<f64>,
    pub eps_minus: Vector4<f64>,
    pub weighted_cost_plus: f64,
    pub weighted_cost_minus: f64,
    pub unweighted_cost_plus: f64,
    pub unweighted_cost_minus: f64,
}

fn check_positive(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite() && *v > 0.0) {
        Ok(())
    } else {
        Err(TriangulationError::InvalidWeights)
    }
}

/// Weights `(a1, nu a1, a2, nu a2)`.
pub fn weights(a1: f64, a2: f64, nu: f64) -> Vector4<f64> {
    Vector4::new(a1, nu * a1, a2, nu * a2)
}

/// Critical point for the root `s`. With the structured weights the factors
/// `a_i` cancel: `eps = (s y1/(1-s), -s y2/(nu+s), s y3/(1-s), -s y4/(nu+s))`.
fn critical_point(y: &Vector4<f64>, nu: f64, s: f64) -> Vector4<f64> {
    if s.is_infinite() {
        return -y;
    }
    let p = s / (1.0 - s);
    let m = -s / (nu + s);
    Vector4::new(p * y[0], m * y[1], p * y[2], m * y[3])
}

pub fn solve_weighted(y: &Vector4<f64>, a1: f64, a2: f64, nu: f64) -> Result<WeightedSolution> {
    check_positive(&[a1, a2, nu])?;
    let data = quadratic_data(y, a1, a2, nu);
    let amax = a1.max(a2);
    if data.delta <= DEGENERATE_TOL * amax * amax * y.norm_squared().powi(2) {
        return Err(TriangulationError::DegenerateData(
            "one epipolar half of the local point vanishes",
        ));
    }

    let (first, second) = if data.a.abs() < LINEAR_TOL * (data.b.abs() + data.c.abs()) {
        (-data.c / data.b, f64::INFINITY)
    } else {
        // sqrt(B^2 - 4AC) = 2 nu (nu + 1) sqrt(delta)
        let root_disc = 2.0 * nu * (nu + 1.0) * data.delta.sqrt();
        let q = -0.5 * (data.b + data.b.signum() * root_disc);
        (q / data.a, data.c / q)
    };

    let w = weights(a1, a2, nu);
    let evaluate = |s: f64| {
        let eps = critical_point(y, nu, s);
        let weighted = eps.component_mul(&eps).dot(&w);
        (eps, weighted, eps.norm_squared())
    };
    let r1 = evaluate(first);
    let r2 = evaluate(second);
    let ((s_plus, plus), (s_minus, minus)) = if r1.1 <= r2.1 {
        ((first, r1), (second, r2))
    } else {
        ((second, r2), (first, r1))
    };

    Ok(WeightedSolution {
        nu,
        s_plus,
        s_minus,
        eps_plus: plus.0,
        eps_minus: minus.0,
        weighted_cost_plus: plus.1,
        weighted_cost_minus: minus.1,
        unweighted_cost_plus: plus.2,
        unweighted_cost_minus: minus.2,
    })
}

/// The weight ratio `nu = T / S` minimizing the unweighted cost of `eps^+`.
pub fn optimal_nu(y: &Vector4<f64>, a1: f64, a2: f64) -> Result<f64> {
    check_positive(&[a1, a2])?;
    let (h1, h2) = halves(y, a1, a2);
    let s = (y[0] * y[0] + y[2] * y[2]) * h2;
    let t = (y[1] * y[1] + y[3] * y[3]) * h1;
    let tol = DEGENERATE_TOL * a1.max(a2) * y.norm_squared().powi(2);
    if s <= tol || t <= tol {
        return Err(TriangulationError::DegenerateData(
            "S or T vanishes; the optimal weight ratio is undefined",
        ));
    }
    Ok(t / s)
}

/// Output of the weighted corrector in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedTriangulation {
    pub corrected: Correspondence,
    /// `||x_hat - x_tilde||^2`.
    pub cost: f64,
    pub local: Vector4<f64>,
    pub solution: WeightedSolution,
}

pub fn triangulate_weighted(
    f: &FundamentalMatrix,
    c: &Correspondence,
) -> Result<WeightedTriangulation> {
    let d = f.diagonalize()?;
    triangulate_weighted_with(&d, c)
}

/// Same as [`triangulate_weighted`] with a precomputed diagonalization, which
/// only depends on the image pair.
pub fn triangulate_weighted_with(
    d: &DiagonalizedProblem,
    c: &Correspondence,
) -> Result<WeightedTriangulation> {
    let x = c.stacked();
    let y = d.to_local(&x);
    let nu = optimal_nu(&y, d.a1, d.a2)?;
    let solution = solve_weighted(&y, d.a1, d.a2, nu)?;
    let x_hat = x + d.from_local(&solution.eps_plus);
    let mut corrected = Correspondence::from_stacked(&x_hat);
    corrected.ground_truth = c.ground_truth;
    Ok(WeightedTriangulation {
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
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(rng: &mut ChaCha8Rng) -> (Vector4<f64>, f64, f64) {
        let y = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        (y, rng.random_range(0.05..1.0), rng.random_range(0.05..1.0))
    }

    #[test]
    fn worked_example_coefficients() {
        let y = Vector4::new(2.0, 1.0, 0.0, 0.0);
        let d = quadratic_data(&y, 1.0, 1.0, 1.0);
        assert_eq!((d.a, d.b, d.c), (3.0, 10.0, 3.0));
        assert_eq!(d.discriminant, 64.0);
        assert_eq!(d.delta, 4.0);
        assert_eq!((d.s_factor, d.t_factor), (4.0, 4.0));
        assert_eq!(d.alpha_plus, 1.0);
    }

    #[test]
    fn worked_example_solution() {
        let y = Vector4::new(2.0, 1.0, 0.0, 0.0);
        let sol = solve_weighted(&y, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(sol.s_plus, -1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(sol.s_minus, -3.0, epsilon = 1e-15);
        assert_relative_eq!(sol.eps_plus, Vector4::new(-0.5, 0.5, 0.0, 0.0), epsilon = 1e-15);
        assert_relative_eq!(sol.unweighted_cost_plus, 0.5, epsilon = 1e-15);
        assert_relative_eq!(sol.weighted_cost_plus, 0.5, epsilon = 1e-15);
        assert_eq!(optimal_nu(&y, 1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn on_model_point_needs_no_correction() {
        let y = Vector4::new(1.0, 1.0, 0.0, 0.0);
        let d = quadratic_data(&y, 1.0, 1.0, 1.0);
        assert_eq!(d.c, 0.0);
        let sol = solve_weighted(&y, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(sol.eps_plus, Vector4::zeros());
        assert_eq!(sol.unweighted_cost_plus, 0.0);
    }

    #[test]
    fn symmetric_data_gives_unit_nu() {
        let y = Vector4::new(0.3, 0.3, -0.8, -0.8);
        assert_relative_eq!(optimal_nu(&y, 0.6, 0.6).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_inputs() {
        let y = Vector4::new(1.0, 0.0, 2.0, 0.0);
        assert!(matches!(
            solve_weighted(&y, 1.0, 0.5, 1.0),
            Err(TriangulationError::DegenerateData(_))
        ));
        assert!(matches!(
            optimal_nu(&y, 1.0, 0.5),
            Err(TriangulationError::DegenerateData(_))
        ));
        assert!(matches!(
            optimal_nu(&Vector4::new(0.0, 1.0, 0.0, 2.0), 1.0, 0.5),
            Err(TriangulationError::DegenerateData(_))
        ));
        assert_eq!(
            solve_weighted(&Vector4::new(1.0, 1.0, 1.0, 1.0), 1.0, 0.5, -1.0),
            Err(TriangulationError::InvalidWeights)
        );
    }

    #[test]
    fn linear_degeneration_uses_single_root() {
        // A = h1 - nu^2 h2 = 0 with h1 = 4, h2 = 1, nu = 2.
        let y = Vector4::new(2.0, 1.0, 0.0, 0.0);
        let sol = solve_weighted(&y, 1.0, 1.0, 2.0).unwrap();
        assert!(sol.s_minus.is_infinite());
        assert_eq!(sol.eps_minus, -y);
        let q = Vector4::new(1.0, -1.0, 1.0, -1.0);
        assert!(constraint_value(&q, &(y + sol.eps_plus)).abs() < 1e-14);
        // Closed-form value of the minimizer still applies.
        let d = quadratic_data(&y, 1.0, 1.0, 2.0);
        assert_relative_eq!(sol.weighted_cost_plus, 2.0 / 3.0 * d.alpha_plus, epsilon = 1e-14);
    }

    #[test]
    fn random_instances_feasible_and_dominant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5000 {
            let (y, a1, a2) = random_instance(&mut rng);
            let nu = rng.random_range(0.05..5.0);
            let sol = solve_weighted(&y, a1, a2, nu).unwrap();
            let q = Vector4::new(a1, -a1, a2, -a2);
            assert!(constraint_value(&q, &(y + sol.eps_plus)).abs() < 1e-9 * y.norm_squared());
            assert!(sol.weighted_cost_plus < sol.weighted_cost_minus);
            assert!(sol.unweighted_cost_plus < sol.unweighted_cost_minus);
            // Stationarity: w_i eps_i = s q_i (y_i + eps_i).
            let w = weights(a1, a2, nu);
            for i in 0..4 {
                let lhs = w[i] * sol.eps_plus[i];
                let rhs = sol.s_plus * q[i] * (y[i] + sol.eps_plus[i]);
                assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
            }
        }
    }

    #[test]
    fn closed_form_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5000 {
            let (y, a1, a2) = random_instance(&mut rng);
            let nu = rng.random_range(0.05..5.0);
            let d = quadratic_data(&y, a1, a2, nu);
            let factor = 4.0 * nu * nu * (nu + 1.0) * (nu + 1.0);
            assert_relative_eq!(d.discriminant, factor * d.delta, max_relative = 1e-10);
            let st = (y[0] * y[0] + y[2] * y[2]) * (y[1] * y[1] + y[3] * y[3]) * d.delta;
            assert_relative_eq!(d.s_factor * d.t_factor, st, max_relative = 1e-10);
            assert!(d.alpha_plus >= 0.0 && d.alpha_minus >= d.alpha_plus);
            let sol = solve_weighted(&y, a1, a2, nu).unwrap();
            assert_relative_eq!(
                sol.weighted_cost_plus,
                nu / (nu + 1.0) * d.alpha_plus,
                max_relative = 1e-10
            );
            let un = |alpha: f64| {
                alpha * (d.s_factor * nu * nu + d.t_factor) / (d.delta * (nu + 1.0) * (nu + 1.0))
            };
            assert_relative_eq!(sol.unweighted_cost_plus, un(d.alpha_plus), max_relative = 1e-10);
            assert_relative_eq!(sol.unweighted_cost_minus, un(d.alpha_minus), max_relative = 1e-10);
        }
    }

    #[test]
    fn optimal_nu_matches_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let (y, a1, a2) = random_instance(&mut rng);
            let best = optimal_nu(&y, a1, a2).unwrap();
            let (lo, hi) = (best / 10.0, best * 10.0);
            let n = 10_000;
            let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
            let argmin = grid
                .iter()
                .enumerate()
                .map(|(i, &nu)| (i, solve_weighted(&y, a1, a2, nu).unwrap().unweighted_cost_plus))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap()
                .0;
            let nearest = grid
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - best).abs().total_cmp(&(b.1 - best).abs()))
                .unwrap()
                .0;
            assert_eq!(argmin, nearest);
        }
    }

    #[test]
    fn cost_is_stationary_at_optimal_nu() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..100 {
            let (y, a1, a2) = random_instance(&mut rng);
            let nu = optimal_nu(&y, a1, a2).unwrap();
            let h = 1e-5 * nu;
            let cost = |v: f64| solve_weighted(&y, a1, a2, v).unwrap().unweighted_cost_plus;
            let deriv = (cost(nu + h) - cost(nu - h)) / (2.0 * h);
            assert!(deriv.abs() < 1e-6 * cost(nu) / nu, "derivative {deriv}");
        }
    }

    proptest! {
        #[test]
        fn joint_rescaling_of_eigenvalues_is_harmless(
            y in proptest::array::uniform4(-1.0f64..1.0),
            a1 in 0.05f64..1.0,
            a2 in 0.05f64..1.0,
            c in 0.01f64..100.0,
        ) {
            let y = Vector4::from(y);
            prop_assume!(y.iter().all(|v| v.abs() > 1e-3));
            let nu = optimal_nu(&y, a1, a2).unwrap();
            let nu_c = optimal_nu(&y, c * a1, c * a2).unwrap();
            prop_assert!((nu - nu_c).abs() <= 1e-12 * nu);
            let s = solve_weighted(&y, a1, a2, nu).unwrap();
            let sc = solve_weighted(&y, c * a1, c * a2, nu).unwrap();
            prop_assert!((s.eps_plus - sc.eps_plus).amax() <= 1e-12 * (1.0 + y.amax()));
        }
    }
}
