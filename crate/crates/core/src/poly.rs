//! Dense univariate polynomials with real coefficients in ascending order
//! (`c[0] + c[1] s + ...`), sized for the degree <= 6 critical equations.

use nalgebra::{Complex, DMatrix};

/// Roots with `|Im| <= REAL_ROOT_TOL * (1 + |Re|)` are treated as real.
pub const REAL_ROOT_TOL: f64 = 1e-8;

pub fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub fn add_assign(acc: &mut Vec<f64>, other: &[f64]) {
    if acc.len() < other.len() {
        acc.resize(other.len(), 0.0);
    }
    for (a, o) in acc.iter_mut().zip(other) {
        *a += o;
    }
}

pub fn scale(c: &[f64], factor: f64) -> Vec<f64> {
    c.iter().map(|v| v * factor).collect()
}

/// Horner evaluation.
pub fn evaluate(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, ci| acc * x + ci)
}

pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, ci)| i as f64 * ci)
        .collect()
}

/// Synthetic division by `(s - root)`. Returns the quotient and the
/// remainder, which equals the polynomial evaluated at `root`.
pub fn divide_by_root(c: &[f64], root: f64) -> (Vec<f64>, f64) {
    if c.len() <= 1 {
        return (Vec::new(), c.first().copied().unwrap_or(0.0));
    }
    let n = c.len() - 1;
    let mut quotient = vec![0.0; n];
    let mut carry = c[n];
    for k in (0..n).rev() {
        quotient[k] = carry;
        carry = c[k] + carry * root;
    }
    (quotient, carry)
}

/// Division by the linear factor `(alpha - beta s)`, `beta != 0`.
pub fn divide_by_linear(c: &[f64], alpha: f64, beta: f64) -> (Vec<f64>, f64) {
    // alpha - beta s = -beta (s - alpha/beta)
    let (q, rem) = divide_by_root(c, alpha / beta);
    (scale(&q, -1.0 / beta), rem)
}

/// Roots of `a s^2 + b s + c` without cancellation. A vanishing `a`
/// degrades to the linear root.
pub fn quadratic_real_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-12 * (b.abs() + c.abs()) {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0, 0.0];
    }
    vec![q / a, c / q]
}

/// Strips trailing coefficients that are exactly zero.
pub fn trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    c
}

/// All complex roots from the eigenvalues of the balanced companion matrix.
pub fn roots(c: &[f64]) -> Vec<Complex<f64>> {
    let c = trim(c.to_vec());
    let n = c.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    balance(&mut m);
    m.complex_eigenvalues().iter().copied().collect()
}

/// Real roots, each refined by a few guarded Newton steps.
pub fn real_roots(c: &[f64]) -> Vec<f64> {
    let d = derivative(c);
    let mut out: Vec<f64> = roots(c)
        .into_iter()
        .filter(|z| z.im.abs() <= REAL_ROOT_TOL * (1.0 + z.re.abs()))
        .map(|z| polish(c, &d, z.re))
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn polish(c: &[f64], d: &[f64], mut x: f64) -> f64 {
    let mut fx = evaluate(c, x).abs();
    for _ in 0..4 {
        let dx = evaluate(d, x);
        if dx == 0.0 {
            break;
        }
        let next = x - evaluate(c, x) / dx;
        let fnext = evaluate(c, next).abs();
        if !(fnext < fx) {
            break;
        }
        x = next;
        fx = fnext;
    }
    x
}

/// Parlett-Reinsch balancing with radix 2, which leaves eigenvalues
/// unchanged while equalizing row and column norms.
fn balance(m: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = m.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                c += m[(j, i)].abs();
                r += m[(i, j)].abs();
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiply_and_divide_round_trip() {
        let p = multiply(&[-1.0, 1.0], &[2.0, 3.0, 1.0]);
        assert_eq!(p, vec![-2.0, -1.0, 2.0, 1.0]);
        let (q, r) = divide_by_root(&p, 1.0);
        assert_eq!(q, vec![2.0, 3.0, 1.0]);
        assert_eq!(r, 0.0);
        let (q, r) = divide_by_linear(&p, 2.0, 2.0);
        assert_eq!(q, vec![-2.0, -3.0, -1.0].iter().map(|v| v / 2.0).collect::<Vec<_>>());
        assert_eq!(r, 0.0);
    }

    #[test]
    fn remainder_is_evaluation() {
        let p = [0.3, -1.2, 0.5, 2.0, -0.7];
        let (_, r) = divide_by_root(&p, 0.8);
        assert!((r - evaluate(&p, 0.8)).abs() < 1e-15);
    }

    #[test]
    fn companion_roots_of_known_sextic() {
        let expected = [-3.0, -1.5, -0.25, 0.5, 2.0, 4.0];
        let mut p = vec![1.0];
        for r in expected {
            p = multiply(&p, &[-r, 1.0]);
        }
        let p = scale(&p, 1e-3);
        let got = real_roots(&p);
        assert_eq!(got.len(), 6);
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < 1e-12, "{g} vs {e}");
        }
    }

    #[test]
    fn complex_pairs_are_filtered() {
        // (s^2 + 1)(s - 2)
        let p = multiply(&[1.0, 0.0, 1.0], &[-2.0, 1.0]);
        assert_eq!(roots(&p).len(), 3);
        let real = real_roots(&p);
        assert_eq!(real.len(), 1);
        assert!((real[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn quadratic_cases() {
        let r = quadratic_real_roots(3.0, 10.0, 3.0);
        let mut r = r;
        r.sort_by(f64::total_cmp);
        assert!((r[0] + 3.0).abs() < 1e-15 && (r[1] + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(quadratic_real_roots(0.0, 2.0, -4.0), vec![2.0]);
        assert!(quadratic_real_roots(1.0, 0.0, 1.0).is_empty());
        // Tiny root, no cancellation.
        let r = quadratic_real_roots(1.0, 1e8, 1.0);
        assert!(r.iter().any(|x| ((x + 1e-8) / 1e-8).abs() < 1e-12));
    }
}
