//! Degree census of the deflated critical polynomial over random instances.

use std::collections::BTreeMap;

use nalgebra::Vector4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use twoview::critical::{build_critical_polynomial, WeightVector};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusTable {
    /// 1: both pairs proportional to `a`, 2: one pair, 3: generic.
    pub case: u8,
    pub n_samples: usize,
    pub expected_degree: usize,
    /// Degree to number of samples.
    pub degrees: BTreeMap<usize, usize>,
    /// Number of real roots to number of samples.
    pub real_roots: BTreeMap<usize, usize>,
    /// Samples whose degree differs from the expected one or whose
    /// polynomial could not be built.
    pub failures: usize,
}

impl CensusTable {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn expected_degree(case: u8) -> usize {
    match case {
        1 => 2,
        2 => 4,
        _ => 6,
    }
}

/// Weights for the requested case. Every free factor is drawn from
/// `[0.05, 2)`.
fn sample_weights(case: u8, a1: f64, a2: f64, rng: &mut ChaCha20Rng) -> [f64; 4] {
    let mut draw = || rng.random_range(0.05..2.0);
    match case {
        1 => {
            let (mu, nu) = (draw(), draw());
            [mu * a1, nu * a1, mu * a2, nu * a2]
        }
        2 => {
            let scale = draw();
            let (g1, g2) = (draw(), draw());
            // Either pair, with equal probability.
            if draw() < 1.025 {
                [scale * a1, g1, scale * a2, g2]
            } else {
                [g1, scale * a1, g2, scale * a2]
            }
        }
        _ => [draw(), draw(), draw(), draw()],
    }
}

/// Samples `(a, y, lambda)` in the selected case and tallies the degree of
/// the deflated polynomial and its number of real roots.
pub fn degree_census(n_samples: usize, case: u8, seed: u64) -> Result<CensusTable> {
    if !(1..=3).contains(&case) {
        return Err(HarnessError::Input(format!("case must be 1, 2 or 3, got {case}")));
    }
    if n_samples == 0 {
        return Err(HarnessError::Input("n must be at least 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let expected = expected_degree(case);
    let mut table = CensusTable {
        case,
        n_samples,
        expected_degree: expected,
        degrees: BTreeMap::new(),
        real_roots: BTreeMap::new(),
        failures: 0,
    };
    for _ in 0..n_samples {
        let a1 = rng.random_range(0.05..1.0);
        let a2 = rng.random_range(0.05..1.0);
        let y = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let lambda = sample_weights(case, a1, a2, &mut rng);
        let lambda = WeightVector::new(lambda).expect("positive weights");
        match build_critical_polynomial(&y, a1, a2, &lambda) {
            Ok(p) => {
                let degree = p.degree();
                *table.degrees.entry(degree).or_insert(0) += 1;
                *table.real_roots.entry(p.real_roots().len()).or_insert(0) += 1;
                if degree != expected || p.case.index() != case {
                    table.failures += 1;
                }
            }
            Err(_) => table.failures += 1,
        }
    }
    Ok(table)
}
