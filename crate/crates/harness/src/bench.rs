//! Benchmark protocol: every method on every correspondence, 2D distances
//! to the measurements and to the ground truth, and a per-correspondence
//! check that the optimal error lies within its cheap bounds.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use twoview::baselines::TwoView;
use twoview::bounds::error_bounds;
use twoview::critical::optimal_unweighted;
use twoview::{Correspondence, ErrorBounds, Method};

/// Relative slack of the bound check.
pub const SANDWICH_TOL: f64 = 1e-9;

/// Upper edges of the eigenvalue-ratio histogram bins; the last bin is open.
pub const RATIO_BINS: [f64; 6] = [1.0 + 1e-9, 1.1, 1.5, 2.0, 4.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub index: usize,
    pub method: Method,
    /// `||x_hat - x_tilde||^2`.
    pub cost2d: Option<f64>,
    /// `||x_hat - x_gt||`.
    pub dist_gt: Option<f64>,
    pub bounds: Option<ErrorBounds>,
    pub err: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
}

impl Summary {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let quantile = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Self {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median: quantile(0.5),
            p95: quantile(0.95),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodReport {
    pub method: String,
    pub succeeded: usize,
    pub failed: usize,
    /// Distance to the measured points, `sqrt(cost2d)`.
    pub dist_measured: Option<Summary>,
    pub dist_gt: Option<Summary>,
    /// Wall-clock time per correspondence in nanoseconds. Informational.
    pub nanos_per_correspondence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub n_correspondences: usize,
    pub methods: Vec<MethodReport>,
    /// Bin label to count; a correspondence counts once.
    pub ratio_histogram: BTreeMap<String, usize>,
    pub bound_violations: usize,
}

impl MetricsReport {
    pub fn method(&self, m: Method) -> Option<&MethodReport> {
        self.methods.iter().find(|r| r.method == m.name())
    }
}

#[derive(Debug, Clone)]
pub struct BenchOutput {
    /// Correspondence-major, methods in the requested order.
    pub rows: Vec<BenchRow>,
    pub report: MetricsReport,
}

struct CorrespondenceResult {
    rows: Vec<BenchRow>,
    nanos: Vec<u128>,
    ratio: Option<f64>,
    violation: bool,
}

fn ratio_bin(ratio: f64) -> String {
    let mut lower = 1.0;
    for edge in RATIO_BINS {
        if ratio < edge {
            return format!("[{lower}, {edge})");
        }
        lower = edge;
    }
    format!("[{lower}, inf)")
}

fn evaluate(view: &TwoView, index: usize, c: &Correspondence, methods: &[Method]) -> CorrespondenceResult {
    let diag = view.diagonalized().ok();
    let (bounds, violation) = match diag {
        Some(d) => {
            let y = d.to_local(&c.stacked());
            match (error_bounds(&y, d.a1, d.a2), optimal_unweighted(&y, d.a1, d.a2)) {
                (Ok(b), Ok(e)) => (Some(b), !b.sandwiches(e.error, SANDWICH_TOL)),
                (Ok(b), Err(_)) => (Some(b), false),
                _ => (None, false),
            }
        }
        None => (None, false),
    };

    let mut rows = Vec::with_capacity(methods.len());
    let mut nanos = Vec::with_capacity(methods.len());
    for &method in methods {
        let start = Instant::now();
        let result = view.apply(method, c);
        nanos.push(start.elapsed().as_nanos());
        let row = match result {
            Ok(r) => BenchRow {
                index,
                method,
                cost2d: Some(r.cost2d),
                dist_gt: r
                    .corrected
                    .ground_truth
                    .map(|(g1, g2)| ((r.corrected.x1 - g1).norm_squared() + (r.corrected.x2 - g2).norm_squared()).sqrt()),
                bounds,
                err: None,
            },
            Err(e) => BenchRow {
                index,
                method,
                cost2d: None,
                dist_gt: None,
                bounds,
                err: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    CorrespondenceResult {
        rows,
        nanos,
        ratio: diag.map(|d| d.eigenvalue_ratio()),
        violation,
    }
}

/// Applies each method to every correspondence in parallel. Method failures
/// are recorded per row and are not fatal.
pub fn run_benchmark(view: &TwoView, matches: &[Correspondence], methods: &[Method]) -> BenchOutput {
    let results: Vec<CorrespondenceResult> = matches
        .par_iter()
        .enumerate()
        .map(|(i, c)| evaluate(view, i, c, methods))
        .collect();

    let mut ratio_histogram = BTreeMap::new();
    let mut bound_violations = 0;
    let mut total_nanos = vec![0u128; methods.len()];
    for r in &results {
        if let Some(ratio) = r.ratio {
            *ratio_histogram.entry(ratio_bin(ratio)).or_insert(0) += 1;
        }
        bound_violations += usize::from(r.violation);
        for (t, n) in total_nanos.iter_mut().zip(&r.nanos) {
            *t += n;
        }
    }
    let rows: Vec<BenchRow> = results.into_iter().flat_map(|r| r.rows).collect();

    let method_reports = methods
        .iter()
        .zip(&total_nanos)
        .map(|(&m, &nanos)| {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.method == m).collect();
            let measured: Vec<f64> = mine.iter().filter_map(|r| r.cost2d).map(f64::sqrt).collect();
            let gt: Vec<f64> = mine.iter().filter_map(|r| r.dist_gt).collect();
            MethodReport {
                method: m.name().to_string(),
                succeeded: measured.len(),
                failed: mine.len() - measured.len(),
                dist_measured: Summary::of(&measured),
                dist_gt: Summary::of(&gt),
                nanos_per_correspondence: if matches.is_empty() {
                    0.0
                } else {
                    nanos as f64 / matches.len() as f64
                },
            }
        })
        .collect();

    BenchOutput {
        rows,
        report: MetricsReport {
            n_correspondences: matches.len(),
            methods: method_reports,
            ratio_histogram,
            bound_violations,
        },
    }
}

fn field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `method,cost2d,dist_gt,lower,best_upper,upper,ratio,err`.
pub fn write_metrics_csv<W: Write>(out: W, rows: &[BenchRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "method",
        "cost2d",
        "dist_gt",
        "lower",
        "best_upper",
        "upper",
        "ratio",
        "err",
    ])?;
    for r in rows {
        let b = r.bounds.as_ref();
        w.write_record([
            r.method.name().to_string(),
            field(r.cost2d),
            field(r.dist_gt),
            field(b.map(|b| b.lower)),
            field(b.and_then(|b| b.best_upper)),
            field(b.map(|b| b.upper)),
            field(b.map(|b| b.ratio)),
            r.err.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{synth_scene, RotationSpec, SceneConfig};

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[3.0, 1.0, 2.0, 4.0, 5.0]).unwrap();
        assert_eq!((s.mean, s.median), (3.0, 3.0));
        assert!((s.p95 - 4.8).abs() < 1e-12);
        assert!(Summary::of(&[]).is_none());
    }

    #[test]
    fn ratio_bins() {
        assert_eq!(ratio_bin(1.0), "[1, 1.000000001)");
        assert_eq!(ratio_bin(1.7), "[1.5, 2)");
        assert_eq!(ratio_bin(50.0), "[10, inf)");
    }

    #[test]
    fn rows_are_correspondence_major() {
        let scene = synth_scene(&SceneConfig {
            n_points: 7,
            ..SceneConfig::default()
        })
        .unwrap();
        let view = scene.two_view().unwrap();
        let methods = [Method::Exact, Method::Sampson, Method::Dlt];
        let out = run_benchmark(&view, &scene.correspondences, &methods);
        assert_eq!(out.rows.len(), 21);
        for (k, r) in out.rows.iter().enumerate() {
            assert_eq!(r.index, k / 3);
            assert_eq!(r.method, methods[k % 3]);
            assert!(r.err.is_none());
        }
        assert_eq!(out.report.bound_violations, 0);
        assert_eq!(out.report.ratio_histogram.values().sum::<usize>(), 7);
    }

    #[test]
    fn parallel_axes_weighted_equals_exact() {
        let scene = synth_scene(&SceneConfig {
            rotation: RotationSpec::ParallelAxes,
            n_points: 200,
            seed: 5,
            ..SceneConfig::default()
        })
        .unwrap();
        let view = scene.two_view().unwrap();
        let out = run_benchmark(&view, &scene.correspondences, &[Method::Weighted, Method::Exact]);
        for pair in out.rows.chunks(2) {
            let (w, e) = (pair[0].cost2d.unwrap(), pair[1].cost2d.unwrap());
            assert!((w - e).abs() <= 1e-10, "{w} vs {e}");
        }
    }

    #[test]
    fn generic_scene_ordering() {
        let scene = synth_scene(&SceneConfig {
            rotation: RotationSpec::Random(20.0),
            n_points: 300,
            seed: 6,
            ..SceneConfig::default()
        })
        .unwrap();
        let view = scene.two_view().unwrap();
        let out = run_benchmark(&view, &scene.correspondences, &[Method::Weighted, Method::Exact]);
        let w = out.report.method(Method::Weighted).unwrap();
        let e = out.report.method(Method::Exact).unwrap();
        assert_eq!((w.failed, e.failed), (0, 0));
        assert!(w.dist_measured.unwrap().mean >= e.dist_measured.unwrap().mean);
        assert_eq!(out.report.bound_violations, 0);
    }

    #[test]
    fn empty_input_gives_empty_report() {
        let scene = synth_scene(&SceneConfig::default()).unwrap();
        let view = scene.two_view().unwrap();
        let out = run_benchmark(&view, &[], &Method::ALL);
        assert!(out.rows.is_empty());
        assert_eq!(out.report.n_correspondences, 0);
        assert!(out.report.methods.iter().all(|m| m.dist_measured.is_none()));
        let mut buf = Vec::new();
        write_metrics_csv(&mut buf, &out.rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "method,cost2d,dist_gt,lower,best_upper,upper,ratio,err\n"
        );
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        use twoview::FundamentalMatrix;
        let f = FundamentalMatrix::from_row_major(&[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
            .unwrap();
        let view = TwoView::from_fundamental(f);
        let c = Correspondence::new(nalgebra::Vector2::new(1.0, 2.0), nalgebra::Vector2::new(3.0, 1.0));
        let out = run_benchmark(&view, &[c], &[Method::Exact, Method::Dlt]);
        assert!(out.rows[1].err.is_some());
        assert_eq!(out.report.method(Method::Dlt).unwrap().failed, 1);
    }
}
