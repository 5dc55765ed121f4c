use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use twoview::baselines::{sampson_error, TwoView};
use twoview::bounds::{error_bounds, upper_bound_below};
use twoview::critical::optimal_unweighted;
use twoview::{Correspondence, Method};
use twoview_harness::bench::{run_benchmark, write_metrics_csv, SANDWICH_TOL};
use twoview_harness::census::degree_census;
use twoview_harness::error::{HarnessError, Result};
use twoview_harness::io;
use twoview_harness::scene::{synth_scene, SceneConfig};
use twoview_harness::sweep::{sweep_epipolar_cost, DEFAULT_ANGLES};

/// Two-view triangulation: correctors, benchmarks and diagnostics.
#[derive(Parser)]
#[command(name = "twoview", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correct every correspondence with one method and recover 3D points.
    Triangulate(TriangulateArgs),
    /// Run all selected methods on a synthetic or external scene.
    Bench(BenchArgs),
    /// Tabulate the correction cost over all epipolar planes.
    Sweep(SweepArgs),
    /// Tally critical polynomial degrees over random instances.
    Census(CensusArgs),
    /// Bounds on the optimal error and the inlier decision per correspondence.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct Geometry {
    /// Camera JSON with at least two cameras.
    #[arg(long, conflicts_with = "fundamental")]
    cameras: Option<PathBuf>,
    /// Fundamental matrix JSON.
    #[arg(long)]
    fundamental: Option<PathBuf>,
}

impl Geometry {
    fn load(&self) -> Result<TwoView> {
        match (&self.cameras, &self.fundamental) {
            (Some(c), _) => {
                let (c1, c2) = io::read_camera_pair(c)?;
                Ok(TwoView::from_cameras(c1, c2)?)
            }
            (None, Some(f)) => Ok(TwoView::from_fundamental(io::read_fundamental(f)?)),
            (None, None) => Err(HarnessError::Input(
                "either --cameras or --fundamental is required".into(),
            )),
        }
    }
}

#[derive(Args)]
struct TriangulateArgs {
    #[command(flatten)]
    geometry: Geometry,
    #[arg(long)]
    matches: PathBuf,
    #[arg(long, default_value = "weighted")]
    method: Method,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Scene JSON for a synthetic run.
    #[arg(long, required_unless_present = "matches")]
    config: Option<PathBuf>,
    /// External correspondences; requires --cameras.
    #[arg(long, conflicts_with = "config", requires = "cameras")]
    matches: Option<PathBuf>,
    #[arg(long)]
    cameras: Option<PathBuf>,
    /// Comma separated; all methods when absent.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<Method>,
    /// Metrics CSV.
    #[arg(long)]
    out: PathBuf,
    /// Also write the synthetic correspondences.
    #[arg(long)]
    matches_out: Option<PathBuf>,
    /// Also write the synthetic cameras.
    #[arg(long)]
    cameras_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    fundamental: PathBuf,
    /// `x1,y1,x2,y2`.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    #[arg(long, default_value_t = DEFAULT_ANGLES)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CensusArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    case: u8,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    fundamental: PathBuf,
    #[arg(long)]
    matches: PathBuf,
    /// Inlier threshold on the error, in pixels.
    #[arg(long)]
    radius: f64,
    #[arg(long)]
    out: PathBuf,
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> HarnessError + '_ {
    move |e| HarnessError::parse(path, e)
}

fn fmt(v: f64) -> String {
    v.to_string()
}

fn triangulate(args: &TriangulateArgs) -> Result<()> {
    let view = args.geometry.load()?;
    let matches = io::read_correspondences(&args.matches)?;
    let mut w = csv::Writer::from_writer(io::create(&args.out)?);
    let to_csv = csv_error(&args.out);
    w.write_record(["x1", "y1", "x2", "y2", "X", "Y", "Z", "cost2d", "err"])
        .map_err(&to_csv)?;
    let mut failures = 0;
    for c in &matches {
        let record = match view.apply(args.method, c) {
            Ok(r) => {
                let p = r.point3d.map(|p| [fmt(p[0]), fmt(p[1]), fmt(p[2])]);
                let [px, py, pz] = p.unwrap_or_default();
                let x = r.corrected;
                [
                    fmt(x.x1[0]),
                    fmt(x.x1[1]),
                    fmt(x.x2[0]),
                    fmt(x.x2[1]),
                    px,
                    py,
                    pz,
                    fmt(r.cost2d),
                    String::new(),
                ]
            }
            Err(e) => {
                failures += 1;
                let mut row: [String; 9] = Default::default();
                row[8] = e.to_string();
                row
            }
        };
        w.write_record(&record).map_err(&to_csv)?;
    }
    w.flush().map_err(|e| HarnessError::io(&args.out, e))?;
    println!(
        "{}: {} correspondences, {} failed",
        args.method,
        matches.len(),
        failures
    );
    Ok(())
}

fn bench(args: &BenchArgs) -> Result<()> {
    let methods = if args.methods.is_empty() {
        Method::ALL.to_vec()
    } else {
        args.methods.clone()
    };
    let (view, matches, cameras) = match (&args.config, &args.matches, &args.cameras) {
        (Some(config), _, _) => {
            let text = std::fs::read_to_string(config).map_err(|e| HarnessError::io(config, e))?;
            let cfg: SceneConfig =
                serde_json::from_str(&text).map_err(|e| HarnessError::parse(config, e))?;
            let scene = synth_scene(&cfg)?;
            let cams = [scene.cameras.0, scene.cameras.1];
            (scene.two_view()?, scene.correspondences, cams)
        }
        (None, Some(m), Some(c)) => {
            let (c1, c2) = io::read_camera_pair(c)?;
            (TwoView::from_cameras(c1, c2)?, io::read_correspondences(m)?, [c1, c2])
        }
        _ => return Err(HarnessError::Input("either --config or --matches with --cameras".into())),
    };
    if let Some(path) = &args.matches_out {
        io::write_correspondences(io::create(path)?, &matches).map_err(csv_error(path))?;
    }
    if let Some(path) = &args.cameras_out {
        std::fs::write(path, io::cameras_to_json(&cameras)).map_err(|e| HarnessError::io(path, e))?;
    }

    let output = run_benchmark(&view, &matches, &methods);
    write_metrics_csv(io::create(&args.out)?, &output.rows).map_err(csv_error(&args.out))?;
    println!(
        "{}",
        serde_json::to_string_pretty(&output.report).expect("serializable")
    );
    if output.report.bound_violations > 0 {
        return Err(HarnessError::Assertion(format!(
            "{} correspondences violate the error bounds",
            output.report.bound_violations
        )));
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let f = io::read_fundamental(&args.fundamental)?;
    let c = io::parse_point(&args.point)?;
    let table = sweep_epipolar_cost(&f, &c, args.n)?;
    table
        .write_csv(io::create(&args.out)?)
        .map_err(csv_error(&args.out))?;
    println!(
        "nu = {}, local minima: unweighted {}, weighted {}",
        table.nu,
        table.unweighted_minima(),
        table.weighted_minima()
    );
    Ok(())
}

fn census(args: &CensusArgs) -> Result<()> {
    let table = degree_census(args.n, args.case, args.seed)?;
    println!("{}", serde_json::to_string_pretty(&table).expect("serializable"));
    if !table.passed() {
        return Err(HarnessError::Assertion(format!(
            "{} of {} samples do not have degree {}",
            table.failures, table.n_samples, table.expected_degree
        )));
    }
    Ok(())
}

struct BoundsRecord {
    fields: [String; 9],
    violation: bool,
}

fn bounds_record(view: &TwoView, c: &Correspondence, radius: f64) -> BoundsRecord {
    let failed = |e: String| {
        let mut fields: [String; 9] = Default::default();
        fields[8] = e;
        BoundsRecord {
            fields,
            violation: false,
        }
    };
    let d = match view.diagonalized() {
        Ok(d) => d,
        Err(e) => return failed(e.to_string()),
    };
    let y = d.to_local(&c.stacked());
    let b = match error_bounds(&y, d.a1, d.a2) {
        Ok(b) => b,
        Err(e) => return failed(e.to_string()),
    };
    let exact = optimal_unweighted(&y, d.a1, d.a2);
    let sampson = sampson_error(&view.fundamental, c);
    let err = [exact.as_ref().err(), sampson.as_ref().err()]
        .into_iter()
        .flatten()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join("; ");
    let violation = exact
        .as_ref()
        .is_ok_and(|e| !b.sandwiches(e.error, SANDWICH_TOL));
    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
    BoundsRecord {
        fields: [
            fmt(b.lower),
            opt(b.best_upper),
            fmt(b.upper),
            fmt(b.ratio),
            fmt(b.alpha_plus),
            opt(exact.ok().map(|e| e.error)),
            opt(sampson.ok()),
            upper_bound_below(&y, d.a1, d.a2, radius).to_string(),
            err,
        ],
        violation,
    }
}

fn bounds(args: &BoundsArgs) -> Result<()> {
    if !(args.radius > 0.0 && args.radius.is_finite()) {
        return Err(HarnessError::Input("radius must be positive".into()));
    }
    let view = TwoView::from_fundamental(io::read_fundamental(&args.fundamental)?);
    let matches = io::read_correspondences(&args.matches)?;
    let mut w = csv::Writer::from_writer(io::create(&args.out)?);
    let to_csv = csv_error(&args.out);
    w.write_record([
        "lower",
        "best_upper",
        "upper",
        "ratio",
        "alpha_plus",
        "exact",
        "sampson",
        "inlier",
        "err",
    ])
    .map_err(&to_csv)?;
    let mut violations = 0;
    for c in &matches {
        let r = bounds_record(&view, c, args.radius);
        violations += usize::from(r.violation);
        w.write_record(&r.fields).map_err(&to_csv)?;
    }
    w.flush().map_err(|e| HarnessError::io(&args.out, e))?;
    if violations > 0 {
        return Err(HarnessError::Assertion(format!(
            "{violations} correspondences violate the error bounds"
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Triangulate(a) => triangulate(a),
        Command::Bench(a) => bench(a),
        Command::Sweep(a) => sweep(a),
        Command::Census(a) => census(a),
        Command::Bounds(a) => bounds(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
