//! Synthetic two-view scenes, file formats, and the benchmark, sweep and
//! census drivers behind the `twoview` command line tool.

pub mod bench;
pub mod census;
pub mod error;
pub mod io;
pub mod scene;
pub mod sweep;

pub use bench::{run_benchmark, BenchOutput, BenchRow, MetricsReport};
pub use census::{degree_census, CensusTable};
pub use error::{HarnessError, Result};
pub use scene::{synth_scene, RotationSpec, SceneConfig, SyntheticScene};
pub use sweep::{sweep_epipolar_cost, SweepTable};
