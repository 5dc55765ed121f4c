//! Seeded synthetic stereo scenes.
//!
//! All randomness comes from ChaCha20 seeded with `SceneConfig::seed`.
//! Stream 0 draws the rig and the 3D points; the noise of the `i`-th
//! visible correspondence is drawn from stream `i + 1`, so a correspondence
//! keeps its noise when `n_points` changes.

use nalgebra::{Matrix3, Matrix3x4, Rotation3, Unit, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use serde::{Deserialize, Serialize};
use twoview::baselines::TwoView;
use twoview::{CameraMatrix, Correspondence};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RotationSpec {
    /// Rotation about the optical axis by a random angle in `[-30, 30]`
    /// degrees; the last row of `R` is `(0, 0, 1)`.
    ParallelAxes,
    /// Rotation vector (axis times angle in radians).
    AxisAngle([f64; 3]),
    /// Uniformly random axis with the given angle in degrees.
    Random(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub n_points: usize,
    /// Distance between the camera centers.
    pub baseline: f64,
    pub rotation: RotationSpec,
    /// Standard deviation of the Gaussian noise per pixel coordinate.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Width and height in pixels; the principal point is the image center.
    pub image_size: [f64; 2],
    /// Focal length in pixels; defaults to the image width.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focal: Option<f64>,
    /// Depth range of the points in front of the first camera.
    #[serde(default = "default_depth_range")]
    pub depth_range: [f64; 2],
    /// Direction of the second camera center. When absent it is random,
    /// mostly sideways, with a forward or backward component of 0.2 to 0.6
    /// before normalization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_direction: Option<[f64; 3]>,
}

fn default_depth_range() -> [f64; 2] {
    [4.0, 8.0]
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            n_points: 100,
            baseline: 1.0,
            rotation: RotationSpec::Random(10.0),
            noise_sigma: 1.0,
            seed: 0,
            image_size: [640.0, 480.0],
            focal: None,
            depth_range: default_depth_range(),
            baseline_direction: None,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::Input(m.to_string()));
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be finite and non-negative");
        }
        if !(self.baseline > 0.0 && self.baseline.is_finite()) {
            return bad("baseline must be positive");
        }
        if !self.image_size.iter().all(|s| *s > 0.0 && s.is_finite()) {
            return bad("image_size must be positive");
        }
        if let Some(f) = self.focal {
            if !(f > 0.0 && f.is_finite()) {
                return bad("focal must be positive");
            }
        }
        let [near, far] = self.depth_range;
        if !(near > 0.0 && far > near && far.is_finite()) {
            return bad("depth_range must satisfy 0 < near < far");
        }
        if let Some(d) = self.baseline_direction {
            if !(Vector3::from(d).norm() > 0.0) {
                return bad("baseline_direction must be non-zero");
            }
        }
        Ok(())
    }

    pub fn intrinsics(&self) -> Matrix3<f64> {
        let [w, h] = self.image_size;
        let f = self.focal.unwrap_or(w);
        Matrix3::new(f, 0.0, 0.5 * w, 0.0, f, 0.5 * h, 0.0, 0.0, 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub cameras: (CameraMatrix, CameraMatrix),
    pub rotation: Matrix3<f64>,
    /// Center of the second camera; the first sits at the origin.
    pub center: Vector3<f64>,
    pub points: Vec<Vector3<f64>>,
    /// Noisy measurements with the noiseless projections as ground truth.
    pub correspondences: Vec<Correspondence>,
}

impl SyntheticScene {
    pub fn two_view(&self) -> Result<TwoView> {
        Ok(TwoView::from_cameras(self.cameras.0, self.cameras.1)?)
    }
}

fn rng_for_stream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn rotation(spec: RotationSpec, rng: &mut ChaCha20Rng) -> Matrix3<f64> {
    match spec {
        RotationSpec::ParallelAxes => {
            let angle = rng.random_range(-30f64..30.0).to_radians();
            *Rotation3::from_axis_angle(&Vector3::z_axis(), angle).matrix()
        }
        RotationSpec::AxisAngle(v) => *Rotation3::new(Vector3::from(v)).matrix(),
        RotationSpec::Random(degrees) => {
            let axis: [f64; 3] = UnitSphere.sample(rng);
            let axis = Unit::new_normalize(Vector3::from(axis));
            *Rotation3::from_axis_angle(&axis, degrees.to_radians()).matrix()
        }
    }
}

fn baseline_direction(cfg: &SceneConfig, rng: &mut ChaCha20Rng) -> Vector3<f64> {
    match cfg.baseline_direction {
        Some(d) => Vector3::from(d).normalize(),
        None => {
            // A purely sideways baseline puts the epipoles at infinity.
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            let z = rng.random_range(0.2..0.6) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            Vector3::new(phi.cos(), phi.sin(), z).normalize()
        }
    }
}

fn camera(k: &Matrix3<f64>, r: &Matrix3<f64>, center: &Vector3<f64>) -> Result<CameraMatrix> {
    let mut p = Matrix3x4::zeros();
    p.fixed_view_mut::<3, 3>(0, 0).copy_from(&(k * r));
    p.set_column(3, &(-(k * r * center)));
    Ok(CameraMatrix::new(p)?)
}

fn in_image(p: &Vector2<f64>, size: [f64; 2]) -> bool {
    (0.0..=size[0]).contains(&p[0]) && (0.0..=size[1]).contains(&p[1])
}

/// Builds the rig, samples points uniformly (pixel position and depth) in the
/// first camera's frustum, keeps those visible in both views and adds noise.
pub fn synth_scene(cfg: &SceneConfig) -> Result<SyntheticScene> {
    cfg.validate()?;
    let mut rng = rng_for_stream(cfg.seed, 0);
    let k = cfg.intrinsics();
    let k_inv = k.try_inverse().expect("intrinsics are invertible");
    let r = rotation(cfg.rotation, &mut rng);
    let center = baseline_direction(cfg, &mut rng) * cfg.baseline;
    let c1 = camera(&k, &Matrix3::identity(), &Vector3::zeros())?;
    let c2 = camera(&k, &r, &center)?;

    let [near, far] = cfg.depth_range;
    let max_attempts = cfg.n_points.saturating_mul(100);
    let mut points = Vec::with_capacity(cfg.n_points);
    let mut attempts = 0;
    while points.len() < cfg.n_points && attempts < max_attempts {
        attempts += 1;
        let pixel = Vector3::new(
            rng.random_range(0.0..cfg.image_size[0]),
            rng.random_range(0.0..cfg.image_size[1]),
            1.0,
        );
        let depth = rng.random_range(near..far);
        let x = k_inv * pixel * depth;
        if c2.depth(&x) > 0.0 && c2.project(&x).is_some_and(|p| in_image(&p, cfg.image_size)) {
            points.push(x);
        }
    }
    if points.is_empty() {
        return Err(HarnessError::EmptyScene);
    }

    let noise = Normal::new(0.0, cfg.noise_sigma).expect("validated sigma");
    let correspondences = points
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let mut rng = rng_for_stream(cfg.seed, i as u64 + 1);
            let g1 = c1.project(x).expect("visible");
            let g2 = c2.project(x).expect("visible");
            let mut n = || noise.sample(&mut rng);
            let x1 = g1 + Vector2::new(n(), n());
            let x2 = g2 + Vector2::new(n(), n());
            Correspondence::new(x1, x2).with_ground_truth(g1, g2)
        })
        .collect();

    Ok(SyntheticScene {
        cameras: (c1, c2),
        rotation: r,
        center,
        points,
        correspondences,
    })
}
