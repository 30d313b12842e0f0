//! Deterministic synthetic dataset generator.
//!
//! Point clouds with a Gaussian radial distribution are placed at
//! `(0, 0, d)`, observed by one of four two-camera arrangements, the poses
//! are perturbed with small uniform noise, and the image projections are
//! perturbed with Gaussian pixel noise. Everything is driven by
//! [`CounterRng`] streams keyed by
//! `(seed, cell index, point index)`, so a dataset is a pure function of
//! its grid and seed under any parallel schedule.
//!
//! Stream layout within a cell (one cloud = one `(arrangement, d, sigma)`
//! combination): stream 0 perturbs camera 0, stream 1 perturbs camera 1,
//! and point `i` uses streams `2 + 3i` (position: sphere direction, then
//! radius), `3 + 3i` (pixel noise in view 0: du, dv) and `4 + 3i` (pixel
//! noise in view 1).

use std::fmt;
use std::str::FromStr;

use crate::geometry::{Intrinsics, Mat3, ObservationPair, RelativePose, Vec2, Vec3};
use crate::metrics::parallax_estimate;
use crate::rng::CounterRng;

/// Image side length used by the benchmark camera (pixels).
pub const DEFAULT_IMAGE_SIZE: f64 = 1024.0;
/// Focal length of the benchmark camera (pixels).
pub const DEFAULT_FOCAL: f64 = 512.0;
/// Half-width of the uniform pose perturbation.
pub const POSE_NOISE_WIDTH: f64 = 0.01;

/// The four two-camera layouts of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CameraArrangement {
    /// Cameras at `(+-0.5, 0, 0)` aimed at the cloud center.
    Orbital,
    /// Cameras at `(+-0.5, 0, 0)` with optical axes along +z.
    Lateral,
    /// Cameras at `(0, 0, +-0.5)` aimed at the cloud center.
    Forward,
    /// Cameras at `+-(sqrt(3)/6)(1, 1, 1)` with optical axes along +z.
    Diagonal,
}

impl CameraArrangement {
    pub const ALL: [CameraArrangement; 4] = [
        CameraArrangement::Orbital,
        CameraArrangement::Lateral,
        CameraArrangement::Forward,
        CameraArrangement::Diagonal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CameraArrangement::Orbital => "orbital",
            CameraArrangement::Lateral => "lateral",
            CameraArrangement::Forward => "forward",
            CameraArrangement::Diagonal => "diagonal",
        }
    }
}

impl fmt::Display for CameraArrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Error for an unrecognized camera arrangement name.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown camera configuration `{0}` (expected orbital, lateral, forward or diagonal)")]
pub struct UnknownConfig(pub String);

impl FromStr for CameraArrangement {
    type Err = UnknownConfig;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "orbital" => Ok(CameraArrangement::Orbital),
            "lateral" => Ok(CameraArrangement::Lateral),
            "forward" => Ok(CameraArrangement::Forward),
            "diagonal" => Ok(CameraArrangement::Diagonal),
            other => Err(UnknownConfig(other.to_string())),
        }
    }
}

/// Parameters of one generation cell (one cloud observed by one camera
/// pair at one noise level).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneConfig {
    pub arrangement: CameraArrangement,
    /// Distance of the cloud center from the world origin (scene units).
    pub d: f64,
    /// Pixel noise standard deviation.
    pub sigma: f64,
    pub n_points: usize,
    pub seed: u64,
    pub image_size: f64,
    pub focal: f64,
}

impl SceneConfig {
    pub fn intrinsics(&self) -> Intrinsics {
        Intrinsics::new(self.focal, self.focal, self.image_size / 2.0, self.image_size / 2.0)
            .expect("positive focal length")
    }

    /// Whether the cell lies on the reference benchmark grid
    /// (`d = 2^n, n in -1..=6`; `sigma in [0, 8]`; 1024^2 image with a
    /// 512 px focal). Other values are allowed, just not comparable to
    /// the reference results.
    pub fn on_reference_grid(&self) -> bool {
        let on_grid = (-1..=6).any(|n| self.d == 2f64.powi(n));
        on_grid
            && (0.0..=8.0).contains(&self.sigma)
            && self.image_size == DEFAULT_IMAGE_SIZE
            && self.focal == DEFAULT_FOCAL
    }
}

/// The full generation grid: the cross product of arrangements, cloud
/// distances and noise levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetGrid {
    pub arrangements: Vec<CameraArrangement>,
    pub d_values: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub points_per_cloud: usize,
    pub seed: u64,
    pub image_size: f64,
    pub focal: f64,
}

impl Default for DatasetGrid {
    /// Desk-scale default: the full reference grid with 200 points per
    /// cloud and seed 42.
    fn default() -> Self {
        Self {
            arrangements: CameraArrangement::ALL.to_vec(),
            d_values: (-1..=6).map(|n| 2f64.powi(n)).collect(),
            sigmas: (1..=8).map(f64::from).collect(),
            points_per_cloud: 200,
            seed: 42,
            image_size: DEFAULT_IMAGE_SIZE,
            focal: DEFAULT_FOCAL,
        }
    }
}

impl DatasetGrid {
    /// Cells in canonical order (arrangement-major, then d, then sigma).
    /// The position in this list is the cell index that keys the RNG
    /// streams and problem ids.
    pub fn cells(&self) -> Vec<SceneConfig> {
        let mut out = Vec::with_capacity(self.arrangements.len() * self.d_values.len() * self.sigmas.len());
        for &arrangement in &self.arrangements {
            for &d in &self.d_values {
                for &sigma in &self.sigmas {
                    out.push(SceneConfig {
                        arrangement,
                        d,
                        sigma,
                        n_points: self.points_per_cloud,
                        seed: self.seed,
                        image_size: self.image_size,
                        focal: self.focal,
                    });
                }
            }
        }
        out
    }
}

/// One ground-truth triangulation instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub id: u64,
    pub arrangement: CameraArrangement,
    pub d: f64,
    pub sigma: f64,
    /// Relative pose C0 -> C1 between the two perturbed cameras.
    pub pose: RelativePose,
    /// Noisy observations (pixels plus backprojected bearings).
    pub obs: ObservationPair,
    /// Ground-truth point in frame C1.
    pub x_true: Vec3,
    /// Ground-truth parallax angle (radians).
    pub beta_true: f64,
}

/// A generated problem set plus the count of points dropped by the
/// visibility check.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub problems: Vec<Problem>,
    pub rejected: usize,
}

impl Dataset {
    pub fn merge(&mut self, other: Dataset) {
        self.problems.extend(other.problems);
        self.rejected += other.rejected;
    }
}

/// Gaussian radial cloud: `center + |N(0, (d/4)^2)| * direction` with the
/// direction uniform on the unit sphere and the center at `(0, 0, d)`.
///
/// `rng` is the cell-level stream; point `i` draws from its own derived
/// stream so generation order never matters.
pub fn generate_cloud(d: f64, n_points: usize, rng: &CounterRng) -> Vec<Vec3> {
    let center = Vec3::new(0.0, 0.0, d);
    (0..n_points)
        .map(|i| {
            let mut stream = rng.derive(2 + 3 * i as u64);
            let direction = stream.unit_sphere();
            let radius = (stream.normal() * d / 4.0).abs();
            center + radius * direction
        })
        .collect()
}

// World-to-camera rotation looking from `center` toward `target` with up
// hint (0, 1, 0); rows are the camera axes. Falls back to the +z axis when
// the target coincides with the center (the `forward` arrangement at
// d = 0.5 places camera 0 exactly at the cloud center).
fn look_at_rotation(center: &Vec3, target: &Vec3) -> Mat3 {
    let gaze = target - center;
    let forward = if gaze.norm() < 1e-12 { Vec3::new(0.0, 0.0, 1.0) } else { gaze.normalize() };
    let up_hint = Vec3::new(0.0, 1.0, 0.0);
    let right = up_hint.cross(&forward);
    debug_assert!(right.norm() > 1e-9, "optical axis parallel to the up hint");
    let right = right.normalize();
    let up = forward.cross(&right);
    Mat3::from_rows(&[right.transpose(), up.transpose(), forward.transpose()])
}

fn world_to_camera(center: Vec3, rotation: Mat3) -> RelativePose {
    let translation = -(rotation * center);
    RelativePose::new(rotation, translation).expect("look-at rotations are orthonormal")
}

/// World-to-camera poses `(C0, C1)` for an arrangement and cloud distance.
pub fn camera_config(
    arrangement: CameraArrangement,
    d: f64,
) -> (RelativePose, RelativePose) {
    let (c0, c1, target) = match arrangement {
        CameraArrangement::Orbital => (
            Vec3::new(0.5, 0.0, 0.0),
            Vec3::new(-0.5, 0.0, 0.0),
            Some(Vec3::new(0.0, 0.0, d)),
        ),
        CameraArrangement::Lateral => {
            (Vec3::new(0.5, 0.0, 0.0), Vec3::new(-0.5, 0.0, 0.0), None)
        }
        CameraArrangement::Forward => (
            Vec3::new(0.0, 0.0, 0.5),
            Vec3::new(0.0, 0.0, -0.5),
            Some(Vec3::new(0.0, 0.0, d)),
        ),
        CameraArrangement::Diagonal => {
            let c = 3f64.sqrt() / 6.0 * Vec3::new(1.0, 1.0, 1.0);
            (c, -c, None)
        }
    };
    let rot = |center: &Vec3| match &target {
        Some(t) => look_at_rotation(center, t),
        None => Mat3::identity(),
    };
    (world_to_camera(c0, rot(&c0)), world_to_camera(c1, rot(&c1)))
}

/// Perturbs a pose with uniform noise of the given half-width: one
/// `U(0, width)` sample per translation component, then one per rotation
/// axis (applied as x-y-z euler angles composed onto the rotation, which
/// is then re-orthonormalized).
pub fn perturb_pose_width(pose: &RelativePose, width: f64, rng: &mut CounterRng) -> RelativePose {
    let dt = Vec3::new(
        rng.uniform(0.0, width),
        rng.uniform(0.0, width),
        rng.uniform(0.0, width),
    );
    let ax = rng.uniform(0.0, width);
    let ay = rng.uniform(0.0, width);
    let az = rng.uniform(0.0, width);
    if width == 0.0 {
        return pose.clone();
    }
    let delta = nalgebra::Rotation3::from_euler_angles(ax, ay, az);
    let raw = delta.matrix() * pose.rotation();
    // Polar projection back onto the rotation group.
    let svd = raw.svd(true, true);
    let rotation = svd.u.expect("3x3 svd") * svd.v_t.expect("3x3 svd");
    RelativePose::new(rotation, pose.translation() + dt)
        .expect("re-orthonormalized rotation is valid")
}

/// [`perturb_pose_width`] with the benchmark width `U(0, 0.01)`.
pub fn perturb_pose(pose: &RelativePose, rng: &mut CounterRng) -> RelativePose {
    perturb_pose_width(pose, POSE_NOISE_WIDTH, rng)
}

/// Outcome of projecting one world point into one camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    /// Noisy pixel measurement.
    Pixel(Vec2),
    /// Behind the camera or outside the image; no measurement produced.
    Rejected,
}

/// Projects a world point and applies `N(0, sigma^2)` pixel noise.
///
/// The visibility check (positive depth, inside `[0, image_size)^2`) runs
/// on the noise-free projection; noise is added afterwards and may land
/// outside the image.
pub fn project_and_noise(
    x_world: &Vec3,
    camera_pose: &RelativePose,
    k: &Intrinsics,
    sigma: f64,
    image_size: f64,
    rng: &mut CounterRng,
) -> Projection {
    let x_cam = camera_pose.transform_to_frame1(x_world);
    let Some(clean) = k.project(&x_cam) else { return Projection::Rejected };
    if !(0.0..image_size).contains(&clean.x) || !(0.0..image_size).contains(&clean.y) {
        return Projection::Rejected;
    }
    let du = sigma * rng.normal();
    let dv = sigma * rng.normal();
    Projection::Pixel(Vec2::new(clean.x + du, clean.y + dv))
}

/// Generates all problems of one cell. `cell_index` keys the RNG streams
/// and the problem ids (`id = cell_index * n_points + point_index`), so
/// cells can be generated in any order or in parallel.
pub fn generate_cell(config: &SceneConfig, cell_index: u64) -> Dataset {
    let k = config.intrinsics();
    let cell_rng = CounterRng::from_seed(config.seed).derive(cell_index);
    let (cam0, cam1) = camera_config(config.arrangement, config.d);
    let cam0 = perturb_pose(&cam0, &mut cell_rng.derive(0));
    let cam1 = perturb_pose(&cam1, &mut cell_rng.derive(1));
    let pose = RelativePose::between(&cam0, &cam1);

    let cloud = generate_cloud(config.d, config.n_points, &cell_rng);
    let mut out = Dataset::default();
    for (i, x_world) in cloud.iter().enumerate() {
        let p0 = project_and_noise(
            x_world,
            &cam0,
            &k,
            config.sigma,
            config.image_size,
            &mut cell_rng.derive(3 + 3 * i as u64),
        );
        let p1 = project_and_noise(
            x_world,
            &cam1,
            &k,
            config.sigma,
            config.image_size,
            &mut cell_rng.derive(4 + 3 * i as u64),
        );
        let (Projection::Pixel(u0), Projection::Pixel(u1)) = (p0, p1) else {
            out.rejected += 1;
            continue;
        };
        let x_true = cam1.transform_to_frame1(x_world);
        let Ok(beta_true) = parallax_estimate(&x_true, pose.translation()) else {
            out.rejected += 1;
            continue;
        };
        out.problems.push(Problem {
            id: cell_index * config.n_points as u64 + i as u64,
            arrangement: config.arrangement,
            d: config.d,
            sigma: config.sigma,
            pose: pose.clone(),
            obs: ObservationPair::from_pixels(u0, u1, k),
            x_true,
            beta_true,
        });
    }
    out
}

/// Generates the whole grid serially, cell by cell in canonical order.
pub fn build_dataset(grid: &DatasetGrid) -> Dataset {
    let mut out = Dataset::default();
    for (index, config) in grid.cells().iter().enumerate() {
        out.merge(generate_cell(config, index as u64));
    }
    out
}

/// Parses a `--config` style value: `all` or a comma list of arrangement
/// names.
pub fn parse_arrangements(s: &str) -> Result<Vec<CameraArrangement>, UnknownConfig> {
    if s == "all" {
        return Ok(CameraArrangement::ALL.to_vec());
    }
    s.split(',').map(|part| part.trim().parse()).collect()
}
