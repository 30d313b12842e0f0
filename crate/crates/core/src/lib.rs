//! Two-view triangulation from calibrated, posed cameras.
//!
//! The crate provides the sine-rule midpoint methods (`mid2`, `wmid2`)
//! with their sign-flip adequacy test, the classic midpoint and linear
//! baselines, pixel/parallax error metrics, and a deterministic synthetic
//! scene generator for benchmarking. All methods consume a pair of
//! bearing vectors and a relative pose, so they apply unchanged to
//! perspective, fisheye and omnidirectional cameras.

pub mod baselines;
pub mod error;
pub mod geometry;
pub mod method;
pub mod metrics;
pub mod midpoint;
pub mod rng;
pub mod synthgen;

pub use baselines::{
    closest_points_skew, depths_classic, refine_l2, triangulate_dlt, triangulate_linls,
    triangulate_mid_classic, ClosestPair, RefineOutcome,
};
pub use error::{GeometryError, TriangulationError};
pub use geometry::{
    angle_between_lines, backproject, epipolar_residual, Bearing, Intrinsics, Line3D, Mat3,
    ObservationPair, RelativePose, Vec2, Vec3,
};
pub use method::{Method, UnknownMethod};
pub use metrics::{
    error_3d, norm_aggregate, parallax_error, parallax_estimate, raw_parallax, relative_impact,
    reprojection_errors, ErrorRecord, Norm, ParallaxBias,
};
pub use midpoint::{
    adequacy_test, cross_triple, depths_alt, triangulate_mid2, triangulate_wmid2, CrossTriple,
    DepthPair, TriangulationResult, EPS_PARALLEL,
};
pub use rng::CounterRng;
pub use synthgen::{
    build_dataset, camera_config, generate_cell, generate_cloud, parse_arrangements,
    perturb_pose, perturb_pose_width, project_and_noise, CameraArrangement, Dataset, DatasetGrid,
    Problem, Projection, SceneConfig, UnknownConfig, DEFAULT_FOCAL, DEFAULT_IMAGE_SIZE,
};
