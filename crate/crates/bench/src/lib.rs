//! Shared setup for the criterion benches: a compact correspondence batch
//! under a single relative pose.

use twoview_core::{
    build_dataset, Bearing, CameraArrangement, DatasetGrid, ObservationPair, RelativePose,
};

pub struct BenchBatch {
    pub pose: RelativePose,
    pub bearings: Vec<(Bearing, Bearing)>,
    pub observations: Vec<ObservationPair>,
}

/// One lateral cell at moderate parallax (d = 4, sigma = 2), truncated to
/// exactly `n` correspondences.
pub fn batch(n: usize, seed: u64) -> BenchBatch {
    let grid = DatasetGrid {
        arrangements: vec![CameraArrangement::Lateral],
        d_values: vec![4.0],
        sigmas: vec![2.0],
        points_per_cloud: n + n / 4 + 64,
        seed,
        ..DatasetGrid::default()
    };
    let mut problems = build_dataset(&grid).problems;
    assert!(problems.len() >= n);
    problems.truncate(n);
    let pose = problems[0].pose.clone();
    let bearings = problems.iter().map(|p| (p.obs.f0, p.obs.f1)).collect();
    let observations = problems.into_iter().map(|p| p.obs).collect();
    BenchBatch { pose, bearings, observations }
}
