//! Kernel throughput measurement: times the triangulation kernels alone
//! (input normalization and the adequacy/cheirality logic included, file
//! IO excluded) over a warm in-memory batch, single-threaded.
//!
//! The batch is one synthetic stereo cell, so every correspondence shares
//! one relative pose and the kernels stream compact per-point inputs;
//! this keeps the measurement compute-bound, which is what "speed of
//! computing a 3D point" means here.

use std::hint::black_box;
use std::time::Instant;

use twoview_core::{
    build_dataset, refine_l2, triangulate_dlt, triangulate_linls, triangulate_mid2,
    triangulate_mid_classic, triangulate_wmid2, Bearing, CameraArrangement, DatasetGrid, Method,
    ObservationPair, RelativePose,
};

/// Median throughput of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub method: Method,
    pub points_per_second: f64,
    pub batch_size: usize,
    pub repetitions: usize,
}

/// A fixed batch of correspondences under one relative pose.
pub struct KernelBatch {
    pub pose: RelativePose,
    /// Streamed by the bearing-only kernels (mid, mid2, wmid2).
    pub bearings: Vec<(Bearing, Bearing)>,
    /// Consumed by the pixel-domain methods (dlt, linls, l2it).
    pub observations: Vec<ObservationPair>,
}

impl KernelBatch {
    pub fn len(&self) -> usize {
        self.bearings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bearings.is_empty()
    }
}

/// Builds a warm batch of exactly `target` problems (moderate-parallax
/// lateral scene, sigma = 2).
pub fn prepare_batch(target: usize, seed: u64) -> KernelBatch {
    // Pad for visibility rejection, then truncate.
    let per_cloud = target + target / 4 + 64;
    let grid = DatasetGrid {
        arrangements: vec![CameraArrangement::Lateral],
        d_values: vec![4.0],
        sigmas: vec![2.0],
        points_per_cloud: per_cloud,
        seed,
        ..DatasetGrid::default()
    };
    let mut problems = build_dataset(&grid).problems;
    assert!(problems.len() >= target, "visibility rejection exceeded padding");
    problems.truncate(target);
    let pose = problems[0].pose.clone();
    let bearings = problems.iter().map(|p| (p.obs.f0, p.obs.f1)).collect();
    let observations = problems.into_iter().map(|p| p.obs).collect();
    KernelBatch { pose, bearings, observations }
}

fn timed_pass(method: Method, batch: &KernelBatch) -> f64 {
    let pose = &batch.pose;
    let start = Instant::now();
    // The checksum keeps the optimizer from discarding the kernel work.
    let mut sink = 0.0f64;
    match method {
        Method::Mid => {
            for (f0, f1) in &batch.bearings {
                if let Ok(r) = triangulate_mid_classic(black_box(f0), black_box(f1), pose) {
                    sink += r.point.z;
                }
            }
        }
        Method::Mid2 => {
            for (f0, f1) in &batch.bearings {
                if let Ok(r) = triangulate_mid2(black_box(f0), black_box(f1), pose) {
                    sink += r.point.z;
                }
            }
        }
        Method::WMid2 => {
            for (f0, f1) in &batch.bearings {
                if let Ok(r) = triangulate_wmid2(black_box(f0), black_box(f1), pose) {
                    sink += r.point.z;
                }
            }
        }
        Method::Dlt => {
            for obs in &batch.observations {
                if let Ok(r) = triangulate_dlt(black_box(obs), pose) {
                    sink += r.point.z;
                }
            }
        }
        Method::LinLs => {
            for obs in &batch.observations {
                if let Ok(r) = triangulate_linls(black_box(obs), pose) {
                    sink += r.point.z;
                }
            }
        }
        Method::L2It => {
            for obs in &batch.observations {
                let Ok(init) = triangulate_wmid2(&obs.f0, &obs.f1, pose) else { continue };
                if let Ok(out) = refine_l2(&init, black_box(obs), pose) {
                    sink += out.result.point.z;
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    black_box(sink);
    batch.len() as f64 / elapsed
}

fn median_rate(mut rates: Vec<f64>) -> f64 {
    rates.sort_by(|a, b| a.partial_cmp(b).expect("finite rates"));
    rates[rates.len() / 2]
}

/// Times one method over the batch, `reps` times, and reports the median
/// rate.
pub fn bench_method(method: Method, batch: &KernelBatch, reps: usize) -> TimingRow {
    assert!(reps >= 1);
    let rates = (0..reps).map(|_| timed_pass(method, batch)).collect();
    TimingRow {
        method,
        points_per_second: median_rate(rates),
        batch_size: batch.len(),
        repetitions: reps,
    }
}

/// Interleaved measurement: one warmup pass per method, then `reps`
/// rounds, each timing every method once (round-robin). Returns
/// `rates[method][round]` in points per second. Within a round all
/// methods see the same machine conditions, so slow clock drift or a busy
/// sibling process shifts them together instead of biasing whichever ran
/// last.
pub fn bench_rounds(methods: &[Method], batch: &KernelBatch, reps: usize) -> Vec<Vec<f64>> {
    assert!(reps >= 1);
    for &m in methods {
        black_box(timed_pass(m, batch));
    }
    let mut rates: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); methods.len()];
    for _ in 0..reps {
        for (slot, &m) in methods.iter().enumerate() {
            rates[slot].push(timed_pass(m, batch));
        }
    }
    rates
}

/// Median per-method throughput over interleaved rounds.
pub fn bench_methods(methods: &[Method], batch: &KernelBatch, reps: usize) -> Vec<TimingRow> {
    let rates = bench_rounds(methods, batch, reps);
    methods
        .iter()
        .zip(rates)
        .map(|(&method, r)| TimingRow {
            method,
            points_per_second: median_rate(r),
            batch_size: batch.len(),
            repetitions: reps,
        })
        .collect()
}

pub const TIMING_HEADER: &str = "method,points_per_second,batch_size,repetitions";

pub fn format_timings(rows: &[TimingRow]) -> String {
    let mut out = String::from(TIMING_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{:.0},{},{}\n",
            r.method, r.points_per_second, r.batch_size, r.repetitions
        ));
    }
    out
}
