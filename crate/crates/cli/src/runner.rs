//! Executes triangulation methods over problem batches.

use rayon::prelude::*;
use twoview_core::{
    refine_l2, triangulate_dlt, triangulate_linls, triangulate_mid2, triangulate_mid_classic,
    triangulate_wmid2, ErrorRecord, Method, Problem, TriangulationResult,
};

use crate::records::ResultRow;

/// Runs one method on one problem. `None` means the method failed
/// outright (degenerate rays, singular system); callers emit a sentinel
/// row so every (problem, method) pair stays accounted for.
pub fn triangulate_with(method: Method, problem: &Problem) -> Option<TriangulationResult> {
    let obs = &problem.obs;
    let pose = &problem.pose;
    match method {
        Method::Mid => triangulate_mid_classic(&obs.f0, &obs.f1, pose).ok(),
        Method::Mid2 => triangulate_mid2(&obs.f0, &obs.f1, pose).ok(),
        Method::WMid2 => triangulate_wmid2(&obs.f0, &obs.f1, pose).ok(),
        Method::Dlt => triangulate_dlt(obs, pose).ok(),
        Method::LinLs => triangulate_linls(obs, pose).ok(),
        Method::L2It => {
            let init = triangulate_wmid2(&obs.f0, &obs.f1, pose).ok()?;
            let out = refine_l2(&init, obs, pose).ok()?;
            let mut result = out.result;
            // Reprojection minimization can run off toward infinity on
            // noise-dominated near-parallel rays while keeping positive
            // depths, so cheirality alone does not catch the unreliable
            // rows. Gate on the initializer's adequacy verdict and on
            // convergence as well.
            result.adequate = result.adequate && init.adequate && out.converged;
            Some(result)
        }
    }
}

fn evaluate(problem: &Problem, method: Method) -> ResultRow {
    let Some(result) = triangulate_with(method, problem) else {
        return ResultRow::failed(problem, method);
    };
    match ErrorRecord::evaluate(&result, &problem.obs, &problem.pose, &problem.x_true, problem.beta_true)
    {
        Ok(rec) => ResultRow::from_record(problem, &rec),
        Err(_) => ResultRow::failed(problem, method),
    }
}

/// Evaluates each method on each problem over a rayon pool
/// (`workers == 0` uses the global default). Output order is
/// (problem, method) regardless of the worker count.
pub fn run_methods(problems: &[Problem], methods: &[Method], workers: usize) -> Vec<ResultRow> {
    let run = || {
        problems
            .par_iter()
            .flat_map_iter(|p| methods.iter().map(move |&m| evaluate(p, m)))
            .collect()
    };
    if workers == 0 {
        run()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("rayon pool");
        pool.install(run)
    }
}
