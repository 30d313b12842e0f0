//! Comparison methods: the classic midpoint built on the closest pair of
//! points between two skew lines, homogeneous (DLT) and inhomogeneous
//! (LinLS) linear least squares, and an iterative Gauss-Newton refiner of
//! the L2 reprojection cost.

use nalgebra::{Matrix2, Matrix3, Matrix4, Matrix4x3, Vector2, Vector4};

use crate::error::TriangulationError;
use crate::geometry::{Bearing, Intrinsics, Line3D, ObservationPair, RelativePose, Vec3};
use crate::method::Method;
use crate::midpoint::{CrossTriple, DepthPair, TriangulationResult, EPS_PARALLEL};

/// The mutually closest points on two lines and their line parameters.
///
/// `r0 - r1` spans the common perpendicular: it is orthogonal to both
/// directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPair {
    pub r0: Vec3,
    pub r1: Vec3,
    pub s0: f64,
    pub s1: f64,
}

/// Closest pair of points on two skew lines.
///
/// With `n = m0 x m1` and `t = c0 - c1`:
/// `s0 = n . (m1 x t) / |n|^2` and `s1 = n . (m0 x t) / |n|^2`.
pub fn closest_points_skew(l0: &Line3D, l1: &Line3D) -> Result<ClosestPair, TriangulationError> {
    let n = l0.direction().cross(l1.direction());
    let nn = n.norm_squared();
    if nn.sqrt() < EPS_PARALLEL {
        return Err(TriangulationError::DegenerateRays);
    }
    let t = l0.origin - l1.origin;
    let s0 = n.dot(&l1.direction().cross(&t)) / nn;
    let s1 = n.dot(&l0.direction().cross(&t)) / nn;
    Ok(ClosestPair { r0: l0.point_at(s0), r1: l1.point_at(s1), s0, s1 })
}

/// Classic midpoint depths in the square-root-free form
/// `lambda_mid0 = (p . r) / (p . p)`, `lambda_mid1 = (p . q) / (p . p)`.
///
/// Unlike the sine-rule depths these are projections, so their signs carry
/// cheirality information.
pub fn depths_classic(triple: &CrossTriple) -> Result<DepthPair, TriangulationError> {
    let pp = triple.p.norm_squared();
    if pp.sqrt() < EPS_PARALLEL {
        return Err(TriangulationError::DegenerateRays);
    }
    Ok(DepthPair {
        lambda0: triple.p.dot(&triple.r) / pp,
        lambda1: triple.p.dot(&triple.q) / pp,
    })
}

/// Classic midpoint: the middle of the common perpendicular segment,
/// `x1 = (t + lambda_mid0 R f0 + lambda_mid1 f1) / 2`, with cheirality
/// checked by the depth signs.
pub fn triangulate_mid_classic(
    f0: &Bearing,
    f1: &Bearing,
    pose: &RelativePose,
) -> Result<TriangulationResult, TriangulationError> {
    let rays = crate::midpoint::rays(f0, f1, pose);
    let depths = depths_classic(&rays.triple)?;
    let point =
        0.5 * (pose.translation() + depths.lambda0 * rays.rf0 + depths.lambda1 * rays.f1);
    let adequate = depths.lambda0 > 0.0 && depths.lambda1 > 0.0;
    Ok(TriangulationResult { point, depths, adequate, method: Method::Mid })
}

// Projection rows for the two views in normalized image coordinates, with
// C1 as the reference frame: P1 = [I | 0] and P0 = [R^T | -R^T t].
fn design_rows(
    obs: &ObservationPair,
    pose: &RelativePose,
) -> Result<Matrix4<f64>, TriangulationError> {
    let m0 = obs.f0.normalized_image().ok_or(TriangulationError::SolveFailure)?;
    let m1 = obs.f1.normalized_image().ok_or(TriangulationError::SolveFailure)?;
    let rt = pose.rotation().transpose();
    let t0 = -(rt * pose.translation());

    let mut a = Matrix4::zeros();
    for col in 0..3 {
        a[(0, col)] = m0.x * rt[(2, col)] - rt[(0, col)];
        a[(1, col)] = m0.y * rt[(2, col)] - rt[(1, col)];
    }
    a[(0, 3)] = m0.x * t0.z - t0.x;
    a[(1, 3)] = m0.y * t0.z - t0.y;
    a[(2, 0)] = -1.0;
    a[(2, 2)] = m1.x;
    a[(3, 1)] = -1.0;
    a[(3, 2)] = m1.y;
    Ok(a)
}

fn depths_on_rays(point: &Vec3, obs: &ObservationPair, pose: &RelativePose) -> DepthPair {
    let rf0 = pose.rotation() * obs.f0.unit();
    DepthPair {
        lambda0: (point - pose.translation()).dot(&rf0),
        lambda1: point.dot(&obs.f1.unit()),
    }
}

/// Homogeneous linear least squares: the smallest-singular-vector solution
/// of the stacked projection constraints, dehomogenized into C1.
pub fn triangulate_dlt(
    obs: &ObservationPair,
    pose: &RelativePose,
) -> Result<TriangulationResult, TriangulationError> {
    let a = design_rows(obs, pose)?;
    let svd = a.svd(true, true);
    let v_t = svd.v_t.ok_or(TriangulationError::SolveFailure)?;
    // Singular values are sorted descending; the system must have a
    // one-dimensional (numerical) null space.
    if svd.singular_values[2] < 1e-12 * svd.singular_values[0] {
        return Err(TriangulationError::SolveFailure);
    }
    let h = v_t.row(3);
    let xyz = Vec3::new(h[0], h[1], h[2]);
    let w = h[3];
    if w.abs() <= 1e-12 * xyz.norm() {
        return Err(TriangulationError::SolveFailure);
    }
    let point = xyz / w;
    let depths = depths_on_rays(&point, obs, pose);
    let adequate = depths.lambda0 > 0.0 && depths.lambda1 > 0.0;
    Ok(TriangulationResult { point, depths, adequate, method: Method::Dlt })
}

/// Inhomogeneous linear least squares: fix the homogeneous scale to 1 and
/// solve the 4x3 system by normal equations.
pub fn triangulate_linls(
    obs: &ObservationPair,
    pose: &RelativePose,
) -> Result<TriangulationResult, TriangulationError> {
    let a = design_rows(obs, pose)?;
    let coeffs = Matrix4x3::from_fn(|r, c| a[(r, c)]);
    let rhs = -Vector4::new(a[(0, 3)], a[(1, 3)], a[(2, 3)], a[(3, 3)]);
    let normal = coeffs.transpose() * coeffs;
    let ntb = coeffs.transpose() * rhs;
    let point = normal
        .lu()
        .solve(&ntb)
        .filter(|p| p.iter().all(|c| c.is_finite()))
        .ok_or(TriangulationError::SolveFailure)?;
    let point = Vec3::new(point[0], point[1], point[2]);
    let depths = depths_on_rays(&point, obs, pose);
    let adequate = depths.lambda0 > 0.0 && depths.lambda1 > 0.0;
    Ok(TriangulationResult { point, depths, adequate, method: Method::LinLs })
}

/// Outcome of [`refine_l2`]: the refined result plus convergence
/// diagnostics. The result is always usable; `converged == false` means
/// the iteration budget ran out before the step or cost criteria were met.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOutcome {
    pub result: TriangulationResult,
    pub converged: bool,
    pub iterations: u32,
    pub initial_cost: f64,
    pub final_cost: f64,
}

const REFINE_MAX_ITERS: u32 = 20;
const REFINE_STEP_TOL: f64 = 1e-10;
const REFINE_COST_TOL: f64 = 1e-14;

// Residual vector (pixels) of both views at `x`, or None when the point
// falls behind a camera.
fn reprojection_residual(
    x: &Vec3,
    m_obs: &[Vector2<f64>; 2],
    k: &Intrinsics,
    pose: &RelativePose,
) -> Option<Vector4<f64>> {
    let x0 = pose.transform_to_frame0(x);
    if x0.z <= 0.0 || x.z <= 0.0 {
        return None;
    }
    Some(Vector4::new(
        k.fx * (m_obs[0].x - x0.x / x0.z),
        k.fy * (m_obs[0].y - x0.y / x0.z),
        k.fx * (m_obs[1].x - x.x / x.z),
        k.fy * (m_obs[1].y - x.y / x.z),
    ))
}

/// Gauss-Newton minimization of the squared reprojection error
/// `d0^2 + d1^2` over the 3D point, with a Levenberg fallback (damping
/// x10 whenever a step would increase the cost) so the returned cost never
/// exceeds the initial cost.
pub fn refine_l2(
    init: &TriangulationResult,
    obs: &ObservationPair,
    pose: &RelativePose,
) -> Result<RefineOutcome, TriangulationError> {
    let k = obs.intrinsics.as_ref().ok_or(TriangulationError::MissingIntrinsics)?;
    let m_obs = [
        obs.f0.normalized_image().ok_or(TriangulationError::SolveFailure)?,
        obs.f1.normalized_image().ok_or(TriangulationError::SolveFailure)?,
    ];

    let mut x = init.point;
    let mut cost = reprojection_residual(&x, &m_obs, k, pose)
        .map(|r| r.norm_squared())
        .ok_or(TriangulationError::SolveFailure)?;
    let initial_cost = cost;
    let mut damping = 0.0f64;
    let mut converged = false;
    let mut iterations = 0;

    let rt = pose.rotation().transpose();
    while iterations < REFINE_MAX_ITERS {
        iterations += 1;
        let residual = reprojection_residual(&x, &m_obs, k, pose).expect("current x is valid");

        // Jacobian of the residual w.r.t. x. View 1 sees x directly,
        // view 0 through x0 = R^T (x - t).
        let x0 = pose.transform_to_frame0(&x);
        let mut jac = Matrix4x3::zeros();
        for col in 0..3 {
            let d0 = Vec3::new(rt[(0, col)], rt[(1, col)], rt[(2, col)]);
            jac[(0, col)] = -k.fx * (d0.x / x0.z - x0.x * d0.z / (x0.z * x0.z));
            jac[(1, col)] = -k.fy * (d0.y / x0.z - x0.y * d0.z / (x0.z * x0.z));
        }
        jac[(2, 0)] = -k.fx / x.z;
        jac[(2, 2)] = k.fx * x.x / (x.z * x.z);
        jac[(3, 1)] = -k.fy / x.z;
        jac[(3, 2)] = k.fy * x.y / (x.z * x.z);

        let jtj = jac.transpose() * jac;
        let jtr = jac.transpose() * residual;
        let lhs = jtj + damping * Matrix3::identity();
        let Some(step) = lhs.lu().solve(&(-jtr)) else {
            damping = damping.max(1e-6) * 10.0;
            continue;
        };
        let step = Vec3::new(step[0], step[1], step[2]);
        let undamped = damping == 0.0;

        // A vanishing pure Gauss-Newton step certifies a stationary point;
        // a vanishing damped step does not (heavy damping shrinks steps
        // regardless of the gradient). The sub-tolerance step is still
        // applied: it costs nothing and quadratic convergence makes it
        // collapse the remaining gradient.
        if undamped && step.norm() < REFINE_STEP_TOL {
            // Taking the final sub-tolerance step cancels the remaining
            // gradient to first order; it can move the cost by at most a
            // few ulp around its floating-point floor.
            let trial = x + step;
            if let Some(r) = reprojection_residual(&trial, &m_obs, k, pose) {
                x = trial;
                cost = r.norm_squared();
            }
            converged = true;
            break;
        }

        let trial = x + step;
        let trial_cost = reprojection_residual(&trial, &m_obs, k, pose)
            .map(|r| r.norm_squared())
            .unwrap_or(f64::INFINITY);

        if trial_cost <= cost {
            let decrease = cost - trial_cost;
            x = trial;
            cost = trial_cost;
            damping *= 0.1;
            if damping < 1e-12 {
                damping = 0.0;
            }
            if undamped && decrease < REFINE_COST_TOL {
                converged = true;
                break;
            }
        } else {
            damping = damping.max(1e-6) * 10.0;
        }
    }

    let depths = depths_on_rays(&x, obs, pose);
    let adequate = depths.lambda0 > 0.0 && depths.lambda1 > 0.0;
    Ok(RefineOutcome {
        result: TriangulationResult { point: x, depths, adequate, method: Method::L2It },
        converged,
        iterations,
        initial_cost,
        final_cost: cost,
    })
}

/// Least-squares oracle for the closest pair: solves the 2x2 normal
/// equations of `min |c0 + s0 m0 - c1 - s1 m1|^2` directly. Kept public
/// for the acceptance suite; not part of the triangulation API proper.
pub fn closest_points_normal_eq(l0: &Line3D, l1: &Line3D) -> Option<ClosestPair> {
    let t = l0.origin - l1.origin;
    let b = l0.direction().dot(l1.direction());
    // [ 1  -b ] [s0]   [ -m0.t ]
    // [ b  -1 ] [s1] = [ -m1.t ]
    let m = Matrix2::new(1.0, -b, b, -1.0);
    let rhs = Vector2::new(-l0.direction().dot(&t), -l1.direction().dot(&t));
    let s = m.lu().solve(&rhs)?;
    Some(ClosestPair { r0: l0.point_at(s[0]), r1: l1.point_at(s[1]), s0: s[0], s1: s[1] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Mat3, Vec2};
    use crate::midpoint::{adequacy_test, cross_triple, depths_alt, triangulate_wmid2};
    use crate::rng::CounterRng;
    use crate::test_support::{noise_free_instance, random_instance};
    use approx::assert_relative_eq;

    fn pose_x() -> RelativePose {
        RelativePose::new(Mat3::identity(), Vec3::new(-1.0, 0.0, 0.0)).unwrap()
    }

    fn bearing(x: f64, y: f64, z: f64) -> Bearing {
        Bearing::new(Vec3::new(x, y, z)).unwrap()
    }

    fn random_line(rng: &mut CounterRng) -> Line3D {
        let origin = Vec3::new(
            rng.uniform(-5.0, 5.0),
            rng.uniform(-5.0, 5.0),
            rng.uniform(-5.0, 5.0),
        );
        Line3D::new(origin, rng.unit_sphere()).unwrap()
    }

    #[test]
    fn closest_points_intersecting_lines() {
        let l0 = Line3D::new(Vec3::new(-1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let l1 = Line3D::new(Vec3::zeros(), Vec3::new(-1.0, 0.0, 1.0)).unwrap();
        let pair = closest_points_skew(&l0, &l1).unwrap();
        assert_relative_eq!(pair.r0, Vec3::new(-1.0, 0.0, 1.0), epsilon = 1e-12);
        assert_relative_eq!(pair.r1, Vec3::new(-1.0, 0.0, 1.0), epsilon = 1e-12);
    }

    #[test]
    fn closest_points_hand_solved_gap() {
        let l0 = Line3D::new(Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let l1 = Line3D::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)).unwrap();
        let pair = closest_points_skew(&l0, &l1).unwrap();
        assert_eq!(pair.r0, Vec3::zeros());
        assert_eq!(pair.r1, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!((pair.r0 - pair.r1).norm(), 1.0);
    }

    #[test]
    fn closest_points_rejects_parallel_lines() {
        let l0 = Line3D::new(Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let l1 = Line3D::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, -2.0)).unwrap();
        assert_eq!(closest_points_skew(&l0, &l1), Err(TriangulationError::DegenerateRays));
    }

    #[test]
    fn closest_points_matches_normal_equations() {
        let mut rng = CounterRng::from_seed(21);
        for _ in 0..20_000 {
            let l0 = random_line(&mut rng);
            let l1 = random_line(&mut rng);
            // Nearly parallel pairs are excluded: there the problem itself
            // is ill-conditioned and both routes lose digits together.
            if l0.direction().cross(l1.direction()).norm() < 0.1 {
                continue;
            }
            let pair = closest_points_skew(&l0, &l1).unwrap();
            let oracle = closest_points_normal_eq(&l0, &l1).unwrap();
            assert!((pair.r0 - oracle.r0).norm() < 1e-10);
            assert!((pair.r1 - oracle.r1).norm() < 1e-10);
            // Common perpendicular property.
            let gap = pair.r0 - pair.r1;
            assert!(gap.dot(l0.direction()).abs() < 1e-10);
            assert!(gap.dot(l1.direction()).abs() < 1e-10);
        }
    }

    #[test]
    fn depths_classic_intersecting_equals_sine_rule() {
        let triple = cross_triple(&bearing(0.0, 0.0, 1.0), &bearing(-1.0, 0.0, 1.0), &pose_x());
        let d = depths_classic(&triple).unwrap();
        assert_relative_eq!(d.lambda0, 1.0, epsilon = 1e-12);
        assert_relative_eq!(d.lambda1, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn depths_classic_sign_flags_behind_camera() {
        let triple = cross_triple(&bearing(0.0, 0.0, 1.0), &bearing(1.0, 0.0, -1.0), &pose_x());
        let d = depths_classic(&triple).unwrap();
        assert_relative_eq!(d.lambda0, 1.0, epsilon = 1e-12);
        assert_relative_eq!(d.lambda1, -(2f64.sqrt()), epsilon = 1e-12);
    }

    #[test]
    fn depths_classic_matches_norm_form_oracle() {
        // Oracle: lambda_mid = (p_hat . r) / |p|, the pre-optimization form.
        let mut rng = CounterRng::from_seed(22);
        for _ in 0..10_000 {
            let (f0, f1, pose) = random_instance(&mut rng);
            let triple = cross_triple(&f0, &f1, &pose);
            let d = depths_classic(&triple).unwrap();
            let p_hat = triple.p.normalize();
            let p_norm = triple.p.norm();
            assert_relative_eq!(
                d.lambda0,
                p_hat.dot(&triple.r) / p_norm,
                epsilon = 1e-12,
                max_relative = 1e-10
            );
            assert_relative_eq!(
                d.lambda1,
                p_hat.dot(&triple.q) / p_norm,
                epsilon = 1e-12,
                max_relative = 1e-10
            );
            // Projection never exceeds the magnitude.
            let alt = depths_alt(&triple).unwrap();
            assert!(d.lambda0.abs() <= alt.lambda0 * (1.0 + 1e-12));
            assert!(d.lambda1.abs() <= alt.lambda1 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn mid_classic_intersecting_example() {
        let r = triangulate_mid_classic(&bearing(0.0, 0.0, 1.0), &bearing(-1.0, 0.0, 1.0), &pose_x())
            .unwrap();
        assert_relative_eq!(r.point, Vec3::new(-1.0, 0.0, 1.0), epsilon = 1e-12);
        assert!(r.adequate);
        assert_eq!(r.method, Method::Mid);
    }

    #[test]
    fn mid_classic_is_midpoint_of_closest_pair() {
        let mut rng = CounterRng::from_seed(23);
        for _ in 0..10_000 {
            let (f0, f1, pose) = random_instance(&mut rng);
            let r = triangulate_mid_classic(&f0, &f1, &pose).unwrap();
            let l0 = Line3D::new(*pose.translation(), pose.rotation() * f0.unit()).unwrap();
            let l1 = Line3D::new(Vec3::zeros(), f1.unit()).unwrap();
            let pair = closest_points_skew(&l0, &l1).unwrap();
            let midpoint = 0.5 * (pair.r0 + pair.r1);
            assert!((r.point - midpoint).norm() < 1e-10 * midpoint.norm().max(1.0));
        }
    }

    #[test]
    fn mid_classic_flags_negative_depths() {
        let r = triangulate_mid_classic(&bearing(0.0, 0.0, 1.0), &bearing(1.0, 0.0, -1.0), &pose_x())
            .unwrap();
        assert!(!r.adequate);
    }

    #[test]
    fn adequacy_on_magnitudes_equals_cheirality_for_classic() {
        let mut rng = CounterRng::from_seed(24);
        let mut behind_seen = 0usize;
        for i in 0..50_000 {
            // Half random skew instances, half deliberate behind-camera
            // intersections (bearing 0 reversed so the meeting point has a
            // negative classic depth on ray 0).
            let (f0, f1, pose) = if i % 2 == 0 {
                random_instance(&mut rng)
            } else {
                let (_, f0, f1, pose) = noise_free_instance(&mut rng);
                (Bearing::new(-f0.as_vec()).unwrap(), f1, pose)
            };
            let triple = cross_triple(&f0, &f1, &pose);
            let classic = depths_classic(&triple).unwrap();
            let cheirality = classic.lambda0 > 0.0 && classic.lambda1 > 0.0;
            if !cheirality {
                behind_seen += 1;
            }
            let magnitudes =
                DepthPair { lambda0: classic.lambda0.abs(), lambda1: classic.lambda1.abs() };
            assert_eq!(adequacy_test(&magnitudes, &f0, &f1, &pose), cheirality, "iter {i}");
        }
        assert!(behind_seen > 10_000, "behind-camera cases: {behind_seen}");
    }

    #[test]
    fn dlt_recovers_noise_free_points() {
        let mut rng = CounterRng::from_seed(25);
        for _ in 0..2_000 {
            let (x1, f0, f1, pose) = noise_free_instance(&mut rng);
            let obs = ObservationPair::from_bearings(f0, f1);
            let r = triangulate_dlt(&obs, &pose).unwrap();
            assert!((r.point - x1).norm() <= 1e-8 * x1.norm());
            assert!(r.adequate);
        }
    }

    #[test]
    fn dlt_intersecting_example() {
        let obs =
            ObservationPair::from_bearings(bearing(0.0, 0.0, 1.0), bearing(-1.0, 0.0, 1.0));
        let r = triangulate_dlt(&obs, &pose_x()).unwrap();
        assert_relative_eq!(r.point, Vec3::new(-1.0, 0.0, 1.0), epsilon = 1e-10);
    }

    #[test]
    fn dlt_rejects_point_at_infinity() {
        // Parallel rays put the homogeneous solution at w = 0.
        let obs = ObservationPair::from_bearings(bearing(0.0, 0.0, 1.0), bearing(0.0, 0.0, 1.0));
        assert_eq!(triangulate_dlt(&obs, &pose_x()), Err(TriangulationError::SolveFailure));
    }

    #[test]
    fn linls_recovers_noise_free_points() {
        let mut rng = CounterRng::from_seed(26);
        for _ in 0..2_000 {
            let (x1, f0, f1, pose) = noise_free_instance(&mut rng);
            let obs = ObservationPair::from_bearings(f0, f1);
            let r = triangulate_linls(&obs, &pose).unwrap();
            assert!((r.point - x1).norm() <= 1e-8 * x1.norm());
        }
    }

    #[test]
    fn linls_intersecting_example() {
        let obs =
            ObservationPair::from_bearings(bearing(0.0, 0.0, 1.0), bearing(-1.0, 0.0, 1.0));
        let r = triangulate_linls(&obs, &pose_x()).unwrap();
        assert_relative_eq!(r.point, Vec3::new(-1.0, 0.0, 1.0), epsilon = 1e-10);
    }

    #[test]
    fn linls_rejects_degenerate_normal_matrix() {
        let obs = ObservationPair::from_bearings(bearing(0.0, 0.0, 1.0), bearing(0.0, 0.0, 1.0));
        let r = triangulate_linls(&obs, &pose_x());
        assert_eq!(r, Err(TriangulationError::SolveFailure));
    }

    fn k512() -> Intrinsics {
        Intrinsics::new(512.0, 512.0, 512.0, 512.0).unwrap()
    }

    /// Noisy pixel-domain instance for the refiner tests.
    fn noisy_instance(rng: &mut CounterRng) -> (Vec3, ObservationPair, RelativePose) {
        let k = k512();
        loop {
            let (x1, f0, _f1, pose) = noise_free_instance(rng);
            let x0 = pose.transform_to_frame0(&x1);
            let (Some(u0), Some(u1)) = (k.project(&x0), k.project(&x1)) else { continue };
            let noisy = |u: Vec2, rng: &mut CounterRng| {
                Vec2::new(u.x + 2.0 * rng.normal(), u.y + 2.0 * rng.normal())
            };
            let _ = f0;
            let obs = ObservationPair::from_pixels(noisy(u0, rng), noisy(u1, rng), k);
            return (x1, obs, pose);
        }
    }

    #[test]
    fn refine_leaves_exact_optimum_untouched() {
        let mut rng = CounterRng::from_seed(27);
        let (x1, f0, f1, pose) = noise_free_instance(&mut rng);
        let x0 = pose.transform_to_frame0(&x1);
        let k = k512();
        let (u0, u1) = (k.project(&x0), k.project(&x1));
        let (Some(u0), Some(u1)) = (u0, u1) else { panic!("construction has positive z") };
        let obs = ObservationPair::from_pixels(u0, u1, k);
        let _ = (f0, f1);
        let init = TriangulationResult {
            point: x1,
            depths: DepthPair { lambda0: x0.norm(), lambda1: x1.norm() },
            adequate: true,
            method: Method::WMid2,
        };
        let out = refine_l2(&init, &obs, &pose).unwrap();
        assert!(out.converged);
        assert!(out.final_cost < 1e-16, "cost={}", out.final_cost);
        assert!((out.result.point - x1).norm() < 1e-10);
    }

    #[test]
    fn refine_never_increases_cost() {
        let mut rng = CounterRng::from_seed(28);
        for _ in 0..500 {
            let (_x1, obs, pose) = noisy_instance(&mut rng);
            let Ok(init) = triangulate_wmid2(&obs.f0, &obs.f1, &pose) else { continue };
            if !init.adequate {
                continue;
            }
            let out = refine_l2(&init, &obs, &pose).unwrap();
            assert!(out.final_cost <= out.initial_cost + 1e-12);
        }
    }

    /// Distant-point noisy instance (the low-parallax regime). Keeping the
    /// depth above ~10 units bounds the cost curvature: near-camera points
    /// push the achievable gradient floor (about lambda_max(H) times the
    /// step tolerance) past 1e-6, and also defeat the finite-difference
    /// oracle through truncation error.
    fn distant_noisy_instance(rng: &mut CounterRng) -> (ObservationPair, RelativePose) {
        let k = k512();
        loop {
            let rotation = crate::test_support::random_rotation(rng);
            let t = rng.uniform(0.2, 2.0) * rng.unit_sphere();
            let Ok(pose) = RelativePose::new(rotation, t) else { continue };
            let x1 = Vec3::new(
                rng.uniform(-4.0, 4.0),
                rng.uniform(-4.0, 4.0),
                rng.uniform(10.0, 30.0),
            );
            let x0 = pose.transform_to_frame0(&x1);
            if x0.z <= 10.0 {
                continue;
            }
            let (Some(u0), Some(u1)) = (k.project(&x0), k.project(&x1)) else { continue };
            let noisy = |u: Vec2, rng: &mut CounterRng| {
                Vec2::new(u.x + 2.0 * rng.normal(), u.y + 2.0 * rng.normal())
            };
            return (ObservationPair::from_pixels(noisy(u0, rng), noisy(u1, rng), k), pose);
        }
    }

    #[test]
    fn refine_gradient_vanishes_at_convergence() {
        let mut rng = CounterRng::from_seed(29);
        let k = k512();
        let mut checked = 0usize;
        while checked < 50 {
            let (obs, pose) = distant_noisy_instance(&mut rng);
            let Ok(init) = triangulate_wmid2(&obs.f0, &obs.f1, &pose) else { continue };
            if !init.adequate {
                continue;
            }
            let out = refine_l2(&init, &obs, &pose).unwrap();
            if !out.converged {
                continue;
            }
            // Central finite differences of the scalar cost.
            let m_obs = [
                obs.f0.normalized_image().unwrap(),
                obs.f1.normalized_image().unwrap(),
            ];
            let cost = |x: &Vec3| {
                reprojection_residual(x, &m_obs, &k, &pose)
                    .map(|r| r.norm_squared())
                    .unwrap_or(f64::INFINITY)
            };
            let h = 1e-6;
            let mut grad = Vec3::zeros();
            for axis in 0..3 {
                let mut hi = out.result.point;
                let mut lo = out.result.point;
                hi[axis] += h;
                lo[axis] -= h;
                grad[axis] = (cost(&hi) - cost(&lo)) / (2.0 * h);
            }
            assert!(grad.norm() < 1e-6, "gradient={}", grad.norm());
            checked += 1;
        }
    }

    #[test]
    fn refine_requires_intrinsics() {
        let obs =
            ObservationPair::from_bearings(bearing(0.0, 0.0, 1.0), bearing(-1.0, 0.0, 1.0));
        let init = triangulate_wmid2(&obs.f0, &obs.f1, &pose_x()).unwrap();
        assert_eq!(
            refine_l2(&init, &obs, &pose_x()).unwrap_err(),
            TriangulationError::MissingIntrinsics
        );
    }

    #[test]
    fn all_baselines_agree_on_noise_free_data() {
        let mut rng = CounterRng::from_seed(30);
        for _ in 0..2_000 {
            let (x1, f0, f1, pose) = noise_free_instance(&mut rng);
            let obs = ObservationPair::from_bearings(f0, f1);
            let mid = triangulate_mid_classic(&f0, &f1, &pose).unwrap();
            let mid2 = crate::midpoint::triangulate_mid2(&f0, &f1, &pose).unwrap();
            let wmid2 = triangulate_wmid2(&f0, &f1, &pose).unwrap();
            let dlt = triangulate_dlt(&obs, &pose).unwrap();
            let linls = triangulate_linls(&obs, &pose).unwrap();
            for r in [&mid, &mid2, &wmid2, &dlt, &linls] {
                assert!(
                    (r.point - x1).norm() <= 1e-8 * x1.norm(),
                    "{:?} err={}",
                    r.method,
                    (r.point - x1).norm() / x1.norm()
                );
            }
        }
    }
}
