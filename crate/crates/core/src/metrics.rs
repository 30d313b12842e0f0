//! Error measures: 3D error, pixel-domain reprojection errors in three
//! norms, parallax estimate/error, raw parallax, and the cotangent
//! sensitivity ratio of distance error to parallax mis-estimation.

use crate::error::TriangulationError;
use crate::geometry::{angle_between_lines, Bearing, ObservationPair, RelativePose, Vec3};
use crate::method::Method;
use crate::midpoint::TriangulationResult;

/// Which norm aggregates the two per-view reprojection errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    LInf,
}

impl std::str::FromStr for Norm {
    type Err = TriangulationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" => Ok(Norm::LInf),
            _ => Err(TriangulationError::OutOfDomain),
        }
    }
}

/// Direction of the parallax estimation error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParallaxBias {
    Under,
    Exact,
    Over,
}

/// Euclidean distance between estimate and ground truth.
pub fn error_3d(x_est: &Vec3, x_true: &Vec3) -> f64 {
    (x_est - x_true).norm()
}

/// Pixel reprojection errors `(d0, d1)` of an estimated point (in C1)
/// against the measured observations.
///
/// A view where the estimate has nonpositive depth reports `inf`; the
/// function stays total so harnesses can count such rows instead of
/// losing them.
pub fn reprojection_errors(
    x1_est: &Vec3,
    obs: &ObservationPair,
    pose: &RelativePose,
) -> Result<(f64, f64), TriangulationError> {
    let k = obs.intrinsics.as_ref().ok_or(TriangulationError::MissingIntrinsics)?;
    let m0 = obs.f0.normalized_image().ok_or(TriangulationError::MissingIntrinsics)?;
    let m1 = obs.f1.normalized_image().ok_or(TriangulationError::MissingIntrinsics)?;

    let per_view = |x: &Vec3, m: &crate::geometry::Vec2| -> f64 {
        if x.z <= 0.0 {
            return f64::INFINITY;
        }
        let dx = k.fx * (m.x - x.x / x.z);
        let dy = k.fy * (m.y - x.y / x.z);
        (dx * dx + dy * dy).sqrt()
    };

    let x0 = pose.transform_to_frame0(x1_est);
    Ok((per_view(&x0, &m0), per_view(x1_est, &m1)))
}

/// Aggregates the two per-view errors into a single scalar.
pub fn norm_aggregate(d0: f64, d1: f64, norm: Norm) -> f64 {
    match norm {
        Norm::L1 => d0 + d1,
        Norm::L2 => (d0 * d0 + d1 * d1).sqrt(),
        Norm::LInf => d0.max(d1),
    }
}

/// Parallax angle subtended at `x1_est` by the two camera centers
/// (the origin and `t`, both in C1).
pub fn parallax_estimate(x1_est: &Vec3, t: &Vec3) -> Result<f64, TriangulationError> {
    let to_c0 = x1_est - t;
    if x1_est.norm() == 0.0 || to_c0.norm() == 0.0 {
        return Err(TriangulationError::UndefinedParallax);
    }
    Ok(angle_between_lines(x1_est, &to_c0))
}

/// Absolute parallax error and the direction of the bias
/// (`beta_est` relative to `beta_true`).
pub fn parallax_error(beta_true: f64, beta_est: f64) -> (f64, ParallaxBias) {
    let bias = if beta_est > beta_true {
        ParallaxBias::Over
    } else if beta_est < beta_true {
        ParallaxBias::Under
    } else {
        ParallaxBias::Exact
    };
    ((beta_true - beta_est).abs(), bias)
}

/// Angle between the two backprojected rays, `angle(R f0, f1)`.
///
/// A translation-free proxy for the parallax angle: usable before any
/// triangulation has happened.
pub fn raw_parallax(f0: &Bearing, f1: &Bearing, pose: &RelativePose) -> f64 {
    angle_between_lines(&(pose.rotation() * f0.unit()), &f1.unit())
}

/// Default half-width (0.5 degrees) for [`relative_impact`].
pub const DEFAULT_IMPACT_DELTA: f64 = 0.5 * std::f64::consts::PI / 180.0;

/// Ratio of the distance error caused by underestimating a parallax angle
/// `beta` by `delta` to the error caused by overestimating it by the same
/// amount. The camera-to-point distance scales as `cot(beta/2)`, so
///
/// `|cot((beta-delta)/2) - cot(beta/2)| / |cot((beta+delta)/2) - cot(beta/2)|`.
///
/// Always exceeds 1: underestimation hurts more, and increasingly so for
/// small parallax.
pub fn relative_impact(beta: f64, delta: f64) -> Result<f64, TriangulationError> {
    if !(delta > 0.0 && beta > delta && beta < std::f64::consts::PI - delta) {
        return Err(TriangulationError::OutOfDomain);
    }
    let cot = |x: f64| 1.0 / x.tan();
    let center = cot(beta / 2.0);
    let under = cot((beta - delta) / 2.0) - center;
    let over = cot((beta + delta) / 2.0) - center;
    Ok((under / over).abs())
}

/// Full per-method error report for one triangulation problem.
///
/// Angles are radians; `beta_est` and the fields derived from it are NaN
/// when the estimate coincides with a camera center. The 2D fields are
/// `inf` when the estimate falls behind a camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRecord {
    pub method: Method,
    pub adequate: bool,
    pub e3d: f64,
    pub d0: f64,
    pub d1: f64,
    pub e_l1: f64,
    pub e_l2: f64,
    pub e_linf: f64,
    pub beta_raw: f64,
    pub beta_true: f64,
    pub beta_est: f64,
    pub beta_err: f64,
    /// `beta_est - beta_true`; positive means overestimation.
    pub beta_signed_err: f64,
}

impl ErrorRecord {
    /// Evaluates a triangulation result against ground truth. Requires
    /// intrinsics on the observation for the pixel-domain errors.
    pub fn evaluate(
        result: &TriangulationResult,
        obs: &ObservationPair,
        pose: &RelativePose,
        x_true: &Vec3,
        beta_true: f64,
    ) -> Result<Self, TriangulationError> {
        let (d0, d1) = reprojection_errors(&result.point, obs, pose)?;
        let beta_est = parallax_estimate(&result.point, pose.translation()).unwrap_or(f64::NAN);
        Ok(ErrorRecord {
            method: result.method,
            adequate: result.adequate,
            e3d: error_3d(&result.point, x_true),
            d0,
            d1,
            e_l1: norm_aggregate(d0, d1, Norm::L1),
            e_l2: norm_aggregate(d0, d1, Norm::L2),
            e_linf: norm_aggregate(d0, d1, Norm::LInf),
            beta_raw: raw_parallax(&obs.f0, &obs.f1, pose),
            beta_true,
            beta_est,
            beta_err: (beta_true - beta_est).abs(),
            beta_signed_err: beta_est - beta_true,
        })
    }

    pub fn error_2d(&self, norm: Norm) -> f64 {
        norm_aggregate(self.d0, self.d1, norm)
    }
}
