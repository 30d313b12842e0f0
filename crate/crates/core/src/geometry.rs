//! Foundational 3D types: pinhole intrinsics, relative pose, bearing
//! vectors, 3D lines and the epipolar utilities shared by every
//! triangulation method.
//!
//! Conventions: the relative pose maps frame-C0 coordinates into frame C1
//! via `x1 = R * x0 + t`. Bearings are ray directions in their own camera
//! frame and may be stored unnormalized; every consumer normalizes on
//! entry. All angles are radians.

use nalgebra::{Matrix3, Vector2, Vector3};

use crate::error::GeometryError;

pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance for rotation orthonormality checks.
pub const ROTATION_TOL: f64 = 1e-12;

/// Pinhole camera calibration: focal lengths and principal point in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self, GeometryError> {
        if !(fx > 0.0 && fy > 0.0) {
            return Err(GeometryError::InvalidIntrinsics { fx, fy });
        }
        Ok(Self { fx, fy, cx, cy })
    }

    /// Projects a camera-frame point with positive depth to pixel
    /// coordinates. Returns `None` when `z <= 0`.
    pub fn project(&self, x: &Vec3) -> Option<Vec2> {
        if x.z <= 0.0 {
            return None;
        }
        Some(Vec2::new(
            self.fx * x.x / x.z + self.cx,
            self.fy * x.y / x.z + self.cy,
        ))
    }

    /// `K^-1 u` for a homogeneous pixel `u = (u, v, w)`.
    pub fn unproject(&self, u: &Vec3) -> Vec3 {
        Vec3::new(
            (u.x - self.cx * u.z) / self.fx,
            (u.y - self.cy * u.z) / self.fy,
            u.z,
        )
    }
}

/// Rigid transform with the convention `out = R * in + t`.
///
/// Used both as the relative pose between the two cameras (C0 -> C1) and
/// as a world-to-camera pose in the synthetic generator.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativePose {
    rotation: Mat3,
    translation: Vec3,
}

impl RelativePose {
    /// Validates that `rotation` is orthonormal with determinant +1
    /// (within `ROTATION_TOL`).
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self, GeometryError> {
        let gram = rotation.transpose() * rotation;
        let defect = (gram - Mat3::identity()).abs().max();
        if defect > ROTATION_TOL || (rotation.determinant() - 1.0).abs() > 1e-9 {
            return Err(GeometryError::InvalidRotation);
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity() -> Self {
        Self { rotation: Mat3::identity(), translation: Vec3::zeros() }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    /// `R * x0 + t`.
    pub fn transform_to_frame1(&self, x0: &Vec3) -> Vec3 {
        self.rotation * x0 + self.translation
    }

    /// `R^T (x1 - t)`, the inverse transform.
    pub fn transform_to_frame0(&self, x1: &Vec3) -> Vec3 {
        self.rotation.transpose() * (x1 - self.translation)
    }

    /// Relative pose from frame `a` to frame `b`, both given as
    /// world-to-camera transforms.
    pub fn between(a: &RelativePose, b: &RelativePose) -> RelativePose {
        let rotation = b.rotation * a.rotation.transpose();
        let translation = b.translation - rotation * a.translation;
        RelativePose { rotation, translation }
    }
}

/// A ray direction in its camera frame. May be unnormalized; triangulation
/// operations normalize on entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bearing(Vec3);

impl Bearing {
    pub fn new(direction: Vec3) -> Result<Self, GeometryError> {
        if direction.norm() == 0.0 || !direction.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::ZeroBearing);
        }
        Ok(Self(direction))
    }

    pub fn as_vec(&self) -> &Vec3 {
        &self.0
    }

    /// Unit-length direction.
    pub fn unit(&self) -> Vec3 {
        self.0.normalize()
    }

    /// Normalized image coordinates `(x/z, y/z)`; `None` when `z <= 0`.
    pub fn normalized_image(&self) -> Option<Vec2> {
        if self.0.z <= 0.0 {
            return None;
        }
        Some(Vec2::new(self.0.x / self.0.z, self.0.y / self.0.z))
    }
}

/// Backprojects a homogeneous pixel `u` through `K`, i.e. `K^-1 u`.
///
/// The result keeps its natural scale (third component equal to `u.z`);
/// call [`Bearing::unit`] when a unit direction is needed.
pub fn backproject(u: &Vec3, k: &Intrinsics) -> Bearing {
    Bearing(k.unproject(u))
}

/// A pair of corresponding observations of one 3D point.
///
/// Pixels are optional so purely ray-based (fisheye/omnidirectional)
/// pipelines can construct pairs from bearings alone.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationPair {
    pub u0: Option<Vec2>,
    pub u1: Option<Vec2>,
    pub f0: Bearing,
    pub f1: Bearing,
    pub intrinsics: Option<Intrinsics>,
}

impl ObservationPair {
    /// Builds the pair from pixel measurements; bearings are backprojected
    /// through `k`.
    pub fn from_pixels(u0: Vec2, u1: Vec2, k: Intrinsics) -> Self {
        let h0 = Vec3::new(u0.x, u0.y, 1.0);
        let h1 = Vec3::new(u1.x, u1.y, 1.0);
        Self {
            u0: Some(u0),
            u1: Some(u1),
            f0: backproject(&h0, &k),
            f1: backproject(&h1, &k),
            intrinsics: Some(k),
        }
    }

    /// Builds the pair from bearings only (no pixel-domain metrics
    /// available).
    pub fn from_bearings(f0: Bearing, f1: Bearing) -> Self {
        Self { u0: None, u1: None, f0, f1, intrinsics: None }
    }

    /// Full constructor. When intrinsics are present, each bearing must be
    /// a positive multiple of `K^-1 u` within 1e-10.
    pub fn new(
        u0: Vec2,
        u1: Vec2,
        f0: Bearing,
        f1: Bearing,
        intrinsics: Option<Intrinsics>,
    ) -> Result<Self, GeometryError> {
        if let Some(k) = &intrinsics {
            for (u, f) in [(&u0, &f0), (&u1, &f1)] {
                let expect = backproject(&Vec3::new(u.x, u.y, 1.0), k);
                let e = expect.unit();
                let g = f.unit();
                if e.dot(&g) <= 0.0 || (e - g).norm() > 1e-10 {
                    return Err(GeometryError::InconsistentObservation);
                }
            }
        }
        Ok(Self { u0: Some(u0), u1: Some(u1), f0, f1, intrinsics })
    }
}

/// A line in 3D, `L(s) = origin + s * direction` with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line3D {
    pub origin: Vec3,
    direction: Vec3,
}

impl Line3D {
    /// Normalizes `direction`; fails on a zero vector.
    pub fn new(origin: Vec3, direction: Vec3) -> Result<Self, GeometryError> {
        let n = direction.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(GeometryError::ZeroDirection);
        }
        Ok(Self { origin, direction: direction / n })
    }

    pub fn direction(&self) -> &Vec3 {
        &self.direction
    }

    pub fn point_at(&self, s: f64) -> Vec3 {
        self.origin + s * self.direction
    }
}

/// Angle between two lines (direction sign ignored), in `[0, pi/2]`.
///
/// Computed as `atan2(|a x b|, |a . b|)` on unit vectors, which stays
/// accurate near 0 and pi/2 where `acos` loses digits.
pub fn angle_between_lines(a: &Vec3, b: &Vec3) -> f64 {
    let a = a.normalize();
    let b = b.normalize();
    a.cross(&b).norm().atan2(a.dot(&b).abs())
}

/// Epipolar residual `f1 . (t x R f0)` on unit bearings.
///
/// Zero exactly when the two backprojected rays and the baseline are
/// coplanar, i.e. when the rays intersect (or are parallel).
pub fn epipolar_residual(f0: &Bearing, f1: &Bearing, pose: &RelativePose) -> f64 {
    let rf0 = pose.rotation() * f0.unit();
    f1.unit().dot(&pose.translation().cross(&rf0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn k512() -> Intrinsics {
        Intrinsics::new(512.0, 512.0, 512.0, 512.0).unwrap()
    }

    #[test]
    fn intrinsics_reject_nonpositive_focal() {
        assert!(Intrinsics::new(0.0, 512.0, 0.0, 0.0).is_err());
        assert!(Intrinsics::new(512.0, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn backproject_principal_point() {
        let f = backproject(&Vec3::new(512.0, 512.0, 1.0), &k512());
        assert_eq!(*f.as_vec(), Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn backproject_off_axis() {
        let f = backproject(&Vec3::new(1024.0, 512.0, 1.0), &k512());
        assert_eq!(*f.as_vec(), Vec3::new(1.0, 0.0, 1.0));
        let unit = f.unit();
        assert_relative_eq!(unit, Vec3::new(1.0, 0.0, 1.0) / 2f64.sqrt(), epsilon = 1e-15);

        let corner = backproject(&Vec3::new(0.0, 0.0, 1.0), &k512());
        assert_eq!(*corner.as_vec(), Vec3::new(-1.0, -1.0, 1.0));
    }

    #[test]
    fn backproject_then_project_round_trips() {
        let k = k512();
        for u in [
            Vec2::new(17.25, 900.0),
            Vec2::new(512.0, 0.5),
            Vec2::new(1023.0, 1023.0),
        ] {
            let f = backproject(&Vec3::new(u.x, u.y, 1.0), &k);
            let back = k.project(f.as_vec()).unwrap();
            assert!((back - u).norm() < 1e-9, "{u:?} -> {back:?}");
        }
    }

    #[test]
    fn epipolar_residual_zero_for_intersecting_rays() {
        let pose = RelativePose::new(Mat3::identity(), Vec3::new(-1.0, 0.0, 0.0)).unwrap();
        let f0 = Bearing::new(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let f1 = Bearing::new(Vec3::new(-1.0, 0.0, 1.0)).unwrap();
        assert_relative_eq!(epipolar_residual(&f0, &f1, &pose), 0.0, epsilon = 1e-15);

        // Parallel rays are also coplanar with t.
        let f1p = Bearing::new(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_relative_eq!(epipolar_residual(&f0, &f1p, &pose), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn epipolar_residual_sign_for_skew_rays() {
        let pose = RelativePose::new(Mat3::identity(), Vec3::new(-1.0, 0.0, 0.0)).unwrap();
        let f0 = Bearing::new(Vec3::new(0.0, 0.0, 1.0)).unwrap();
        let f1 = Bearing::new(Vec3::new(-1.0, 0.1, 1.0)).unwrap();
        let r = epipolar_residual(&f0, &f1, &pose);
        // t x R f0 = (0, 1, 0), so the residual is f1.y / |f1|.
        assert_relative_eq!(r, 0.1 / 2.01f64.sqrt(), epsilon = 1e-15);
        assert!(r > 0.0);
    }

    #[test]
    fn epipolar_residual_invariant_to_positive_rescale() {
        let pose = RelativePose::new(Mat3::identity(), Vec3::new(-1.0, 0.0, 0.0)).unwrap();
        let f0 = Bearing::new(Vec3::new(0.2, -0.4, 1.0)).unwrap();
        let f1 = Bearing::new(Vec3::new(-0.7, 0.3, 1.1)).unwrap();
        let base = epipolar_residual(&f0, &f1, &pose);
        let f0s = Bearing::new(f0.as_vec() * 37.0).unwrap();
        let f1s = Bearing::new(f1.as_vec() * 0.004).unwrap();
        assert_relative_eq!(epipolar_residual(&f0s, &f1s, &pose), base, epsilon = 1e-12);
    }

    #[test]
    fn transform_to_frame0_examples() {
        let pose = RelativePose::new(Mat3::identity(), Vec3::new(-1.0, 0.0, 0.0)).unwrap();
        assert_eq!(pose.transform_to_frame0(pose.translation()), Vec3::zeros());
        assert_eq!(
            pose.transform_to_frame0(&Vec3::new(-1.0, 0.0, 1.0)),
            Vec3::new(0.0, 0.0, 1.0)
        );
    }

    #[test]
    fn transform_round_trip_is_identity() {
        // A generic rotation built from orthonormalized columns.
        let axis = Vec3::new(0.3, -0.5, 0.81).normalize();
        let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), 0.9);
        let pose = RelativePose::new(*rot.matrix(), Vec3::new(0.4, -2.0, 0.7)).unwrap();
        for x0 in [Vec3::new(1.0, 2.0, 3.0), Vec3::new(-0.3, 0.0, 9.5)] {
            let x1 = pose.transform_to_frame1(&x0);
            assert!((pose.transform_to_frame0(&x1) - x0).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_orthonormal_rotation() {
        let mut m = Mat3::identity();
        m[(0, 1)] = 1e-6;
        assert!(RelativePose::new(m, Vec3::zeros()).is_err());
        // A reflection has determinant -1.
        let refl = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(RelativePose::new(refl, Vec3::zeros()).is_err());
    }

    #[test]
    fn angle_between_lines_examples() {
        let z = Vec3::new(0.0, 0.0, 1.0);
        assert_eq!(angle_between_lines(&z, &Vec3::new(0.0, 0.0, -1.0)), 0.0);
        assert_relative_eq!(
            angle_between_lines(&z, &Vec3::new(1.0, 0.0, 1.0)),
            FRAC_PI_4,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            angle_between_lines(&Vec3::new(1.0, 0.0, 0.0), &Vec3::new(0.0, 1.0, 0.0)),
            FRAC_PI_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn angle_between_lines_symmetry_is_exact() {
        let a = Vec3::new(0.3, -1.2, 0.8);
        let b = Vec3::new(-0.9, 0.05, 2.0);
        let ab = angle_between_lines(&a, &b);
        assert_eq!(ab, angle_between_lines(&b, &a));
        assert_eq!(ab, angle_between_lines(&(-a), &b));
        assert_eq!(ab, angle_between_lines(&a, &(-b)));
    }

    #[test]
    fn observation_pair_checks_consistency() {
        let k = k512();
        let u0 = Vec2::new(600.0, 400.0);
        let u1 = Vec2::new(500.0, 510.0);
        let pair = ObservationPair::from_pixels(u0, u1, k);
        // Reconstructing through `new` with the same bearings succeeds.
        assert!(ObservationPair::new(u0, u1, pair.f0, pair.f1, Some(k)).is_ok());
        // A bearing that does not match its pixel is rejected.
        let bad = Bearing::new(Vec3::new(0.5, 0.5, 1.0)).unwrap();
        assert_eq!(
            ObservationPair::new(u0, u1, bad, pair.f1, Some(k)),
            Err(GeometryError::InconsistentObservation)
        );
    }

    #[test]
    fn line3d_normalizes_direction() {
        let l = Line3D::new(Vec3::zeros(), Vec3::new(0.0, 0.0, 10.0)).unwrap();
        assert!((l.direction().norm() - 1.0).abs() < 1e-12);
        assert_eq!(l.point_at(2.0), Vec3::new(0.0, 0.0, 2.0));
        assert!(Line3D::new(Vec3::zeros(), Vec3::zeros()).is_err());
    }
}
