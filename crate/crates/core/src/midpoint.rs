//! The sine-rule midpoint methods.
//!
//! Both rays are reduced to the three cross products
//! `p = R f0 x f1`, `q = R f0 x t`, `r = f1 x t` (unit bearings). The
//! sine rule gives the depth of the would-be intersection along each ray,
//! `lambda0 = |r|/|p|` and `lambda1 = |q|/|p|`, which stay valid (and
//! always nonnegative) when the rays are skew. `triangulate_mid2` averages
//! the two ray points with equal weights; `triangulate_wmid2` weights them
//! by inverse depth, which rebalances the two reprojection errors. Because
//! the depths are nonnegative by construction, cheirality is screened by a
//! sign-flip distance test instead of a depth-sign check.

use crate::error::TriangulationError;
use crate::geometry::{Bearing, RelativePose, Vec3};
use crate::method::Method;

/// Rays closer than this (measured as `|p|` on unit bearings) are treated
/// as parallel: the sine-rule denominator vanishes and no finite depth
/// exists.
pub const EPS_PARALLEL: f64 = 1e-12;

/// The auxiliary cross products shared by the midpoint formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossTriple {
    /// `R f0 x f1` (unit bearings).
    pub p: Vec3,
    /// `R f0 x t`.
    pub q: Vec3,
    /// `f1 x t`.
    pub r: Vec3,
}

/// Depths along ray 0 and ray 1, in scene units.
///
/// For the sine-rule depths both are nonnegative by construction; for the
/// classic midpoint depths the signs carry cheirality information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthPair {
    pub lambda0: f64,
    pub lambda1: f64,
}

/// A triangulated point in frame C1 with its per-ray depths, the
/// adequacy/cheirality verdict, and the method that produced it.
///
/// The adequacy verdict is stored rather than acted on: discarding is the
/// caller's policy, and keeping flagged results lets a harness report
/// rejection rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangulationResult {
    pub point: Vec3,
    pub depths: DepthPair,
    pub adequate: bool,
    pub method: Method,
}

// Unit ray directions in C1 together with their cross triple; computed
// once per kernel invocation.
pub(crate) struct Rays {
    pub(crate) rf0: Vec3,
    pub(crate) f1: Vec3,
    pub(crate) triple: CrossTriple,
}

#[inline]
pub(crate) fn rays(f0: &Bearing, f1: &Bearing, pose: &RelativePose) -> Rays {
    let rf0 = pose.rotation() * f0.unit();
    let f1 = f1.unit();
    let t = pose.translation();
    Rays {
        rf0,
        f1,
        triple: CrossTriple { p: rf0.cross(&f1), q: rf0.cross(t), r: f1.cross(t) },
    }
}

/// Computes `p`, `q`, `r` from unit-normalized bearings.
pub fn cross_triple(f0: &Bearing, f1: &Bearing, pose: &RelativePose) -> CrossTriple {
    rays(f0, f1, pose).triple
}

/// Sine-rule depths `lambda0 = |r|/|p|`, `lambda1 = |q|/|p|`.
///
/// When the rays intersect in front of both cameras these are the exact
/// depths of the intersection; for skew rays they remain finite and
/// nonnegative.
pub fn depths_alt(triple: &CrossTriple) -> Result<DepthPair, TriangulationError> {
    let p_norm = triple.p.norm();
    if p_norm < EPS_PARALLEL {
        return Err(TriangulationError::DegenerateRays);
    }
    Ok(DepthPair { lambda0: triple.r.norm() / p_norm, lambda1: triple.q.norm() / p_norm })
}

/// Sign-flip adequacy test.
///
/// Returns `false` (discard) when flipping the sign of at least one depth
/// brings the two ray points at least as close together as the nominal
/// positive-depth pair; ties count as inadequate. Expanding the four
/// squared norms shows only three dot products are needed:
/// with `a = t . (lambda0 R f0)`, `b = t . (lambda1 f1)` and
/// `c = (lambda0 R f0) . (lambda1 f1)`, the nominal combination is the
/// strict minimum iff `b + c > 0`, `a < b` and `a < c`.
pub fn adequacy_test(depths: &DepthPair, f0: &Bearing, f1: &Bearing, pose: &RelativePose) -> bool {
    let rf0 = pose.rotation() * f0.unit();
    adequacy_inner(depths, &rf0, &f1.unit(), pose.translation())
}

/// Midpoint of the two sine-rule ray points:
/// `x1 = (t + lambda0 R f0 + lambda1 f1) / 2`.
pub fn triangulate_mid2(
    f0: &Bearing,
    f1: &Bearing,
    pose: &RelativePose,
) -> Result<TriangulationResult, TriangulationError> {
    let rays = rays(f0, f1, pose);
    let depths = depths_alt(&rays.triple)?;
    let point =
        0.5 * (pose.translation() + depths.lambda0 * rays.rf0 + depths.lambda1 * rays.f1);
    let adequate = adequacy_inner(&depths, &rays.rf0, &rays.f1, pose.translation());
    Ok(TriangulationResult { point, depths, adequate, method: Method::Mid2 })
}

/// Inverse-depth weighted midpoint:
/// `x1 = |q|/(|q|+|r|) * (t + |r|/|p| * (R f0 + f1))`.
///
/// Weighting by inverse depth gives the nearer ray point more influence,
/// which balances the reprojection errors between the two images. When one
/// of `|q|`, `|r|` is zero (one ray parallel to the baseline) the formula's
/// limit returns the point on the other ray; only when both vanish are the
/// weights undefined.
pub fn triangulate_wmid2(
    f0: &Bearing,
    f1: &Bearing,
    pose: &RelativePose,
) -> Result<TriangulationResult, TriangulationError> {
    let rays = rays(f0, f1, pose);
    let p_norm = rays.triple.p.norm();
    if p_norm < EPS_PARALLEL {
        return Err(TriangulationError::DegenerateRays);
    }
    let q_norm = rays.triple.q.norm();
    let r_norm = rays.triple.r.norm();
    if q_norm + r_norm <= EPS_PARALLEL * pose.translation().norm() {
        return Err(TriangulationError::DegenerateWeights);
    }
    let depths = DepthPair { lambda0: r_norm / p_norm, lambda1: q_norm / p_norm };
    let point = q_norm / (q_norm + r_norm)
        * (pose.translation() + depths.lambda0 * (rays.rf0 + rays.f1));
    let adequate = adequacy_inner(&depths, &rays.rf0, &rays.f1, pose.translation());
    Ok(TriangulationResult { point, depths, adequate, method: Method::WMid2 })
}

// Shared by the two kernels; avoids re-normalizing the bearings.
#[inline]
fn adequacy_inner(depths: &DepthPair, rf0: &Vec3, f1u: &Vec3, t: &Vec3) -> bool {
    let u = depths.lambda0 * rf0;
    let v = depths.lambda1 * f1u;
    let a = t.dot(&u);
    let b = t.dot(&v);
    let c = u.dot(&v);
    b + c > 0.0 && a < b && a < c
}
