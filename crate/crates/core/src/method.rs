//! Method tags used by results, reports and the CLI.

use std::fmt;
use std::str::FromStr;

/// Identifies which triangulation method produced a result.
///
/// The string form (`mid`, `mid2`, `wmid2`, `dlt`, `linls`, `l2it`) is the
/// wire format used in results files and `--methods` flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Classic midpoint of the common perpendicular between the two rays.
    Mid,
    /// Midpoint of the two sine-rule ray points.
    Mid2,
    /// Inverse-depth weighted average of the two sine-rule ray points.
    WMid2,
    /// Homogeneous linear least squares (smallest singular vector).
    Dlt,
    /// Inhomogeneous linear least squares (normal equations).
    LinLs,
    /// Iterative Gauss-Newton refinement of the L2 reprojection cost.
    L2It,
}

impl Method {
    /// All methods, in the order reports list them.
    pub const ALL: [Method; 6] = [
        Method::Mid,
        Method::Mid2,
        Method::WMid2,
        Method::Dlt,
        Method::LinLs,
        Method::L2It,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mid => "mid",
            Method::Mid2 => "mid2",
            Method::WMid2 => "wmid2",
            Method::Dlt => "dlt",
            Method::LinLs => "linls",
            Method::L2It => "l2it",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Error for an unrecognized method name.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown method `{0}` (expected one of mid, mid2, wmid2, dlt, linls, l2it)")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mid" => Ok(Method::Mid),
            "mid2" => Ok(Method::Mid2),
            "wmid2" => Ok(Method::WMid2),
            "dlt" => Ok(Method::Dlt),
            "linls" => Ok(Method::LinLs),
            "l2it" => Ok(Method::L2It),
            other => Err(UnknownMethod(other.to_string())),
        }
    }
}
