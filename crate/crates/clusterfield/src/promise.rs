//! Promise-problem parameters and the covering relation between the two cases.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters of the clustering promise problem: YES means coverable by `k1`
/// balls of radius `eps`, NO means `k2` points with pairwise distances at
/// least `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PromiseParams {
    pub k1: usize,
    pub eps: f64,
    pub k2: usize,
    pub delta: f64,
    pub dim: usize,
}

impl PromiseParams {
    pub fn new(k1: usize, eps: f64, k2: usize, delta: f64, dim: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < delta && delta <= 1.0) {
            return Err(Error::Domain {
                arg: "eps/delta",
                msg: format!("need 0 < eps < delta <= 1, got eps={eps}, delta={delta}"),
            });
        }
        if k1 < 1 {
            return Err(Error::Domain {
                arg: "k1",
                msg: "k1 >= 1 required".into(),
            });
        }
        if k2 < 2 {
            return Err(Error::Domain {
                arg: "k2",
                msg: "k2 >= 2 required".into(),
            });
        }
        if dim < 1 {
            return Err(Error::Domain {
                arg: "dim",
                msg: "dim >= 1 required".into(),
            });
        }
        Ok(Self {
            k1,
            eps,
            k2,
            delta,
            dim,
        })
    }
}

/// Size bound for covering a set with at most `ell` delta-separated points by
/// eps-balls: `ell * c_d * (delta/eps)^dim`. The dimensional constant `c_d`
/// is caller-supplied; [`default_covering_constant`] gives a crude usable
/// default.
pub fn covering_bound(ell: usize, delta: f64, eps: f64, dim: usize, c_d: f64) -> f64 {
    assert!(ell >= 1 && eps > 0.0 && delta >= eps && c_d > 0.0);
    ell as f64 * c_d * (delta / eps).powi(dim as i32)
}

/// Crude covering constant: 1 in dimension 1, 3^d above.
pub fn default_covering_constant(dim: usize) -> f64 {
    if dim <= 1 {
        1.0
    } else {
        3f64.powi(dim as i32)
    }
}
