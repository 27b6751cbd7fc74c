//! Random-field hash functions for the clustering promise problem.
//!
//! Given a point set `S` in `R^d`, decide whether `S` can be covered by `k1`
//! balls of radius `eps` (YES) or contains `k2` points with pairwise distances
//! at least `delta` (NO), by looking only at the extreme values of a scalar
//! random field on `S`. The library also constructs and bounds the optimal
//! covariance kernels that drive the decision, and ships a simulator for the
//! distributed max-aggregation protocol.

pub mod decider;
pub mod distsim;
pub mod exceedance;
pub mod fields;
pub mod kernel1d;
pub mod kernelhd;
pub mod lp;
pub mod oracle;
pub mod points;
pub mod promise;
pub mod quad;
pub mod rng;
pub mod special;
pub mod tuner;

mod error;

pub use decider::{decide, success_rate, DecisionReport, Verdict};
pub use error::Error;
pub use fields::{FieldDraw, FieldKind, FieldSpec};
pub use points::PointSet;
pub use promise::PromiseParams;
pub use tuner::{tune, TuneResult};

pub type Result<T> = std::result::Result<T, Error>;
