//! Exceedance probabilities: Pr(max of the field over a set >= T).
//!
//! Three routes: a closed form for the Random Sine Field on a ball, numerical
//! quadrature for the maximum of an equicorrelated Gaussian vector (the
//! worst-case NO configuration), and Monte Carlo for everything else. The
//! union bound lifts a single-ball probability to k1 balls.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::fields::{draw_field, FieldKind, FieldSpec};
use crate::points::PointSet;
use crate::quad::adaptive_simpson;
use crate::rng::{seeded_rng, substream_seed};
use crate::special::{normal_cdf, normal_pdf};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// A probability estimate and how it was produced. `stderr` is zero unless
/// the estimate is Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceEstimate {
    pub prob: f64,
    pub stderr: f64,
    pub method: Method,
}

impl ExceedanceEstimate {
    fn exact(prob: f64, method: Method) -> Self {
        Self {
            prob: prob.clamp(0.0, 1.0),
            stderr: 0.0,
            method,
        }
    }
}

/// Pr(max_i X_i >= T) for X_i = sqrt(rho) N_0 + sqrt(1-rho) N_i, the
/// equicorrelated Gaussian vector of length k2, via
/// 1 - int phi(z) Phi((T - sqrt(rho) z)/sqrt(1-rho))^{k2} dz.
pub fn exceed_equidistant_grf(k2: usize, rho: f64, t_threshold: f64) -> Result<ExceedanceEstimate> {
    if !(0.0..1.0).contains(&rho) {
        if rho >= 1.0 && rho.is_finite() {
            return Err(Error::DegenerateCorrelation);
        }
        return Err(Error::Domain {
            arg: "rho",
            msg: format!("need 0 <= rho < 1, got {rho}"),
        });
    }
    assert!(k2 >= 1);
    let sq_rho = rho.sqrt();
    let sq_res = (1.0 - rho).sqrt();
    let not_exceed = adaptive_simpson(
        |z| normal_pdf(z) * normal_cdf((t_threshold - sq_rho * z) / sq_res).powi(k2 as i32),
        -10.0,
        10.0,
        1e-9,
    );
    Ok(ExceedanceEstimate::exact(
        1.0 - not_exceed,
        Method::Quadrature,
    ))
}

/// Pr(max X_i >= T) when rho = 1 exactly: all coordinates coincide.
pub fn exceed_equidistant_degenerate(t_threshold: f64) -> ExceedanceEstimate {
    ExceedanceEstimate::exact(1.0 - normal_cdf(t_threshold), Method::ClosedForm)
}

/// Closed-form RSF exceedance over an eps-ball:
/// (pi - 2 arcsin(T) + 2 eps sigma sqrt(d)) / (2 pi), clamped to [0,1].
///
/// The formula uses sigma*sqrt(d) for the mean frequency norm, which slightly
/// overstates E||a||; the Monte Carlo cross-checks carry the discrepancy
/// bound.
pub fn exceed_ball_rsf(
    t_threshold: f64,
    eps: f64,
    sigma: f64,
    dim: usize,
) -> Result<ExceedanceEstimate> {
    if eps < 0.0 || sigma <= 0.0 {
        return Err(Error::Domain {
            arg: "eps/sigma",
            msg: format!("need eps >= 0 and sigma > 0, got eps={eps}, sigma={sigma}"),
        });
    }
    let p = if t_threshold <= -1.0 {
        1.0
    } else {
        let t = t_threshold.min(1.0);
        (PI - 2.0 * t.asin() + 2.0 * eps * sigma * (dim as f64).sqrt()) / (2.0 * PI)
    };
    Ok(ExceedanceEstimate::exact(p, Method::ClosedForm))
}

/// Monte Carlo fraction of field draws whose maximum over an eps-ball around
/// the origin exceeds T. The ball is discretized by a uniform grid for d <= 3
/// (spacing a tenth of the correlation length 1/sqrt(param), capped at 4096
/// points per axis) and by 10^4 uniform samples above d = 3.
pub fn exceed_ball_mc(
    spec: &FieldSpec,
    eps: f64,
    t_threshold: f64,
    n_draws: usize,
    grid_pts: usize,
    seed: u64,
) -> Result<ExceedanceEstimate> {
    assert!(grid_pts >= 64);
    let sample = ball_sample(spec, eps, grid_pts, seed);
    let hits: usize = (0..n_draws)
        .into_par_iter()
        .map(|i| {
            let draw = draw_field(spec, substream_seed(seed, i as u64)).expect("samplable spec");
            let max = sample
                .iter()
                .map(|x| draw.eval_unchecked(x))
                .fold(f64::NEG_INFINITY, f64::max);
            usize::from(max >= t_threshold)
        })
        .sum();
    Ok(binomial_estimate(hits, n_draws))
}

fn ball_sample(spec: &FieldSpec, eps: f64, grid_pts: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = spec.dim;
    if d <= 3 {
        // correlation length of the field, in the same length units as eps
        let corr_len = match spec.kind {
            FieldKind::Rsf | FieldKind::Stable => 1.0 / spec.param,
            FieldKind::GrfFourier => 1.0 / spec.param.sqrt(),
            FieldKind::SincDiagnostic => 1.0 / spec.param,
        };
        let spacing = (corr_len / 10.0).max(2.0 * eps / 4096.0);
        let per_axis = ((2.0 * eps / spacing).ceil() as usize + 1)
            .clamp(grid_pts.min(4096), 4096)
            .max(2);
        let axis: Vec<f64> = (0..per_axis)
            .map(|i| -eps + 2.0 * eps * i as f64 / (per_axis - 1) as f64)
            .collect();
        let mut pts = Vec::new();
        let mut idx = vec![0usize; d];
        loop {
            let p: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
            if p.iter().map(|v| v * v).sum::<f64>().sqrt() <= eps + 1e-15 {
                pts.push(p);
            }
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < per_axis {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == d {
                    return pts;
                }
            }
        }
    } else {
        let mut rng = seeded_rng(substream_seed(seed, u64::MAX));
        let mut pts = Vec::with_capacity(10_000);
        while pts.len() < 10_000 {
            let p: Vec<f64> = (0..d).map(|_| rand::Rng::gen_range(&mut rng, -eps..eps)).collect();
            if p.iter().map(|v| v * v).sum::<f64>().sqrt() <= eps {
                pts.push(p);
            }
        }
        pts
    }
}

fn binomial_estimate(hits: usize, n: usize) -> ExceedanceEstimate {
    let p = hits as f64 / n as f64;
    ExceedanceEstimate {
        prob: p,
        stderr: (p * (1.0 - p) / n as f64).sqrt(),
        method: Method::MonteCarlo,
    }
}

/// Union-style bound over k1 independent balls: 1 - (1 - p)^{k1}, with the
/// Monte Carlo standard error propagated by the delta method.
pub fn exceed_k1_balls(single_ball: ExceedanceEstimate, k1: usize) -> ExceedanceEstimate {
    assert!(k1 >= 1);
    let p = single_ball.prob;
    let q = 1.0 - (1.0 - p).powi(k1 as i32);
    let deriv = k1 as f64 * (1.0 - p).powi(k1 as i32 - 1);
    ExceedanceEstimate {
        prob: q.clamp(0.0, 1.0),
        stderr: deriv * single_ball.stderr,
        method: single_ball.method,
    }
}

/// Empirical exceedance of the field maximum over the points of `S`: the
/// fraction of `n_draws` draws with max_{x in S} f(x) >= T. One draw is
/// evaluated on the whole set — this shared randomness is the method.
pub fn exceed_set_empirical(
    s: &PointSet,
    spec: &FieldSpec,
    t_threshold: f64,
    n_draws: usize,
    seed: u64,
) -> Result<ExceedanceEstimate> {
    if s.is_empty() {
        return Err(Error::EmptyInput);
    }
    if s.dim() != spec.dim {
        return Err(Error::Dim {
            expected: spec.dim,
            got: s.dim(),
        });
    }
    let hits: usize = (0..n_draws)
        .into_par_iter()
        .map(|i| {
            let draw = draw_field(spec, substream_seed(seed, i as u64)).expect("samplable spec");
            let max = s
                .points()
                .iter()
                .map(|x| draw.eval_unchecked(x))
                .fold(f64::NEG_INFINITY, f64::max);
            usize::from(max >= t_threshold)
        })
        .sum();
    Ok(binomial_estimate(hits, n_draws))
}
