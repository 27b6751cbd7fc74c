//! Parameter tuning: pick the field parameter and threshold T that maximize
//! the worst-case probability gap M - C, where M is the exceedance for the
//! hardest NO configuration (k2 equidistant points at delta) and C bounds the
//! exceedance for the hardest YES configuration (k1 balls of radius eps).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exceedance::{
    exceed_ball_rsf, exceed_equidistant_grf, exceed_k1_balls, ExceedanceEstimate, Method,
};
use crate::fields::{draw_field, FieldKind, FieldSpec};
use crate::promise::PromiseParams;
use crate::rng::substream_seed;
use crate::Result;

/// Monte Carlo budget for the pieces with no closed form (GRF ball
/// exceedance, RSF simplex maxima).
const BALL_DRAWS: usize = 800;
const SIMPLEX_DRAWS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub param_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_param: f64,
    pub best_t: f64,
    /// M - C at the optimum.
    pub gap: f64,
    pub c: f64,
    pub m: f64,
    pub grid: GridDescriptor,
    pub feasible: bool,
}

/// Default parameter grid for a field kind: log-spaced, bracketing the
/// regimes from nearly-constant to white-noise-like fields.
pub fn default_param_grid(kind: FieldKind) -> Vec<f64> {
    let (lo, hi, n) = match kind {
        FieldKind::GrfFourier => (1.0f64, 1e6f64, 40),
        _ => (1.0, 1e4, 40),
    };
    log_space(lo, hi, n)
}

pub fn default_t_grid() -> Vec<f64> {
    lin_space(0.5, 0.999, 50)
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// GRF truncation order that resolves the correlation length 1/sqrt(lambda).
pub(crate) fn grf_terms_for(lambda: f64, dim: usize) -> usize {
    let per_axis = ((3.0 * lambda.sqrt()).ceil() as usize).clamp(8, 3000);
    let cap = (1e6f64.powf(1.0 / dim as f64)) as usize;
    per_axis.min(cap.max(1))
}

/// Exhaustive grid search of gap(param, T); returns the full surface, rows
/// indexed by param, columns by T.
pub fn gap_surface(
    params: &PromiseParams,
    kind: FieldKind,
    param_grid: &[f64],
    t_grid: &[f64],
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    assert!(!param_grid.is_empty() && !t_grid.is_empty());
    param_grid
        .par_iter()
        .enumerate()
        .map(|(pi, &p)| gap_row(params, kind, p, t_grid, substream_seed(seed, pi as u64)))
        .collect()
}

fn gap_row(
    params: &PromiseParams,
    kind: FieldKind,
    param: f64,
    t_grid: &[f64],
    seed: u64,
) -> Result<Vec<f64>> {
    let m_by_t = no_case_exceedance(params, kind, param, t_grid, seed)?;
    let c_by_t = yes_case_exceedance(params, kind, param, t_grid, seed)?;
    Ok(m_by_t
        .iter()
        .zip(&c_by_t)
        .map(|(m, c)| m.prob - c.prob)
        .collect())
}

// M: exceedance of the field maximum over k2 equidistant points at delta.
fn no_case_exceedance(
    params: &PromiseParams,
    kind: FieldKind,
    param: f64,
    t_grid: &[f64],
    seed: u64,
) -> Result<Vec<ExceedanceEstimate>> {
    match kind {
        FieldKind::GrfFourier => {
            let rho = (-param * params.delta * params.delta).exp();
            t_grid
                .iter()
                .map(|&t| exceed_equidistant_grf(params.k2, rho, t))
                .collect()
        }
        FieldKind::Rsf => {
            // non-Gaussian: Monte Carlo over the exact regular simplex with
            // edge delta, embedded in R^{k2-1}
            let pts = simplex_points(params.k2, params.delta);
            let dim = pts[0].len();
            let spec = FieldSpec::rsf(param, dim)?;
            let mut maxima: Vec<f64> = (0..SIMPLEX_DRAWS)
                .into_par_iter()
                .map(|i| {
                    let draw = draw_field(&spec, substream_seed(seed, i as u64)).unwrap();
                    pts.iter()
                        .map(|x| draw.eval_unchecked(x))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            maxima.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Ok(t_grid
                .iter()
                .map(|&t| {
                    let below = maxima.partition_point(|&m| m < t);
                    let p = (SIMPLEX_DRAWS - below) as f64 / SIMPLEX_DRAWS as f64;
                    ExceedanceEstimate {
                        prob: p,
                        stderr: (p * (1.0 - p) / SIMPLEX_DRAWS as f64).sqrt(),
                        method: Method::MonteCarlo,
                    }
                })
                .collect())
        }
        _ => Err(crate::Error::Unsupported(
            "tuning supports RSF and GRF_FOURIER only".into(),
        )),
    }
}

// C: union bound over k1 balls of radius eps.
fn yes_case_exceedance(
    params: &PromiseParams,
    kind: FieldKind,
    param: f64,
    t_grid: &[f64],
    seed: u64,
) -> Result<Vec<ExceedanceEstimate>> {
    match kind {
        FieldKind::Rsf => t_grid
            .iter()
            .map(|&t| {
                let single = exceed_ball_rsf(t, params.eps, param, params.dim)?;
                Ok(exceed_k1_balls(single, params.k1))
            })
            .collect(),
        FieldKind::GrfFourier => {
            // one batch of ball maxima per param, swept over T
            let spec = FieldSpec::grf(param, params.dim, grf_terms_for(param, params.dim))?;
            let singles = ball_maxima_sweep(&spec, params.eps, t_grid, seed)?;
            Ok(singles
                .into_iter()
                .map(|s| exceed_k1_balls(s, params.k1))
                .collect())
        }
        _ => Err(crate::Error::Unsupported(
            "tuning supports RSF and GRF_FOURIER only".into(),
        )),
    }
}

fn ball_maxima_sweep(
    spec: &FieldSpec,
    eps: f64,
    t_grid: &[f64],
    seed: u64,
) -> Result<Vec<ExceedanceEstimate>> {
    // same sampling layout as exceed_ball_mc, but draws shared across T values
    let mut maxima = ball_maxima(spec, eps, BALL_DRAWS, seed);
    maxima.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(t_grid
        .iter()
        .map(|&t| {
            let below = maxima.partition_point(|&m| m < t);
            let p = (maxima.len() - below) as f64 / maxima.len() as f64;
            ExceedanceEstimate {
                prob: p,
                stderr: (p * (1.0 - p) / maxima.len() as f64).sqrt(),
                method: Method::MonteCarlo,
            }
        })
        .collect())
}

fn ball_maxima(spec: &FieldSpec, eps: f64, n_draws: usize, seed: u64) -> Vec<f64> {
    // grid matching exceed_ball_mc's spacing policy, 1D/2D/3D
    let corr_len = 1.0 / spec.param.sqrt();
    let spacing = (corr_len / 10.0).max(2.0 * eps / 4096.0);
    let per_axis = ((2.0 * eps / spacing).ceil() as usize + 1).clamp(64, 4096);
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| -eps + 2.0 * eps * i as f64 / (per_axis - 1) as f64)
        .collect();
    let pts: Vec<Vec<f64>> = if spec.dim == 1 {
        axis.iter().map(|&x| vec![x]).collect()
    } else {
        let mut pts = Vec::new();
        let mut idx = vec![0usize; spec.dim];
        'outer: loop {
            let p: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
            if p.iter().map(|v| v * v).sum::<f64>().sqrt() <= eps {
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
                if k == spec.dim {
                    break 'outer;
                }
            }
        }
        pts
    };
    (0..n_draws)
        .into_par_iter()
        .map(|i| {
            let draw = draw_field(spec, substream_seed(seed, i as u64)).unwrap();
            pts.iter()
                .map(|x| draw.eval_unchecked(x))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Vertices of the regular simplex with edge length `edge` in R^{k-1}
/// (k >= 2), centered at the origin.
pub(crate) fn simplex_points(k: usize, edge: f64) -> Vec<Vec<f64>> {
    assert!(k >= 2);
    let d = k - 1;
    // e_i * edge/sqrt(2) has pairwise distances exactly `edge`; project the
    // k standard basis vertices of R^k down by dropping the centroid.
    let s = edge / std::f64::consts::SQRT_2;
    let mut pts: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut p = vec![0.0; k];
            p[i] = s;
            p
        })
        .collect();
    let centroid: Vec<f64> = (0..k)
        .map(|j| pts.iter().map(|p| p[j]).sum::<f64>() / k as f64)
        .collect();
    for p in pts.iter_mut() {
        for j in 0..k {
            p[j] -= centroid[j];
        }
    }
    // the centered vertices live in a (k-1)-dim subspace; orthonormalize via
    // Gram-Schmidt on the difference vectors to get R^{k-1} coordinates
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 1..k {
        let mut v: Vec<f64> = (0..k).map(|j| pts[i][j] - pts[0][j]).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            for (vj, bj) in v.iter_mut().zip(b) {
                *vj -= dot * bj;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
        basis.push(v);
    }
    pts.iter()
        .map(|p| {
            basis
                .iter()
                .map(|b| p.iter().zip(b).map(|(a, c)| a * c).sum())
                .collect::<Vec<f64>>()
        })
        .map(|p| {
            debug_assert_eq!(p.len(), d);
            p
        })
        .collect()
}

/// Grid-search tune: argmax of gap(param, T); ties break toward the smaller
/// param, then the smaller T. Infeasibility (gap <= 0 everywhere) is a result
/// state, not an error.
pub fn tune(
    params: &PromiseParams,
    kind: FieldKind,
    param_grid: &[f64],
    t_grid: &[f64],
    seed: u64,
) -> Result<TuneResult> {
    let surface = gap_surface(params, kind, param_grid, t_grid, seed)?;
    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    for (pi, row) in surface.iter().enumerate() {
        for (ti, &g) in row.iter().enumerate() {
            if g > best.2 + 1e-15 {
                best = (pi, ti, g);
            }
        }
    }
    let (pi, ti, gap) = best;
    // recompute C and M at the winner
    let m = no_case_exceedance(params, kind, param_grid[pi], &[t_grid[ti]], substream_seed(seed, pi as u64))?[0];
    let c = yes_case_exceedance(params, kind, param_grid[pi], &[t_grid[ti]], substream_seed(seed, pi as u64))?[0];
    Ok(TuneResult {
        best_param: param_grid[pi],
        best_t: t_grid[ti],
        gap,
        c: c.prob,
        m: m.prob,
        grid: GridDescriptor {
            param_grid: param_grid.to_vec(),
            t_grid: t_grid.to_vec(),
        },
        feasible: gap > 0.0,
    })
}
