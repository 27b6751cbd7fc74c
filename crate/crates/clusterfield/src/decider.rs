//! The end-to-end decision algorithm: tune (T, param), estimate the empirical
//! exceedance P of the field maximum over S, and compare against the midpoint
//! of the two worst-case probabilities.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::exceedance::exceed_set_empirical;
use crate::fields::{FieldKind, FieldSpec};
use crate::points::{dist, PointSet};
use crate::promise::PromiseParams;
use crate::rng::{seeded_rng, substream_seed};
use crate::tuner::{default_param_grid, default_t_grid, simplex_points, tune, TuneResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Yes,
    No,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Yes => write!(f, "YES"),
            Verdict::No => write!(f, "NO"),
            Verdict::Fail => write!(f, "FAIL"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub field_param: f64,
    pub threshold_t: f64,
    pub prob_yes_c: f64,
    pub prob_no_m: f64,
    pub empirical_p: f64,
    pub verdict: Verdict,
    pub draws_used: usize,
    pub seed: u64,
}

pub(crate) fn spec_for(kind: FieldKind, param: f64, dim: usize) -> Result<FieldSpec> {
    match kind {
        FieldKind::Rsf => FieldSpec::rsf(param, dim),
        FieldKind::GrfFourier => {
            FieldSpec::grf(param, dim, crate::tuner::grf_terms_for(param, dim))
        }
        _ => Err(Error::Unsupported(
            "decide supports RSF and GRF_FOURIER only".into(),
        )),
    }
}

/// Decide the promise problem for `S` given a tuned (param, T). YES iff the
/// empirical exceedance P is below (M + C)/2; the tie goes to NO. An
/// infeasible tune yields a FAIL report regardless of the data.
pub fn decide(
    s: &PointSet,
    params: &PromiseParams,
    kind: FieldKind,
    tuned: &TuneResult,
    n_draws: usize,
    seed: u64,
) -> Result<DecisionReport> {
    if !tuned.feasible {
        return Ok(DecisionReport {
            field_param: tuned.best_param,
            threshold_t: tuned.best_t,
            prob_yes_c: tuned.c,
            prob_no_m: tuned.m,
            empirical_p: 0.0,
            verdict: Verdict::Fail,
            draws_used: n_draws,
            seed,
        });
    }
    let spec = spec_for(kind, tuned.best_param, params.dim)?;
    let p = exceed_set_empirical(s, &spec, tuned.best_t, n_draws, seed)?;
    let mid = 0.5 * (tuned.m + tuned.c);
    Ok(DecisionReport {
        field_param: tuned.best_param,
        threshold_t: tuned.best_t,
        prob_yes_c: tuned.c,
        prob_no_m: tuned.m,
        empirical_p: p.prob,
        verdict: if p.prob < mid { Verdict::Yes } else { Verdict::No },
        draws_used: n_draws,
        seed,
    })
}

/// Sample a synthetic YES instance: k1 ball centers inside the radius-1/2
/// ball, 50 uniform points per ball of radius eps.
pub fn synthetic_yes_instance(params: &PromiseParams, seed: u64) -> PointSet {
    let mut rng = seeded_rng(seed);
    let d = params.dim;
    let mut pts = Vec::new();
    for _ in 0..params.k1 {
        let center = sample_in_ball(&mut rng, d, 0.5 - params.eps);
        for _ in 0..50 {
            let off = sample_in_ball(&mut rng, d, params.eps);
            pts.push(center.iter().zip(&off).map(|(c, o)| c + o).collect());
        }
    }
    PointSet::new(pts).expect("nonempty by construction")
}

/// Sample a synthetic NO instance: k2 points pairwise >= delta apart. Uses
/// the exact regular simplex when it fits the dimension, otherwise rejection
/// sampling inside the radius-1/2 ball.
pub fn synthetic_no_instance(params: &PromiseParams, seed: u64) -> Result<PointSet> {
    let d = params.dim;
    if params.k2 <= d + 1 {
        let raw = simplex_points(params.k2, params.delta);
        let pts: Vec<Vec<f64>> = raw
            .into_iter()
            .map(|mut p| {
                p.resize(d, 0.0);
                p
            })
            .collect();
        return PointSet::new(pts);
    }
    let mut rng = seeded_rng(seed);
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let mut attempts = 0usize;
    while pts.len() < params.k2 {
        attempts += 1;
        if attempts > 200_000 {
            return Err(Error::Domain {
                arg: "delta",
                msg: format!(
                    "could not place {} points pairwise {} apart in dimension {d}",
                    params.k2, params.delta
                ),
            });
        }
        let cand = sample_in_ball(&mut rng, d, 0.5);
        if pts.iter().all(|p| dist(p, &cand) >= params.delta) {
            pts.push(cand);
        }
    }
    PointSet::new(pts)
}

fn sample_in_ball<R: Rng>(rng: &mut R, d: usize, radius: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..d).map(|_| rng.gen_range(-radius..=radius)).collect();
        if p.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius {
            return p;
        }
    }
}

/// Monte Carlo success rates of the decision algorithm on synthetic YES and
/// NO instances; instances violating their promise are skipped, not counted.
pub fn success_rate(
    params: &PromiseParams,
    kind: FieldKind,
    n_trials: usize,
    n_draws: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let tuned = tune(
        params,
        kind,
        &default_param_grid(kind),
        &default_t_grid(),
        seed,
    )?;
    if !tuned.feasible {
        return Err(Error::Infeasible(format!(
            "gap {} <= 0; the paradigm fails for these parameters",
            tuned.gap
        )));
    }
    let mut yes_ok = 0usize;
    let mut yes_n = 0usize;
    let mut no_ok = 0usize;
    let mut no_n = 0usize;
    for trial in 0..n_trials {
        let tseed = substream_seed(seed, trial as u64);
        let s = synthetic_yes_instance(params, tseed);
        yes_n += 1;
        if decide(&s, params, kind, &tuned, n_draws, substream_seed(tseed, 1))?.verdict
            == Verdict::Yes
        {
            yes_ok += 1;
        }
        let s = synthetic_no_instance(params, tseed)?;
        no_n += 1;
        if decide(&s, params, kind, &tuned, n_draws, substream_seed(tseed, 2))?.verdict
            == Verdict::No
        {
            no_ok += 1;
        }
    }
    Ok((yes_ok as f64 / yes_n as f64, no_ok as f64 / no_n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuner::GridDescriptor;

    fn fixed_tune(param: f64, t: f64, c: f64, m: f64) -> TuneResult {
        TuneResult {
            best_param: param,
            best_t: t,
            gap: m - c,
            c,
            m,
            grid: GridDescriptor {
                param_grid: vec![param],
                t_grid: vec![t],
            },
            feasible: m > c,
        }
    }

    #[test]
    fn infeasible_tune_yields_fail() {
        let params = PromiseParams::new(3, 0.05, 4, 0.1, 1).unwrap();
        let s = PointSet::new(vec![vec![0.0], vec![0.3]]).unwrap();
        let t = fixed_tune(100.0, 0.9, 0.6, 0.5);
        let r = decide(&s, &params, FieldKind::Rsf, &t, 100, 1).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn decide_deterministic_given_seed() {
        let params = PromiseParams::new(1, 0.005, 2, 0.02, 1).unwrap();
        let s = synthetic_no_instance(&params, 5).unwrap();
        let t = fixed_tune(70.0, 0.5, 0.3, 0.6);
        let a = decide(&s, &params, FieldKind::Rsf, &t, 500, 9).unwrap();
        let b = decide(&s, &params, FieldKind::Rsf, &t, 500, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn subset_cannot_increase_p() {
        let params = PromiseParams::new(1, 0.005, 2, 0.02, 1).unwrap();
        let full = PointSet::new(vec![vec![-0.3], vec![0.0], vec![0.2], vec![0.4]]).unwrap();
        let sub = PointSet::new(vec![vec![-0.3], vec![0.0]]).unwrap();
        let t = fixed_tune(50.0, 0.6, 0.3, 0.6);
        let pf = decide(&full, &params, FieldKind::Rsf, &t, 800, 4)
            .unwrap()
            .empirical_p;
        let ps = decide(&sub, &params, FieldKind::Rsf, &t, 800, 4)
            .unwrap()
            .empirical_p;
        assert!(ps <= pf + 1e-12, "{ps} > {pf}");
    }

    #[test]
    fn scale_consistency_for_rsf() {
        // deciding on normalized S with scaled eps/delta and sigma/scale
        // equals deciding on raw S: RSF covariance depends on sigma * dist
        let params = PromiseParams::new(1, 0.01, 2, 0.04, 1).unwrap();
        // centroid at the origin so normalization is a pure scale and the
        // compensated draws match bitwise
        let raw = PointSet::new(vec![vec![-4.0], vec![0.0], vec![4.0]]).unwrap();
        let norm = raw.normalize();
        let f = norm.scale_factor();
        // same sigma*dist products: sigma_norm = sigma_raw / f
        let sigma_raw = 2.0;
        let a = decide(
            &raw,
            &params,
            FieldKind::Rsf,
            &fixed_tune(sigma_raw, 0.6, 0.3, 0.6),
            600,
            11,
        )
        .unwrap();
        let b = decide(
            &norm,
            &params,
            FieldKind::Rsf,
            &fixed_tune(sigma_raw / f, 0.6, 0.3, 0.6),
            600,
            11,
        )
        .unwrap();
        assert_eq!(a.empirical_p, b.empirical_p);
        assert_eq!(a.verdict, b.verdict);
    }

    #[test]
    fn synthetic_instances_satisfy_their_promise() {
        let params = PromiseParams::new(2, 0.02, 3, 0.2, 2).unwrap();
        let yes = synthetic_yes_instance(&params, 3);
        assert_eq!(yes.len(), 100);
        // every point near one of <= k1 centers: check diameter of clusters
        let no = synthetic_no_instance(&params, 3).unwrap();
        assert_eq!(no.len(), 3);
        for i in 0..3 {
            for j in i + 1..3 {
                assert!(no.dist(i, j) >= params.delta - 1e-12);
            }
        }
        // rejection path for k2 > d+1
        let params = PromiseParams::new(1, 0.01, 5, 0.1, 2).unwrap();
        let no = synthetic_no_instance(&params, 7).unwrap();
        assert_eq!(no.len(), 5);
        for i in 0..5 {
            for j in i + 1..5 {
                assert!(no.dist(i, j) >= params.delta);
            }
        }
    }
}
