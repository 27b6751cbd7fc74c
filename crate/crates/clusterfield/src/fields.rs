//! Parametric random-field families: the Random Sine Field, the stable
//! (Cauchy-frequency) field, and a Fourier-approximated Gaussian random field.
//!
//! Each family is described by a [`FieldSpec`]; sampling one realization gives
//! a [`FieldDraw`], a plain deterministic function of `R^d`. Exact covariance
//! functions live next to the samplers, together with a Monte Carlo estimator
//! used to validate them.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::quad::adaptive_simpson;
use crate::rng::{seeded_rng, substream_seed};
use crate::{Error, Result};

/// Field family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    /// sin(a.x + b), a ~ N(0, sigma^2)^d.
    Rsf,
    /// sin(a.x + b), a_i Cauchy with scale 1/k.
    Stable,
    /// Truncated cosine expansion of the exp(-lambda t^2) GRF.
    GrfFourier,
    /// sinc covariance, 1D, covariance-only diagnostic (not samplable here).
    SincDiagnostic,
}

/// Parametric description of a random field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: FieldKind,
    /// sigma for RSF, k for STABLE, lambda for GRF_FOURIER, A for the sinc
    /// diagnostic.
    pub param: f64,
    pub dim: usize,
    /// Truncation order per axis; meaningful for GRF_FOURIER only.
    pub n_terms: usize,
}

const GRF_TERM_CAP: f64 = 1e6;

impl FieldSpec {
    pub fn rsf(sigma: f64, dim: usize) -> Result<Self> {
        Self::build(FieldKind::Rsf, sigma, dim, 0)
    }

    pub fn stable(k: f64, dim: usize) -> Result<Self> {
        Self::build(FieldKind::Stable, k, dim, 0)
    }

    pub fn grf(lambda: f64, dim: usize, n_terms: usize) -> Result<Self> {
        if n_terms < 1 {
            return Err(Error::Domain {
                arg: "n_terms",
                msg: "GRF truncation order must be >= 1".into(),
            });
        }
        if (n_terms as f64).powi(dim as i32) > GRF_TERM_CAP {
            return Err(Error::Domain {
                arg: "n_terms",
                msg: format!("n_terms^dim = {n_terms}^{dim} exceeds the 1e6 term cap"),
            });
        }
        Self::build(FieldKind::GrfFourier, lambda, dim, n_terms)
    }

    pub fn sinc_diagnostic(a: f64) -> Result<Self> {
        Self::build(FieldKind::SincDiagnostic, a, 1, 0)
    }

    fn build(kind: FieldKind, param: f64, dim: usize, n_terms: usize) -> Result<Self> {
        if !(param > 0.0 && param.is_finite()) {
            return Err(Error::Domain {
                arg: "param",
                msg: format!("field parameter must be positive, got {param}"),
            });
        }
        if dim < 1 {
            return Err(Error::Domain {
                arg: "dim",
                msg: "dim >= 1 required".into(),
            });
        }
        Ok(Self {
            kind,
            param,
            dim,
            n_terms,
        })
    }
}

/// One sampled realization: a deterministic scalar function of `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDraw {
    pub spec: FieldSpec,
    /// RSF/STABLE: the frequency vector `a` (one row of length d).
    /// GRF_FOURIER: per-axis amplitudes `N_k(0,1) * w_k` (d rows of n_terms).
    frequencies: Vec<Vec<f64>>,
    /// RSF/STABLE: the single phase `b`. GRF_FOURIER: per-axis shift `t`.
    phases: Vec<f64>,
    pub seed: u64,
}

/// Sample one field realization. Same seed, same spec: identical draw.
pub fn draw_field(spec: &FieldSpec, rng_seed: u64) -> Result<FieldDraw> {
    let mut rng = seeded_rng(rng_seed);
    let (frequencies, phases) = match spec.kind {
        FieldKind::Rsf => {
            let a = (0..spec.dim)
                .map(|_| spec.param * standard_normal(&mut rng))
                .collect();
            (vec![a], vec![rng.gen_range(-PI..PI)])
        }
        FieldKind::Stable => {
            // inverse-CDF Cauchy with scale 1/k
            let a = (0..spec.dim)
                .map(|_| {
                    let u: f64 = rng.gen_range(0.0..1.0);
                    (PI * (u - 0.5)).tan() / spec.param
                })
                .collect();
            (vec![a], vec![rng.gen_range(-PI..PI)])
        }
        FieldKind::GrfFourier => {
            let w = grf_amplitudes_cached(spec.param, spec.n_terms);
            let mut freqs = Vec::with_capacity(spec.dim);
            let mut shifts = Vec::with_capacity(spec.dim);
            for _ in 0..spec.dim {
                freqs.push(w.iter().map(|&wk| wk * standard_normal(&mut rng)).collect());
                shifts.push(rng.gen_range(-1.0..1.0));
            }
            (freqs, shifts)
        }
        FieldKind::SincDiagnostic => {
            return Err(Error::Unsupported(
                "the sinc diagnostic is covariance-only and cannot be sampled".into(),
            ))
        }
    };
    Ok(FieldDraw {
        spec: *spec,
        frequencies,
        phases,
        seed: rng_seed,
    })
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

impl FieldDraw {
    /// Field value at `x`; pure and deterministic.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.spec.dim {
            return Err(Error::Dim {
                expected: self.spec.dim,
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluation without the dimension check, for hot loops that validated
    /// the input once.
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match self.spec.kind {
            FieldKind::Rsf | FieldKind::Stable => {
                let dot: f64 = self.frequencies[0].iter().zip(x).map(|(a, v)| a * v).sum();
                (dot + self.phases[0]).sin()
            }
            FieldKind::GrfFourier => {
                // product over axes of independent 1D expansions
                let mut prod = 1.0;
                for (axis, &xj) in x.iter().enumerate() {
                    let shift = self.phases[axis];
                    // cos(k*theta) by the two-term recurrence: one cos call
                    // per axis instead of one per term
                    let theta = PI * (xj - shift);
                    let c1 = theta.cos();
                    let amps = &self.frequencies[axis];
                    let mut h = amps[0];
                    let (mut prev2, mut prev1) = (1.0, c1);
                    if amps.len() > 1 {
                        h += amps[1] * c1;
                    }
                    for amp in &amps[2..] {
                        let ck = 2.0 * c1 * prev1 - prev2;
                        h += amp * ck;
                        prev2 = prev1;
                        prev1 = ck;
                    }
                    prod *= h;
                }
                prod
            }
            FieldKind::SincDiagnostic => unreachable!("sinc draws are rejected at draw_field"),
        }
    }
}

/// Exact covariance of the field family at a pair of points.
pub fn covariance(spec: &FieldSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != spec.dim || y.len() != spec.dim {
        return Err(Error::Dim {
            expected: spec.dim,
            got: if x.len() != spec.dim { x.len() } else { y.len() },
        });
    }
    match spec.kind {
        FieldKind::Rsf => {
            let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            Ok(0.5 * (-spec.param * spec.param * d2 / 2.0).exp())
        }
        FieldKind::Stable => {
            let l1: f64 = x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum();
            Ok(0.5 * (-l1 / spec.param).exp())
        }
        FieldKind::GrfFourier => {
            let beta = grf_weights(spec.param, spec.n_terms);
            let mut prod = 1.0;
            for (a, b) in x.iter().zip(y) {
                let t = a - b;
                let axis: f64 = beta
                    .iter()
                    .enumerate()
                    .map(|(k, &bk)| bk * (PI * k as f64 * t).cos())
                    .sum();
                prod *= axis;
            }
            Ok(prod)
        }
        FieldKind::SincDiagnostic => {
            let t = x[0] - y[0];
            Ok(if t.abs() < 1e-12 {
                spec.param / 2.0
            } else {
                (spec.param * t).sin() / (2.0 * t)
            })
        }
    }
}

/// Amplitude weights w_k (w_0^2 = beta_0, w_k^2 = 2 beta_k) memoized per
/// (lambda, n_terms): the quadrature behind [`grf_weights`] is far too
/// expensive to repeat for every draw of the same spec.
fn grf_amplitudes_cached(lambda: f64, n_terms: usize) -> std::sync::Arc<Vec<f64>> {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (lambda.to_bits(), n_terms);
    if let Some(v) = cache.lock().expect("cache lock").get(&key) {
        return v.clone();
    }
    // computed outside the lock; a racing duplicate yields identical values
    let w: Vec<f64> = grf_weights(lambda, n_terms)
        .iter()
        .enumerate()
        .map(|(k, &beta)| if k == 0 { beta.sqrt() } else { (2.0 * beta).sqrt() })
        .collect();
    let arc = Arc::new(w);
    cache
        .lock()
        .expect("cache lock")
        .insert(key, arc.clone());
    arc
}

/// Clamped cosine-series coefficients of exp(-lambda t^2) on [0,1]:
/// beta_0 = int_0^1 f, beta_k = 2 int_0^1 f(t) cos(pi k t) dt, negatives
/// replaced by 0. Returns `n_terms` entries beta_0..beta_{n_terms-1}.
pub fn grf_weights(lambda: f64, n_terms: usize) -> Vec<f64> {
    assert!(n_terms >= 1 && lambda > 0.0);
    (0..n_terms)
        .map(|k| {
            let scale = if k == 0 { 1.0 } else { 2.0 };
            let v = scale
                * adaptive_simpson(
                    |t| (-lambda * t * t).exp() * (PI * k as f64 * t).cos(),
                    0.0,
                    1.0,
                    1e-12,
                );
            v.max(0.0)
        })
        .collect()
}

/// Monte Carlo estimate of Cov(f(x), f(y)): mean of the product of the field
/// at the two points over independent draws, with its standard error.
pub fn empirical_covariance(
    spec: &FieldSpec,
    x: &[f64],
    y: &[f64],
    n_draws: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    assert!(n_draws >= 100);
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for i in 0..n_draws {
        let draw = draw_field(spec, substream_seed(seed, i as u64))?;
        let p = draw.evaluate(x)? * draw.evaluate(y)?;
        sum += p;
        sum2 += p * p;
    }
    let n = n_draws as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Monte Carlo estimate of E[(a.x - a.y)^2] for a ~ N(0, sigma^2)^d: the
/// mean-squared distance a rounding-free LSH projection sees. Grows with the
/// distance instead of saturating, which is why LSH projections cannot drive
/// the exceedance statistic.
pub fn lsh_msd_check(sigma: f64, x: &[f64], y: &[f64], n_draws: usize, seed: u64) -> f64 {
    assert!(n_draws >= 1000);
    assert_eq!(x.len(), y.len());
    let mut rng = seeded_rng(seed);
    let mut sum = 0.0;
    for _ in 0..n_draws {
        let proj: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| sigma * standard_normal(&mut rng) * (a - b))
            .sum();
        sum += proj * proj;
    }
    sum / n_draws as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rsf_bounded_and_deterministic() {
        let spec = FieldSpec::rsf(1.0, 2).unwrap();
        let d1 = draw_field(&spec, 99).unwrap();
        let d2 = draw_field(&spec, 99).unwrap();
        assert_eq!(d1, d2);
        let mut rng = seeded_rng(1);
        for _ in 0..10_000 {
            let x = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let v = d1.evaluate(&x).unwrap();
            assert!((-1.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn evaluate_dim_mismatch() {
        let spec = FieldSpec::rsf(1.0, 2).unwrap();
        let d = draw_field(&spec, 0).unwrap();
        assert!(matches!(
            d.evaluate(&[0.0]),
            Err(Error::Dim {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn grf_draw_has_n_terms_amplitudes() {
        let spec = FieldSpec::grf(300.0, 1, 25).unwrap();
        let d = draw_field(&spec, 7).unwrap();
        assert_eq!(d.frequencies.len(), 1);
        assert_eq!(d.frequencies[0].len(), 25);
    }

    #[test]
    fn rsf_covariance_closed_form() {
        let spec = FieldSpec::rsf(2.0, 3).unwrap();
        // at x = y the variance is 1/2
        let x = [0.3, -0.1, 0.5];
        assert!((covariance(&spec, &x, &x).unwrap() - 0.5).abs() < 1e-15);
        let y = [0.3, -0.1, 0.0];
        let want = 0.5 * (-4.0 * 0.25 / 2.0f64).exp();
        assert!((covariance(&spec, &x, &y).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn paper_ratio_values_at_ten_eps() {
        // RSF tuned so the exp factor is 0.99 at distance eps: value at 10 eps
        // is 0.99^100 = 0.3660; the stable field's L1 analogue gives 0.9044.
        let eps = 0.01f64;
        let sigma = (2.0 * (1.0f64 / 0.99).ln()).sqrt() / eps;
        let spec = FieldSpec::rsf(sigma, 1).unwrap();
        let v = 2.0 * covariance(&spec, &[0.0], &[10.0 * eps]).unwrap();
        assert!((v - 0.99f64.powi(100)).abs() < 1e-12);
        assert!((v - 0.3660).abs() < 5e-4);

        let k = eps / (1.0f64 / 0.99).ln();
        let sspec = FieldSpec::stable(k, 1).unwrap();
        let s = 2.0 * covariance(&sspec, &[0.0], &[10.0 * eps]).unwrap();
        assert!((s - 0.99f64.powi(10)).abs() < 1e-12);
        assert!((s - 0.9044).abs() < 5e-5);
    }

    #[test]
    fn stable_empirical_covariance_matches_closed_form() {
        let spec = FieldSpec::stable(0.5, 1).unwrap();
        for t in [0.0, 0.1, 0.3, 0.6, 1.0] {
            let (mean, se) = empirical_covariance(&spec, &[0.0], &[t], 20_000, 4).unwrap();
            let want = covariance(&spec, &[0.0], &[t]).unwrap();
            assert!(
                (mean - want).abs() < 3.0 * se.max(1e-4),
                "t={t}: {mean} vs {want} (se {se})"
            );
        }
    }

    #[test]
    fn rsf_mean_is_zero() {
        let spec = FieldSpec::rsf(1.0, 2).unwrap();
        let x = [0.2, 0.4];
        let n = 20_000usize;
        let mut sum = 0.0;
        for i in 0..n {
            sum += draw_field(&spec, substream_seed(10, i as u64))
                .unwrap()
                .evaluate(&x)
                .unwrap();
        }
        assert!((sum / n as f64).abs() < 0.02);
    }

    #[test]
    fn grf_weights_small_lambda_is_constant() {
        let w = grf_weights(1e-9, 5);
        assert!((w[0] - 1.0).abs() < 1e-6);
        for &b in &w[1..] {
            assert!(b.abs() < 1e-6);
        }
    }

    #[test]
    fn grf_weights_nonnegative_and_reconstruct() {
        let beta = grf_weights(300.0, 25);
        assert!(beta.iter().all(|&b| b >= 0.0));
        let spec = FieldSpec::grf(300.0, 1, 25).unwrap();
        // covariance at distance t should track exp(-300 t^2)
        let mut rms = 0.0;
        let m = 200;
        for i in 0..=m {
            let t = i as f64 / m as f64;
            let c = covariance(&spec, &[0.0], &[t]).unwrap();
            let e = c - (-300.0 * t * t).exp();
            rms += e * e;
        }
        assert!((rms / (m + 1) as f64).sqrt() < 0.01);
    }

    #[test]
    fn covariance_is_stationary_and_isotropic() {
        let spec = FieldSpec::rsf(3.0, 2).unwrap();
        let x = [0.1, 0.2];
        let y = [0.4, -0.3];
        let base = covariance(&spec, &x, &y).unwrap();
        // translation
        let xs = [x[0] + 5.0, x[1] - 2.0];
        let ys = [y[0] + 5.0, y[1] - 2.0];
        assert!((covariance(&spec, &xs, &ys).unwrap() - base).abs() < 1e-14);
        // rotation by 0.7 rad
        let (c, s) = (0.7f64.cos(), 0.7f64.sin());
        let rot = |p: &[f64]| [c * p[0] - s * p[1], s * p[0] + c * p[1]];
        assert!((covariance(&spec, &rot(&x), &rot(&y)).unwrap() - base).abs() < 1e-14);
    }

    #[test]
    fn grf_gram_is_psd() {
        let spec = FieldSpec::grf(50.0, 2, 30).unwrap();
        let mut rng = seeded_rng(21);
        let pts: Vec<[f64; 2]> = (0..8)
            .map(|_| [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)])
            .collect();
        let mut g = nalgebra::DMatrix::<f64>::zeros(8, 8);
        for i in 0..8 {
            for j in 0..8 {
                g[(i, j)] = covariance(&spec, &pts[i], &pts[j]).unwrap();
            }
        }
        let eig = g.symmetric_eigenvalues();
        assert!(eig.iter().all(|&e| e >= -1e-9), "{eig:?}");
    }

    #[test]
    fn sinc_covariance_not_monotone() {
        let spec = FieldSpec::sinc_diagnostic(10.0).unwrap();
        let mut saw_negative_then_positive = false;
        let mut seen_negative = false;
        for i in 1..=1000 {
            let t = i as f64 / 1000.0;
            let c = covariance(&spec, &[0.0], &[t]).unwrap();
            if c < 0.0 {
                seen_negative = true;
            } else if seen_negative && c > 0.0 {
                saw_negative_then_positive = true;
            }
        }
        assert!(saw_negative_then_positive);
    }

    #[test]
    fn lsh_msd_quadratic_in_distance() {
        let x = [0.0, 0.0];
        let y = [2.0, 0.0];
        let v = lsh_msd_check(1.0, &x, &y, 100_000, 5);
        assert!((v - 4.0).abs() / 4.0 < 0.05, "{v}");
        let y3 = [6.0, 0.0];
        let v3 = lsh_msd_check(1.0, &x, &y3, 100_000, 5);
        assert!((v3 / v - 9.0).abs() < 0.9, "{v3} vs {v}");
        assert!(lsh_msd_check(1.0, &x, &x, 1000, 1) == 0.0);
    }

    #[test]
    fn draw_serializes_to_json_roundtrip() {
        let spec = FieldSpec::grf(20.0, 2, 8).unwrap();
        let d = draw_field(&spec, 3).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        let back: FieldDraw = serde_json::from_str(&s).unwrap();
        assert_eq!(d.spec, back.spec);
        assert_eq!(d.seed, back.seed);
        // float text roundtrip may wobble in the last ulp
        for (a, b) in d.frequencies.iter().flatten().zip(back.frequencies.iter().flatten()) {
            assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
        }
        for (a, b) in d.phases.iter().zip(&back.phases) {
            assert!((a - b).abs() <= 1e-15);
        }
    }
}
