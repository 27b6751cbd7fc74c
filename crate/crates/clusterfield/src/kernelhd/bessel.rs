//! Bessel functions of the first kind for real order nu >= -1/2, and their
//! positive zeros.
//!
//! Small arguments use the ascending power series. Larger arguments use
//! Miller's downward recurrence normalized by the Neumann identity
//! (z/2)^nu = sum_k c_k J_{nu+2k}(z) with c_k = (nu+2k) Gamma(nu+k) / k!,
//! which avoids the cancellation of upward recurrence. Zeros come from
//! McMahon asymptotic guesses polished by safeguarded Newton.

use crate::special::{gamma, ln_gamma};

const SERIES_CUTOFF: f64 = 12.0;
const Z_CAP: f64 = 1000.0;

/// J_nu(z) for nu >= -1/2, 0 <= z <= 1000. Relative accuracy ~1e-12 away
/// from zeros of the function.
pub fn bessel_j(nu: f64, z: f64) -> f64 {
    assert!(nu >= -0.5, "order must be >= -1/2, got {nu}");
    assert!((0.0..=Z_CAP).contains(&z), "argument out of range: {z}");
    if z == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if z <= SERIES_CUTOFF {
        bessel_series(nu, z)
    } else {
        bessel_miller(nu, z)
    }
}

fn bessel_series(nu: f64, z: f64) -> f64 {
    let half = z / 2.0;
    let mut term = half.powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    let z2 = half * half;
    for m in 1..200 {
        term *= -z2 / (m as f64 * (nu + m as f64));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-280) {
            break;
        }
    }
    sum
}

fn bessel_miller(nu: f64, z: f64) -> f64 {
    let m_top = ((z + 1.6 * z.powf(0.6) + 60.0) as usize) & !1; // even
    let mut f = vec![0.0f64; m_top + 2];
    f[m_top + 1] = 0.0;
    f[m_top] = 1e-30;
    for k in (1..=m_top).rev() {
        f[k - 1] = 2.0 * (nu + k as f64) / z * f[k] - f[k + 1];
        if f[k - 1].abs() > 1e250 {
            for v in f[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // Neumann normalization sum over even offsets:
    // c_0 = Gamma(nu+1), c_k = (nu+2k) Gamma(nu+k) / k!
    let mut s = gamma(nu + 1.0) * f[0];
    for k in 1..=m_top / 2 {
        let kf = k as f64;
        let c = (nu + 2.0 * kf) * (ln_gamma(nu + kf) - ln_gamma(kf + 1.0)).exp();
        s += c * f[2 * k];
    }
    f[0] * (z / 2.0).powf(nu) / s
}

/// d/dz J_nu(z) = J_{nu-1}(z) - (nu/z) J_nu(z); needs nu >= 1/2.
fn bessel_j_deriv(nu: f64, z: f64) -> f64 {
    bessel_j(nu - 1.0, z) - nu / z * bessel_j(nu, z)
}

/// First `count` positive zeros of J_nu, increasing. Requires nu >= 1/2 (the
/// only orders the Dini machinery asks for) and count <= 200.
pub fn bessel_zeros(nu: f64, count: usize) -> Vec<f64> {
    assert!(nu >= 0.5 && count <= 200);
    let mu = 4.0 * nu * nu;
    let mut zeros = Vec::with_capacity(count);
    for n in 1..=count {
        // McMahon expansion
        let beta = (n as f64 + nu / 2.0 - 0.25) * std::f64::consts::PI;
        let b8 = 8.0 * beta;
        let mut guess = beta - (mu - 1.0) / b8
            - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8.powi(3));
        // safeguarded Newton
        let mut lo = guess - 1.0;
        let mut hi = guess + 1.0;
        if let Some(&prev) = zeros.last() {
            lo = lo.max(prev + 1e-6);
        } else {
            lo = lo.max(1e-6);
        }
        // ensure a sign change bracket
        while bessel_j(nu, lo) * bessel_j(nu, hi) > 0.0 && hi - lo < 4.0 {
            lo -= 0.25;
            hi += 0.25;
        }
        for _ in 0..100 {
            let fj = bessel_j(nu, guess);
            if fj.abs() < 1e-14 {
                break;
            }
            let step = fj / bessel_j_deriv(nu, guess);
            let mut next = guess - step;
            if !(lo..=hi).contains(&next) {
                next = 0.5 * (lo + hi);
            }
            if bessel_j(nu, lo) * bessel_j(nu, next) <= 0.0 {
                hi = next;
            } else {
                lo = next;
            }
            if (next - guess).abs() < 1e-13 * guess {
                guess = next;
                break;
            }
            guess = next;
        }
        zeros.push(guess);
    }
    zeros
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn j0_j1_reference_values() {
        // mpmath references
        assert!((bessel_j(0.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_j(0.0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-12);
        assert!((bessel_j(0.0, 5.0) + 0.177_596_771_314_338_3).abs() < 1e-12);
        assert!((bessel_j(1.0, 2.0) - 0.576_724_807_756_873_4).abs() < 1e-12);
        assert!((bessel_j(0.0, 20.0) - 0.167_024_664_340_583_1).abs() < 1e-11);
        assert!((bessel_j(2.5, 50.0) - 0.023_037_219_509_625_53).abs() < 1e-11);
        assert!((bessel_j(0.5, 100.0) + 0.040_402_132_716_252_24).abs() < 1e-12);
    }

    #[test]
    fn half_order_closed_form() {
        // J_{1/2}(z) = sqrt(2/(pi z)) sin z
        for z in [0.3, PI / 2.0, 3.0, 14.0, 80.0] {
            let want = (2.0 / (PI * z)).sqrt() * z.sin();
            assert!((bessel_j(0.5, z) - want).abs() < 1e-12, "z={z}");
        }
        // J_{-1/2}(z) = sqrt(2/(pi z)) cos z
        for z in [0.2, 1.0, 13.0, 60.0] {
            let want = (2.0 / (PI * z)).sqrt() * z.cos();
            assert!((bessel_j(-0.5, z) - want).abs() < 1e-12, "z={z}");
        }
    }

    #[test]
    fn series_miller_boundary_consistent() {
        for nu in [0.0, 0.5, 1.0, 1.5, 4.0] {
            let a = bessel_series(nu, SERIES_CUTOFF);
            let b = bessel_miller(nu, SERIES_CUTOFF);
            assert!((a - b).abs() < 1e-11, "nu={nu}: {a} vs {b}");
        }
    }

    #[test]
    fn zeros_of_half_order_are_n_pi() {
        let zs = bessel_zeros(0.5, 20);
        for (i, z) in zs.iter().enumerate() {
            assert!((z - (i + 1) as f64 * PI).abs() < 1e-9, "n={} z={z}", i + 1);
        }
    }

    #[test]
    fn first_zero_of_j1() {
        let zs = bessel_zeros(1.0, 3);
        assert!((zs[0] - 3.831_705_970_207_512).abs() < 1e-8);
        assert!((zs[1] - 7.015_586_669_815_619).abs() < 1e-8);
    }

    #[test]
    fn zeros_increasing_small_residual() {
        for nu in [0.5, 1.0, 2.5, 5.0] {
            let zs = bessel_zeros(nu, 60);
            for w in zs.windows(2) {
                assert!(w[1] > w[0]);
            }
            for &z in &zs {
                assert!(bessel_j(nu, z).abs() < 1e-10, "nu={nu} z={z}");
            }
        }
    }
}
