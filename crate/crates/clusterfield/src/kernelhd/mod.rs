//! d-dimensional optimal kernels over the Dini basis
//! f_{d,n}(t) = A_nu(j_{nu+1,n} t), nu = d/2 - 1, where A_nu is the
//! normalized Bessel function Gamma(nu+1) (z/2)^{-nu} J_nu(z). Nonnegative
//! Dini coefficients give kernels that are both pointwise nonnegative and
//! positive definite on the radius-1/2 ball of R^d.

pub mod bessel;

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::kernel1d::KernelMeta;
use crate::lp::{lp_solve, LinearProgram, LpStatus};
use crate::special::gamma;
use crate::{Error, Result};
use bessel::{bessel_j, bessel_zeros};

/// A radial kernel on [0,1] in dimension d with nonnegative coefficients over
/// the basis {1, f_{d,1}, ..., f_{d,N}}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelHD {
    pub basis: String,
    pub dim: usize,
    pub coeffs: Vec<f64>,
    pub meta: KernelMeta,
}

fn nu_of(d: usize) -> f64 {
    d as f64 / 2.0 - 1.0
}

// shared per-dimension table of zeros of J_{nu+1}
fn zeros_for(d: usize, count: usize) -> Vec<f64> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<f64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    let entry = guard.entry(d).or_default();
    if entry.len() < count {
        *entry = bessel_zeros(nu_of(d) + 1.0, count.max(32).min(200));
    }
    entry[..count].to_vec()
}

/// A_nu(z) = Gamma(nu+1) (z/2)^{-nu} J_nu(z), with A_nu(0) = 1.
pub fn a_nu(nu: f64, z: f64) -> f64 {
    if z < 1e-4 {
        // leading series terms; |z| < 1e-4 keeps the tail below 1e-18
        let q = z * z / 4.0;
        return 1.0 - q / (nu + 1.0) + q * q / (2.0 * (nu + 1.0) * (nu + 2.0));
    }
    gamma(nu + 1.0) * (z / 2.0).powf(-nu) * bessel_j(nu, z)
}

/// The Dini basis element f_{d,n}(t) = A_nu(j_{nu+1,n} t).
pub fn f_dn(d: usize, n: usize, t: f64) -> f64 {
    assert!(n >= 1 && d >= 1);
    let j = zeros_for(d, n)[n - 1];
    a_nu(nu_of(d), j * t)
}

/// f'_{d,n}(t) = -j_{nu+1,n}^2 t A_{nu+1}(j_{nu+1,n} t) / d.
pub fn f_dn_deriv(d: usize, n: usize, t: f64) -> f64 {
    assert!(n >= 1 && d >= 1);
    let j = zeros_for(d, n)[n - 1];
    -j * j * t * a_nu(nu_of(d) + 1.0, j * t) / d as f64
}

/// Evaluate a [`KernelHD`]: a_0 + sum_n a_n f_{d,n}(t).
pub fn kernel_hd_eval(k: &KernelHD, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain {
            arg: "t",
            msg: format!("kernel argument must lie in [0,1], got {t}"),
        });
    }
    Ok(eval_coeffs(k.dim, &k.coeffs, t))
}

fn eval_coeffs(d: usize, coeffs: &[f64], t: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(n, a)| if n == 0 { *a } else { a * f_dn(d, n, t) })
        .sum()
}

fn deriv_coeffs(d: usize, coeffs: &[f64], t: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, a)| a * f_dn_deriv(d, n, t))
        .sum()
}

/// The candidate-optimal two-term kernel
/// k~(t) = 1 - (1-c)(1 - f_{d,1}(t)) / (1 - f_{d,1}(eps)).
pub fn k_tilde(d: usize, c: f64, eps: f64, t: f64) -> f64 {
    assert!(eps > 0.0 && eps < 1.0);
    1.0 - (1.0 - c) * (1.0 - f_dn(d, 1, t)) / (1.0 - f_dn(d, 1, eps))
}

/// E_d(c): the eps at which k~ sits exactly on the membership boundary
/// c = (f_{d,1}(eps) - f_{d,1}(1)) / (1 - f_{d,1}(1)); bisection to 1e-6.
pub fn e_d(d: usize, c: f64) -> f64 {
    assert!(c > 0.0 && c < 1.0);
    let f1 = f_dn(d, 1, 1.0);
    let boundary = |eps: f64| (f_dn(d, 1, eps) - f1) / (1.0 - f1) - c;
    let (mut lo, mut hi) = (1e-9, 1.0 - 1e-9);
    // boundary is decreasing in eps (f_{d,1} decreasing on [0,1])
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if boundary(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimize k(delta) over Dini kernels in dimension d with k(0)=1, k(eps)=c,
/// k(1) >= 0 and monotone decrease enforced on the grid {m/M}; M > N^2 per
/// the row-density requirement. Returns the kernel and its value at delta.
pub fn solve_optimal_kernel_hd(
    d: usize,
    c: f64,
    eps: f64,
    delta: f64,
    n_basis: usize,
    grid_m: usize,
) -> Result<(KernelHD, f64)> {
    if !(0.0 < eps && eps < delta && delta <= 1.0) {
        return Err(Error::Domain {
            arg: "eps/delta",
            msg: format!("need 0 < eps < delta <= 1, got {eps}, {delta}"),
        });
    }
    assert!(n_basis <= 150, "basis size capped at 150");
    if grid_m <= n_basis * n_basis {
        return Err(Error::Domain {
            arg: "grid_m",
            msg: format!("need M > N^2, got M={grid_m}, N={n_basis}"),
        });
    }
    let n = n_basis + 1;
    zeros_for(d, n_basis); // warm the zero table once
    let basis_at = |t: f64| -> Vec<f64> {
        (0..n)
            .map(|l| if l == 0 { 1.0 } else { f_dn(d, l, t) })
            .collect()
    };
    let deriv_row = |t: f64| -> Vec<f64> {
        (0..n)
            .map(|l| if l == 0 { 0.0 } else { f_dn_deriv(d, l, t) })
            .collect()
    };
    let neg_at_one: Vec<f64> = basis_at(1.0).iter().map(|v| -v).collect();
    let objective = basis_at(delta);
    let eq = (vec![vec![1.0; n], basis_at(eps)], vec![1.0, c]);

    // violations are hunted on the 10x finer grid the result is verified
    // against, so convergence here implies the final check passes
    let fine_m = 10 * grid_m;
    let full_grid: Vec<f64> = (1..=fine_m).map(|j| j as f64 / fine_m as f64).collect();
    let mut active: Vec<f64> = (1..=grid_m)
        .step_by((grid_m / 150).max(1))
        .map(|j| j as f64 / grid_m as f64)
        .collect();
    let mut coeffs = Vec::new();
    for _round in 0..80 {
        let mut rows = vec![neg_at_one.clone()];
        let mut rhs = vec![0.0];
        for &t in &active {
            rows.push(deriv_row(t));
            rhs.push(0.0);
        }
        let sol = lp_solve(&LinearProgram {
            objective: objective.clone(),
            eq_constraints: eq.clone(),
            ineq_constraints: (rows, rhs),
        });
        match sol.status {
            LpStatus::Optimal => coeffs = sol.x,
            LpStatus::Infeasible => {
                return Err(Error::Infeasible(format!(
                    "no Dini kernel with k({eps}) = {c} in dimension {d} at N = {n_basis}; \
                     note E_{d}({c}) = {:.4}",
                    e_d(d, c.clamp(1e-6, 1.0 - 1e-6))
                )))
            }
            LpStatus::Unbounded => unreachable!("objective bounded on the simplex"),
        }
        let mut violated: Vec<f64> = full_grid
            .iter()
            .copied()
            .filter(|&t| deriv_coeffs(d, &coeffs, t) > 1e-7 && !active.contains(&t))
            .collect();
        if violated.is_empty() {
            break;
        }
        // drop rows that are far from binding so the LP stays small
        active.retain(|&t| deriv_coeffs(d, &coeffs, t) > -1e-6);
        violated.sort_by(|a, b| {
            deriv_coeffs(d, &coeffs, *b)
                .partial_cmp(&deriv_coeffs(d, &coeffs, *a))
                .unwrap()
        });
        active.extend(violated.into_iter().take(60));
    }
    let coeffs: Vec<f64> = coeffs.iter().map(|&a| a.max(0.0)).collect();
    let mut prev = f64::INFINITY;
    for j in 0..=fine_m {
        let v = eval_coeffs(d, &coeffs, j as f64 / fine_m as f64);
        if v > prev + 1e-5 {
            return Err(Error::Infeasible(format!(
                "monotonicity violated near t = {} after row generation",
                j as f64 / fine_m as f64
            )));
        }
        prev = v;
    }
    let k_delta = eval_coeffs(d, &coeffs, delta);
    Ok((
        KernelHD {
            basis: "dini".into(),
            dim: d,
            coeffs,
            meta: KernelMeta { c, eps, delta },
        },
        k_delta,
    ))
}

/// kappa_infinity(c, eps, delta) = c^{(delta/eps)^2}: the dimension-free
/// optimum, attained by the Gaussian kernel.
pub fn kappa_infinity(c: f64, eps: f64, delta: f64) -> f64 {
    assert!(0.0 < c && c < 1.0 && 0.0 < eps && eps < delta);
    c.powf((delta / eps) * (delta / eps))
}
