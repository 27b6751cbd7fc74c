//! Minimal dense linear-program solver: two-phase primal simplex with
//! Bland's rule. Sized for the kernel LPs (a few hundred variables, a few
//! thousand active rows after row generation); nothing sparse or clever.

use nalgebra::{DMatrix, DVector};

/// min c.x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq_constraints: (Vec<Vec<f64>>, Vec<f64>),
    pub ineq_constraints: (Vec<Vec<f64>>, Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// |primal - dual| objective at the returned basis; meaningful only for
    /// Optimal results.
    pub duality_gap: f64,
}

const PIVOT_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;

pub fn lp_solve(p: &LinearProgram) -> LpSolution {
    let n = p.objective.len();
    let (ref a_eq, ref b_eq) = p.eq_constraints;
    let (ref a_ub, ref b_ub) = p.ineq_constraints;
    debug_assert!(a_eq.iter().all(|r| r.len() == n));
    debug_assert!(a_ub.iter().all(|r| r.len() == n));
    let m = a_eq.len() + a_ub.len();
    let n_slack = a_ub.len();
    let total = n + n_slack;

    // standard form rows [A | slacks], b >= 0 after sign flips
    let mut a = vec![vec![0.0; total]; m];
    let mut b = vec![0.0; m];
    for (i, row) in a_eq.iter().enumerate() {
        a[i][..n].copy_from_slice(row);
        b[i] = b_eq[i];
    }
    for (j, row) in a_ub.iter().enumerate() {
        let i = a_eq.len() + j;
        a[i][..n].copy_from_slice(row);
        a[i][n + j] = 1.0;
        b[i] = b_ub[j];
    }
    for i in 0..m {
        if b[i] < 0.0 {
            for v in a[i].iter_mut() {
                *v = -*v;
            }
            b[i] = -b[i];
        }
    }

    // initial basis: the slack column where it has coefficient +1 (inequality
    // rows that kept their sign), an artificial variable otherwise
    let mut basis = vec![usize::MAX; m];
    let mut needs_art: Vec<usize> = Vec::new();
    for i in 0..m {
        let slack_ok = i >= a_eq.len() && a[i][n + (i - a_eq.len())] == 1.0;
        if slack_ok {
            basis[i] = n + (i - a_eq.len());
        } else {
            needs_art.push(i);
        }
    }
    let n_art = needs_art.len();
    // tableau columns: total vars + artificials + rhs
    let width = total + n_art + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        t[i][..total].copy_from_slice(&a[i]);
        t[i][width - 1] = b[i];
    }
    for (k, &i) in needs_art.iter().enumerate() {
        t[i][total + k] = 1.0;
        basis[i] = total + k;
    }
    if n_art > 0 {
        // phase-1 objective row: minimize sum of artificials
        for &i in &needs_art {
            for j in 0..width {
                t[m][j] -= t[i][j];
            }
        }
        for j in total..total + n_art {
            t[m][j] = 0.0;
        }
        if !simplex_iterate(&mut t, &mut basis, total) {
            // phase 1 cannot be unbounded
            unreachable!("phase 1 unbounded");
        }
        if -t[m][width - 1] > FEAS_TOL {
            return LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                objective_value: f64::NAN,
                duality_gap: f64::NAN,
            };
        }
    }
    // drive remaining artificials out of the basis where possible
    for i in 0..m {
        if basis[i] >= total {
            if let Some(j) = (0..total).find(|&j| t[i][j].abs() > PIVOT_TOL) {
                pivot(&mut t, i, j);
                basis[i] = j;
            }
        }
    }

    // phase 2: rebuild the objective row over structural + slack columns
    for j in 0..width {
        t[m][j] = 0.0;
    }
    for j in 0..n {
        t[m][j] = p.objective[j];
    }
    for i in 0..m {
        if basis[i] < total {
            let c = t[m][basis[i]];
            if c != 0.0 {
                for j in 0..width {
                    t[m][j] -= c * t[i][j];
                }
            }
        }
    }
    // forbid artificials from re-entering
    for j in total..total + n_art {
        t[m][j] = f64::INFINITY;
    }
    if !simplex_iterate(&mut t, &mut basis, total) {
        return LpSolution {
            status: LpStatus::Unbounded,
            x: vec![0.0; n],
            objective_value: f64::NEG_INFINITY,
            duality_gap: f64::NAN,
        };
    }

    let mut x = vec![0.0; total];
    for i in 0..m {
        if basis[i] < total {
            x[basis[i]] = t[i][width - 1];
        }
    }
    let obj: f64 = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    let gap = duality_gap(&a, &b, p, &basis, obj, n, total, m);
    LpSolution {
        status: LpStatus::Optimal,
        x: x[..n].to_vec(),
        objective_value: obj,
        duality_gap: gap,
    }
}

// Simplex iteration over columns [0, limit); returns false on unbounded.
// Uses Dantzig's rule (most negative reduced cost) for speed, permanently
// falling back to Bland's rule if a long degenerate streak suggests cycling.
fn simplex_iterate(t: &mut [Vec<f64>], basis: &mut [usize], limit: usize) -> bool {
    let m = basis.len();
    let width = t[0].len();
    let mut degenerate_streak = 0usize;
    let mut bland = false;
    loop {
        if degenerate_streak > 2 * (m + limit) {
            bland = true;
        }
        let enter = if bland {
            // smallest index with negative reduced cost
            (0..limit).find(|&j| t[m][j] < -FEAS_TOL)
        } else {
            let mut best_j = None;
            let mut best_v = -FEAS_TOL;
            for j in 0..limit {
                if t[m][j] < best_v {
                    best_v = t[m][j];
                    best_j = Some(j);
                }
            }
            best_j
        };
        let Some(enter) = enter else {
            return true;
        };
        // leaving: min ratio, ties to the smallest basis variable (Bland)
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let coef = t[i][enter];
            if coef > PIVOT_TOL {
                let ratio = t[i][width - 1] / coef;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best - 1e-12 || (ratio < best + 1e-12 && basis[i] < basis[l])
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(leave) = leave else {
            return false;
        };
        if best <= FEAS_TOL {
            degenerate_streak += 1;
        } else {
            degenerate_streak = 0;
        }
        pivot(t, leave, enter);
        basis[leave] = enter;
    }
}

fn pivot(t: &mut [Vec<f64>], row: usize, col: usize) {
    let width = t[0].len();
    let piv = t[row][col];
    for j in 0..width {
        if t[row][j].is_finite() {
            t[row][j] /= piv;
        }
    }
    for i in 0..t.len() {
        if i != row {
            let f = t[i][col];
            if f != 0.0 && f.is_finite() {
                for j in 0..width {
                    if t[row][j] != 0.0 && t[i][j].is_finite() {
                        t[i][j] -= f * t[row][j];
                    }
                }
            }
        }
    }
}

// y = c_B B^{-1} from the final basis; gap = |c.x - y.b|.
#[allow(clippy::too_many_arguments)]
fn duality_gap(
    a: &[Vec<f64>],
    b: &[f64],
    p: &LinearProgram,
    basis: &[usize],
    primal_obj: f64,
    n: usize,
    total: usize,
    m: usize,
) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let mut bt = DMatrix::<f64>::zeros(m, m);
    let mut cb = DVector::<f64>::zeros(m);
    for (i, &col) in basis.iter().enumerate() {
        if col >= total {
            return f64::NAN; // artificial left in basis; no clean certificate
        }
        for r in 0..m {
            bt[(i, r)] = a[r][col];
        }
        cb[i] = if col < n { p.objective[col] } else { 0.0 };
    }
    match bt.lu().solve(&cb) {
        Some(y) => {
            let dual: f64 = (0..m).map(|r| y[r] * b[r]).sum();
            (primal_obj - dual).abs()
        }
        None => f64::NAN,
    }
}
