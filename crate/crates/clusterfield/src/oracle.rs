//! Desk-scale brute-force oracles for the two promise cases.
//!
//! These are exact but exponential searches, capped at 25 points (and k1 <= 4
//! for the covering oracle). They exist to validate the probabilistic decision
//! algorithm and the covering lemma on small instances.

use nalgebra::{DMatrix, DVector};

use crate::points::{dist, PointSet};
use crate::{Error, Result};

const MAX_POINTS: usize = 25;
const MAX_K1: usize = 4;
const GEOM_TOL: f64 = 1e-9;

/// True iff `S` contains `k2` points with pairwise distances >= `delta`
/// (clique search on the threshold graph).
pub fn oracle_is_far(s: &PointSet, k2: usize, delta: f64) -> Result<bool> {
    let n = s.len();
    if n > MAX_POINTS {
        return Err(Error::OracleScaleExceeded(format!(
            "{n} points > {MAX_POINTS}"
        )));
    }
    if k2 == 0 {
        return Ok(true);
    }
    if k2 > n {
        return Ok(false);
    }
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i != j && s.dist(i, j) >= delta).collect())
        .collect();
    let mut cand: Vec<usize> = (0..n).collect();
    Ok(clique_search(&adj, &mut Vec::new(), &mut cand, k2))
}

fn clique_search(adj: &[Vec<bool>], clique: &mut Vec<usize>, cand: &[usize], k2: usize) -> bool {
    if clique.len() >= k2 {
        return true;
    }
    if clique.len() + cand.len() < k2 {
        return false;
    }
    for (i, &v) in cand.iter().enumerate() {
        clique.push(v);
        let next: Vec<usize> = cand[i + 1..]
            .iter()
            .copied()
            .filter(|&u| adj[v][u])
            .collect();
        if clique_search(adj, clique, &next, k2) {
            return true;
        }
        clique.pop();
    }
    false
}

/// True iff the points can be partitioned into `k1` groups, each enclosable by
/// a ball of radius `eps`. Ball centers are unconstrained: each candidate
/// group is checked with an exact minimum enclosing ball.
pub fn oracle_is_clusterable(s: &PointSet, k1: usize, eps: f64) -> Result<bool> {
    let n = s.len();
    if n > MAX_POINTS {
        return Err(Error::OracleScaleExceeded(format!(
            "{n} points > {MAX_POINTS}"
        )));
    }
    if k1 > MAX_K1 {
        return Err(Error::OracleScaleExceeded(format!("k1={k1} > {MAX_K1}")));
    }
    if n == 0 {
        return Ok(true);
    }
    let pts: Vec<&[f64]> = s.points().iter().map(|p| p.as_slice()).collect();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    Ok(assign(&pts, 0, k1, eps, &mut groups))
}

fn assign(pts: &[&[f64]], next: usize, k1: usize, eps: f64, groups: &mut Vec<Vec<usize>>) -> bool {
    if next == pts.len() {
        return true;
    }
    for g in 0..groups.len() {
        // diameter prune, then exact MEB on the extended group
        if groups[g]
            .iter()
            .all(|&j| dist(pts[next], pts[j]) <= 2.0 * eps + GEOM_TOL)
        {
            groups[g].push(next);
            let members: Vec<&[f64]> = groups[g].iter().map(|&j| pts[j]).collect();
            let fits = min_enclosing_ball(&members).1 <= eps + GEOM_TOL;
            if fits && assign(pts, next + 1, k1, eps, groups) {
                return true;
            }
            groups[g].pop();
        }
    }
    if groups.len() < k1 {
        groups.push(vec![next]);
        if assign(pts, next + 1, k1, eps, groups) {
            return true;
        }
        groups.pop();
    }
    false
}

/// Exact minimum enclosing ball (Welzl's algorithm, any dimension).
/// Returns (center, radius). Panics on an empty input.
pub fn min_enclosing_ball(pts: &[&[f64]]) -> (Vec<f64>, f64) {
    assert!(!pts.is_empty());
    let dim = pts[0].len();
    let mut order: Vec<&[f64]> = pts.to_vec();
    // deterministic shuffle to avoid adversarial orders
    let mut state = 0x9e3779b97f4a7c15u64;
    for i in (1..order.len()).rev() {
        state = crate::rng::mix64(state);
        order.swap(i, (state % (i as u64 + 1)) as usize);
    }
    let mut boundary: Vec<&[f64]> = Vec::new();
    let n = order.len();
    welzl(&mut order, n, &mut boundary, dim)
}

fn welzl<'a>(
    pts: &mut [&'a [f64]],
    n: usize,
    boundary: &mut Vec<&'a [f64]>,
    dim: usize,
) -> (Vec<f64>, f64) {
    if n == 0 || boundary.len() == dim + 1 {
        return ball_from_boundary(boundary, dim);
    }
    let p = pts[n - 1];
    let (c, r) = welzl(pts, n - 1, boundary, dim);
    if dist(p, &c) <= r + GEOM_TOL {
        return (c, r);
    }
    boundary.push(p);
    let res = welzl(pts, n - 1, boundary, dim);
    boundary.pop();
    // move-to-front
    for i in (1..n).rev() {
        pts.swap(i, i - 1);
    }
    res
}

// Smallest ball with all boundary points on its surface: circumsphere of the
// affine hull, via a (least-squares) solve of 2 V^T V x = rhs.
fn ball_from_boundary(boundary: &[&[f64]], dim: usize) -> (Vec<f64>, f64) {
    match boundary.len() {
        0 => (vec![0.0; dim], -1.0),
        1 => (boundary[0].to_vec(), 0.0),
        m => {
            let p0 = boundary[0];
            let rows = m - 1;
            let mut vt = DMatrix::<f64>::zeros(rows, dim);
            let mut rhs = DVector::<f64>::zeros(rows);
            for i in 1..m {
                let mut norm2 = 0.0;
                for j in 0..dim {
                    let d = boundary[i][j] - p0[j];
                    vt[(i - 1, j)] = d;
                    norm2 += d * d;
                }
                rhs[i - 1] = 0.5 * norm2;
            }
            let gram = &vt * vt.transpose();
            let sol = gram
                .clone()
                .svd(true, true)
                .solve(&rhs, 1e-12)
                .unwrap_or_else(|_| DVector::zeros(rows));
            let mut center = p0.to_vec();
            for i in 0..rows {
                for j in 0..dim {
                    center[j] += sol[i] * vt[(i, j)];
                }
            }
            let r = boundary
                .iter()
                .map(|b| dist(b, &center))
                .fold(0.0f64, f64::max);
            (center, r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn set(points: Vec<Vec<f64>>) -> PointSet {
        PointSet::new(points).unwrap()
    }

    #[test]
    fn far_collinear_examples() {
        let s = set(vec![vec![0.0], vec![0.5], vec![1.0]]);
        assert!(oracle_is_far(&s, 2, 0.4).unwrap());
        assert!(!oracle_is_far(&s, 3, 0.6).unwrap());
    }

    #[test]
    fn far_scale_cap() {
        let s = set((0..26).map(|i| vec![i as f64]).collect());
        assert!(matches!(
            oracle_is_far(&s, 2, 0.5),
            Err(Error::OracleScaleExceeded(_))
        ));
    }

    #[test]
    fn clusterable_two_tight_pairs() {
        let s = set(vec![vec![0.0], vec![0.01], vec![1.0], vec![1.01]]);
        assert!(oracle_is_clusterable(&s, 2, 0.005).unwrap());
        assert!(!oracle_is_clusterable(&s, 1, 0.005).unwrap());
    }

    #[test]
    fn meb_basic_shapes() {
        // two points: midpoint, half distance
        let (c, r) = min_enclosing_ball(&[&[0.0, 0.0], &[2.0, 0.0]]);
        assert!((c[0] - 1.0).abs() < 1e-9 && c[1].abs() < 1e-9);
        assert!((r - 1.0).abs() < 1e-9);
        // equilateral triangle, side 1: circumradius 1/sqrt(3)
        let h = 3f64.sqrt() / 2.0;
        let (_, r) = min_enclosing_ball(&[&[0.0, 0.0], &[1.0, 0.0], &[0.5, h]]);
        assert!((r - 1.0 / 3f64.sqrt()).abs() < 1e-9);
        // obtuse triangle: ball spanned by the two far points only
        let (c, r) = min_enclosing_ball(&[&[0.0, 0.0], &[4.0, 0.0], &[2.0, 0.1]]);
        assert!((r - 2.0).abs() < 1e-6);
        assert!((c[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn meb_collinear_degenerate() {
        let (_, r) = min_enclosing_ball(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0], &[0.5, 0.5]]);
        assert!((r - 2f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn meb_contains_all_points_random() {
        let mut rng = crate::rng::seeded_rng(11);
        for dim in [1usize, 2, 3, 5] {
            let pts: Vec<Vec<f64>> = (0..15)
                .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
            let (c, r) = min_enclosing_ball(&refs);
            for p in &refs {
                assert!(dist(p, &c) <= r + 1e-8);
            }
            // not larger than the trivial centroid ball
            let centroid: Vec<f64> = (0..dim)
                .map(|j| refs.iter().map(|p| p[j]).sum::<f64>() / refs.len() as f64)
                .collect();
            let rc = refs.iter().map(|p| dist(p, &centroid)).fold(0.0, f64::max);
            assert!(r <= rc + 1e-8);
        }
    }

    // independent oracle: enumerate all k2-subsets directly
    fn far_by_enumeration(s: &PointSet, k2: usize, delta: f64) -> bool {
        let n = s.len();
        let mut idx: Vec<usize> = Vec::new();
        fn rec(s: &PointSet, k2: usize, delta: f64, start: usize, idx: &mut Vec<usize>) -> bool {
            if idx.len() == k2 {
                return idx
                    .iter()
                    .enumerate()
                    .all(|(a, &i)| idx[a + 1..].iter().all(|&j| s.dist(i, j) >= delta));
            }
            for v in start..s.len() {
                idx.push(v);
                if rec(s, k2, delta, v + 1, idx) {
                    return true;
                }
                idx.pop();
            }
            false
        }
        let _ = n;
        rec(s, k2, delta, 0, &mut idx)
    }

    #[test]
    fn far_matches_subset_enumeration() {
        let mut rng = crate::rng::seeded_rng(3);
        for _ in 0..30 {
            let pts: Vec<Vec<f64>> = (0..10)
                .map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
                .collect();
            let s = set(pts);
            for (k2, delta) in [(2, 0.5), (3, 0.4), (4, 0.35)] {
                assert_eq!(
                    oracle_is_far(&s, k2, delta).unwrap(),
                    far_by_enumeration(&s, k2, delta),
                    "k2={k2} delta={delta}"
                );
            }
        }
    }

    // independent oracle: enumerate all partitions into <= k1 parts
    fn clusterable_by_partitions(s: &PointSet, k1: usize, eps: f64) -> bool {
        let n = s.len();
        let pts: Vec<&[f64]> = s.points().iter().map(|p| p.as_slice()).collect();
        let mut labels = vec![0usize; n];
        fn rec(pts: &[&[f64]], labels: &mut Vec<usize>, i: usize, used: usize, k1: usize, eps: f64) -> bool {
            if i == pts.len() {
                for g in 0..used {
                    let members: Vec<&[f64]> = (0..pts.len())
                        .filter(|&j| labels[j] == g)
                        .map(|j| pts[j])
                        .collect();
                    if !members.is_empty() && min_enclosing_ball(&members).1 > eps + 1e-9 {
                        return false;
                    }
                }
                return true;
            }
            for g in 0..used.min(k1) {
                labels[i] = g;
                if rec(pts, labels, i + 1, used, k1, eps) {
                    return true;
                }
            }
            if used < k1 {
                labels[i] = used;
                if rec(pts, labels, i + 1, used + 1, k1, eps) {
                    return true;
                }
            }
            false
        }
        rec(&pts, &mut labels, 0, 0, k1, eps)
    }

    #[test]
    fn clusterable_matches_partition_enumeration() {
        let mut rng = crate::rng::seeded_rng(5);
        for trial in 0..15 {
            let spread = if trial % 2 == 0 { 0.3 } else { 1.0 };
            let pts: Vec<Vec<f64>> = (0..8)
                .map(|_| {
                    vec![
                        rng.gen_range(0.0..spread),
                        rng.gen_range(0.0..spread),
                    ]
                })
                .collect();
            let s = set(pts);
            for (k1, eps) in [(1, 0.3), (2, 0.2), (3, 0.15)] {
                assert_eq!(
                    oracle_is_clusterable(&s, k1, eps).unwrap(),
                    clusterable_by_partitions(&s, k1, eps),
                    "k1={k1} eps={eps} trial={trial}"
                );
            }
        }
    }

    #[test]
    fn covering_lemma_desk_scale_1d() {
        // if there are no ell+1 delta-separated points, ceil(ell*c_d*(delta/eps)^d)
        // eps-balls always cover (1D instances, c_d = 1)
        let mut rng = crate::rng::seeded_rng(8);
        for _ in 0..20 {
            let pts: Vec<Vec<f64>> = (0..9).map(|_| vec![rng.gen_range(0.0..1.0)]).collect();
            let s = set(pts);
            let (eps, delta) = (0.15, 0.3);
            for ell in 1..3usize {
                if !oracle_is_far(&s, ell + 1, delta).unwrap() {
                    let k = crate::promise::covering_bound(ell, delta, eps, 1, 1.0).ceil() as usize;
                    if k <= 4 {
                        assert!(oracle_is_clusterable(&s, k, eps).unwrap());
                    }
                }
            }
        }
    }
}
