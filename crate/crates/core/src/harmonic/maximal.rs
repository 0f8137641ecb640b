//! The noncentered maximal function `M(g)(n) = max_{I ∋ n} (#I)^{−1} Σ_I g`.
//!
//! With prefix sums `P_0 = 0, P_{j+1} = P_j + g(j)` the average over `[a, b]` is the
//! slope between the points `(a, P_a)` and `(b+1, P_{b+1})`, so both versions
//! below evaluate the very same quotient and differ only in which pairs they visit.

use crate::error::{domain, Result};
use crate::hypergroup::FiniteSeq;

fn prefix(g: &FiniteSeq) -> Result<Vec<f64>> {
    let v = g.values();
    if let Some(x) = v.iter().find(|x| !(**x >= 0.0)) {
        return domain(format!("maximal function needs g ≥ 0, found {x}"));
    }
    let mut p = vec![0.0; v.len() + 1];
    for (i, x) in v.iter().enumerate() {
        p[i + 1] = p[i] + x;
    }
    Ok(p)
}

#[inline]
fn slope(p: &[f64], a: usize, c: usize) -> f64 {
    (p[c] - p[a]) / (c - a) as f64
}

/// Exhaustive scan over all `O(N²)` intervals inside the support.
pub fn hl_maximal_brute(g: &FiniteSeq) -> Result<FiniteSeq> {
    let p = prefix(g)?;
    let len = p.len() - 1;
    // singletons are read directly so that M(g) ≥ g holds exactly
    let mut out = g.values().to_vec();
    for a in 0..len {
        let mut best_b = vec![0.0f64; 0];
        best_b.reserve(len - a);
        // best average over [a, b'] with b' ≥ b, filled right to left
        let mut run: f64 = 0.0;
        for c in (a + 1..=len).rev() {
            run = run.max(slope(&p, a, c));
            best_b.push(run);
        }
        best_b.reverse();
        for n in a..len {
            out[n] = out[n].max(best_b[n - a]);
        }
    }
    Ok(FiniteSeq::new(out))
}

/// Divide and conquer over the prefix-sum points with convex-hull tangent queries,
/// `O(N log² N)`. Intervals beyond the support only lower the average, so they are
/// never needed.
pub fn hl_maximal(g: &FiniteSeq) -> Result<FiniteSeq> {
    let p = prefix(g)?;
    let len = p.len() - 1;
    let mut out = g.values().to_vec();
    solve(&p, 0, len - 1, &mut out);
    Ok(FiniteSeq::new(out))
}

fn cross(p: &[f64], o: usize, a: usize, b: usize) -> f64 {
    let (ox, oy) = (o as f64, p[o]);
    (a as f64 - ox) * (p[b] - oy) - (p[a] - oy) * (b as f64 - ox)
}

/// Upper hull of points `lo..=hi` (x increasing).
fn upper_hull(p: &[f64], lo: usize, hi: usize) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::with_capacity(hi - lo + 1);
    for i in lo..=hi {
        while h.len() >= 2 && cross(p, h[h.len() - 2], h[h.len() - 1], i) >= 0.0 {
            h.pop();
        }
        h.push(i);
    }
    h
}

/// Lower hull of points `lo..=hi` (x increasing).
fn lower_hull(p: &[f64], lo: usize, hi: usize) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::with_capacity(hi - lo + 1);
    for i in lo..=hi {
        while h.len() >= 2 && cross(p, h[h.len() - 2], h[h.len() - 1], i) <= 0.0 {
            h.pop();
        }
        h.push(i);
    }
    h
}

/// Largest slope from `a` to a hull point when `a` lies left of the hull
/// (`left = true`), or from a hull point to `a` when `a` lies to the right.
/// Either way the slope is unimodal along the hull, so a binary search finds the peak.
fn tangent(p: &[f64], hull: &[usize], a: usize, left: bool) -> f64 {
    let s = |i: usize| if left { slope(p, a, hull[i]) } else { slope(p, hull[i], a) };
    let (mut lo, mut hi) = (0usize, hull.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if s(mid + 1) > s(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    // guard against rounding at plateaus
    let mut best = s(lo);
    if lo > 0 {
        best = best.max(s(lo - 1));
    }
    if lo + 1 < hull.len() {
        best = best.max(s(lo + 1));
    }
    best
}

/// Handles every interval `[a, b]` with `lo ≤ a ≤ b ≤ hi`.
fn solve(p: &[f64], lo: usize, hi: usize, out: &mut [f64]) {
    if hi <= lo {
        return;
    }
    if hi - lo < 16 {
        for a in lo..=hi {
            let mut run_from: Vec<f64> = Vec::with_capacity(hi + 1 - a);
            let mut run: f64 = 0.0;
            for c in (a + 1..=hi + 1).rev() {
                run = run.max(slope(p, a, c));
                run_from.push(run);
            }
            run_from.reverse();
            for n in a..=hi {
                out[n] = out[n].max(run_from[n - a]);
            }
        }
        return;
    }
    let mid = (lo + hi) / 2;
    solve(p, lo, mid, out);
    solve(p, mid + 1, hi, out);
    // crossing intervals: a ≤ mid < b, i.e. points a ∈ [lo, mid], c = b+1 ∈ [mid+2, hi+1]
    let right = upper_hull(p, mid + 2, hi + 1);
    let mut run: f64 = 0.0;
    for n in lo..=mid {
        run = run.max(tangent(p, &right, n, true));
        out[n] = out[n].max(run);
    }
    let left = lower_hull(p, lo, mid);
    let mut run: f64 = 0.0;
    for n in (mid + 1..=hi).rev() {
        let c = n + 1;
        if c >= mid + 2 {
            run = run.max(tangent(p, &left, c, false));
        }
        out[n] = out[n].max(run);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn delta_at_zero() {
        let mut v = vec![0.0; 40];
        v[0] = 1.0;
        let g = FiniteSeq::new(v);
        for m in [hl_maximal(&g).unwrap(), hl_maximal_brute(&g).unwrap()] {
            for n in 0..40 {
                assert!((m.get(n) - 1.0 / (n as f64 + 1.0)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constant_and_negative() {
        let g = FiniteSeq::new(vec![2.5; 33]);
        let m = hl_maximal(&g).unwrap();
        assert!(m.values().iter().all(|v| (v - 2.5).abs() < 1e-14));
        assert!(hl_maximal(&FiniteSeq::new(vec![1.0, -1.0])).is_err());
        assert!(hl_maximal_brute(&FiniteSeq::new(vec![1.0, -1.0])).is_err());
    }

    #[test]
    fn fast_matches_brute() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for len in [1usize, 2, 3, 17, 64, 257, 600] {
            for sparse in [false, true] {
                let v: Vec<f64> = (0..len)
                    .map(|_| {
                        let x: f64 = rng.gen();
                        if sparse && rng.gen::<f64>() < 0.9 { 0.0 } else { x }
                    })
                    .collect();
                let g = FiniteSeq::new(v);
                let a = hl_maximal(&g).unwrap();
                let b = hl_maximal_brute(&g).unwrap();
                for n in 0..len {
                    assert!((a.get(n) - b.get(n)).abs() <= 1e-14 * b.get(n).max(1e-300), "len {len} n {n}");
                    assert!(a.get(n) >= g.get(n));
                }
            }
        }
    }
}
