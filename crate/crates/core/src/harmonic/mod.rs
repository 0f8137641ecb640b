//! Weighted `ℓ^p` tools on `ℕ` and the numeric Calderón–Zygmund certifier:
//! A_p constants, Hardy operators, the noncentered maximal function, the
//! local/global window split and Hörmander-type sums.

mod certify;
mod kernel;
mod maximal;

pub use certify::{cz_certify, cz_certify_scaling, row_set, CzConstants, CzScaling, CertifyOptions};
pub use kernel::{local_global_split, hardy_domination, KernelMatrix, KernelSource, SampleNorm};
pub use maximal::{hl_maximal, hl_maximal_brute};

use crate::error::{domain, Result};
use crate::hypergroup::FiniteSeq;
use serde::{Deserialize, Serialize};

/// A strictly positive weight `w(0..=N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightSeq {
    values: Vec<f64>,
}

impl WeightSeq {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return domain("weight needs at least one value");
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return domain(format!("weights must be finite and > 0, found {v}"));
        }
        Ok(Self { values })
    }

    /// `w(n) = (n+1)^a` for `n ≤ N`.
    pub fn power(a: f64, n: usize) -> Self {
        Self { values: (0..=n).map(|k| (k as f64 + 1.0).powf(a)).collect() }
    }

    pub fn constant(n: usize) -> Self {
        Self { values: vec![1.0; n + 1] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.values[n]
    }
}

/// A discrete interval `[a, b] ∩ ℕ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntervalN {
    pub a: usize,
    pub b: usize,
}

impl IntervalN {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a > b {
            return domain(format!("interval needs a ≤ b, got [{a}, {b}]"));
        }
        Ok(Self { a, b })
    }

    pub fn len(&self) -> usize {
        self.b - self.a + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: usize) -> bool {
        self.a <= n && n <= self.b
    }

    /// `2I = [a − (b−a)/2, b + (b−a)/2] ∩ ℕ`, endpoints rounded outward.
    pub fn dilate2(&self) -> Self {
        let half = (self.b - self.a).div_ceil(2);
        Self { a: self.a.saturating_sub(half), b: self.b + half }
    }
}

/// The window `W_n = [⌈n/2⌉, ⌊3n/2⌋]`.
pub fn window(n: usize) -> IntervalN {
    IntervalN { a: n.div_ceil(2), b: (3 * n) / 2 }
}

/// Largest value over windows `[n, m] ⊆ [0, N]` of
/// `(#I)^{−p} (Σ_I w)(Σ_I w^{−1/(p−1)})^{p−1}` for `p > 1`, or
/// `(#I)^{−1}(Σ_I w) max_I w^{−1}` for `p = 1`. Exhaustive, `O(N²)`.
pub fn ap_constant(w: &WeightSeq, p: f64, n_max: usize) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("A_p needs 1 ≤ p < ∞, got {p}"));
    }
    if n_max >= w.len() {
        return domain(format!("N = {n_max} exceeds the weight length {}", w.len()));
    }
    let vals = &w.values[..=n_max];
    let mut pre_w = vec![0.0; vals.len() + 1];
    for (i, v) in vals.iter().enumerate() {
        pre_w[i + 1] = pre_w[i] + v;
    }
    let mut best: f64 = 0.0;
    if p == 1.0 {
        for a in 0..vals.len() {
            let mut inv_max: f64 = 0.0;
            for b in a..vals.len() {
                inv_max = inv_max.max(1.0 / vals[b]);
                let len = (b - a + 1) as f64;
                best = best.max((pre_w[b + 1] - pre_w[a]) / len * inv_max);
            }
        }
        return Ok(best);
    }
    let e = -1.0 / (p - 1.0);
    let mut pre_d = vec![0.0; vals.len() + 1];
    for (i, v) in vals.iter().enumerate() {
        pre_d[i + 1] = pre_d[i] + v.powf(e);
    }
    for a in 0..vals.len() {
        for b in a..vals.len() {
            let len = (b - a + 1) as f64;
            let sw = (pre_w[b + 1] - pre_w[a]) / len;
            let sd = (pre_d[b + 1] - pre_d[a]) / len;
            best = best.max(sw * sd.powf(p - 1.0));
        }
    }
    Ok(best)
}

/// `(Σ |f(n)|^p w(n))^{1/p}`, or `max |f|` at `p = ∞`. Indices beyond the weight
/// are not counted.
pub fn weighted_norm(f: &FiniteSeq, w: &WeightSeq, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return domain(format!("weighted norm needs p ≥ 1, got {p}"));
    }
    let n = f.values().len().min(w.len());
    if p.is_infinite() {
        return Ok(f.values()[..n].iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let s: f64 = (0..n).map(|i| f.get(i).abs().powf(p) * w.get(i)).sum();
    Ok(s.powf(1.0 / p))
}

/// `sup_{s>0} s · w({n : |f(n)| > s})`, evaluated at the level jumps: for sorted
/// distinct levels `v_1 > v_2 > …` the supremum is `max_j v_j · w({|f| ≥ v_j})`.
pub fn weak_quasinorm(f: &FiniteSeq, w: &WeightSeq) -> f64 {
    let n = f.values().len().min(w.len());
    let mut pairs: Vec<(f64, f64)> = (0..n).map(|i| (f.get(i).abs(), w.get(i))).filter(|p| p.0 > 0.0).collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut best: f64 = 0.0;
    let mut mass = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let level = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == level {
            mass += pairs[i].1;
            i += 1;
        }
        best = best.max(level * mass);
    }
    best
}

/// `H_0(g)(n) = n^{−1} Σ_{m≤n} g(m)` for `1 ≤ n ≤ N`; index 0 is left at 0.
pub fn hardy0(g: &FiniteSeq) -> FiniteSeq {
    let mut acc = 0.0;
    let values = g
        .values()
        .iter()
        .enumerate()
        .map(|(n, v)| {
            acc += v;
            if n == 0 {
                0.0
            } else {
                acc / n as f64
            }
        })
        .collect();
    FiniteSeq::new(values)
}

/// `H_∞(g)(n) = Σ_{m≥n} g(m)/m` for `n ≥ 1`; index 0 is left at 0.
pub fn hardy_inf(g: &FiniteSeq) -> FiniteSeq {
    let v = g.values();
    let mut out = vec![0.0; v.len()];
    let mut acc = 0.0;
    for n in (1..v.len()).rev() {
        acc += v[n] / n as f64;
        out[n] = acc;
    }
    FiniteSeq::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_weight_is_one() {
        for p in [1.0, 1.5, 2.0, 3.0] {
            let c = ap_constant(&WeightSeq::constant(50), p, 50).unwrap();
            assert!((c - 1.0).abs() < 1e-14);
        }
        assert!(ap_constant(&WeightSeq::constant(5), 0.5, 5).is_err());
    }

    #[test]
    fn ap_monotone_in_n() {
        let w = WeightSeq::power(0.7, 200);
        let mut last = 0.0;
        for n in [10, 50, 100, 200] {
            let c = ap_constant(&w, 2.0, n).unwrap();
            assert!(c >= last);
            last = c;
        }
    }

    #[test]
    fn dilation_and_window() {
        let i = IntervalN::new(10, 13).unwrap();
        assert_eq!(i.dilate2(), IntervalN { a: 8, b: 15 });
        assert_eq!(IntervalN::new(1, 5).unwrap().dilate2(), IntervalN { a: 0, b: 7 });
        assert_eq!(window(5), IntervalN { a: 3, b: 7 });
        assert_eq!(window(0), IntervalN { a: 0, b: 0 });
    }

    #[test]
    fn norms() {
        let f = FiniteSeq::new(vec![3.0, -4.0]);
        let one = WeightSeq::constant(1);
        assert!((weighted_norm(&f, &one, 2.0).unwrap() - 5.0).abs() < 1e-15);
        assert_eq!(weighted_norm(&f, &one, f64::INFINITY).unwrap(), 4.0);
        let w = WeightSeq::new(vec![2.0, 7.0]).unwrap();
        let d = FiniteSeq::delta(0).scaled(3.0);
        assert!((weighted_norm(&d, &w, 3.0).unwrap() - 2f64.powf(1.0 / 3.0) * 3.0).abs() < 1e-14);
        // levels 4 (mass 1) and 3 (mass 2): max(4, 6)
        assert_eq!(weak_quasinorm(&f, &one), 6.0);
        assert!(weak_quasinorm(&f, &w) <= weighted_norm(&f, &w, 1.0).unwrap());
    }

    #[test]
    fn hardy_examples() {
        let g = FiniteSeq::new(vec![1.0; 6]);
        let h = hardy0(&g);
        for n in 1..=5 {
            assert!((h.get(n) - (n as f64 + 1.0) / n as f64).abs() < 1e-15);
        }
        let h = hardy_inf(&FiniteSeq::delta(4));
        for n in 1..=4 {
            assert_eq!(h.get(n), 0.25);
        }
    }
}
