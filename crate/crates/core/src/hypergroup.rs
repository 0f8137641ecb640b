//! The hypergroup on `ℕ` attached to ultraspherical functions: linearization
//! coefficients, λ-translation, `#_λ` convolution and the λ-Laplacian.

use crate::error::{domain, Error, Result};
use crate::specfun::gamma::{lgamma, ln_factorial, ln_poch};
use crate::specfun::quadrature::gauss_jacobi_cached;
use crate::specfun::{ln_weight_w, OrderParam, OrthoBasis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use std::io::{Read, Write};

/// A real sequence on `ℕ` with explicit finite support `0..=N`; zero beyond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FiniteSeq {
    values: Vec<f64>,
}

impl FiniteSeq {
    /// Wraps `values`; an empty vector becomes the zero sequence on `{0}`.
    pub fn new(mut values: Vec<f64>) -> Self {
        if values.is_empty() {
            values.push(0.0);
        }
        Self { values }
    }

    pub fn zeros(support: usize) -> Self {
        Self { values: vec![0.0; support + 1] }
    }

    /// `δ_k`.
    pub fn delta(k: usize) -> Self {
        let mut s = Self::zeros(k);
        s.values[k] = 1.0;
        s
    }

    /// Largest index that may be non-zero.
    pub fn support(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `f(n)`, zero outside the support.
    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.values.get(n).copied().unwrap_or(0.0)
    }

    /// Restriction to `0..=n` (zero-padded if the support is shorter).
    pub fn truncated(&self, n: usize) -> Self {
        let mut v = self.values.clone();
        v.resize(n + 1, 0.0);
        Self { values: v }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * c).collect() }
    }

    /// `self − other` on the union of supports.
    pub fn sub(&self, other: &Self) -> Self {
        let n = self.support().max(other.support());
        Self { values: (0..=n).map(|i| self.get(i) - other.get(i)).collect() }
    }

    /// `ℓ²` norm, scaled to avoid overflow.
    pub fn norm2(&self) -> f64 {
        norm2(&self.values)
    }

    /// `ℓ^p` norm for `p ∈ [1, ∞]`.
    pub fn norm_p(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return domain(format!("ℓ^p norm needs p >= 1, got {p}"));
        }
        let max = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if p.is_infinite() || max == 0.0 {
            return Ok(max);
        }
        let s: f64 = self.values.iter().map(|v| (v.abs() / max).powf(p)).sum();
        Ok(max * s.powf(1.0 / p))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    /// Writes `index,value` rows without a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([i.to_string(), format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `index,value` rows (no header); unspecified indices are zero.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
        let mut pairs = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Config(format!("sequence rows need 2 fields, got {}", rec.len())));
            }
            let i: usize = rec[0]
                .parse()
                .map_err(|e| Error::Config(format!("bad index {:?}: {e}", &rec[0])))?;
            let v: f64 = rec[1]
                .parse()
                .map_err(|e| Error::Config(format!("bad value {:?}: {e}", &rec[1])))?;
            pairs.push((i, v));
        }
        let n = pairs.iter().map(|p| p.0).max().unwrap_or(0);
        let mut values = vec![0.0; n + 1];
        for (i, v) in pairs {
            values[i] = v;
        }
        Ok(Self { values })
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 || !max.is_finite() {
        return max;
    }
    let s: f64 = v.iter().map(|x| (x / max) * (x / max)).sum();
    max * s.sqrt()
}

/// A triple `(n, m, k)` with `σ = (n+m+k)/2` when the triple is admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TriIndex {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub sigma: Option<usize>,
}

impl TriIndex {
    pub fn new(n: usize, m: usize, k: usize) -> Self {
        let s = n + m + k;
        let ok = s % 2 == 0 && n.abs_diff(m) <= k && k <= n + m;
        Self { n, m, k, sigma: ok.then_some(s / 2) }
    }
}

/// `c_λ(n,m,k)` from the closed form, in log domain.
pub fn linearization_c(order: OrderParam, n: usize, m: usize, k: usize) -> f64 {
    let Some(s) = TriIndex::new(n, m, k).sigma else { return 0.0 };
    let l = order.value();
    let half_w = 0.5 * (ln_weight_w(order, n) + ln_weight_w(order, m) + ln_weight_w(order, k));
    let fact = |j: usize| ln_factorial(j) - ln_poch(2.0 * l, j);
    let poch = |j: usize| ln_poch(l, j) - ln_factorial(j);
    let sf = s as f64;
    let ln_c = half_w
        + fact(n)
        + fact(m)
        + fact(k)
        + poch(s - n)
        + poch(s - m)
        + poch(s - k)
        + (1.0 - 2.0 * l) * LN_2
        + PI.ln()
        + lgamma(sf + 2.0 * l)
        - lgamma(l)
        - lgamma(sf + l + 1.0);
    ln_c.exp()
}

/// `c_λ(n,m,k) = ∫ p_n p_m p_k (1−x²)^{λ−½} dx` on a Gauss–Jacobi rule exact for the
/// polynomial part.
pub fn linearization_c_oracle(order: OrderParam, n: usize, m: usize, k: usize) -> Result<f64> {
    let q = (n + m + k).div_ceil(2) + 1;
    let rule = gauss_jacobi_cached(order.value() - 0.5, q)?;
    let top = n.max(m).max(k);
    let basis = OrthoBasis::new(order, top);
    let mut p = vec![0.0; top + 1];
    // Neumaier summation: the terms cancel to ~0 when the triangle fails.
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        basis.eval_p_into(x, &mut p);
        let term = w * p[n] * p[m] * p[k];
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
    }
    Ok(sum + comp)
}

/// Log-factor tables for evaluating many `c_λ(n,m,k)` with indices up to `max_index`
/// at the cost of one `exp` each. Tables are built from running sums of logs of
/// ratios close to 1, so they stay accurate for large indices.
#[derive(Debug, Clone)]
pub struct LinearizationTable {
    order: OrderParam,
    half_w: Vec<f64>,
    fact: Vec<f64>,
    poch: Vec<f64>,
    sigma_part: Vec<f64>,
}

impl LinearizationTable {
    pub fn new(order: OrderParam, max_index: usize) -> Self {
        let l = order.value();
        let n = max_index;
        let sig_max = (3 * n) / 2 + 1;
        let mut half_w = Vec::with_capacity(n + 1);
        let mut fact = Vec::with_capacity(n + 1);
        let mut poch = Vec::with_capacity(sig_max + 1);
        let (mut lw, mut lf, mut lp) = (ln_weight_w(order, 0), 0.0, 0.0);
        for j in 0..=sig_max {
            let jf = j as f64;
            if j > 0 {
                // w_j / w_{j−1} = (2λ+j−1)(j+λ) / (j(j−1+λ))
                lw += ((2.0 * l - 1.0) / jf).ln_1p() + (1.0 / (jf - 1.0 + l)).ln_1p();
                lf -= ((2.0 * l - 1.0) / jf).ln_1p();
                lp += ((l - 1.0) / jf).ln_1p();
            }
            if j <= n {
                half_w.push(0.5 * lw);
                fact.push(lf);
            }
            poch.push(lp);
        }
        let mut sigma_part = Vec::with_capacity(sig_max + 1);
        let mut a = (1.0 - 2.0 * l) * LN_2 + PI.ln() + lgamma(2.0 * l) - lgamma(l) - lgamma(l + 1.0);
        for s in 0..=sig_max {
            sigma_part.push(a);
            let sf = s as f64;
            a += ((l - 1.0) / (sf + l + 1.0)).ln_1p();
        }
        Self { order, half_w, fact, poch, sigma_part }
    }

    pub fn order(&self) -> OrderParam {
        self.order
    }

    pub fn max_index(&self) -> usize {
        self.half_w.len() - 1
    }

    /// `c_λ(n,m,k)`; all indices must be `≤ max_index`.
    #[inline]
    pub fn c(&self, n: usize, m: usize, k: usize) -> f64 {
        let s = n + m + k;
        if s % 2 == 1 || k < n.abs_diff(m) || k > n + m {
            return 0.0;
        }
        let s = s / 2;
        (self.half_w[n]
            + self.half_w[m]
            + self.half_w[k]
            + self.fact[n]
            + self.fact[m]
            + self.fact[k]
            + self.poch[s - n]
            + self.poch[s - m]
            + self.poch[s - k]
            + self.sigma_part[s])
            .exp()
    }
}

/// `(τ_n f)(m) = Σ_k c_λ(n,m,k) f(k)`.
pub fn translate(order: OrderParam, n: usize, f: &FiniteSeq) -> FiniteSeq {
    let nf = f.support();
    let table = LinearizationTable::new(order, n + nf);
    let values = (0..=n + nf)
        .map(|m| {
            let lo = n.abs_diff(m);
            let hi = (n + m).min(nf);
            (lo..=hi).step_by(2).map(|k| table.c(n, m, k) * f.get(k)).sum()
        })
        .collect();
    FiniteSeq::new(values)
}

/// `(f #_λ g)(n) = Σ_m f(m) (τ_n g)(m)`; output support `supp f + supp g`.
pub fn convolve(order: OrderParam, f: &FiniteSeq, g: &FiniteSeq) -> FiniteSeq {
    let (nf, ng) = (f.support(), g.support());
    let table = LinearizationTable::new(order, nf + ng);
    let values = (0..=nf + ng)
        .into_par_iter()
        .map(|n| {
            let mut acc = 0.0;
            for m in 0..=nf {
                let fm = f.get(m);
                if fm == 0.0 {
                    continue;
                }
                let lo = n.abs_diff(m);
                let hi = (n + m).min(ng);
                let mut inner = 0.0;
                let mut k = lo;
                while k <= hi {
                    inner += table.c(n, m, k) * g.get(k);
                    k += 2;
                }
                acc += fm * inner;
            }
            acc
        })
        .collect();
    FiniteSeq::new(values)
}

/// `Δ_λ^k f` with `(Δ_λ f)(n) = a_n f(n+1) − 2f(n) + a_{n−1} f(n−1)`.
pub fn apply_laplacian(order: OrderParam, f: &FiniteSeq, power: usize) -> FiniteSeq {
    let mut cur = f.values().to_vec();
    for _ in 0..power {
        let n = cur.len();
        let a: Vec<f64> = (0..=n).map(|j| crate::specfun::polynomial::coupling(order.value(), j)).collect();
        let at = |j: usize| cur.get(j).copied().unwrap_or(0.0);
        let next = (0..=n)
            .map(|j| {
                let left = if j == 0 { 0.0 } else { a[j - 1] * at(j - 1) };
                a[j] * at(j + 1) - 2.0 * at(j) + left
            })
            .collect();
        cur = next;
    }
    FiniteSeq::new(cur)
}

/// The banded matrix `A(n, k) = (τ_n f)(k)`, `|n − k| ≤ supp f`, for `n ≤ n_out`.
///
/// With it any convolution `(h #_λ f)(n) = Σ_k h(k) (τ_n f)(k)` costs
/// `O(n_out · supp f)`, which is what repeated heat/ψ evaluations over a time grid need.
#[derive(Debug, Clone)]
pub struct TranslationBand {
    n_out: usize,
    width: usize,
    rows: Vec<f64>,
}

impl TranslationBand {
    pub fn new(order: OrderParam, f: &FiniteSeq, n_out: usize) -> Self {
        let nf = f.support();
        let width = 2 * nf + 1;
        let table = LinearizationTable::new(order, n_out + nf);
        let mut rows = vec![0.0; (n_out + 1) * width];
        rows.par_chunks_mut(width).enumerate().for_each(|(n, row)| {
            for (slot, r) in row.iter_mut().enumerate() {
                let Some(k) = (n + slot).checked_sub(nf) else { continue };
                let lo = n.abs_diff(k);
                let hi = (n + k).min(nf);
                let mut acc = 0.0;
                let mut m = lo;
                while m <= hi {
                    acc += table.c(n, k, m) * f.get(m);
                    m += 2;
                }
                *r = acc;
            }
        });
        Self { n_out, width, rows }
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    /// Length of kernel the band reads: indices `0..=n_out + supp f`.
    pub fn kernel_len(&self) -> usize {
        self.n_out + self.width.div_ceil(2)
    }

    /// `(τ_n f)(k)`.
    pub fn entry(&self, n: usize, k: usize) -> f64 {
        let nf = self.width / 2;
        if n > self.n_out || k + nf < n || k > n + nf {
            return 0.0;
        }
        self.rows[n * self.width + k + nf - n]
    }

    /// `Σ_k h(k) (τ_n f)(k)` for `n ≤ n_out`; `h` beyond its length counts as zero.
    pub fn apply(&self, h: &[f64]) -> Vec<f64> {
        let nf = self.width / 2;
        (0..=self.n_out)
            .map(|n| {
                let row = &self.rows[n * self.width..(n + 1) * self.width];
                let mut acc = 0.0;
                for (slot, &a) in row.iter().enumerate() {
                    if let Some(k) = (n + slot).checked_sub(nf) {
                        if let Some(&hk) = h.get(k) {
                            acc += a * hk;
                        }
                    }
                }
                acc
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(l: f64) -> OrderParam {
        OrderParam::new(l).unwrap()
    }

    #[test]
    fn c_examples() {
        for l in [0.6, 1.0, 2.5] {
            assert_eq!(linearization_c(o(l), 0, 1, 2), 0.0);
            let w0 = crate::specfun::weight_w(o(l), 0).sqrt();
            for n in 0..6 {
                for k in 0..6 {
                    let want = if n == k { w0 } else { 0.0 };
                    assert!((linearization_c(o(l), n, 0, k) - want).abs() < 1e-14);
                }
            }
        }
        let c = linearization_c(o(1.0), 1, 1, 2);
        assert!((c - (2.0 / PI).sqrt()).abs() < 1e-14);
        // Chebyshev route: ∫ (2/π)^{3/2} sin 2θ sin 2θ sin 3θ / sin θ dθ = (2/π)^{3/2}·π/2
        assert!((c - (2.0 / PI).powf(1.5) * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn oracle_matches_closed_form() {
        for l in [0.6, 1.0, 1.5] {
            // Rounding floor is about 1e-14 × Σ|terms|, and Σ|terms| grows with λ.
            let z = linearization_c_oracle(o(l), 5, 7, 20).unwrap();
            assert!(z.abs() < if l <= 1.0 { 1e-14 } else { 5e-14 }, "{z}");
            for (n, m, k) in [(1, 1, 2), (3, 4, 5), (10, 12, 14), (20, 20, 40)] {
                let a = linearization_c(o(l), n, m, k);
                let b = linearization_c_oracle(o(l), n, m, k).unwrap();
                assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-3), "{l} {n} {m} {k}: {a} {b}");
            }
        }
    }

    #[test]
    fn table_matches_closed_form() {
        for l in [0.6, 1.0, 2.5] {
            let t = LinearizationTable::new(o(l), 300);
            for (n, m, k) in [(0, 0, 0), (1, 1, 2), (7, 9, 4), (100, 150, 200), (300, 300, 2), (299, 300, 299)] {
                let a = linearization_c(o(l), n, m, k);
                let b = t.c(n, m, k);
                assert!((a - b).abs() <= 1e-12 * a, "{l} {n} {m} {k}: {a} {b}");
            }
        }
    }

    #[test]
    fn laplacian_of_delta() {
        let d = apply_laplacian(o(1.0), &FiniteSeq::delta(0), 1);
        assert_eq!([d.get(0), d.get(1), d.get(2)], [-2.0, 1.0, 0.0]);
    }

    #[test]
    fn identity_element() {
        let l = o(1.7);
        let f = FiniteSeq::new(vec![0.3, -1.0, 2.0, 0.5]);
        let e = FiniteSeq::delta(0).scaled(1.0 / crate::specfun::weight_w(l, 0).sqrt());
        let g = convolve(l, &f, &e);
        for n in 0..=3 {
            assert!((g.get(n) - f.get(n)).abs() <= 1e-14);
        }
    }

    #[test]
    fn delta_convolution_value() {
        let d1 = FiniteSeq::delta(1);
        let g = convolve(o(1.0), &d1, &d1);
        assert!((g.get(2) - (2.0 / PI).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn band_matches_translate() {
        let l = o(1.3);
        let f = FiniteSeq::new(vec![1.0, -0.5, 0.25, 2.0]);
        let band = TranslationBand::new(l, &f, 12);
        for n in 0..=12 {
            let t = translate(l, n, &f);
            for k in 0..=15 {
                assert!((band.entry(n, k) - t.get(k)).abs() < 1e-14);
            }
        }
        let h: Vec<f64> = (0..band.kernel_len()).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        let direct = convolve(l, &FiniteSeq::new(h.clone()), &f);
        for (n, v) in band.apply(&h).iter().enumerate() {
            assert!((v - direct.get(n)).abs() < 1e-13);
        }
    }

    #[test]
    fn csv_round_trip() {
        let f = FiniteSeq::new(vec![1.5, 0.0, -2.25]);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().next(), Some("0,1.5e0"));
        assert_eq!(FiniteSeq::read_csv(&buf[..]).unwrap(), f);
    }

    #[test]
    fn norm_without_overflow() {
        let f = FiniteSeq::new(vec![1e200, 1e200]);
        assert!((f.norm2() / (2f64.sqrt() * 1e200) - 1.0).abs() < 1e-15);
    }
}
