//! Numeric Calderón–Zygmund certificate for a sampled kernel on `[0, N]²`.
//!
//! Size and regularity are scanned over a fixed row set (all small indices, a
//! uniform stride and a geometric ladder) against every column, and over the
//! offsets `1 ≤ |n−ℓ| ≤ max_offset`. The Hörmander sums use the windowed kernel
//! `K̃(n,m) = χ_{W_n}(m) K(n,m)` on intervals with endpoints in the row set and a
//! seeded family of test sequences: indicators of dyadic blocks, the indicator of
//! `{0}`, and random `±1` sequences on random halves of `[0, N]`.

use super::kernel::{KernelSource, SampleNorm};
use super::{hl_maximal, window, IntervalN};
use crate::error::{domain, Result};
use crate::hypergroup::FiniteSeq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize)]
pub struct CertifyOptions {
    pub max_offset: usize,
    pub random_sequences: usize,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { max_offset: 8, random_sequences: 8, seed: 0x5eed }
    }
}

/// Fitted constants of one scan. Entries are `+∞` when a ratio is unbounded or a
/// kernel value is not finite.
#[derive(Debug, Clone, Serialize)]
pub struct CzConstants {
    pub size: usize,
    /// `max ‖K(n,m)‖·|n−m|` over scanned rows and columns, `m ≠ n`.
    pub c_size: f64,
    /// The same restricted to `m ∈ W_n`.
    pub c_size_local: f64,
    pub c_reg1: f64,
    pub c_reg2: f64,
    pub c_hormander1: f64,
    pub c_hormander2: f64,
    pub rows_scanned: usize,
    pub intervals_scanned: usize,
}

impl CzConstants {
    pub fn named(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("c_size".to_string(), self.c_size),
            ("c_size_local".to_string(), self.c_size_local),
            ("c_reg1".to_string(), self.c_reg1),
            ("c_reg2".to_string(), self.c_reg2),
            ("c_hormander1".to_string(), self.c_hormander1),
            ("c_hormander2".to_string(), self.c_hormander2),
        ])
    }
}

/// Constants at `N` and `2N` with relative drift `|C(2N) − C(N)| / C(N)`.
#[derive(Debug, Clone, Serialize)]
pub struct CzScaling {
    pub small: CzConstants,
    pub large: CzConstants,
    pub drift: BTreeMap<String, f64>,
}

impl CzScaling {
    /// The constants that must stay bounded. `local_size` selects `c_size_local`
    /// instead of `c_size`.
    pub fn keys(local_size: bool) -> [&'static str; 5] {
        [
            if local_size { "c_size_local" } else { "c_size" },
            "c_reg1",
            "c_reg2",
            "c_hormander1",
            "c_hormander2",
        ]
    }

    /// Every selected constant is finite at both sizes and drifts less than `tol`.
    pub fn passes(&self, tol: f64, local_size: bool) -> bool {
        let a = self.small.named();
        let b = self.large.named();
        Self::keys(local_size)
            .iter()
            .all(|k| a[*k].is_finite() && b[*k].is_finite() && self.drift[*k] < tol)
    }

    pub fn max_drift(&self, local_size: bool) -> f64 {
        Self::keys(local_size).iter().fold(0.0, |m: f64, k| fmax(m, self.drift[*k]))
    }
}

/// `max` that turns NaN into `+∞`, so a broken value can never hide.
#[inline]
fn fmax(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::INFINITY
    } else {
        a.max(b)
    }
}

fn relative_drift(a: f64, b: f64) -> f64 {
    if !a.is_finite() || !b.is_finite() {
        return f64::INFINITY;
    }
    if a == 0.0 {
        return if b == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (b - a).abs() / a.abs()
}

/// Rows scanned at size `N`: `0..=16`, multiples of `N/32`, `⌊2^{j/2}⌋` and `N`.
pub fn row_set(size: usize) -> Vec<usize> {
    let mut r: Vec<usize> = (0..=size.min(16)).collect();
    let stride = (size / 32).max(1);
    r.extend((1..).map(|k| k * stride).take_while(|&v| v <= size));
    let mut j = 0;
    loop {
        let v = 2f64.powf(j as f64 / 2.0).floor() as usize;
        if v > size {
            break;
        }
        r.push(v);
        j += 1;
    }
    r.push(size);
    r.sort_unstable();
    r.dedup();
    r
}

fn test_family(size: usize, opts: &CertifyOptions) -> Vec<FiniteSeq> {
    let mut fam = vec![FiniteSeq::delta(0)];
    let mut lo = 1usize;
    while lo <= size {
        let hi = (2 * lo - 1).min(size);
        let mut v = vec![0.0; hi + 1];
        v[lo..=hi].iter_mut().for_each(|x| *x = 1.0);
        fam.push(FiniteSeq::new(v));
        lo *= 2;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_sequences {
        let v = (0..=size)
            .map(|_| if rng.gen::<bool>() { if rng.gen::<bool>() { 1.0 } else { -1.0 } } else { 0.0 })
            .collect();
        fam.push(FiniteSeq::new(v));
    }
    fam
}

struct Scanned {
    row: Vec<f64>,
    column: Option<Vec<f64>>,
    c_size: f64,
    c_size_local: f64,
    c_reg1: f64,
    c_reg2: f64,
}

fn check_len(v: &[f64], size: usize, s: usize) -> Result<()> {
    if v.len() != (size + 1) * s {
        return domain(format!("kernel source returned {} values, expected {}", v.len(), (size + 1) * s));
    }
    Ok(())
}

/// Size and regularity contributions of base index `n`. `get` reads rows (b1) or
/// columns (b2); both have the same shape, so one routine serves both.
fn scan_lines(
    n: usize,
    size: usize,
    s: usize,
    norm: &SampleNorm,
    max_offset: usize,
    get: &dyn Fn(usize) -> Result<Vec<f64>>,
) -> Result<(Vec<f64>, f64, f64, f64)> {
    let base = get(n)?;
    check_len(&base, size, s)?;
    let w = window(n);
    let (mut cs, mut cl) = (0.0f64, 0.0f64);
    for m in 0..=size {
        if m == n {
            continue;
        }
        let v = norm.apply(&base[m * s..(m + 1) * s]) * n.abs_diff(m) as f64;
        cs = fmax(cs, v);
        if w.contains(m) {
            cl = fmax(cl, v);
        }
    }
    let mut reg = 0.0f64;
    for d in 1..=max_offset {
        for l in [n.checked_sub(d), Some(n + d)].into_iter().flatten() {
            if l > size {
                continue;
            }
            let other = get(l)?;
            check_len(&other, size, s)?;
            for m in 0..=size {
                let dn = n.abs_diff(m);
                // |n−m| > 2|n−ℓ| and m/2 < n, ℓ < 3m/2
                if dn <= 2 * d || 2 * n <= m || 2 * l <= m || 2 * n >= 3 * m || 2 * l >= 3 * m {
                    continue;
                }
                let diff = norm.apply_diff(&base[m * s..(m + 1) * s], &other[m * s..(m + 1) * s]);
                reg = fmax(reg, diff * (dn * dn) as f64 / d as f64);
            }
        }
    }
    Ok((base, cs, cl, reg))
}

/// `D(m) = ‖K̃(n,m) − K̃(ℓ,m)‖` (or the transposed version) for `m ∉ 2I`, zero elsewhere.
/// `line_n[m]` holds `K(n,m)` (rows) or `K(m,n)` (columns); `transposed` selects
/// whose window cuts the kernel.
fn hormander_profile(
    line_n: &[f64],
    line_l: &[f64],
    n: usize,
    l: usize,
    two_i: IntervalN,
    size: usize,
    s: usize,
    norm: &SampleNorm,
    transposed: bool,
) -> Vec<f64> {
    let zero = vec![0.0; s];
    let (wn, wl) = (window(n), window(l));
    (0..=size)
        .map(|m| {
            if two_i.contains(m) {
                return 0.0;
            }
            let keep_n = if transposed { window(m).contains(n) } else { wn.contains(m) };
            let keep_l = if transposed { window(m).contains(l) } else { wl.contains(m) };
            let a = if keep_n { &line_n[m * s..(m + 1) * s] } else { &zero[..] };
            let b = if keep_l { &line_l[m * s..(m + 1) * s] } else { &zero[..] };
            norm.apply_diff(a, b)
        })
        .collect()
}

/// Scans one kernel. Requires `N ≥ 16`.
pub fn cz_certify<S: KernelSource + ?Sized>(src: &S, opts: &CertifyOptions) -> Result<CzConstants> {
    let size = src.size();
    if size < 16 {
        return domain(format!("certification needs N ≥ 16, got {size}"));
    }
    let s = src.samples();
    let norm = src.norm();
    let rows = row_set(size);
    let symmetric = src.symmetric();
    let row_fn = |n: usize| src.row(n);
    let col_fn = |n: usize| src.column(n);

    let scanned: Vec<Scanned> = rows
        .par_iter()
        .map(|&n| -> Result<Scanned> {
            let (row, cs, cl, r1) = scan_lines(n, size, s, &norm, opts.max_offset, &row_fn)?;
            if symmetric {
                return Ok(Scanned { row, column: None, c_size: cs, c_size_local: cl, c_reg1: r1, c_reg2: r1 });
            }
            let (col, cs2, cl2, r2) = scan_lines(n, size, s, &norm, opts.max_offset, &col_fn)?;
            Ok(Scanned {
                row,
                column: Some(col),
                c_size: fmax(cs, cs2),
                c_size_local: fmax(cl, cl2),
                c_reg1: r1,
                c_reg2: r2,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = CzConstants {
        size,
        c_size: 0.0,
        c_size_local: 0.0,
        c_reg1: 0.0,
        c_reg2: 0.0,
        c_hormander1: 0.0,
        c_hormander2: 0.0,
        rows_scanned: rows.len(),
        intervals_scanned: 0,
    };
    for sc in &scanned {
        out.c_size = fmax(out.c_size, sc.c_size);
        out.c_size_local = fmax(out.c_size_local, sc.c_size_local);
        out.c_reg1 = fmax(out.c_reg1, sc.c_reg1);
        out.c_reg2 = fmax(out.c_reg2, sc.c_reg2);
    }

    let family = test_family(size, opts);
    let abs_family: Vec<Vec<f64>> = family
        .iter()
        .map(|f| (0..=size).map(|m| f.get(m).abs()).collect())
        .collect();
    let maximal: Vec<Vec<f64>> = abs_family
        .iter()
        .map(|a| hl_maximal(&FiniteSeq::new(a.clone())).map(|m| m.into_values()))
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..rows.len())
        .flat_map(|i| (i + 1..rows.len()).map(move |j| (i, j)))
        .collect();
    out.intervals_scanned = pairs.len();
    let (h1, h2) = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (rows[i], rows[j]);
            let two_i = IntervalN { a, b }.dilate2();
            let ratio = |profile: &[f64]| {
                let mut best = 0.0f64;
                for (abs, mf) in abs_family.iter().zip(&maximal) {
                    let lhs: f64 = profile.iter().zip(abs).map(|(d, f)| d * f).sum();
                    if lhs == 0.0 {
                        continue;
                    }
                    let rhs = mf[a].min(mf[b]);
                    best = fmax(best, if rhs > 0.0 { lhs / rhs } else { f64::INFINITY });
                }
                best
            };
            let p1 = hormander_profile(&scanned[i].row, &scanned[j].row, a, b, two_i, size, s, &norm, false);
            let (ci, cj) = match (&scanned[i].column, &scanned[j].column) {
                (Some(x), Some(y)) => (x, y),
                _ => (&scanned[i].row, &scanned[j].row),
            };
            let p2 = hormander_profile(ci, cj, a, b, two_i, size, s, &norm, true);
            (ratio(&p1), ratio(&p2))
        })
        .reduce(|| (0.0, 0.0), |x, y| (fmax(x.0, y.0), fmax(x.1, y.1)));
    out.c_hormander1 = h1;
    out.c_hormander2 = h2;
    Ok(out)
}

/// Certifies the kernels built by `make(N)` and `make(2N)` and reports the drift.
pub fn cz_certify_scaling<S, F>(make: F, size: usize, opts: &CertifyOptions) -> Result<CzScaling>
where
    S: KernelSource,
    F: Fn(usize) -> Result<S>,
{
    let small = cz_certify(&make(size)?, opts)?;
    let large = cz_certify(&make(2 * size)?, opts)?;
    let a = small.named();
    let b = large.named();
    let drift = a.keys().map(|k| (k.clone(), relative_drift(a[k], b[k]))).collect();
    Ok(CzScaling { small, large, drift })
}

#[cfg(test)]
mod tests {
    use super::super::KernelMatrix;
    use super::*;

    fn hilbert(size: usize) -> Result<KernelMatrix> {
        Ok(KernelMatrix::from_fn(size, "hilbert", |n, m| if n == m { 0.0 } else { 1.0 / (n as f64 - m as f64) }))
    }

    #[test]
    fn row_set_shape() {
        let r = row_set(1024);
        assert!(r.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*r.last().unwrap(), 1024);
        assert!(r.contains(&16) && r.contains(&32) && r.contains(&512));
        assert_eq!(row_set(16), (0..=16).collect::<Vec<_>>());
    }

    #[test]
    fn hilbert_kernel_certifies() {
        let sc = cz_certify_scaling(hilbert, 128, &CertifyOptions::default()).unwrap();
        assert!((sc.small.c_size - 1.0).abs() < 1e-15);
        assert!((sc.large.c_size - 1.0).abs() < 1e-15);
        assert!(sc.passes(0.1, false), "{sc:?}");
    }

    #[test]
    fn constant_kernel_fails() {
        let make = |n| Ok(KernelMatrix::from_fn(n, "one", |_, _| 1.0));
        let sc = cz_certify_scaling(make, 64, &CertifyOptions::default()).unwrap();
        assert!((sc.large.c_size / sc.small.c_size - 2.0).abs() < 0.05);
        assert!(!sc.passes(0.1, false));
    }

    #[test]
    fn small_size_rejected() {
        assert!(cz_certify(&hilbert(8).unwrap(), &CertifyOptions::default()).is_err());
    }
}
