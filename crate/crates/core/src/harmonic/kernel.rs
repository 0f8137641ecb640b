//! Kernels on `ℕ × ℕ`: dense matrices, the sampled-kernel interface used by the
//! certifier, and the split `T = T_loc + T_glob` along the windows `W_n`.

use super::{hardy0, hardy_inf, window};
use crate::error::{domain, Error, Result};
use crate::hypergroup::FiniteSeq;
use std::collections::BTreeMap;
use std::path::Path;

/// How a vector of kernel samples (one per `t` on a grid) is collapsed to a number.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleNorm {
    /// `max_j |v_j|`.
    Sup,
    /// `(Σ_j ω_j v_j²)^{1/2}` with quadrature weights `ω_j`.
    L2(Vec<f64>),
}

impl SampleNorm {
    #[inline]
    pub fn apply(&self, v: &[f64]) -> f64 {
        match self {
            SampleNorm::Sup => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            SampleNorm::L2(w) => w.iter().zip(v).map(|(w, x)| w * x * x).sum::<f64>().sqrt(),
        }
    }

    /// Norm of `a − b` without allocating.
    #[inline]
    pub fn apply_diff(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            SampleNorm::Sup => a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
            SampleNorm::L2(w) => w
                .iter()
                .zip(a.iter().zip(b))
                .map(|(w, (x, y))| w * (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// A kernel on `[0, N]²` whose entries are vectors of samples.
///
/// `row(n)` returns `K(n, m)` for `m = 0..=N`, `column(m)` returns `K(n, m)` for
/// `n = 0..=N`; both are flattened with the samples of one entry contiguous.
pub trait KernelSource: Sync {
    fn id(&self) -> String;
    fn parameters(&self) -> BTreeMap<String, f64>;
    fn size(&self) -> usize;
    fn samples(&self) -> usize;
    fn norm(&self) -> SampleNorm;
    /// `K(n, m) = K(m, n)`; lets the certifier skip column evaluation.
    fn symmetric(&self) -> bool;
    fn row(&self, n: usize) -> Result<Vec<f64>>;
    fn column(&self, m: usize) -> Result<Vec<f64>>;
}

/// Dense scalar kernel `K(n, m)`, `n, m ≤ N`, with provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    size: usize,
    data: Vec<f64>,
    kernel_id: String,
    parameters: BTreeMap<String, f64>,
    method: String,
}

impl KernelMatrix {
    pub fn from_fn(size: usize, kernel_id: impl Into<String>, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity((size + 1) * (size + 1));
        for n in 0..=size {
            for m in 0..=size {
                data.push(f(n, m));
            }
        }
        Self { size, data, kernel_id: kernel_id.into(), parameters: BTreeMap::new(), method: "closed form".into() }
    }

    /// Row-major `(N+1)²` entries.
    pub fn from_data(size: usize, data: Vec<f64>, kernel_id: impl Into<String>) -> Result<Self> {
        if data.len() != (size + 1) * (size + 1) {
            return domain(format!("expected {} entries, got {}", (size + 1) * (size + 1), data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("kernel matrix has non-finite entries".into()));
        }
        Ok(Self { size, data, kernel_id: kernel_id.into(), parameters: BTreeMap::new(), method: "dense".into() })
    }

    pub fn with_parameter(mut self, key: impl Into<String>, value: f64) -> Self {
        self.parameters.insert(key.into(), value);
        self
    }

    pub fn with_method(mut self, method: impl Into<String>) -> Self {
        self.method = method.into();
        self
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kernel_id(&self) -> &str {
        &self.kernel_id
    }

    pub fn parameters(&self) -> &BTreeMap<String, f64> {
        &self.parameters
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    #[inline]
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.data[n * (self.size + 1) + m]
    }

    pub fn row_slice(&self, n: usize) -> &[f64] {
        &self.data[n * (self.size + 1)..(n + 1) * (self.size + 1)]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `(Kf)(n) = Σ_{m≤N} K(n,m) f(m)` for `n ≤ N`; entries of `f` beyond `N` are ignored.
    pub fn apply(&self, f: &FiniteSeq) -> FiniteSeq {
        let k = f.values().len().min(self.size + 1);
        let out = (0..=self.size)
            .map(|n| {
                let row = self.row_slice(n);
                (0..k).map(|m| row[m] * f.get(m)).sum()
            })
            .collect();
        FiniteSeq::new(out)
    }

    /// The sub-matrix on `[0, n]²`.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.size);
        let mut out = Self::from_fn(n, self.kernel_id.clone(), |i, j| self.get(i, j));
        out.parameters = self.parameters.clone();
        out.method = self.method.clone();
        out
    }

    /// CSV with header `n,m,value`, one row per entry.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["n", "m", "value"])?;
        for n in 0..=self.size {
            for m in 0..=self.size {
                w.write_record(&[n.to_string(), m.to_string(), format!("{:e}", self.get(n, m))])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `n,m,value` rows (header required); the size is the largest index seen and
    /// missing entries are zero.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
        let mut entries = Vec::new();
        let mut size = 0usize;
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != 3 {
                return Err(Error::Config(format!("{}: line {} needs 3 fields", path.display(), line + 2)));
            }
            let parse_idx = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Config(format!("{}: bad index '{s}' on line {}", path.display(), line + 2)))
            };
            let n = parse_idx(&rec[0])?;
            let m = parse_idx(&rec[1])?;
            let v: f64 = rec[2]
                .parse()
                .map_err(|_| Error::Config(format!("{}: bad value '{}' on line {}", path.display(), &rec[2], line + 2)))?;
            size = size.max(n).max(m);
            entries.push((n, m, v));
        }
        if entries.is_empty() {
            return Err(Error::Config(format!("{}: no kernel entries", path.display())));
        }
        if size > 1 << 14 {
            return Err(Error::Resource(format!("kernel size {size} exceeds 16384")));
        }
        let mut data = vec![0.0; (size + 1) * (size + 1)];
        for (n, m, v) in entries {
            data[n * (size + 1) + m] = v;
        }
        Ok(Self::from_data(size, data, "file")?.with_method(format!("read from {}", path.display())))
    }
}

impl KernelSource for KernelMatrix {
    fn id(&self) -> String {
        self.kernel_id.clone()
    }

    fn parameters(&self) -> BTreeMap<String, f64> {
        self.parameters.clone()
    }

    fn size(&self) -> usize {
        self.size
    }

    fn samples(&self) -> usize {
        1
    }

    fn norm(&self) -> SampleNorm {
        SampleNorm::Sup
    }

    fn symmetric(&self) -> bool {
        false
    }

    fn row(&self, n: usize) -> Result<Vec<f64>> {
        Ok(self.row_slice(n).to_vec())
    }

    fn column(&self, m: usize) -> Result<Vec<f64>> {
        Ok((0..=self.size).map(|n| self.get(n, m)).collect())
    }
}

/// `(T_loc f, T_glob f)` on `[0, N]`: `T_glob f(n) = Σ_{m∉W_n} K(n,m) f(m)` and
/// `T_loc f = Kf − T_glob f`.
pub fn local_global_split(k: &KernelMatrix, f: &FiniteSeq) -> (FiniteSeq, FiniteSeq) {
    let len = f.values().len().min(k.size() + 1);
    let mut loc = vec![0.0; k.size() + 1];
    let mut glob = vec![0.0; k.size() + 1];
    for n in 0..=k.size() {
        let w = window(n);
        let row = k.row_slice(n);
        let (mut l, mut g) = (0.0, 0.0);
        for m in 0..len {
            let v = row[m] * f.get(m);
            if w.contains(m) {
                l += v;
            } else {
                g += v;
            }
        }
        loc[n] = l;
        glob[n] = g;
    }
    (FiniteSeq::new(loc), FiniteSeq::new(glob))
}

/// Smallest `C` with `|T_glob f(n)| ≤ C (H_0 + H_∞)(|f|)(n)` for `1 ≤ n ≤ N` over the
/// given sequences. Infinite when the right side vanishes while the left does not.
pub fn hardy_domination(k: &KernelMatrix, fs: &[FiniteSeq]) -> f64 {
    let mut best: f64 = 0.0;
    for f in fs {
        let abs = FiniteSeq::new(f.values().iter().take(k.size() + 1).map(|v| v.abs()).collect());
        let (_, glob) = local_global_split(k, f);
        let h0 = hardy0(&abs);
        let hi = hardy_inf(&abs);
        for n in 1..=k.size() {
            let lhs = glob.get(n).abs();
            let rhs = h0.get(n) + hi.get(n);
            if lhs == 0.0 {
                continue;
            }
            best = best.max(if rhs > 0.0 { lhs / rhs } else { f64::INFINITY });
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert(size: usize) -> KernelMatrix {
        KernelMatrix::from_fn(size, "hilbert", |n, m| if n == m { 0.0 } else { 1.0 / (n as f64 - m as f64) })
    }

    #[test]
    fn split_example() {
        let k = hilbert(200);
        let n0 = 12;
        let (loc, glob) = local_global_split(&k, &FiniteSeq::delta(4 * n0));
        assert_eq!(loc.get(n0), 0.0);
        assert!((glob.get(n0) + 1.0 / (3.0 * n0 as f64)).abs() < 1e-16);
        let full = k.apply(&FiniteSeq::delta(4 * n0));
        for n in 0..=200 {
            assert!((loc.get(n) + glob.get(n) - full.get(n)).abs() < 1e-16);
        }
    }

    #[test]
    fn split_window_support() {
        let k = hilbert(64);
        // f supported on {20}: W_n ∋ 20 exactly for 14 ≤ n ≤ 40
        let (_, glob) = local_global_split(&k, &FiniteSeq::delta(20));
        for n in 14..=40 {
            assert_eq!(glob.get(n), 0.0);
        }
        assert_ne!(glob.get(41), 0.0);
    }

    #[test]
    fn hilbert_dominated_by_hardy() {
        let k = hilbert(256);
        let fs: Vec<FiniteSeq> = (0..5)
            .map(|s| FiniteSeq::new((0..=256).map(|m| ((m * 7 + s * 13) % 11) as f64 - 5.0).collect()))
            .collect();
        let c = hardy_domination(&k, &fs);
        assert!(c.is_finite() && c <= 3.0, "{c}");
    }

    #[test]
    fn csv_roundtrip() {
        let dir = std::env::temp_dir().join(format!("kernel_csv_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("k.csv");
        let k = hilbert(9);
        k.write_csv(&path).unwrap();
        let back = KernelMatrix::read_csv(&path).unwrap();
        assert_eq!(back.size(), 9);
        for n in 0..=9 {
            for m in 0..=9 {
                assert_eq!(back.get(n, m), k.get(n, m));
            }
        }
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn sample_norms() {
        assert_eq!(SampleNorm::Sup.apply(&[1.0, -3.0, 2.0]), 3.0);
        let l2 = SampleNorm::L2(vec![1.0, 4.0]);
        assert!((l2.apply(&[3.0, 2.0]) - 5.0).abs() < 1e-15);
        assert!((l2.apply_diff(&[4.0, 3.0], &[1.0, 1.0]) - 5.0).abs() < 1e-15);
    }
}
