//! Transplantation `T_{λ,μ} = F_μ^{−1} F_λ` with kernel
//! `K_{λ,μ}(n,m) = ∫ φ_n^μ φ_m^λ dx`, which vanishes when `n + m` is odd.
//!
//! The product `φ_n^μ φ_m^λ` equals `p_n^μ p_m^λ (1−x²)^α` with
//! `α = (λ+μ)/2 − ½`, so Gauss–Jacobi rules at that exponent integrate it exactly.

use crate::error::{domain, Error, Result};
use crate::harmonic::KernelMatrix;
use crate::hypergroup::FiniteSeq;
use crate::specfun::{gauss_jacobi_cached, OrthoBasis, QuadRule};
use crate::transform::{poly_part, synthesize};
use crate::OrderParam;
use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Largest lattice size for dense kernels.
pub const MAX_KERNEL_SIZE: usize = 1 << 14;

const NODE_MARGIN: usize = 4;

/// Which lattice a kernel matrix is indexed by: `K^e(n,m) = K(2n,2m)`,
/// `K^o(n,m) = K(2n+1,2m+1)`, or `K` itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Full,
}

impl Parity {
    #[inline]
    pub fn degree(self, n: usize) -> usize {
        match self {
            Parity::Even => 2 * n,
            Parity::Odd => 2 * n + 1,
            Parity::Full => n,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Full => "full",
        }
    }
}

impl FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            "full" => Ok(Parity::Full),
            _ => Err(Error::Config(format!("parity must be even, odd or full; got {s:?}"))),
        }
    }
}

/// `α = (λ+μ)/2 − ½`.
pub fn kernel_exponent(lambda: OrderParam, mu: OrderParam) -> f64 {
    0.5 * (lambda.value() + mu.value()) - 0.5
}

fn rule_for(lambda: OrderParam, mu: OrderParam, degree_sum: usize) -> Result<std::sync::Arc<QuadRule>> {
    gauss_jacobi_cached(kernel_exponent(lambda, mu), degree_sum.div_ceil(2) + 1 + NODE_MARGIN)
}

/// Nodes `x_i ≥ 0` of a symmetric rule with the weights of `2∫_0^1`: doubled for
/// `x_i > 0`, single for the centre node.
fn half_rule(rule: &QuadRule) -> (Vec<f64>, Vec<f64>) {
    rule.nodes()
        .iter()
        .zip(rule.weights())
        .filter(|(x, _)| **x >= 0.0)
        .map(|(&x, &w)| (x, if x > 0.0 { 2.0 * w } else { w }))
        .unzip()
}

/// `K_{λ,μ}(n,m)`: exactly 0 for odd `n + m`, else `2∫_0^1 φ_n^μ φ_m^λ dx`.
pub fn transplant_kernel(lambda: OrderParam, mu: OrderParam, n: usize, m: usize) -> Result<f64> {
    if (n + m) % 2 == 1 {
        return Ok(0.0);
    }
    let rule = rule_for(lambda, mu, n + m)?;
    let (xs, ws) = half_rule(&rule);
    let bm = OrthoBasis::new(mu, n + 1);
    let bl = OrthoBasis::new(lambda, m + 1);
    let (mut pm, mut pl) = (vec![0.0; n + 1], vec![0.0; m + 1]);
    let mut sum = 0.0;
    for (&x, &w) in xs.iter().zip(&ws) {
        bm.eval_p_into(x, &mut pm);
        bl.eval_p_into(x, &mut pl);
        sum += w * pm[n] * pl[m];
    }
    Ok(sum)
}

/// Dense transplantation kernel on one lattice.
#[derive(Debug, Clone)]
pub struct TransplantKernel {
    lambda: OrderParam,
    mu: OrderParam,
    parity: Parity,
    matrix: KernelMatrix,
}

impl TransplantKernel {
    pub fn lambda(&self) -> OrderParam {
        self.lambda
    }
    pub fn mu(&self) -> OrderParam {
        self.mu
    }
    pub fn parity(&self) -> Parity {
        self.parity
    }
    pub fn size(&self) -> usize {
        self.matrix.size()
    }
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.matrix.get(n, m)
    }
    pub fn matrix(&self) -> &KernelMatrix {
        &self.matrix
    }
    pub fn into_matrix(self) -> KernelMatrix {
        self.matrix
    }
}

/// Builds `K^s(n,m)` for `n, m ≤ N` from one rule exact for the largest entry:
/// with `A_{in} = √ω_i p^μ_{d(n)}(x_i)` and `B_{im} = √ω_i p^λ_{d(m)}(x_i)` on the
/// nonnegative nodes, the kernel is `AᵀB`.
pub fn build_kernel_matrix(lambda: OrderParam, mu: OrderParam, size: usize, parity: Parity) -> Result<TransplantKernel> {
    if size > MAX_KERNEL_SIZE {
        return Err(Error::Resource(format!("kernel size {size} exceeds {MAX_KERNEL_SIZE}")));
    }
    let max_degree = parity.degree(size);
    let rule = rule_for(lambda, mu, 2 * max_degree)?;
    let (xs, ws) = half_rule(&rule);
    let sample = |order: OrderParam| -> Array2<f64> {
        let basis = OrthoBasis::new(order, max_degree + 1);
        let rows: Vec<Vec<f64>> = xs
            .par_iter()
            .zip(&ws)
            .map_init(
                || vec![0.0; max_degree + 1],
                |p, (&x, &w)| {
                    basis.eval_p_into(x, p);
                    let s = w.sqrt();
                    (0..=size).map(|n| s * p[parity.degree(n)]).collect()
                },
            )
            .collect();
        let mut a = Array2::zeros((xs.len(), size + 1));
        for (i, r) in rows.into_iter().enumerate() {
            a.row_mut(i).assign(&ndarray::Array1::from(r));
        }
        a
    };
    let a = sample(mu);
    let b = sample(lambda);
    let k = a.t().dot(&b);
    let mut data = k.into_raw_vec_and_offset().0;
    if parity == Parity::Full {
        for n in 0..=size {
            for m in ((n + 1) % 2..=size).step_by(2) {
                data[n * (size + 1) + m] = 0.0;
            }
        }
    }
    let matrix = KernelMatrix::from_data(size, data, "transplant")?
        .with_parameter("lambda", lambda.value())
        .with_parameter("mu", mu.value())
        .with_parameter("parity", match parity {
            Parity::Even => 0.0,
            Parity::Odd => 1.0,
            Parity::Full => 2.0,
        })
        .with_method(format!("gauss-jacobi alpha={} nodes={}", rule.alpha(), rule.len()));
    Ok(TransplantKernel { lambda, mu, parity, matrix })
}

/// `(T_{λ,μ} f)(n) = Σ_m K_{λ,μ}(n,m) f(m)` for `n ≤ N_out`, computed as
/// `Σ_i ω_i p_n^μ(x_i) Σ_m f(m) p_m^λ(x_i)` with a rule exact for every entry used.
pub fn transplant_apply(lambda: OrderParam, mu: OrderParam, f: &FiniteSeq, n_out: usize) -> Result<FiniteSeq> {
    if f.support() > n_out {
        return domain(format!("support {} exceeds N_out = {n_out}", f.support()));
    }
    if n_out > 1 << 20 {
        return Err(Error::Resource(format!("N_out = {n_out} is too large")));
    }
    let rule = rule_for(lambda, mu, n_out + f.support())?;
    let poly = poly_part(lambda, f, &rule);
    let coeffs: Vec<f64> = poly.iter().zip(rule.weights()).map(|(p, w)| p * w).collect();
    Ok(FiniteSeq::new(synthesize(mu, &rule, &coeffs, n_out)))
}

/// `‖f‖₂² − ‖T_{λ,μ} f‖₂²` with the output truncated to `[0, N_out]`.
pub fn isometry_deficiency(lambda: OrderParam, mu: OrderParam, f: &FiniteSeq, n_out: usize) -> Result<f64> {
    let g = transplant_apply(lambda, mu, f, n_out)?;
    let a = f.norm2();
    let b = g.norm2();
    Ok((a - b) * (a + b))
}

/// `‖T_{μ,λ}(χ_{[0,N]} T_{λ,μ} f) − f‖₂` on `[0, N/4]`. Needs `supp f ≤ N/8`.
pub fn roundtrip_defect(lambda: OrderParam, mu: OrderParam, f: &FiniteSeq, n: usize) -> Result<f64> {
    if 8 * f.support() > n {
        return domain(format!("round trip needs supp f ≤ N/8, got supp {} with N = {n}", f.support()));
    }
    let g = transplant_apply(lambda, mu, f, n)?;
    let back = back_to(mu, lambda, &g, n / 4)?;
    Ok(back.sub(&f.truncated(n / 4)).norm2())
}

/// `(T_{a,b} g)(k)` for `k ≤ n_out` where `g` may be longer than `n_out`.
fn back_to(a: OrderParam, b: OrderParam, g: &FiniteSeq, n_out: usize) -> Result<FiniteSeq> {
    let full = transplant_apply(a, b, g, n_out.max(g.support()))?;
    Ok(full.truncated(n_out))
}

/// `|⟨T_{μ,λ} f, g⟩ − ⟨f, T_{λ,μ} g⟩|` with both transplants truncated at `N_out`.
pub fn duality_defect(lambda: OrderParam, mu: OrderParam, f: &FiniteSeq, g: &FiniteSeq, n_out: usize) -> Result<f64> {
    let tf = transplant_apply(mu, lambda, f, n_out)?;
    let tg = transplant_apply(lambda, mu, g, n_out)?;
    Ok((tf.dot(g) - f.dot(&tg)).abs())
}

/// Intermediate orders `λ+1, …, λ+r` with `μ ∈ (λ+r, λ+r+1]`.
pub fn unit_chain(lambda: OrderParam, mu: OrderParam) -> Result<Vec<OrderParam>> {
    let gap = mu.value() - lambda.value();
    if !(gap > 0.0) {
        return domain(format!("chain needs μ > λ, got λ={lambda}, μ={mu}"));
    }
    let r = ((gap - 1e-12).ceil() as usize).saturating_sub(1);
    (1..=r).map(|j| OrderParam::new(lambda.value() + j as f64)).collect()
}

/// `‖T_{λ+r,μ} ∘ … ∘ T_{λ,λ+1} f − T_{λ,μ} f‖₂` on `[0, N/4]`, every intermediate
/// output truncated to `[0, N]`.
pub fn composition_check(lambda: OrderParam, mu: OrderParam, f: &FiniteSeq, n: usize) -> Result<f64> {
    if lambda.value() <= 1.0 {
        return domain(format!("composition check needs λ > 1, got {lambda}"));
    }
    if 8 * f.support() > n {
        return domain(format!("composition check needs supp f ≤ N/8, got supp {} with N = {n}", f.support()));
    }
    let mut orders = vec![lambda];
    orders.extend(unit_chain(lambda, mu)?);
    orders.push(mu);
    let mut g = f.clone();
    for w in orders.windows(2) {
        g = transplant_apply(w[0], w[1], &g, n)?;
    }
    let direct = transplant_apply(lambda, mu, f, n / 4)?;
    Ok(g.truncated(n / 4).sub(&direct).norm2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gauss_jacobi;

    fn o(l: f64) -> OrderParam {
        OrderParam::new(l).unwrap()
    }

    #[test]
    fn identity_and_parity() {
        for n in 0..12 {
            for m in 0..12 {
                let v = transplant_kernel(o(1.7), o(1.7), n, m).unwrap();
                let want = if n == m { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-11, "{n} {m} {v}");
            }
        }
        assert_eq!(transplant_kernel(o(1.2), o(2.0), 0, 1).unwrap(), 0.0);
        let k = build_kernel_matrix(o(0.9), o(0.9), 200, Parity::Full).unwrap();
        for n in 0..=200 {
            for m in 0..=200 {
                let want = if n == m { 1.0 } else { 0.0 };
                assert!((k.get(n, m) - want).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn refined_rule_oracle() {
        let (l, m) = (o(1.5), o(2.5));
        let v = transplant_kernel(l, m, 4, 4).unwrap();
        let rule = gauss_jacobi(kernel_exponent(l, m), 4 * 7).unwrap();
        let bm = OrthoBasis::new(m, 5);
        let bl = OrthoBasis::new(l, 5);
        let w = rule.integrate(|x| bm.eval_p(x, 5)[4] * bl.eval_p(x, 5)[4]);
        assert!((v - w).abs() < 1e-11, "{v} {w}");
    }

    #[test]
    fn parity_lattices() {
        let (l, m) = (o(1.2), o(2.0));
        let full = build_kernel_matrix(l, m, 40, Parity::Full).unwrap();
        let even = build_kernel_matrix(l, m, 20, Parity::Even).unwrap();
        let odd = build_kernel_matrix(l, m, 19, Parity::Odd).unwrap();
        for n in 0..=19 {
            for k in 0..=19 {
                assert!((even.get(n, k) - full.get(2 * n, 2 * k)).abs() < 1e-13);
                assert!((odd.get(n, k) - full.get(2 * n + 1, 2 * k + 1)).abs() < 1e-13);
            }
        }
        assert_eq!(full.get(3, 6), 0.0);
        let swapped = build_kernel_matrix(m, l, 40, Parity::Full).unwrap();
        for n in 0..=40 {
            for k in 0..=40 {
                assert!((full.get(n, k) - swapped.get(k, n)).abs() < 1e-12);
                if (n + k) % 2 == 0 && n.max(k) < 12 {
                    let direct = transplant_kernel(l, m, n, k).unwrap();
                    assert!((full.get(n, k) - direct).abs() < 1e-12);
                }
            }
        }
        assert!(build_kernel_matrix(l, m, MAX_KERNEL_SIZE + 1, Parity::Even).is_err());
    }

    #[test]
    fn apply_matches_matrix() {
        let (l, m) = (o(0.8), o(1.4));
        let f = FiniteSeq::new(vec![0.3, -1.0, 0.25, 0.0, 0.7]);
        let k = build_kernel_matrix(l, m, 60, Parity::Full).unwrap();
        let a = transplant_apply(l, m, &f, 60).unwrap();
        let b = k.matrix().apply(&f);
        assert!(a.sub(&b).norm2() < 1e-12);
        assert!(a.norm2() <= f.norm2() + 1e-10);
        let same = transplant_apply(l, l, &f, 60).unwrap();
        assert!(same.sub(&f).norm2() < 1e-12);
    }

    #[test]
    fn chain_shape() {
        assert!(unit_chain(o(1.2), o(2.2)).unwrap().is_empty());
        let c = unit_chain(o(1.2), o(3.0)).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].value() - 2.2).abs() < 1e-15);
        let f = FiniteSeq::new(vec![1.0, 0.5]);
        assert!(composition_check(o(1.2), o(2.2), &f, 64).unwrap() < 1e-11);
        assert!(roundtrip_defect(o(1.1), o(1.1), &f, 64).unwrap() < 1e-11);
    }

    #[test]
    fn duality_holds() {
        let f = FiniteSeq::new(vec![0.2, -0.4, 1.0, 0.1]);
        let g = FiniteSeq::new(vec![-0.3, 0.0, 0.5, 0.5, 0.9, -0.2]);
        assert!(duality_defect(o(1.5), o(2.5), &f, &g, 128).unwrap() < 1e-9);
    }
}
