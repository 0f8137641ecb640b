//! Gauss–Jacobi rules for the symmetric weight `(1−x²)^α` on `(−1, 1)`, plus a
//! substituted variant for integrands with a `√(1−x)` endpoint singularity.
//!
//! Nodes are the eigenvalues of the Jacobi matrix of the weight (implicit QL,
//! eigenvalues only), polished by Newton steps on `p_Q`. Weights come from the
//! Christoffel function `1 / Σ_{n<Q} p_n(x_i)²`, which keeps full relative
//! accuracy for the tiny weights next to `±1`.

use super::gamma::lgamma;
use crate::error::{domain, Error, Result};
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};

/// A symmetric Gauss–Jacobi rule, exact for polynomials of degree `≤ 2Q−1`.
#[derive(Debug, Clone, Serialize)]
pub struct QuadRule {
    alpha: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    exactness: usize,
}

impl QuadRule {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    /// Highest polynomial degree integrated exactly.
    pub fn exactness(&self) -> usize {
        self.exactness
    }

    /// `Σ ω_i q(x_i)`, approximating `∫ q(x)(1−x²)^α dx`.
    pub fn integrate(&self, mut q: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * q(x)).sum()
    }

    /// Writes `node,weight` rows (with header).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "weight"])?;
        for (x, o) in self.nodes.iter().zip(&self.weights) {
            w.write_record([format!("{x:e}"), format!("{o:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `∫_{−1}^{1} (1−x²)^α dx = B(1/2, α+1)`.
pub fn weight_mass(alpha: f64) -> f64 {
    (0.5 * PI.ln() + lgamma(alpha + 1.0) - lgamma(alpha + 1.5)).exp()
}

/// Off-diagonal entries `b_1 … b_{count}` of the orthonormal recurrence
/// `x p_n = b_{n+1} p_{n+1} + b_n p_{n−1}` for the weight `(1−x²)^α`.
pub(crate) fn jacobi_offdiag(alpha: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|n| {
            let n = n as f64;
            let beta = if n == 1.0 {
                1.0 / (3.0 + 2.0 * alpha)
            } else {
                n * (n + 2.0 * alpha) / ((2.0 * n + 2.0 * alpha + 1.0) * (2.0 * n + 2.0 * alpha - 1.0))
            };
            beta.sqrt()
        })
        .collect()
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// sub-diagonal `e` (`e.len() == d.len() − 1`), by implicit QL with Wilkinson shifts.
pub(crate) fn tridiagonal_eigenvalues(mut d: Vec<f64>, e_in: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&e_in[..n.saturating_sub(1)]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numeric("tridiagonal QL failed to converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(d)
}

/// Orthonormal `p_Q(x)` and `p_Q'(x)` up to a common positive factor.
fn newton_pair(b: &[f64], q: usize, x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (0.0, 1.0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    for n in 0..q {
        let b_prev = if n == 0 { 0.0 } else { b[n - 1] };
        let p_next = (x * p - b_prev * p_prev) / b[n];
        let d_next = (x * d + p - b_prev * d_prev) / b[n];
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Builds the `Q`-point rule for the weight `(1−x²)^α`.
pub fn gauss_jacobi(alpha: f64, q: usize) -> Result<QuadRule> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return domain(format!("Gauss–Jacobi exponent must exceed -1, got {alpha}"));
    }
    if q == 0 {
        return domain("Gauss–Jacobi rule needs at least one node");
    }
    let mass = weight_mass(alpha);
    if q == 1 {
        return Ok(QuadRule { alpha, nodes: vec![0.0], weights: vec![mass], exactness: 1 });
    }
    let b = jacobi_offdiag(alpha, q);
    let mut nodes = tridiagonal_eigenvalues(vec![0.0; q], &b[..q - 1])?;
    for x in nodes.iter_mut() {
        for _ in 0..2 {
            let (p, dp) = newton_pair(&b, q, *x);
            let step = p / dp;
            if step.is_finite() && step.abs() < 1e-8 {
                *x -= step;
            }
        }
    }
    // Symmetrise; the weight is even.
    for i in 0..q / 2 {
        let s = 0.5 * (nodes[q - 1 - i] - nodes[i]);
        nodes[i] = -s;
        nodes[q - 1 - i] = s;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    let p0 = 1.0 / mass.sqrt();
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let (mut p_prev, mut p) = (0.0, p0);
            let mut sum = p * p;
            for n in 0..q - 1 {
                let b_prev = if n == 0 { 0.0 } else { b[n - 1] };
                let p_next = (x * p - b_prev * p_prev) / b[n];
                p_prev = p;
                p = p_next;
                sum += p * p;
            }
            1.0 / sum
        })
        .collect();
    for i in 0..q / 2 {
        let w = 0.5 * (weights[i] + weights[q - 1 - i]);
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if nodes.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Numeric("Gauss–Jacobi nodes are not strictly increasing".into()));
    }
    Ok(QuadRule { alpha, nodes, weights, exactness: 2 * q - 1 })
}

/// `(nodes, weights)` of the `Q`-point Gauss rule for `(1−y)^a (1+y)^b` on `(−1, 1)`,
/// by the same eigenvalue and Christoffel route as [`gauss_jacobi`].
fn gauss_jacobi_ab(a: f64, b: f64, q: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = a + b;
    let diag: Vec<f64> = (0..q)
        .map(|n| {
            if n == 0 {
                (b - a) / (s + 2.0)
            } else {
                let m = 2.0 * n as f64 + s;
                (b * b - a * a) / (m * (m + 2.0))
            }
        })
        .collect();
    // off[n−1] = √β_n, n = 1..=q
    let off: Vec<f64> = (1..=q)
        .map(|n| {
            let nf = n as f64;
            let beta = if n == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + s).powi(2) * (3.0 + s))
            } else {
                let m = 2.0 * nf + s;
                4.0 * nf * (nf + a) * (nf + b) * (nf + s) / (m * m * (m + 1.0) * (m - 1.0))
            };
            beta.sqrt()
        })
        .collect();
    let ln_mass = (s + 1.0) * std::f64::consts::LN_2 + lgamma(a + 1.0) + lgamma(b + 1.0) - lgamma(s + 2.0);
    if q == 1 {
        return Ok((vec![diag[0]], vec![ln_mass.exp()]));
    }
    let mut nodes = tridiagonal_eigenvalues(diag.clone(), &off[..q - 1])?;
    // orthonormal p_0 … p_{Q−1} at y, and p_Q, p_Q' up to a common factor
    let eval = |y: f64| -> (f64, f64, f64) {
        let (mut p_prev, mut p) = (0.0, 1.0);
        let (mut d_prev, mut d) = (0.0, 0.0);
        let mut sum = 1.0;
        for n in 0..q {
            let b_prev = if n == 0 { 0.0 } else { off[n - 1] };
            let p_next = ((y - diag[n]) * p - b_prev * p_prev) / off[n];
            let d_next = ((y - diag[n]) * d + p - b_prev * d_prev) / off[n];
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
            if n + 1 < q {
                sum += p * p;
            }
        }
        (p, d, sum)
    };
    for y in nodes.iter_mut() {
        for _ in 0..2 {
            let (p, dp, _) = eval(*y);
            let step = p / dp;
            if step.is_finite() && step.abs() < 1e-8 {
                *y -= step;
            }
        }
    }
    let mass = ln_mass.exp();
    let weights = nodes.iter().map(|&y| mass / eval(y).2).collect();
    if nodes.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Numeric("Gauss–Jacobi nodes are not strictly increasing".into()));
    }
    Ok((nodes, weights))
}

/// A `Q`-point rule for `∫ q(x)(1−x²)^α dx` built for integrands that are smooth
/// functions of `√(1−x)`, such as `e^{−t√(2(1−x))}` times a polynomial.
///
/// With `x = 1 − 2s²` the integral becomes `4^{α+1} ∫_0^1 q(1−2s²) s^{2α+1}(1−s²)^α ds`;
/// `s = (1+y)/2` turns this into a Gauss–Jacobi integral in `y` with exponents
/// `(α, 2α+1)` and the analytic factor `((3+y)/2)^α`. The rule is not exact for
/// polynomials in `x` (its `exactness` is 0), but converges geometrically for
/// integrands analytic in `s`. Nodes are returned in increasing `x`.
pub fn gauss_jacobi_root(alpha: f64, q: usize) -> Result<QuadRule> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return domain(format!("Gauss–Jacobi exponent must exceed -1, got {alpha}"));
    }
    if q == 0 {
        return domain("Gauss–Jacobi rule needs at least one node");
    }
    let (ys, ws) = gauss_jacobi_ab(alpha, 2.0 * alpha + 1.0, q)?;
    // 4^{α+1} · 2^{−(3α+2)} = 2^{−α}
    let scale = 2f64.powf(-alpha);
    let mut pairs: Vec<(f64, f64)> = ys
        .iter()
        .zip(&ws)
        .map(|(&y, &w)| {
            let s = 0.5 * (1.0 + y);
            // 1 − 2s² without cancellation near x = −1
            let x = (1.0 - s * s) - s * s;
            (x, scale * w * (0.5 * (3.0 + y)).powf(alpha))
        })
        .collect();
    pairs.reverse();
    let (nodes, weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    if nodes.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Numeric("substituted nodes are not strictly increasing".into()));
    }
    Ok(QuadRule { alpha, nodes, weights, exactness: 0 })
}

/// Node placement of a cached rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleFamily {
    /// [`gauss_jacobi`]: exact for polynomials.
    Polynomial,
    /// [`gauss_jacobi_root`]: for smooth functions of `√(1−x)`.
    SqrtEndpoint,
}

type RuleCache = Mutex<HashMap<(RuleFamily, u64, usize), Arc<QuadRule>>>;

/// Memoised [`gauss_jacobi`]; rules are immutable and shared.
pub fn gauss_jacobi_cached(alpha: f64, q: usize) -> Result<Arc<QuadRule>> {
    cached_rule(RuleFamily::Polynomial, alpha, q)
}

/// Memoised rule of either family.
pub fn cached_rule(family: RuleFamily, alpha: f64, q: usize) -> Result<Arc<QuadRule>> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (family, alpha.to_bits(), q);
    if let Some(rule) = cache.lock().unwrap().get(&key) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(match family {
        RuleFamily::Polynomial => gauss_jacobi(alpha, q)?,
        RuleFamily::SqrtEndpoint => gauss_jacobi_root(alpha, q)?,
    });
    let mut guard = cache.lock().unwrap();
    if guard.len() > 256 {
        guard.clear();
    }
    guard.insert(key, rule.clone());
    Ok(rule)
}
