//! The λ-transform `F_λ f(x) = Σ_n f(n) φ_n^λ(x)`, its quadrature inverse and a
//! spectral-multiplier engine `f ↦ F_λ^{−1}[m · F_λ f]`.
//!
//! On a Gauss–Jacobi rule with exponent `α` the inverse is
//! `f(n) = Σ_i ω_i (1−x_i²)^{−α} F(x_i) φ_n(x_i)`: the factor `(1−x_i²)^{−α}` undoes
//! the rule's weight. With `α = λ − ½` the integrand `F φ_n (1−x²)^{−α}` is the
//! polynomial `(Σ_k f(k) p_k) p_n`, so the inverse is exact up to degree `2Q − 1`.

use crate::error::{Error, Result};
use crate::hypergroup::{norm2, FiniteSeq};
use crate::specfun::quadrature::{cached_rule, RuleFamily};
use crate::specfun::{OrderParam, OrthoBasis, QuadRule};
use rayon::prelude::*;
use std::io::Write;
use std::sync::Arc;

const NODE_CHUNK: usize = 256;
const MAX_NODES: usize = 1 << 15;

/// Values of a function at the nodes of a rule.
#[derive(Debug, Clone)]
pub struct NodeFunction {
    rule: Arc<QuadRule>,
    values: Vec<f64>,
}

impl NodeFunction {
    pub fn new(rule: Arc<QuadRule>, values: Vec<f64>) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(Error::Config(format!(
                "{} values for a {}-node rule",
                values.len(),
                rule.len()
            )));
        }
        Ok(Self { rule, values })
    }

    pub fn rule(&self) -> &Arc<QuadRule> {
        &self.rule
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pointwise product with `m(x_i)`.
    pub fn multiplied(&self, m: impl Fn(f64) -> f64) -> Self {
        let values = self.rule.nodes().iter().zip(&self.values).map(|(&x, v)| v * m(x)).collect();
        Self { rule: self.rule.clone(), values }
    }

    /// `∫ F(x)² dx` by the rule.
    pub fn l2_norm_sq(&self) -> f64 {
        let a = self.rule.alpha();
        self.rule
            .nodes()
            .iter()
            .zip(self.rule.weights())
            .zip(&self.values)
            .map(|((&x, &w), &v)| w * v * v * one_minus_sq(x).powf(-a))
            .sum()
    }

    /// Writes `node,value` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "value"])?;
        for (x, v) in self.rule.nodes().iter().zip(&self.values) {
            w.write_record([format!("{x:e}"), format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[inline]
pub(crate) fn one_minus_sq(x: f64) -> f64 {
    (1.0 - x) * (1.0 + x)
}

/// Exponent `λ − ½` that makes a rule exact for `F_λ`.
pub fn natural_exponent(order: OrderParam) -> f64 {
    order.value() - 0.5
}

fn check_exponent(order: OrderParam, rule: &QuadRule) -> Result<()> {
    if (rule.alpha() - natural_exponent(order)).abs() > 1e-14 {
        return Err(Error::Config(format!(
            "rule exponent {} does not match λ−½ = {}",
            rule.alpha(),
            natural_exponent(order)
        )));
    }
    Ok(())
}

/// `Σ_k f(k) p_k(x)` at every node (the polynomial part of `F_λ f`).
pub(crate) fn poly_part(order: OrderParam, f: &FiniteSeq, rule: &QuadRule) -> Vec<f64> {
    let nf = f.support();
    let basis = OrthoBasis::new(order, nf + 1);
    rule.nodes()
        .par_iter()
        .map_init(
            || vec![0.0; nf + 1],
            |p, &x| {
                basis.eval_p_into(x, p);
                p.iter().zip(f.values()).map(|(a, b)| a * b).sum()
            },
        )
        .collect()
}

/// `F_λ f(x_i)`. With `exact` set, the rule must have exponent `λ − ½`.
pub fn forward_transform(order: OrderParam, f: &FiniteSeq, rule: &Arc<QuadRule>, exact: bool) -> Result<NodeFunction> {
    if exact {
        check_exponent(order, rule)?;
    }
    let basis = OrthoBasis::new(order, 1);
    let poly = poly_part(order, f, rule);
    let values = rule.nodes().iter().zip(poly).map(|(&x, v)| v * basis.phi_factor(x)).collect();
    NodeFunction::new(rule.clone(), values)
}

/// Accumulates `out[m] = Σ_i c_i p_m(x_i)` for `m ≤ n_out`, in fixed node chunks so
/// the result does not depend on the thread count.
pub(crate) fn synthesize(order: OrderParam, rule: &QuadRule, coeffs: &[f64], n_out: usize) -> Vec<f64> {
    let basis = OrthoBasis::new(order, n_out + 1);
    let nodes = rule.nodes();
    let partials: Vec<Vec<f64>> = nodes
        .par_chunks(NODE_CHUNK)
        .zip(coeffs.par_chunks(NODE_CHUNK))
        .map(|(xs, cs)| {
            let mut out = vec![0.0; n_out + 1];
            let mut p = vec![0.0; n_out + 1];
            for (&x, &c) in xs.iter().zip(cs) {
                if c == 0.0 {
                    continue;
                }
                basis.eval_p_into(x, &mut p);
                for (o, v) in out.iter_mut().zip(&p) {
                    *o += c * v;
                }
            }
            out
        })
        .collect();
    let mut out = vec![0.0; n_out + 1];
    for part in partials {
        for (o, v) in out.iter_mut().zip(part) {
            *o += v;
        }
    }
    out
}

/// `f(n) = Σ_i ω_i (1−x_i²)^{−α} F(x_i) φ_n(x_i)` for `n ≤ n_max`.
pub fn inverse_transform(order: OrderParam, func: &NodeFunction, n_max: usize) -> Result<FiniteSeq> {
    let rule = func.rule();
    let a = rule.alpha();
    let basis = OrthoBasis::new(order, 1);
    let coeffs: Vec<f64> = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .zip(func.values())
        .map(|((&x, &w), &v)| w * v * one_minus_sq(x).powf(-a) * basis.phi_factor(x))
        .collect();
    Ok(FiniteSeq::new(synthesize(order, rule, &coeffs, n_max)))
}

/// Whether `inverse_transform` on `rule` reproduces `n ≤ n_max` exactly for data of
/// support `supp` (polynomial degree count).
pub fn inverse_is_exact(rule: &QuadRule, supp: usize, n_max: usize) -> bool {
    supp + n_max <= rule.exactness()
}

/// Precomputed `u_i = ω_i Σ_k f(k) p_k(x_i)` on a rule of exponent `λ − ½`;
/// `apply(m)` returns `F_λ^{−1}[m F_λ f]` on `0..=n_out`.
#[derive(Debug, Clone)]
pub struct SpectralPlan {
    order: OrderParam,
    rule: Arc<QuadRule>,
    u: Vec<f64>,
    n_out: usize,
}

impl SpectralPlan {
    pub fn new(order: OrderParam, f: &FiniteSeq, n_out: usize, q: usize) -> Result<Self> {
        Self::with_family(order, f, n_out, RuleFamily::Polynomial, q)
    }

    /// A plan on a `q`-point rule of the given family.
    pub fn with_family(order: OrderParam, f: &FiniteSeq, n_out: usize, family: RuleFamily, q: usize) -> Result<Self> {
        let rule = cached_rule(family, natural_exponent(order), q)?;
        let poly = poly_part(order, f, &rule);
        let u = poly.iter().zip(rule.weights()).map(|(p, w)| p * w).collect();
        Ok(Self { order, rule, u, n_out })
    }

    pub fn nodes(&self) -> usize {
        self.rule.len()
    }

    pub fn rule(&self) -> &Arc<QuadRule> {
        &self.rule
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn apply(&self, m: impl Fn(f64) -> f64 + Sync) -> Vec<f64> {
        let coeffs: Vec<f64> = self.rule.nodes().par_iter().zip(&self.u).map(|(&x, &u)| u * m(x)).collect();
        synthesize(self.order, &self.rule, &coeffs, self.n_out)
    }
}

/// Output of an adaptive spectral application.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub seq: FiniteSeq,
    /// Nodes of the accepted rule.
    pub nodes: usize,
    /// `ℓ²` distance between the last two refinements.
    pub agreement: f64,
}

/// Starting node count: exact for polynomial multipliers of degree ≤ 64.
pub fn initial_nodes(f: &FiniteSeq, n_out: usize) -> usize {
    (n_out + f.support()) / 2 + 1 + 32
}

/// `F_λ^{−1}[m F_λ f]` on `0..=n_out` with a fixed rule of exponent `λ − ½`.
pub fn spectral_apply_with_rule(
    order: OrderParam,
    f: &FiniteSeq,
    m: impl Fn(f64) -> f64 + Sync,
    n_out: usize,
    rule: &Arc<QuadRule>,
) -> Result<FiniteSeq> {
    check_exponent(order, rule)?;
    let plan = SpectralPlan::new(order, f, n_out, rule.len())?;
    Ok(FiniteSeq::new(plan.apply(m)))
}

/// `F_λ^{−1}[m F_λ f]` on `0..=n_out`, doubling the rule until two successive
/// outputs agree to `1e−10 · ‖f‖₂` in `ℓ²`.
pub fn spectral_apply(
    order: OrderParam,
    f: &FiniteSeq,
    m: impl Fn(f64) -> f64 + Sync,
    n_out: usize,
) -> Result<SpectralResult> {
    spectral_apply_in(RuleFamily::Polynomial, order, f, m, n_out)
}

/// [`spectral_apply`] on rules of the given family. [`RuleFamily::SqrtEndpoint`]
/// starts from twice as many nodes, since polynomials in `x` have twice the degree
/// in the substituted variable.
pub fn spectral_apply_in(
    family: RuleFamily,
    order: OrderParam,
    f: &FiniteSeq,
    m: impl Fn(f64) -> f64 + Sync,
    n_out: usize,
) -> Result<SpectralResult> {
    let tol = 1e-10 * f.norm2().max(f64::MIN_POSITIVE);
    let mut q = initial_nodes_in(family, f, n_out);
    let mut prev = SpectralPlan::with_family(order, f, n_out, family, q)?.apply(&m);
    loop {
        if 2 * q > MAX_NODES {
            return Err(Error::Accuracy(format!(
                "spectral multiplier did not settle within {MAX_NODES} nodes"
            )));
        }
        q *= 2;
        let cur = SpectralPlan::with_family(order, f, n_out, family, q)?.apply(&m);
        let diff: Vec<f64> = cur.iter().zip(&prev).map(|(a, b)| a - b).collect();
        let agreement = norm2(&diff);
        if agreement <= tol {
            return Ok(SpectralResult { seq: FiniteSeq::new(cur), nodes: q, agreement });
        }
        prev = cur;
    }
}

/// [`initial_nodes`], doubled for [`RuleFamily::SqrtEndpoint`].
pub fn initial_nodes_in(family: RuleFamily, f: &FiniteSeq, n_out: usize) -> usize {
    match family {
        RuleFamily::Polynomial => initial_nodes(f, n_out),
        RuleFamily::SqrtEndpoint => 2 * initial_nodes(f, n_out),
    }
}

/// Default output horizon for semigroup multipliers at time `t`.
pub fn default_n_out(f: &FiniteSeq, t: f64) -> usize {
    f.support() + (8.0 * (1.0 + t)).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::quadrature::gauss_jacobi_cached;
    use crate::hypergroup::apply_laplacian;

    fn o(l: f64) -> OrderParam {
        OrderParam::new(l).unwrap()
    }

    #[test]
    fn delta_transforms_to_phi() {
        let l = o(1.3);
        let rule = gauss_jacobi_cached(0.8, 12).unwrap();
        let f = forward_transform(l, &FiniteSeq::delta(3), &rule, true).unwrap();
        for (&x, &v) in rule.nodes().iter().zip(f.values()) {
            let phi = crate::specfun::phi_sequence(l, 3, x).unwrap();
            assert!((v - phi[3]).abs() < 1e-13);
        }
        let back = inverse_transform(l, &f, 8).unwrap();
        for n in 0..=8 {
            assert!((back.get(n) - if n == 3 { 1.0 } else { 0.0 }).abs() < 1e-11);
        }
    }

    #[test]
    fn exponent_mismatch_is_rejected() {
        let rule = gauss_jacobi_cached(0.0, 8).unwrap();
        assert!(forward_transform(o(1.0), &FiniteSeq::delta(0), &rule, true).is_err());
        assert!(forward_transform(o(1.0), &FiniteSeq::delta(0), &rule, false).is_ok());
    }

    #[test]
    fn plancherel() {
        let l = o(0.6);
        let f = FiniteSeq::new((0..=40).map(|k| ((k * 7 % 11) as f64 - 5.0) / 9.0).collect());
        let rule = gauss_jacobi_cached(l.value() - 0.5, 60).unwrap();
        let ff = forward_transform(l, &f, &rule, true).unwrap();
        assert!((ff.l2_norm_sq() / f.norm2().powi(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_multiplier() {
        let l = o(2.5);
        let f = FiniteSeq::new(vec![0.5, -1.0, 0.25, 0.0, 2.0]);
        let out = spectral_apply(l, &f, |x| 2.0 * (x - 1.0), 6).unwrap();
        let lap = apply_laplacian(l, &f, 1);
        for n in 0..=6 {
            assert!((out.seq.get(n) - lap.get(n)).abs() < 1e-10);
        }
    }
}
