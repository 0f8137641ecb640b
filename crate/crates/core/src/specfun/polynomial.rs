//! Ultraspherical polynomials `P_n^λ` (normalised by `P_n^λ(1) = 1`), their
//! orthonormal versions `p_n = √w_λ(n)·P_n^λ` and the functions
//! `φ_n^λ(x) = p_n(x)(1−x²)^{λ/2−1/4}`.
//!
//! Everything is evaluated with the forward three-term recurrence
//! `2x·p_n = a_n p_{n+1} + a_{n−1} p_{n−1}`, which is stable on `(−1,1)`.

use super::gamma::{lgamma, ln_factorial, ln_poch};
use super::OrderParam;
use crate::error::{domain, Result};
use std::f64::consts::PI;

/// Recurrence coefficient `a_n^λ`, with `a_{−1}^λ = 0`.
pub fn coupling_a(order: OrderParam, n: i64) -> Result<f64> {
    if n < -1 {
        return domain(format!("coupling coefficient needs n >= -1, got {n}"));
    }
    if n == -1 {
        return Ok(0.0);
    }
    Ok(coupling(order.value(), n as usize))
}

#[inline]
pub(crate) fn coupling(lambda: f64, n: usize) -> f64 {
    let n = n as f64;
    (((2.0 * lambda + n) * (n + 1.0)) / ((n + lambda) * (n + 1.0 + lambda))).sqrt()
}

/// `ln w_λ(n)`.
pub fn ln_weight_w(order: OrderParam, n: usize) -> f64 {
    let l = order.value();
    lgamma(l) + ln_poch(2.0 * l, n) + (n as f64 + l).ln()
        - 0.5 * PI.ln()
        - lgamma(l + 0.5)
        - ln_factorial(n)
}

/// Orthogonality weight `w_λ(n) = Γ(λ)(2λ)_n(n+λ) / (√π Γ(λ+1/2) n!)`.
pub fn weight_w(order: OrderParam, n: usize) -> f64 {
    ln_weight_w(order, n).exp()
}

/// Precomputed recurrence coefficients for evaluating `p_0 … p_N` at many points.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    order: OrderParam,
    a: Vec<f64>,
    p0: f64,
}

impl OrthoBasis {
    pub fn new(order: OrderParam, max_degree: usize) -> Self {
        let a = (0..=max_degree).map(|n| coupling(order.value(), n)).collect();
        Self { order, a, p0: weight_w(order, 0).sqrt() }
    }

    pub fn order(&self) -> OrderParam {
        self.order
    }

    pub fn max_degree(&self) -> usize {
        self.a.len() - 1
    }

    /// Fills `out[n] = p_n(x)` for `n < out.len()`.
    pub fn eval_p_into(&self, x: f64, out: &mut [f64]) {
        assert!(out.len() <= self.a.len() + 1, "basis built for a lower degree");
        if out.is_empty() {
            return;
        }
        out[0] = self.p0;
        if out.len() == 1 {
            return;
        }
        out[1] = 2.0 * x * self.p0 / self.a[0];
        for n in 1..out.len() - 1 {
            out[n + 1] = (2.0 * x * out[n] - self.a[n - 1] * out[n - 1]) / self.a[n];
        }
    }

    pub fn eval_p(&self, x: f64, count: usize) -> Vec<f64> {
        let mut out = vec![0.0; count];
        self.eval_p_into(x, &mut out);
        out
    }

    /// The factor `(1−x²)^{λ/2−1/4}` turning `p_n` into `φ_n`.
    #[inline]
    pub fn phi_factor(&self, x: f64) -> f64 {
        (1.0 - x * x).powf(0.5 * self.order.value() - 0.25)
    }
}

fn check_open_interval(x: f64) -> Result<()> {
    if !(x.abs() < 1.0) {
        return domain(format!("x must lie in (-1, 1), got {x}"));
    }
    Ok(())
}

/// `φ_0^λ(x), …, φ_N^λ(x)`.
pub fn phi_sequence(order: OrderParam, n_max: usize, x: f64) -> Result<Vec<f64>> {
    check_open_interval(x)?;
    let basis = OrthoBasis::new(order, n_max);
    let mut p = basis.eval_p(x, n_max + 1);
    let factor = basis.phi_factor(x);
    p.iter_mut().for_each(|v| *v *= factor);
    Ok(p)
}

/// `P_0^λ(x), …, P_N^λ(x)` recovered as `p_n / √w_λ(n)`; valid on `[−1, 1]`.
pub fn ultraspherical_p(order: OrderParam, n_max: usize, x: f64) -> Result<Vec<f64>> {
    if !(x.abs() <= 1.0) {
        return domain(format!("x must lie in [-1, 1], got {x}"));
    }
    let basis = OrthoBasis::new(order, n_max);
    let mut p = basis.eval_p(x, n_max + 1);
    for (n, v) in p.iter_mut().enumerate() {
        *v *= (-0.5 * ln_weight_w(order, n)).exp();
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(l: f64) -> OrderParam {
        OrderParam::new(l).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert!((weight_w(ord(1.0), 0) - 2.0 / PI).abs() < 1e-15);
        assert!((weight_w(ord(1.0), 2) - 18.0 / PI).abs() < 1e-14);
        for n in 0..50 {
            let want = 2.0 * ((n + 1) as f64).powi(2) / PI;
            assert!((weight_w(ord(1.0), n) / want - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coupling_examples() {
        for n in 0..100 {
            assert!((coupling_a(ord(1.0), n).unwrap() - 1.0).abs() < 1e-15);
        }
        assert_eq!(coupling_a(ord(0.7), -1).unwrap(), 0.0);
        assert!(coupling_a(ord(0.7), -2).is_err());
        assert!((coupling_a(ord(2.0), 0).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        for &l in &[0.3, 1.7, 6.0] {
            for n in 0..200 {
                let a = coupling_a(ord(l), n).unwrap();
                assert!(a > 0.0 && a < 2.0);
            }
        }
    }

    #[test]
    fn phi_chebyshev_closed_form() {
        let theta = PI / 3.0;
        let phi = phi_sequence(ord(1.0), 200, theta.cos()).unwrap();
        for (n, v) in phi.iter().enumerate() {
            let want = (2.0 / PI).sqrt() * ((n + 1) as f64 * theta).sin() / theta.sin().sqrt();
            assert!((v - want).abs() < 1e-12, "n={n}");
        }
        let phi0 = phi_sequence(ord(1.0), 0, 0.0).unwrap();
        assert!((phi0[0] - (2.0 / PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn phi_rejects_endpoints() {
        assert!(phi_sequence(ord(1.0), 3, 1.0).is_err());
        assert!(phi_sequence(ord(1.0), 3, -1.2).is_err());
    }

    #[test]
    fn ultraspherical_bounded_and_normalised() {
        for &l in &[0.4, 1.0, 2.5] {
            let at_one = ultraspherical_p(ord(l), 60, 1.0).unwrap();
            for v in at_one {
                assert!((v - 1.0).abs() < 1e-10);
            }
            for i in 0..200 {
                let x = -0.999 + 1.998 * i as f64 / 199.0;
                for v in ultraspherical_p(ord(l), 60, x).unwrap() {
                    assert!(v.abs() <= 1.0 + 1e-10);
                }
            }
        }
    }
}
