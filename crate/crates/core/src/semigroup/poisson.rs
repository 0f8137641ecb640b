use super::heat::{check_t, KernelScale};
use crate::error::{domain, Error, Result};
use crate::hypergroup::{norm2, FiniteSeq, TranslationBand};
use crate::specfun::RuleFamily;
use crate::transform::{default_n_out, initial_nodes_in, spectral_apply_in, SpectralPlan};
use crate::OrderParam;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoissonRoute {
    Subordination,
    Spectral,
}

const MAX_HALVINGS: usize = 7;
const MAX_NODES: usize = 1 << 15;

/// `√(2(1−x))`, the Poisson exponent at a node.
#[inline]
pub(crate) fn poisson_root(x: f64) -> f64 {
    (2.0 * (1.0 - x)).max(0.0).sqrt()
}

/// `∂_t^k [t e^{−t²/(4s)}]` for `k ≤ 2`.
fn subordination_weight(k: usize, t: f64, s: f64) -> f64 {
    let e = (-t * t / (4.0 * s)).exp();
    match k {
        0 => t * e,
        1 => e * (1.0 - t * t / (2.0 * s)),
        _ => e * (t * t * t / (4.0 * s * s) - 1.5 * t / s),
    }
}

/// Integration range in `y = ln s` for kernels `h_s(k)`, `k ≤ k_max`. Below
/// `t²/240` the factor `e^{−t²/(4s)}` is under `e^{−60}`. Above `k_max²` the rows
/// behave like `k^λ s^{−λ−½}`, so the integrand decays like `e^{−(λ+1)y}` and
/// `30/(λ+1)` more units of `y` put the tail below `e^{−30}` of its size there.
fn subordination_range(order: OrderParam, t: f64, k_max: usize) -> (f64, f64) {
    let l = order.value();
    let lo = (t * t / 240.0).ln();
    let k2 = (k_max as f64 + 1.0).powi(2);
    let hi = (100.0 * t * t).max((1e10 * t).powf(1.0 / (l + 1.0))).ln().max(k2.ln() + 30.0 / (l + 1.0));
    (lo, hi)
}

/// `∂_t^k P_t f = (2√π)^{−1} ∫ ∂_t^k[t e^{−t²/(4s)}] s^{−3/2} W_s f ds`, as a trapezoid
/// rule in `y = ln s`, halving the step from 0.25 until the `ℓ²` change is `≤ 1e−10`
/// relative.
///
/// The range comes from [`subordination_range`] with the kernel length of the band.
fn subordinate(order: OrderParam, t: f64, k: usize, f: &FiniteSeq, n_out: usize) -> Result<FiniteSeq> {
    let band = TranslationBand::new(order, f, n_out);
    let scale = KernelScale::new(order, band.kernel_len());
    let (lo, hi) = subordination_range(order, t, band.kernel_len());
    let sample = |y: f64| -> Result<Vec<f64>> {
        let s = y.exp();
        let c = subordination_weight(k, t, s) / (s.sqrt() * 2.0 * PI.sqrt());
        let h = scale.row(s)?;
        Ok(band.apply(&h).into_iter().map(|v| c * v).collect())
    };
    let mut intervals = ((hi - lo) / 0.25).ceil() as usize;
    let mut step = (hi - lo) / intervals as f64;
    let mut sum = vec![0.0; n_out + 1];
    for j in 0..=intervals {
        let w = if j == 0 || j == intervals { 0.5 } else { 1.0 };
        for (a, v) in sum.iter_mut().zip(sample(lo + j as f64 * step)?) {
            *a += w * v;
        }
    }
    let mut prev: Vec<f64> = sum.iter().map(|v| v * step).collect();
    for _ in 0..MAX_HALVINGS {
        for j in 0..intervals {
            for (a, v) in sum.iter_mut().zip(sample(lo + (j as f64 + 0.5) * step)?) {
                *a += v;
            }
        }
        intervals *= 2;
        step *= 0.5;
        let cur: Vec<f64> = sum.iter().map(|v| v * step).collect();
        let diff: Vec<f64> = cur.iter().zip(&prev).map(|(a, b)| a - b).collect();
        if norm2(&diff) <= 1e-10 * norm2(&cur).max(f64::MIN_POSITIVE) {
            return Ok(FiniteSeq::new(cur));
        }
        prev = cur;
    }
    Err(Error::Accuracy(format!("subordination integral did not settle at t={t}")))
}

/// `t ∂_t p_t(k)` for `k ≤ k_max`, where `p_t = (2√π)^{−1} ∫ t e^{−t²/(4s)} s^{−3/2} h_s ds`
/// is the Poisson kernel sequence. Same quadrature as the operator route, with the
/// stopping test on the sup change relative to the sup of the row.
pub(crate) fn poisson_psi_coeffs(order: OrderParam, t: f64, scale: &KernelScale) -> Result<Vec<f64>> {
    check_t(t)?;
    let len = scale.k_max() + 1;
    let (lo, hi) = subordination_range(order, t, scale.k_max());
    let add = |sum: &mut [f64], y: f64, w: f64| -> Result<()> {
        let s = y.exp();
        let c = w * t * subordination_weight(1, t, s) / (s.sqrt() * 2.0 * PI.sqrt());
        for (a, v) in sum.iter_mut().zip(scale.row_full(s)?) {
            *a += c * v;
        }
        Ok(())
    };
    let mut intervals = ((hi - lo) / 0.25).ceil() as usize;
    let mut step = (hi - lo) / intervals as f64;
    let mut sum = vec![0.0; len];
    for j in 0..=intervals {
        add(&mut sum, lo + j as f64 * step, if j == 0 || j == intervals { 0.5 } else { 1.0 })?;
    }
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut prev: Vec<f64> = sum.iter().map(|v| v * step).collect();
    for _ in 0..MAX_HALVINGS {
        for j in 0..intervals {
            add(&mut sum, lo + (j as f64 + 0.5) * step, 1.0)?;
        }
        intervals *= 2;
        step *= 0.5;
        let cur: Vec<f64> = sum.iter().map(|v| v * step).collect();
        let change = cur.iter().zip(&prev).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if change <= 1e-10 * sup(&cur).max(f64::MIN_POSITIVE) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Accuracy(format!("Poisson kernel integral did not settle at t={t}")))
}

/// `P_t f` on `0..=n_out` (default `supp f + ⌈8(1+t)⌉`).
pub fn poisson_apply(order: OrderParam, t: f64, f: &FiniteSeq, route: PoissonRoute, n_out: Option<usize>) -> Result<FiniteSeq> {
    check_t(t)?;
    let n_out = n_out.unwrap_or_else(|| default_n_out(f, t));
    match route {
        PoissonRoute::Subordination => subordinate(order, t, 0, f, n_out),
        PoissonRoute::Spectral => {
            Ok(spectral_apply_in(RuleFamily::SqrtEndpoint, order, f, |x| (-t * poisson_root(x)).exp(), n_out)?.seq)
        }
    }
}

/// `∂_t^k P_t f` with the multiplier `(−√(2(1−x)))^k e^{−t√(2(1−x))}`.
pub fn poisson_time_derivative(order: OrderParam, t: f64, k: usize, f: &FiniteSeq, n_out: Option<usize>) -> Result<FiniteSeq> {
    check_t(t)?;
    let n_out = n_out.unwrap_or_else(|| default_n_out(f, t));
    let m = |x: f64| {
        let r = poisson_root(x);
        (-r).powi(k as i32) * (-t * r).exp()
    };
    Ok(spectral_apply_in(RuleFamily::SqrtEndpoint, order, f, m, n_out)?.seq)
}

/// `∂_t^k P_t f` for `k ≤ 2` by differentiating the subordination integrand.
pub fn poisson_time_derivative_subordinated(order: OrderParam, t: f64, k: usize, f: &FiniteSeq, n_out: Option<usize>) -> Result<FiniteSeq> {
    check_t(t)?;
    if k > 2 {
        return domain("subordinated Poisson derivatives are provided for k ≤ 2 only");
    }
    let n_out = n_out.unwrap_or_else(|| default_n_out(f, t));
    subordinate(order, t, k, f, n_out)
}

/// A spectral plan (on [`RuleFamily::SqrtEndpoint`] rules) for `t^k ∂_t^k P_t f` on `0..=n_out` whose node count is doubled
/// until outputs at probe times `10^{-3} … 10^{2}` agree with the doubled rule to
/// `1e−10 ‖f‖₂`. Returns the plan and the achieved agreement.
pub fn poisson_plan(order: OrderParam, f: &FiniteSeq, n_out: usize, k: usize) -> Result<(SpectralPlan, f64)> {
    let probes = [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0];
    let tol = 1e-10 * f.norm2().max(f64::MIN_POSITIVE);
    let eval = |plan: &SpectralPlan, t: f64| {
        plan.apply(|x| {
            let r = poisson_root(x);
            (-t * r).powi(k as i32) * (-t * r).exp()
        })
    };
    let family = RuleFamily::SqrtEndpoint;
    let mut q = initial_nodes_in(family, f, n_out).next_power_of_two();
    let mut plan = SpectralPlan::with_family(order, f, n_out, family, q)?;
    while 2 * q <= MAX_NODES {
        let next = SpectralPlan::with_family(order, f, n_out, family, 2 * q)?;
        let mut worst: f64 = 0.0;
        for &t in &probes {
            let a = eval(&plan, t);
            let b = eval(&next, t);
            let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            worst = worst.max(norm2(&d));
        }
        if worst <= tol {
            return Ok((next, worst));
        }
        plan = next;
        q *= 2;
    }
    Err(Error::Accuracy(format!("Poisson multiplier did not settle within {MAX_NODES} nodes")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(l: f64) -> OrderParam {
        OrderParam::new(l).unwrap()
    }

    #[test]
    fn routes_agree() {
        let l = o(1.5);
        let f = FiniteSeq::new(vec![0.5, 0.1, -0.7, 0.3]);
        for &t in &[0.1, 1.0, 10.0] {
            let a = poisson_apply(l, t, &f, PoissonRoute::Subordination, Some(40)).unwrap();
            let b = poisson_apply(l, t, &f, PoissonRoute::Spectral, Some(40)).unwrap();
            assert!(a.sub(&b).norm2() < 1e-6, "t={t} {}", a.sub(&b).norm2());
            assert!(b.norm2() <= f.norm2() + 1e-9);
        }
    }

    #[test]
    fn derivative_routes_agree() {
        let l = o(0.6);
        let f = FiniteSeq::delta(0);
        for k in 1..=2 {
            let a = poisson_time_derivative(l, 0.5, k, &f, Some(30)).unwrap();
            let b = poisson_time_derivative_subordinated(l, 0.5, k, &f, Some(30)).unwrap();
            assert!(a.sub(&b).norm2() < 1e-5 * a.norm2(), "k={k}");
        }
        let d = poisson_time_derivative(l, 0.01, 1, &f, Some(10)).unwrap();
        assert!(d.get(0) < 0.0);
    }
}
