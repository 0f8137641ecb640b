use crate::error::{domain, Result};
use crate::hypergroup::{apply_laplacian, FiniteSeq, TranslationBand};
use crate::specfun::gamma::lgamma;
use crate::specfun::{ln_weight_w, scaled_heat_factor, OrderParam, ScaledBesselRow};
use crate::transform::{default_n_out, spectral_apply};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative level below which the tail of a kernel row is dropped.
pub(crate) const ROW_CUTOFF: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeatRoute {
    Convolution,
    Spectral,
}

pub(crate) fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("time must be finite and > 0, got {t}"));
    }
    Ok(())
}

fn ln_prefactor(order: OrderParam) -> f64 {
    0.5 * PI.ln() + lgamma(order.value() + 0.5)
}

/// `h_t^λ(n) = √π Γ(λ+½) √w_λ(n) e^{−2t} t^{−λ} I_{λ+n}(2t)`.
pub fn heat_kernel_coeff(order: OrderParam, t: f64, n: usize) -> Result<f64> {
    check_t(t)?;
    let s = scaled_heat_factor(order, n, t)?;
    Ok((ln_prefactor(order) + 0.5 * ln_weight_w(order, n)).exp() * s)
}

/// `√π Γ(λ+½) √w_λ(k)` for `k ≤ k_max`, reused across times.
#[derive(Debug, Clone)]
pub(crate) struct KernelScale {
    order: OrderParam,
    scale: Vec<f64>,
}

impl KernelScale {
    pub(crate) fn new(order: OrderParam, k_max: usize) -> Self {
        let c = ln_prefactor(order);
        let scale = (0..=k_max).map(|k| (c + 0.5 * ln_weight_w(order, k)).exp()).collect();
        Self { order, scale }
    }

    pub(crate) fn k_max(&self) -> usize {
        self.scale.len() - 1
    }

    /// `h_t(0..=k_max)`, tail after the peak cut at `ROW_CUTOFF · max`.
    pub(crate) fn row(&self, t: f64) -> Result<Vec<f64>> {
        let bessel = ScaledBesselRow::new(self.order, t, self.k_max())?;
        let mut h: Vec<f64> = bessel.values().iter().zip(&self.scale).map(|(s, c)| s * c).collect();
        truncate_tail(&mut h);
        Ok(h)
    }

    /// `h_t(0..=k_max)` without the tail cut, smooth in `t`.
    pub(crate) fn row_full(&self, t: f64) -> Result<Vec<f64>> {
        let bessel = ScaledBesselRow::new(self.order, t, self.k_max())?;
        Ok(bessel.values().iter().zip(&self.scale).map(|(s, c)| s * c).collect())
    }

    /// `(h_t(k), ψ_t(k))` for `k ≤ k_max`, with `ψ_t(k) = h_t(k)(k − 2t(1 − I_{λ+k+1}/I_{λ+k}))`.
    pub(crate) fn row_with_psi(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let bessel = ScaledBesselRow::new(self.order, t, self.k_max())?;
        let h: Vec<f64> = bessel.values().iter().zip(&self.scale).map(|(s, c)| s * c).collect();
        let psi = h.iter().enumerate().map(|(k, v)| v * bessel.log_derivative(k)).collect();
        Ok((h, psi))
    }
}

fn truncate_tail(h: &mut Vec<f64>) {
    let (arg, max) = h.iter().enumerate().fold((0, 0.0f64), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    if let Some(cut) = h.iter().skip(arg).position(|&v| v < ROW_CUTOFF * max) {
        h.truncate(arg + cut);
    }
}

/// `h_t(0..=n_max)`, truncated where it falls below `1e−18` of its maximum.
pub fn heat_kernel_row(order: OrderParam, t: f64, n_max: usize) -> Result<Vec<f64>> {
    check_t(t)?;
    KernelScale::new(order, n_max).row(t)
}

/// `ψ_t(k) = t ∂_t h_t(k)` from the three-term combination of `h_t(k−1), h_t(k), h_t(k+1)`
/// (with `h_t(−1) = 0`). Loses about `log10 t` digits to cancellation at large `t`;
/// [`psi_heat_row`] does not.
pub fn psi_heat_kernel(order: OrderParam, t: f64, k: usize) -> Result<f64> {
    check_t(t)?;
    let l = order.value();
    let kf = k as f64;
    let h0 = heat_kernel_coeff(order, t, k)?;
    let hp = heat_kernel_coeff(order, t, k + 1)?;
    let lw = ln_weight_w(order, k);
    let up = ((2.0 * l + kf) / (l + kf))
        * ((0.5 * (lw - ln_weight_w(order, k + 1))).exp() * t * hp - t * h0);
    let down = if k == 0 {
        0.0
    } else {
        let hm = heat_kernel_coeff(order, t, k - 1)?;
        (kf / (l + kf)) * ((0.5 * (lw - ln_weight_w(order, k - 1))).exp() * t * hm - t * h0)
    };
    Ok(down + up)
}

/// `ψ_t(0..=k_max)` through the Bessel ratio recurrence.
pub fn psi_heat_row(order: OrderParam, t: f64, k_max: usize) -> Result<Vec<f64>> {
    check_t(t)?;
    Ok(KernelScale::new(order, k_max).row_with_psi(t)?.1)
}

/// `W_t f` on `0..=n_out` (default `supp f + ⌈8(1+t)⌉`).
pub fn heat_apply(order: OrderParam, t: f64, f: &FiniteSeq, route: HeatRoute, n_out: Option<usize>) -> Result<FiniteSeq> {
    check_t(t)?;
    let n_out = n_out.unwrap_or_else(|| default_n_out(f, t));
    match route {
        HeatRoute::Convolution => {
            let band = TranslationBand::new(order, f, n_out);
            let h = KernelScale::new(order, band.kernel_len()).row(t)?;
            Ok(FiniteSeq::new(band.apply(&h)))
        }
        HeatRoute::Spectral => {
            Ok(spectral_apply(order, f, |x| (-2.0 * t * (1.0 - x)).exp(), n_out)?.seq)
        }
    }
}

/// `∂_t^k W_t f = W_t(Δ_λ^k f)`.
pub fn heat_time_derivative(order: OrderParam, t: f64, k: usize, f: &FiniteSeq, n_out: Option<usize>) -> Result<FiniteSeq> {
    let n_out = n_out.unwrap_or_else(|| default_n_out(f, t) + k);
    heat_apply(order, t, &apply_laplacian(order, f, k), HeatRoute::Convolution, Some(n_out))
}

/// `∂_t^k W_t f` with the multiplier `(2(x−1))^k e^{−2t(1−x)}`.
pub fn heat_time_derivative_spectral(order: OrderParam, t: f64, k: usize, f: &FiniteSeq, n_out: Option<usize>) -> Result<FiniteSeq> {
    check_t(t)?;
    let n_out = n_out.unwrap_or_else(|| default_n_out(f, t) + k);
    let m = |x: f64| (2.0 * (x - 1.0)).powi(k as i32) * (-2.0 * t * (1.0 - x)).exp();
    Ok(spectral_apply(order, f, m, n_out)?.seq)
}

/// `∂_t W_t f(n) = t^{−1} Σ_k ψ_t(k) (τ_n f)(k)`.
pub fn heat_time_derivative_psi(order: OrderParam, t: f64, f: &FiniteSeq, n_out: Option<usize>) -> Result<FiniteSeq> {
    check_t(t)?;
    let n_out = n_out.unwrap_or_else(|| default_n_out(f, t) + 1);
    let band = TranslationBand::new(order, f, n_out);
    let (_, psi) = KernelScale::new(order, band.kernel_len()).row_with_psi(t)?;
    Ok(FiniteSeq::new(band.apply(&psi).into_iter().map(|v| v / t).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::weight_w;

    fn o(l: f64) -> OrderParam {
        OrderParam::new(l).unwrap()
    }

    #[test]
    fn small_time_limit() {
        for l in [0.6, 1.0, 2.5] {
            let h0 = heat_kernel_coeff(o(l), 1e-6, 0).unwrap();
            assert!((h0 * weight_w(o(l), 0).sqrt() - 1.0).abs() < 1e-5);
            let h3 = heat_kernel_coeff(o(l), 1e-6, 3).unwrap();
            assert!(h3 < 1e-15);
        }
    }

    #[test]
    fn value_at_unit_time() {
        let h = heat_kernel_coeff(o(1.0), 1.0, 0).unwrap();
        let want = PI.sqrt() * 0.5 * PI.sqrt() * (2.0 / PI).sqrt() * (-2.0f64).exp() * 1.590_636_854_637_329;
        assert!((h / want - 1.0).abs() < 1e-14);
    }

    #[test]
    fn psi_routes_agree() {
        let l = o(1.5);
        for &t in &[0.01, 0.7, 5.0, 40.0] {
            let row = psi_heat_row(l, t, 20).unwrap();
            for k in [0usize, 1, 4, 20] {
                let a = psi_heat_kernel(l, t, k).unwrap();
                assert!((a - row[k]).abs() <= 1e-10 * a.abs().max(1e-300) + 1e-300, "t={t} k={k} {a} {}", row[k]);
                let dt = t * 1e-4;
                let fd = t * (heat_kernel_coeff(l, t + dt, k).unwrap() - heat_kernel_coeff(l, t - dt, k).unwrap()) / (2.0 * dt);
                assert!((fd - a).abs() <= 1e-6 * a.abs(), "t={t} k={k}");
            }
        }
    }

    #[test]
    fn routes_agree() {
        let l = o(0.6);
        let f = FiniteSeq::new(vec![0.2, -0.4, 0.1, 0.8, -0.3]);
        for &t in &[0.01, 0.5, 3.0] {
            let a = heat_apply(l, t, &f, HeatRoute::Convolution, None).unwrap();
            let b = heat_apply(l, t, &f, HeatRoute::Spectral, None).unwrap();
            assert!(a.sub(&b).norm2() < 1e-9);
            assert!(a.norm2() <= f.norm2() + 1e-12);
        }
    }

    #[test]
    fn not_markovian() {
        let f = FiniteSeq::new(vec![1.0; 65]);
        let w = heat_apply(o(1.0), 1.0, &f, HeatRoute::Convolution, None).unwrap();
        assert!((w.get(0) - 1.0).abs() > 1e-3);
    }
}
