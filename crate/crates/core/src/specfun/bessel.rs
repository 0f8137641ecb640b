//! Modified Bessel functions of the first kind, through three independent routes
//! (power series, backward ratio recurrence, integral over a Gauss–Jacobi rule),
//! and the scaled factor `e^{−2t} t^{−λ} I_{λ+n}(2t)` used by the heat kernel.

use super::gamma::{lgamma, LogSum};
use super::quadrature::gauss_jacobi_cached;
use super::OrderParam;
use crate::error::{domain, Error, Result};
use std::f64::consts::PI;

/// Above this `t` the scaled factor switches from the series to the ratio recurrence.
const SERIES_T_MAX: f64 = 20.0;
const MAX_DOUBLING_NODES: usize = 1 << 15;

fn check_nu_z(nu: f64, z: f64) -> Result<()> {
    if !(nu > -0.5) || !nu.is_finite() {
        return domain(format!("Bessel order must exceed -1/2, got {nu}"));
    }
    if !(z > 0.0) || !z.is_finite() {
        return domain(format!("Bessel argument must be > 0, got {z}"));
    }
    Ok(())
}

/// `ln Σ_j (z²/4)^j / (j! Γ(ν+j+1))`, all terms positive.
fn ln_series_core(nu: f64, z: f64) -> f64 {
    let q = 0.25 * z * z;
    let lq = q.ln();
    let mut acc = LogSum::new();
    let mut term = -lgamma(nu + 1.0);
    let mut j = 0usize;
    loop {
        acc.add(term);
        let jf = j as f64;
        // Past the peak and negligible against the running sum.
        if q < (jf + 1.0) * (nu + jf + 1.0) && term < acc.value() + (1e-18f64).ln() {
            break;
        }
        term += lq - (jf + 1.0).ln() - (nu + jf + 1.0).ln();
        j += 1;
    }
    acc.value()
}

/// `ln I_ν(z)` from the power series.
pub fn ln_bessel_i_series(nu: f64, z: f64) -> Result<f64> {
    check_nu_z(nu, z)?;
    Ok(nu * (0.5 * z).ln() + ln_series_core(nu, z))
}

/// `I_ν(z)` from the power series.
pub fn bessel_i_series(nu: f64, z: f64) -> Result<f64> {
    Ok(ln_bessel_i_series(nu, z)?.exp())
}

/// Backward ratios `R_k = I_{ν+k+1}(z)/I_{ν+k}(z)` for `k = 0..=k_max` together with
/// `D_k = 1 − R_k`, computed without cancellation.
fn ratio_recurrence(nu: f64, z: f64, k_max: usize) -> (Vec<f64>, Vec<f64>) {
    let start = k_max + 50 + (12.0 * z.sqrt()).ceil() as usize;
    let mut r_next = {
        let a = nu + start as f64 + 1.0;
        z / (a + (a * a + z * z).sqrt())
    };
    let mut d_next = 1.0 - r_next;
    let mut r = vec![0.0; start + 1];
    let mut d = vec![0.0; start + 1];
    r[start] = r_next;
    d[start] = d_next;
    for k in (0..start).rev() {
        let c = 2.0 * (nu + k as f64 + 1.0) / z;
        let rk = 1.0 / (c + r_next);
        let dk = rk * (c - d_next);
        r[k] = rk;
        d[k] = dk;
        r_next = rk;
        d_next = dk;
    }
    (r, d)
}

/// `ln[e^{−z}(z/2)^{−ν} I_ν(z)]` for `ν > 0` from the ratios, normalised through
/// `Σ_k (ν+k)(2ν)_k/k! · I_{ν+k}(z) = (z/2)^ν e^z / Γ(ν)`.
fn ln_scaled_from_ratios(nu: f64, r: &[f64]) -> f64 {
    let mut term = nu;
    let mut sum = 0.0;
    let mut ln_offset = 0.0;
    for (k, &rk) in r.iter().enumerate() {
        sum += term;
        if sum > 1e250 {
            sum *= 1e-250;
            term *= 1e-250;
            ln_offset += 250.0 * std::f64::consts::LN_10;
        }
        let kf = k as f64;
        term *= rk * (2.0 * nu + kf) / (kf + 1.0) * (nu + kf + 1.0) / (nu + kf);
        if term < 1e-18 * sum && kf > 1.0 {
            break;
        }
    }
    -lgamma(nu) - sum.ln() - ln_offset
}

/// `ln I_ν(z)` by backward recurrence on `I_{ν−1} − I_{ν+1} = (2ν/z) I_ν`, for `ν ≥ 0`.
pub fn ln_bessel_i_recurrence(nu: f64, z: f64) -> Result<f64> {
    check_nu_z(nu, z)?;
    if nu < 0.0 {
        return domain("recurrence route requires ν ≥ 0");
    }
    let (r, _) = ratio_recurrence(nu, z, 0);
    if nu == 0.0 {
        // I_0 + 2 Σ_{k≥1} I_k = e^z
        let mut sum = 1.0;
        let mut prod = 1.0;
        for &rk in &r {
            prod *= rk;
            sum += 2.0 * prod;
            if prod < 1e-18 * sum {
                break;
            }
        }
        return Ok(z - sum.ln());
    }
    Ok(ln_scaled_from_ratios(nu, &r) + z + nu * (0.5 * z).ln())
}

/// `I_ν(z)` by backward recurrence.
pub fn bessel_i_recurrence(nu: f64, z: f64) -> Result<f64> {
    Ok(ln_bessel_i_recurrence(nu, z)?.exp())
}

/// `ln I_ν(z)` from `I_ν(z) = (z/2)^ν/(√π Γ(ν+½)) ∫ e^{−zs}(1−s²)^{ν−½} ds`, with the
/// integral taken on Gauss–Jacobi rules of exponent `ν−½`, doubling until two
/// successive values agree to `1e−11`.
pub fn ln_bessel_i_integral(nu: f64, z: f64) -> Result<f64> {
    check_nu_z(nu, z)?;
    let alpha = nu - 0.5;
    let ln_integral = |q: usize| -> Result<f64> {
        let rule = gauss_jacobi_cached(alpha, q)?;
        let mut acc = LogSum::new();
        for (&s, &w) in rule.nodes().iter().zip(rule.weights()) {
            acc.add(w.ln() - z * s);
        }
        Ok(acc.value())
    };
    let mut q = 16;
    let mut prev = ln_integral(q)?;
    while q < MAX_DOUBLING_NODES {
        q *= 2;
        let cur = ln_integral(q)?;
        if (cur - prev).abs() <= 1e-11 * cur.abs().max(1.0) {
            return Ok(nu * (0.5 * z).ln() - 0.5 * PI.ln() - lgamma(nu + 0.5) + cur);
        }
        prev = cur;
    }
    Err(Error::Accuracy(format!(
        "Bessel integral did not settle for ν={nu}, z={z} with {MAX_DOUBLING_NODES} nodes"
    )))
}

/// `I_ν(z)` from the integral representation; the independent oracle route.
pub fn bessel_integral_oracle(nu: f64, z: f64) -> Result<f64> {
    Ok(ln_bessel_i_integral(nu, z)?.exp())
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("time must be finite and > 0, got {t}"));
    }
    Ok(())
}

/// `e^{−2t} t^{−λ} I_{λ+n}(2t)`.
///
/// Up to `t = 20` this is the positive series `e^{−2t} Σ_j t^{n+2j}/(j! Γ(λ+n+j+1))`
/// summed in log domain. Beyond that, `ln Σ ≈ 2t` is large enough that its rounding
/// shows up after cancelling against `e^{−2t}`, so the ratio recurrence of
/// [`ScaledBesselRow`] (which never forms `e^{±2t}`) is used instead.
pub fn scaled_heat_factor(order: OrderParam, n: usize, t: f64) -> Result<f64> {
    check_t(t)?;
    let lambda = order.value();
    if t <= SERIES_T_MAX {
        let nu = lambda + n as f64;
        let ln = -2.0 * t + n as f64 * t.ln() + ln_series_core(nu, 2.0 * t);
        return Ok(ln.exp());
    }
    Ok(ScaledBesselRow::new(order, t, n)?.value(n))
}

/// The Hankel branch is used once `z ≥ max(HANKEL_MIN_Z, HANKEL_RATIO · ν²)`; successive
/// terms then shrink by at least a factor 128 until `j ≈ z`.
const HANKEL_RATIO: f64 = 64.0;
const HANKEL_MIN_Z: f64 = 400.0;

/// `(A_ν(z), A_ν(z) − A_{ν+1}(z))`.
fn hankel_sums(nu: f64, z: f64) -> (f64, f64) {
    let (m0, m1) = (4.0 * nu * nu, 4.0 * (nu + 1.0) * (nu + 1.0));
    let (mut a, mut b) = (1.0, 1.0);
    let (mut sa, mut sd) = (1.0, 0.0);
    for j in 1..200 {
        let odd = (2 * j - 1) as f64;
        let c = -1.0 / (j as f64 * 8.0 * z);
        a *= (m0 - odd * odd) * c;
        b *= (m1 - odd * odd) * c;
        sa += a;
        // a − b with the j = 1 difference in closed form
        sd += if j == 1 { (m1 - m0) / (8.0 * z) } else { a - b };
        if a.abs().max(b.abs()) < 1e-18 * sa.abs() {
            break;
        }
    }
    (sa, sd)
}

/// The row `S_k = e^{−2t} t^{−λ} I_{λ+k}(2t)`, `k = 0..=k_max`, with the logarithmic
/// time derivatives `t ∂_t ln S_k = k − 2t(1 − I_{λ+k+1}/I_{λ+k})`.
#[derive(Debug, Clone)]
pub struct ScaledBesselRow {
    t: f64,
    values: Vec<f64>,
    log_derivs: Vec<f64>,
}

impl ScaledBesselRow {
    pub fn new(order: OrderParam, t: f64, k_max: usize) -> Result<Self> {
        check_t(t)?;
        let lambda = order.value();
        let z = 2.0 * t;
        let nu_max = lambda + k_max as f64 + 1.0;
        if z >= HANKEL_MIN_Z.max(HANKEL_RATIO * nu_max * nu_max) {
            return Ok(Self::hankel(lambda, t, k_max));
        }
        Ok(Self::recurrence(lambda, t, k_max))
    }

    fn recurrence(lambda: f64, t: f64, k_max: usize) -> Self {
        let z = 2.0 * t;
        let (r, d) = ratio_recurrence(lambda, z, k_max);
        let mut s = ln_scaled_from_ratios(lambda, &r).exp();
        let mut values = Vec::with_capacity(k_max + 1);
        let mut log_derivs = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            values.push(s);
            log_derivs.push(k as f64 - z * d[k]);
            s *= r[k];
        }
        Self { t, values, log_derivs }
    }

    /// Large-argument branch: `e^{−z} I_ν(z) = (2πz)^{−1/2} A_ν(z)` with
    /// `A_ν = Σ_j (−1)^j a_j(ν) z^{−j}`, `a_j(ν) = Π_{i≤j}(4ν² − (2i−1)²) / (j! 8^j)`,
    /// and `1 − I_{ν+1}/I_ν = (A_ν − A_{ν+1}) / A_ν` summed termwise.
    fn hankel(lambda: f64, t: f64, k_max: usize) -> Self {
        let z = 2.0 * t;
        let pre = (-lambda * t.ln()).exp() / (2.0 * PI * z).sqrt();
        let mut values = Vec::with_capacity(k_max + 1);
        let mut log_derivs = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let nu = lambda + k as f64;
            let (a, diff) = hankel_sums(nu, z);
            values.push(pre * a);
            log_derivs.push(k as f64 - z * diff / a);
        }
        Self { t, values, log_derivs }
    }

    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    /// `t ∂_t ln S_k`.
    pub fn log_derivative(&self, k: usize) -> f64 {
        self.log_derivs[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn reference_values() {
        assert!(rel(bessel_i_series(0.0, 1.0).unwrap(), 1.266_065_877_752_008_4) < 1e-14);
        assert!(rel(bessel_i_series(1.0, 2.0).unwrap(), 1.590_636_854_637_329) < 1e-14);
        let half = (2.0 / PI).sqrt() * 2.0f64.sinh() / 2.0f64.sqrt();
        assert!(rel(bessel_i_series(0.5, 2.0).unwrap(), half) < 1e-14);
        assert!(rel(bessel_integral_oracle(0.5, 2.0).unwrap(), half) < 1e-12);
        assert!(rel(bessel_integral_oracle(0.0, 1.0).unwrap(), 1.266_065_877_752_008_4) < 1e-12);
    }

    #[test]
    fn three_routes_agree() {
        for &nu in &[0.0, 0.3, 1.0, 2.5, 17.0, 100.0] {
            for &z in &[1e-3, 0.5, 3.0, 20.0, 50.0] {
                let s = ln_bessel_i_series(nu, z).unwrap();
                let r = ln_bessel_i_recurrence(nu, z).unwrap();
                let i = ln_bessel_i_integral(nu, z).unwrap();
                assert!((s - r).abs() < 1e-10, "ν={nu} z={z} {s} {r}");
                assert!((s - i).abs() < 1e-10, "ν={nu} z={z} {s} {i}");
            }
        }
    }

    #[test]
    fn scaled_factor_examples() {
        let one = OrderParam::new(1.0).unwrap();
        let v = scaled_heat_factor(one, 0, 1.0).unwrap();
        assert!(rel(v, (-2.0f64).exp() * 1.590_636_854_637_329) < 1e-14);
        let half = OrderParam::new(0.5).unwrap();
        let v = scaled_heat_factor(half, 0, 1.0).unwrap();
        let want = (-2.0f64).exp() * (1.0 / PI).sqrt() * 2.0f64.sinh();
        assert!(rel(v, want) < 1e-14);
    }

    #[test]
    fn row_matches_series() {
        for &lambda in &[0.6, 1.0, 2.5] {
            let o = OrderParam::new(lambda).unwrap();
            for &t in &[1e-6, 0.01, 0.7, 5.0, 19.9, 20.1, 60.0, 390.0] {
                let row = ScaledBesselRow::new(o, t, 80).unwrap();
                for k in [0usize, 1, 7, 40, 80] {
                    let nu = lambda + k as f64;
                    let s = (-2.0 * t + k as f64 * t.ln() + ln_series_core(nu, 2.0 * t)).exp();
                    let tol = if t <= SERIES_T_MAX { 1e-13 } else { 1e-10 };
                    if s < 1e-280 {
                        continue;
                    }
                    assert!(rel(row.value(k), s) < tol, "λ={lambda} t={t} k={k} {} {s}", row.value(k));
                }
            }
        }
    }

    #[test]
    fn log_derivative_matches_difference() {
        let o = OrderParam::new(1.5).unwrap();
        for &t in &[0.05, 2.0, 30.0, 1e3] {
            let h = t * 1e-5;
            let row = ScaledBesselRow::new(o, t, 10).unwrap();
            let up = ScaledBesselRow::new(o, t + h, 10).unwrap();
            let dn = ScaledBesselRow::new(o, t - h, 10).unwrap();
            for k in 0..=10 {
                let fd = t * (up.value(k).ln() - dn.value(k).ln()) / (2.0 * h);
                assert!((fd - row.log_derivative(k)).abs() < 1e-6 * fd.abs().max(1.0));
            }
        }
    }

    #[test]
    fn hankel_branch_matches_recurrence() {
        for &lambda in &[0.6, 1.0, 2.5] {
            let k_max = 30;
            let nu_max = lambda + k_max as f64 + 1.0;
            let t = 0.5 * HANKEL_RATIO * nu_max * nu_max * 1.01;
            let a = ScaledBesselRow::hankel(lambda, t, k_max);
            let b = ScaledBesselRow::recurrence(lambda, t, k_max);
            for k in 0..=k_max {
                assert!(rel(a.value(k), b.value(k)) < 1e-12, "λ={lambda} k={k}");
                let (da, db) = (a.log_derivative(k), b.log_derivative(k));
                assert!((da - db).abs() < 1e-9 * (1.0 + db.abs()), "λ={lambda} k={k} {da} {db}");
            }
        }
    }

    #[test]
    fn large_argument_normalisation() {
        for &nu in &[0.0, 0.5, 2.0, 10.0] {
            let z: f64 = 1e3;
            let v = (ln_bessel_i_recurrence(nu, z).unwrap() - z + 0.5 * (2.0 * PI * z).ln()).exp();
            assert!((v - 1.0).abs() < 1e-2 + nu * nu / z);
        }
    }

    #[test]
    fn small_argument_limit() {
        for &nu in &[0.0, 0.7, 3.0] {
            let z: f64 = 1e-6;
            let lead = nu * (0.5 * z).ln() - lgamma(nu + 1.0);
            assert!((ln_bessel_i_integral(nu, z).unwrap() - lead).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bessel_i_series(-0.6, 1.0).is_err());
        assert!(scaled_heat_factor(OrderParam::new(1.0).unwrap(), 0, 0.0).is_err());
    }
}
