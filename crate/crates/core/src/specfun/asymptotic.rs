//! Large-degree expansions of `P_k^γ(cos θ)` (normalised `P_k^γ(1) = 1`).
//!
//! For non-integer `γ` the `r`-term sum leaves a remainder `O((k sin θ)^{−(r+γ)})`;
//! for integer `γ` the coefficients vanish from `ℓ = γ` on and the sum with
//! `r ≥ γ` is the polynomial itself.

use super::gamma::{gamma, lgamma};
use super::polynomial::ultraspherical_p;
use super::OrderParam;
use crate::error::{domain, Result};
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

/// Partial sum of the expansion and a bound on what it leaves out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticTerm {
    pub main: f64,
    pub remainder_bound: f64,
}

fn is_integer(g: f64) -> bool {
    g == g.round()
}

/// Expansion coefficient `b_ℓ^γ` (or `b̃_ℓ^γ` for integer `γ`).
pub(crate) fn coefficient(g: f64, l: usize) -> f64 {
    let lf = l as f64;
    let common = lgamma(2.0 * g) - lgamma(g) + lgamma(lf + g) - lgamma(lf + 1.0);
    if is_integer(g) {
        if lf >= g {
            return 0.0;
        }
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        return sign * 2.0 * (common - lgamma(g - lf)).exp();
    }
    // Γ(ℓ−γ+1) changes sign for ℓ < γ−1.
    let g_shift = gamma(lf - g + 1.0).expect("non-integer argument");
    2.0 / PI * (g * PI).sin() * common.exp() * g_shift
}

/// `A_{k,r}^γ(θ)`.
pub(crate) fn partial_sum(g: f64, k: usize, r: usize, theta: f64) -> f64 {
    let kf = k as f64;
    let two_sin = 2.0 * theta.sin();
    (0..r)
        .map(|l| {
            let lf = l as f64;
            let b = coefficient(g, l);
            if b == 0.0 {
                return 0.0;
            }
            let mag = (lgamma(kf + 1.0) - lgamma(kf + lf + g + 1.0) - (lf + g) * two_sin.ln()).exp();
            b * mag * ((kf + lf + g) * theta - (lf + g) * PI / 2.0).cos()
        })
        .sum()
}

fn exact_sum(g: f64, r: usize) -> bool {
    is_integer(g) && r as f64 >= g
}

/// Empirical constant `C` with `|P_k^γ(cos θ) − A_{k,r}^γ(θ)| ≤ C (k sin θ)^{−(r+γ)}`,
/// fitted over `1 ≤ k ≤ 256` and a θ-grid refined towards the endpoints, then
/// doubled as a safety margin. Zero when the sum is exact.
pub fn remainder_constant(g: f64, r: usize) -> Result<f64> {
    if !(g > 0.0) || !g.is_finite() {
        return domain(format!("γ must be > 0, got {g}"));
    }
    if exact_sum(g, r) {
        return Ok(0.0);
    }
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&c) = cache.lock().unwrap().get(&(g.to_bits(), r)) {
        return Ok(c);
    }
    let order = OrderParam::new(g)?;
    const K_FIT: usize = 256;
    let mut thetas: Vec<f64> = (1..128).map(|i| PI * i as f64 / 128.0).collect();
    for j in 1..=12 {
        let e = PI * 2f64.powi(-(j + 7));
        thetas.push(e);
        thetas.push(PI - e);
    }
    let mut c: f64 = 0.0;
    for &theta in &thetas {
        let p = ultraspherical_p(order, K_FIT, theta.cos())?;
        for (k, &pk) in p.iter().enumerate().skip(1) {
            let diff = (pk - partial_sum(g, k, r, theta)).abs();
            c = c.max(diff * (k as f64 * theta.sin()).powf(r as f64 + g));
        }
    }
    let c = 2.0 * c;
    cache.lock().unwrap().insert((g.to_bits(), r), c);
    Ok(c)
}

/// `(A_{k,r}^γ(θ), C (k sin θ)^{−(r+γ)})`.
///
/// Integer `γ` with `r ≥ γ` returns the polynomial exactly with a zero bound.
pub fn gegenbauer_asymptotic(g: f64, k: usize, r: usize, theta: f64) -> Result<AsymptoticTerm> {
    if !(theta > 0.0 && theta < PI) {
        return domain(format!("θ must lie in (0, π), got {theta}"));
    }
    let c = remainder_constant(g, r)?;
    let main = partial_sum(g, k, r, theta);
    let remainder_bound = if c == 0.0 {
        0.0
    } else {
        c * (k.max(1) as f64 * theta.sin()).powf(-(r as f64 + g))
    };
    Ok(AsymptoticTerm { main, remainder_bound })
}
