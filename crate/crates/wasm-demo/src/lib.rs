//! Three library operations exported to JavaScript. Each takes plain numbers and
//! `Float64Array`s and returns a `Float64Array`; errors surface as thrown strings.

use ultraspherical::hypergroup::FiniteSeq;
use ultraspherical::semigroup::{heat_apply, heat_kernel_row, HeatRoute};
use ultraspherical::transplant::transplant_apply;
use ultraspherical::OrderParam;
use wasm_bindgen::prelude::*;

/// Largest output index accepted from the page.
const MAX_SIZE: usize = 4096;

fn order(v: f64) -> Result<OrderParam, String> {
    OrderParam::new(v).map_err(|e| e.to_string())
}

fn check_size(size: usize) -> Result<(), String> {
    if size > MAX_SIZE {
        return Err(format!("size {size} exceeds {MAX_SIZE}"));
    }
    Ok(())
}

/// `h_t^λ(n)` for `0 ≤ n ≤ size`.
pub fn heat_kernel_values(lambda: f64, t: f64, size: usize) -> Result<Vec<f64>, String> {
    check_size(size)?;
    heat_kernel_row(order(lambda)?, t, size).map(|mut v| {
        v.resize(size + 1, 0.0);
        v
    })
    .map_err(|e| e.to_string())
}

/// `W_t f` on `0..=size` by hypergroup convolution.
pub fn heat_evolve_values(lambda: f64, t: f64, f: &[f64], size: usize) -> Result<Vec<f64>, String> {
    check_size(size)?;
    let out = heat_apply(order(lambda)?, t, &FiniteSeq::new(f.to_vec()), HeatRoute::Convolution, Some(size))
        .map_err(|e| e.to_string())?;
    Ok(out.truncated(size).values().iter().copied().chain(std::iter::repeat(0.0)).take(size + 1).collect())
}

/// `T_{λ,μ} f` on `0..=size`.
pub fn transplant_values(lambda: f64, mu: f64, f: &[f64], size: usize) -> Result<Vec<f64>, String> {
    check_size(size)?;
    let out = transplant_apply(order(lambda)?, order(mu)?, &FiniteSeq::new(f.to_vec()), size).map_err(|e| e.to_string())?;
    Ok(out.values().iter().copied().chain(std::iter::repeat(0.0)).take(size + 1).collect())
}

#[wasm_bindgen(js_name = heatKernel)]
pub fn heat_kernel(lambda: f64, t: f64, size: usize) -> Result<Vec<f64>, JsValue> {
    heat_kernel_values(lambda, t, size).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = heatEvolve)]
pub fn heat_evolve(lambda: f64, t: f64, f: &[f64], size: usize) -> Result<Vec<f64>, JsValue> {
    heat_evolve_values(lambda, t, f, size).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn transplant(lambda: f64, mu: f64, f: &[f64], size: usize) -> Result<Vec<f64>, JsValue> {
    transplant_values(lambda, mu, f, size).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_padded_and_positive() {
        let k = heat_kernel_values(1.0, 0.1, 200).unwrap();
        assert_eq!(k.len(), 201);
        assert!(k.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn evolving_a_delta_gives_the_kernel() {
        // the unit of convolution is δ_0/√w(0), so W_t δ_0 = √w(0) h_t
        let k = heat_kernel_values(1.5, 0.8, 20).unwrap();
        let w = heat_evolve_values(1.5, 0.8, &[1.0], 20).unwrap();
        let c = w[0] / k[0];
        for (a, b) in k.iter().zip(&w) {
            assert!((c * a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn transplant_preserves_norm_roughly() {
        let f = [0.0, 1.0, 0.0, -0.5];
        let g = transplant_values(1.2, 2.0, &f, 400).unwrap();
        let nf: f64 = f.iter().map(|v| v * v).sum();
        let ng: f64 = g.iter().map(|v| v * v).sum();
        assert!((ng - nf).abs() < 1e-2 * nf);
    }

    #[test]
    fn bad_input_is_reported() {
        assert!(heat_kernel_values(-1.0, 1.0, 10).is_err());
        assert!(heat_kernel_values(1.0, 1.0, MAX_SIZE + 1).is_err());
        assert!(transplant_values(1.0, 0.0, &[1.0], 10).is_err());
    }
}
