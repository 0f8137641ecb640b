//! Scalar special functions: gamma family, ultraspherical polynomials and
//! functions, scaled modified Bessel factors, Gauss–Jacobi rules and the
//! large-degree Gegenbauer expansions.

pub mod asymptotic;
pub mod bessel;
pub mod gamma;
pub mod polynomial;
pub mod quadrature;

pub use asymptotic::{gegenbauer_asymptotic, remainder_constant, AsymptoticTerm};
pub use bessel::{
    bessel_integral_oracle, bessel_i_recurrence, bessel_i_series, ln_bessel_i_integral,
    ln_bessel_i_recurrence, ln_bessel_i_series, scaled_heat_factor, ScaledBesselRow,
};
pub use gamma::{gamma, ln_gamma, ln_pochhammer, pochhammer};
pub use polynomial::{
    coupling_a, ln_weight_w, phi_sequence, ultraspherical_p, weight_w, OrthoBasis,
};
pub use quadrature::{cached_rule, gauss_jacobi, gauss_jacobi_cached, gauss_jacobi_root, QuadRule, RuleFamily};

use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

/// Ultraspherical order `λ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct OrderParam(f64);

impl OrderParam {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return domain(format!("order must be finite and > 0, got {lambda}"));
        }
        Ok(Self(lambda))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for OrderParam {
    type Error = crate::error::Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<OrderParam> for f64 {
    fn from(o: OrderParam) -> f64 {
        o.0
    }
}

impl std::fmt::Display for OrderParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_rejects_nonpositive() {
        assert!(OrderParam::new(0.0).is_err());
        assert!(OrderParam::new(-1.0).is_err());
        assert!(OrderParam::new(f64::NAN).is_err());
        assert_eq!(OrderParam::new(1.5).unwrap().value(), 1.5);
        let o: OrderParam = serde_json::from_str("2.5").unwrap();
        assert_eq!(o.value(), 2.5);
        assert!(serde_json::from_str::<OrderParam>("0.0").is_err());
    }
}
