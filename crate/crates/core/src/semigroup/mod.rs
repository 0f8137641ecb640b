//! Heat and Poisson semigroups on `ℕ`, their time derivatives, Littlewood–Paley
//! g-functions and maximal operators.
//!
//! Every operator has two routes: hypergroup convolution with an explicit kernel
//! (heat, and Poisson through subordination) and the spectral multiplier engine.

mod grid;
mod heat;
mod kernels;
mod littlewood;
mod poisson;

pub use grid::TimeGrid;
pub use heat::{
    heat_apply, heat_kernel_coeff, heat_kernel_row, heat_time_derivative, heat_time_derivative_psi,
    heat_time_derivative_spectral, psi_heat_kernel, psi_heat_row, HeatRoute,
};
pub use kernels::{SemigroupKernel, SemigroupKernelKind};
pub use littlewood::{
    aggregate, g_function, g_function_with, heat_g_function_batch, maximal, maximal_with, GFunction, Maximal, SemigroupEvaluator,
};
pub use poisson::{
    poisson_apply, poisson_plan, poisson_time_derivative, poisson_time_derivative_subordinated,
    PoissonRoute,
};

use serde::{Deserialize, Serialize};

/// Which semigroup: `W_t = e^{tΔ_λ}` or `P_t = e^{−t√(−Δ_λ)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemigroupKind {
    Heat,
    Poisson,
}

impl std::str::FromStr for SemigroupKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "heat" => Ok(Self::Heat),
            "poisson" => Ok(Self::Poisson),
            _ => Err(crate::Error::Config(format!("unknown semigroup {s:?}"))),
        }
    }
}
