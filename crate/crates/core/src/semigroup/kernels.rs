//! Semigroup kernels `K_t(n,m) = τ_n(k_t)(m) = Σ_k c_λ(n,m,k) k_t(k)` sampled on a
//! time grid, for the Calderón–Zygmund certifier.

use super::heat::KernelScale;
use super::poisson::poisson_psi_coeffs;
use super::TimeGrid;
use crate::error::Result;
use crate::harmonic::{KernelSource, SampleNorm};
use crate::hypergroup::LinearizationTable;
use crate::OrderParam;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemigroupKernelKind {
    /// `h_t`, sup over `t` (maximal operator).
    Heat,
    /// `ψ_t = t∂_t h_t`, `L²(dt/t)` (heat g-function).
    HeatPsi,
    /// `t∂_t p_t`, `L²(dt/t)` (Poisson g-function).
    PoissonPsi,
}

impl SemigroupKernelKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Heat => "heat",
            Self::HeatPsi => "heat-psi",
            Self::PoissonPsi => "poisson-deriv",
        }
    }
}

/// `K_t(n,m)` for `n, m ≤ N` and `t` on a grid. Rows cost `O(N·n)` coefficient
/// evaluations; the sequence table `k_t(j)`, `j ≤ 2N`, is built once.
#[derive(Debug, Clone)]
pub struct SemigroupKernel {
    kind: SemigroupKernelKind,
    order: OrderParam,
    size: usize,
    grid: TimeGrid,
    /// `table[j·T + i] = k_{t_i}(j)`.
    table: Vec<f64>,
    lin: LinearizationTable,
}

impl SemigroupKernel {
    pub fn new(kind: SemigroupKernelKind, order: OrderParam, size: usize, grid: &TimeGrid) -> Result<Self> {
        let k_max = 2 * size;
        let scale = KernelScale::new(order, k_max);
        let ts = grid.points();
        let columns: Vec<Vec<f64>> = ts
            .par_iter()
            .map(|&t| -> Result<Vec<f64>> {
                let mut v = match kind {
                    SemigroupKernelKind::Heat => scale.row(t)?,
                    SemigroupKernelKind::HeatPsi => scale.row_with_psi(t)?.1,
                    SemigroupKernelKind::PoissonPsi => poisson_psi_coeffs(order, t, &scale)?,
                };
                v.resize(k_max + 1, 0.0);
                Ok(v)
            })
            .collect::<Result<_>>()?;
        let nt = ts.len();
        let mut table = vec![0.0; (k_max + 1) * nt];
        for (i, col) in columns.iter().enumerate() {
            for (j, v) in col.iter().enumerate() {
                table[j * nt + i] = *v;
            }
        }
        Ok(Self { kind, order, size, grid: grid.clone(), table, lin: LinearizationTable::new(order, k_max) })
    }

    pub fn kind(&self) -> SemigroupKernelKind {
        self.kind
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// `K_t(n,m)` for every grid time.
    pub fn entry(&self, n: usize, m: usize) -> Vec<f64> {
        let nt = self.grid.len();
        let mut out = vec![0.0; nt];
        self.accumulate(n, m, &mut out);
        out
    }

    #[inline]
    fn accumulate(&self, n: usize, m: usize, out: &mut [f64]) {
        let nt = out.len();
        let mut k = n.abs_diff(m);
        while k <= n + m {
            let c = self.lin.c(n, m, k);
            let src = &self.table[k * nt..(k + 1) * nt];
            for (o, v) in out.iter_mut().zip(src) {
                *o += c * v;
            }
            k += 2;
        }
    }
}

impl KernelSource for SemigroupKernel {
    fn id(&self) -> String {
        self.kind.name().to_string()
    }

    fn parameters(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("lambda".to_string(), self.order.value()),
            ("t_min".to_string(), self.grid.t_min()),
            ("t_max".to_string(), self.grid.t_max()),
            ("points_per_decade".to_string(), self.grid.points_per_decade() as f64),
        ])
    }

    fn size(&self) -> usize {
        self.size
    }

    fn samples(&self) -> usize {
        self.grid.len()
    }

    fn norm(&self) -> SampleNorm {
        match self.kind {
            SemigroupKernelKind::Heat => SampleNorm::Sup,
            _ => SampleNorm::L2((0..self.grid.len()).map(|j| self.grid.weight(j)).collect()),
        }
    }

    fn symmetric(&self) -> bool {
        true
    }

    fn row(&self, n: usize) -> Result<Vec<f64>> {
        let nt = self.grid.len();
        let mut out = vec![0.0; (self.size + 1) * nt];
        for (m, chunk) in out.chunks_mut(nt).enumerate() {
            self.accumulate(n, m, chunk);
        }
        Ok(out)
    }

    fn column(&self, m: usize) -> Result<Vec<f64>> {
        self.row(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergroup::{translate, FiniteSeq};
    use crate::semigroup::heat_kernel_row;

    #[test]
    fn entries_match_translation() {
        let order = OrderParam::new(1.3).unwrap();
        let grid = TimeGrid::new(0.1, 100.0, 1).unwrap();
        let k = SemigroupKernel::new(SemigroupKernelKind::Heat, order, 20, &grid).unwrap();
        for (i, t) in grid.points().into_iter().enumerate() {
            let h = FiniteSeq::new(heat_kernel_row(order, t, 40).unwrap());
            let tr = translate(order, 7, &h);
            for m in [0, 3, 7, 12, 20] {
                let a = k.entry(7, m)[i];
                assert!((a - tr.get(m)).abs() < 1e-13 * (1.0 + tr.get(m).abs()), "t={t} m={m}");
                assert!((a - k.entry(m, 7)[i]).abs() < 1e-12);
            }
        }
    }
}
