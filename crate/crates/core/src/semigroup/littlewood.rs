use super::heat::KernelScale;
use super::poisson::poisson_root;
use super::{SemigroupKind, TimeGrid};
use crate::error::{domain, Error, Result};
use crate::hypergroup::{apply_laplacian, norm2, FiniteSeq, TranslationBand};
use crate::transform::SpectralPlan;
use crate::OrderParam;
use rayon::prelude::*;
use serde::Serialize;

const MAX_REFINEMENTS: usize = 4;
const T_CHUNK: usize = 32;

/// `t ↦ t^k ∂_t^k T_t f` on `0..=n_out`, prepared once and evaluated at many times.
///
/// Heat uses `t^k W_t(Δ_λ^k f)` through a translation band; Poisson uses a spectral
/// plan with the multiplier `(−t√(2(1−x)))^k e^{−t√(2(1−x))}`.
pub struct SemigroupEvaluator {
    inner: Inner,
}

enum Inner {
    Heat { band: TranslationBand, scale: KernelScale, k: usize },
    Poisson { plan: SpectralPlan, k: usize, agreement: f64 },
}

impl SemigroupEvaluator {
    pub fn new(kind: SemigroupKind, order: OrderParam, f: &FiniteSeq, k: usize, n_out: usize) -> Result<Self> {
        match kind {
            SemigroupKind::Heat => {
                let g = apply_laplacian(order, f, k);
                let band = TranslationBand::new(order, &g, n_out);
                let scale = KernelScale::new(order, band.kernel_len());
                Ok(Self { inner: Inner::Heat { band, scale, k } })
            }
            SemigroupKind::Poisson => {
                let (plan, agreement) = super::poisson::poisson_plan(order, f, n_out, k)?;
                Ok(Self { inner: Inner::Poisson { plan, k, agreement } })
            }
        }
    }

    pub fn n_out(&self) -> usize {
        match &self.inner {
            Inner::Heat { band, .. } => band.n_out(),
            Inner::Poisson { plan, .. } => plan.n_out(),
        }
    }

    /// Spectral node count for Poisson, `None` for heat.
    pub fn nodes(&self) -> Option<usize> {
        match &self.inner {
            Inner::Heat { .. } => None,
            Inner::Poisson { plan, .. } => Some(plan.nodes()),
        }
    }

    /// `ℓ²` agreement reached when the Poisson node count was chosen.
    pub fn agreement(&self) -> Option<f64> {
        match &self.inner {
            Inner::Heat { .. } => None,
            Inner::Poisson { agreement, .. } => Some(*agreement),
        }
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        match &self.inner {
            Inner::Heat { band, scale, k } => {
                let h = scale.row(t)?;
                let tk = t.powi(*k as i32);
                Ok(band.apply(&h).into_iter().map(|v| tk * v).collect())
            }
            Inner::Poisson { plan, k, .. } => Ok(plan.apply(|x| {
                let r = poisson_root(x);
                (-t * r).powi(*k as i32) * (-t * r).exp()
            })),
        }
    }

    fn eval_many(&self, ts: &[f64]) -> Result<Vec<Vec<f64>>> {
        ts.par_iter().map(|&t| self.eval(t)).collect()
    }
}

/// A g-function together with the grid it converged on.
#[derive(Debug, Clone, Serialize)]
pub struct GFunction {
    pub values: FiniteSeq,
    pub points_per_decade: usize,
    /// Relative change of `‖g‖₂` at the last refinement.
    pub relative_change: f64,
}

/// `g^k(n) = (∫ |t^k ∂_t^k T_t f(n)|² dt/t)^{1/2}` on `0..=n_out`, by the trapezoid rule
/// in `ln t`; the grid density is doubled until `‖g‖₂` changes by `≤ 1e−6` relative.
pub fn g_function(
    kind: SemigroupKind,
    order: OrderParam,
    k: usize,
    f: &FiniteSeq,
    grid: &TimeGrid,
    n_out: usize,
) -> Result<GFunction> {
    if k == 0 {
        return domain("g-function needs k ≥ 1");
    }
    if grid.t_min() > 1e-8 || grid.t_max() < 1e8 {
        return domain("g-function grids must span at least [1e-8, 1e8]");
    }
    let ev = SemigroupEvaluator::new(kind, order, f, k, n_out)?;
    g_function_with(&ev, grid)
}

/// [`g_function`] with a prepared evaluator.
pub fn g_function_with(ev: &SemigroupEvaluator, grid: &TimeGrid) -> Result<GFunction> {
    let n = ev.n_out() + 1;
    let mut grid = grid.clone();
    // Unweighted sums: Σ' over the grid with half weights at the ends.
    let mut sums = vec![0.0; n];
    let pts = grid.points();
    for chunk in pts.chunks(T_CHUNK).enumerate() {
        let vals = ev.eval_many(chunk.1)?;
        for (i, v) in vals.iter().enumerate() {
            let j = chunk.0 * T_CHUNK + i;
            let w = if j == 0 || j + 1 == pts.len() { 0.5 } else { 1.0 };
            for (s, x) in sums.iter_mut().zip(v) {
                *s += w * x * x;
            }
        }
    }
    let total = |sums: &[f64], h: f64| sums.iter().map(|s| s * h).sum::<f64>().sqrt();
    let mut prev = total(&sums, grid.log_step());
    for _ in 0..MAX_REFINEMENTS {
        let fine = grid.refined();
        let mids: Vec<f64> = (0..grid.len() - 1).map(|j| fine.point(2 * j + 1)).collect();
        for chunk in mids.chunks(T_CHUNK) {
            for v in ev.eval_many(chunk)? {
                for (s, x) in sums.iter_mut().zip(&v) {
                    *s += x * x;
                }
            }
        }
        grid = fine;
        let cur = total(&sums, grid.log_step());
        let change = if cur > 0.0 { (cur - prev).abs() / cur } else { 0.0 };
        if change <= 1e-6 {
            let h = grid.log_step();
            let values = FiniteSeq::new(sums.iter().map(|s| (s * h).sqrt()).collect());
            return Ok(GFunction { values, points_per_decade: grid.points_per_decade(), relative_change: change });
        }
        prev = cur;
    }
    Err(Error::Accuracy(format!(
        "g-function did not settle by {} points per decade",
        grid.points_per_decade()
    )))
}

/// Heat `g^k` for many inputs on one fixed grid (no refinement), sharing the kernel
/// rows between inputs. Each input gets its own translation band.
pub fn heat_g_function_batch(
    order: OrderParam,
    k: usize,
    fs: &[FiniteSeq],
    grid: &TimeGrid,
    n_out: usize,
) -> Result<Vec<FiniteSeq>> {
    if k == 0 {
        return domain("g-function needs k ≥ 1");
    }
    let bands: Vec<TranslationBand> =
        fs.par_iter().map(|f| TranslationBand::new(order, &apply_laplacian(order, f, k), n_out)).collect();
    let kernel_len = bands.iter().map(|b| b.kernel_len()).max().unwrap_or(n_out + 1);
    let scale = KernelScale::new(order, kernel_len);
    let pts = grid.points();
    let mut sums = vec![vec![0.0; n_out + 1]; fs.len()];
    for (c, chunk) in pts.chunks(T_CHUNK).enumerate() {
        let rows: Vec<Vec<f64>> = chunk.par_iter().map(|&t| scale.row(t)).collect::<Result<_>>()?;
        let contrib: Vec<Vec<f64>> = bands
            .par_iter()
            .map(|band| {
                let mut acc = vec![0.0; n_out + 1];
                for (i, (h, &t)) in rows.iter().zip(chunk).enumerate() {
                    let j = c * T_CHUNK + i;
                    let w = grid.weight(j) * t.powi(2 * k as i32);
                    for (a, v) in acc.iter_mut().zip(band.apply(h)) {
                        *a += w * v * v;
                    }
                }
                acc
            })
            .collect();
        for (s, c) in sums.iter_mut().zip(contrib) {
            for (a, v) in s.iter_mut().zip(c) {
                *a += v;
            }
        }
    }
    Ok(sums.into_iter().map(|s| FiniteSeq::new(s.into_iter().map(f64::sqrt).collect())).collect())
}

/// A maximal function with the grid times attaining it.
#[derive(Debug, Clone, Serialize)]
pub struct Maximal {
    pub values: FiniteSeq,
    /// `argmax_t |T_t f(n)|` over the grid points only.
    pub argmax_t: Vec<f64>,
}

/// `T_* f(n) = sup_t |T_t f(n)|` over the grid, together with the `t → 0⁺` limit `|f(n)|`.
/// A lower bound for the true supremum, nondecreasing under refinement.
pub fn maximal(kind: SemigroupKind, order: OrderParam, f: &FiniteSeq, grid: &TimeGrid, n_out: usize) -> Result<Maximal> {
    let ev = SemigroupEvaluator::new(kind, order, f, 0, n_out)?;
    maximal_with(&ev, f, grid)
}

/// [`maximal`] with a prepared evaluator (`k = 0`).
pub fn maximal_with(ev: &SemigroupEvaluator, f: &FiniteSeq, grid: &TimeGrid) -> Result<Maximal> {
    let n = ev.n_out() + 1;
    let mut best = vec![0.0f64; n];
    let mut arg = vec![grid.t_min(); n];
    let pts = grid.points();
    for chunk in pts.chunks(T_CHUNK) {
        let vals = ev.eval_many(chunk)?;
        for (&t, v) in chunk.iter().zip(&vals) {
            for i in 0..n {
                if v[i].abs() > best[i] {
                    best[i] = v[i].abs();
                    arg[i] = t;
                }
            }
        }
    }
    let values = best.iter().enumerate().map(|(i, b)| b.max(f.get(i).abs())).collect();
    Ok(Maximal { values: FiniteSeq::new(values), argmax_t: arg })
}

/// `‖g‖₂`-style aggregate used by reports.
pub fn aggregate(values: &FiniteSeq) -> f64 {
    norm2(values.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::HeatRoute;

    fn o(l: f64) -> OrderParam {
        OrderParam::new(l).unwrap()
    }

    #[test]
    fn zero_input() {
        let g = g_function(SemigroupKind::Heat, o(1.0), 1, &FiniteSeq::zeros(3), &TimeGrid::default(), 10).unwrap();
        assert!(g.values.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn heat_ratio_is_near_half() {
        let f = FiniteSeq::new(vec![0.6, -0.8]);
        let grid = TimeGrid::new(1e-8, 1e10, 20).unwrap();
        let g = g_function(SemigroupKind::Heat, o(1.0), 1, &f, &grid, 1024).unwrap();
        let ratio = aggregate(&g.values) / f.norm2();
        assert!((ratio - 0.5).abs() < 2e-2, "{ratio}");
    }

    #[test]
    fn batch_matches_single() {
        let f = FiniteSeq::new(vec![0.6, -0.8, 0.1]);
        let grid = TimeGrid::new(1e-8, 1e10, 40).unwrap();
        let single = g_function_with(&SemigroupEvaluator::new(SemigroupKind::Heat, o(0.9), &f, 1, 200).unwrap(), &grid).unwrap();
        let batch = heat_g_function_batch(o(0.9), 1, &[f.clone(), f.scaled(2.0)], &grid, 200).unwrap();
        assert!(batch[0].sub(&single.values).norm2() < 1e-6 * single.values.norm2());
        assert!(batch[1].sub(&single.values.scaled(2.0)).norm2() < 1e-6 * single.values.norm2());
    }

    #[test]
    fn maximal_of_delta_peaks_at_start() {
        let f = FiniteSeq::delta(0);
        let grid = TimeGrid::new(1e-8, 1e8, 10).unwrap();
        let m = maximal(SemigroupKind::Heat, o(1.5), &f, &grid, 20).unwrap();
        assert_eq!(m.argmax_t[0], grid.t_min());
        assert!((m.values.get(0) - 1.0).abs() < 1e-6);
        let w = crate::semigroup::heat_apply(o(1.5), 2.0, &f, HeatRoute::Convolution, Some(20)).unwrap();
        for n in 0..=20 {
            assert!(m.values.get(n) >= w.get(n).abs());
        }
    }
}
