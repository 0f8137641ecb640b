use crate::error::{domain, Result};
use serde::Serialize;

/// Log-uniform grid `t_j = t_min · r^j`, `j = 0..=J`, ending exactly at `t_max`.
#[derive(Debug, Clone, Serialize)]
pub struct TimeGrid {
    t_min: f64,
    t_max: f64,
    points_per_decade: usize,
    #[serde(skip)]
    intervals: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self::new(1e-8, 1e8, 40).expect("valid default grid")
    }
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, points_per_decade: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return domain(format!("time grid needs 0 < t_min < t_max, got [{t_min}, {t_max}]"));
        }
        if points_per_decade == 0 {
            return domain("time grid needs at least one point per decade");
        }
        let decades = (t_max / t_min).log10();
        let intervals = ((decades * points_per_decade as f64) - 1e-9).ceil().max(1.0) as usize;
        Ok(Self { t_min, t_max, points_per_decade, intervals })
    }

    /// Parses `min,max,ppd`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        let bad = || crate::Error::Config(format!("time grid must be min,max,ppd; got {spec:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let t_min = parts[0].parse().map_err(|_| bad())?;
        let t_max = parts[1].parse().map_err(|_| bad())?;
        let ppd = parts[2].parse().map_err(|_| bad())?;
        Self::new(t_min, t_max, ppd)
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }
    pub fn t_max(&self) -> f64 {
        self.t_max
    }
    pub fn points_per_decade(&self) -> usize {
        self.points_per_decade
    }
    pub fn len(&self) -> usize {
        self.intervals + 1
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spacing in `ln t`.
    pub fn log_step(&self) -> f64 {
        (self.t_max / self.t_min).ln() / self.intervals as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        if j == 0 {
            return self.t_min;
        }
        if j == self.intervals {
            return self.t_max;
        }
        (self.t_min.ln() + j as f64 * self.log_step()).exp()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.point(j)).collect()
    }

    /// Same range, twice the density; every old point is a point of the new grid.
    pub fn refined(&self) -> Self {
        Self {
            t_min: self.t_min,
            t_max: self.t_max,
            points_per_decade: 2 * self.points_per_decade,
            intervals: 2 * self.intervals,
        }
    }

    /// Trapezoid weights for `∫ F(t) dt/t = ∫ F d(ln t)`.
    pub fn weight(&self, j: usize) -> f64 {
        let h = self.log_step();
        if j == 0 || j == self.intervals {
            0.5 * h
        } else {
            h
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = TimeGrid::default();
        assert_eq!(g.len(), 641);
        let p = g.points();
        assert!((p[0] - 1e-8).abs() < 1e-22);
        assert_eq!(*p.last().unwrap(), 1e8);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert!((p[40] / 1e-7 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_is_nested() {
        let g = TimeGrid::new(1e-3, 7.0, 5).unwrap();
        let r = g.refined();
        assert_eq!(r.len(), 2 * g.len() - 1);
        for j in 0..g.len() {
            assert!((r.point(2 * j) / g.point(j) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn trapezoid_integrates_gaussian_in_log_time() {
        let g = TimeGrid::new(1e-8, 1e8, 40).unwrap();
        // ∫ t² e^{−t²} dt/t = 1/2
        let s: f64 = (0..g.len()).map(|j| g.weight(j) * g.point(j).powi(2) * (-g.point(j).powi(2)).exp()).sum();
        assert!((s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parse_spec() {
        let g = TimeGrid::parse("1e-4, 1e4, 8").unwrap();
        assert_eq!(g.points_per_decade(), 8);
        assert!(TimeGrid::parse("1,2").is_err());
        assert!(TimeGrid::new(2.0, 1.0, 3).is_err());
    }
}
