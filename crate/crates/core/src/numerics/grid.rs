use serde::{Deserialize, Serialize};

use crate::{OvalError, Result};

pub const MIN_GRID_POINTS: usize = 8;

/// Uniform one-dimensional grid.
///
/// A periodic grid on `[start, end)` has nodes `start + j h`, `j = 0..points`,
/// with `h = (end - start) / points`; the right endpoint is identified with the
/// left one and is not stored. A non-periodic grid includes both endpoints and
/// has `h = (end - start) / (points - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
    pub periodic: bool,
}

impl UniformGrid {
    pub fn new(start: f64, end: f64, points: usize, periodic: bool) -> Result<Self> {
        if points < MIN_GRID_POINTS {
            return Err(OvalError::Contract(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {points}"
            )));
        }
        if !(end > start) || !start.is_finite() || !end.is_finite() {
            return Err(OvalError::Contract(format!(
                "grid interval [{start}, {end}] is empty or not finite"
            )));
        }
        Ok(Self {
            start,
            end,
            points,
            periodic,
        })
    }

    /// Periodic grid on `[0, 2π)`.
    pub fn periodic_circle(points: usize) -> Result<Self> {
        Self::new(0.0, 2.0 * std::f64::consts::PI, points, true)
    }

    pub fn spacing(&self) -> f64 {
        if self.periodic {
            (self.end - self.start) / self.points as f64
        } else {
            (self.end - self.start) / (self.points - 1) as f64
        }
    }

    pub fn node(&self, j: usize) -> f64 {
        self.start + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points)
            .map(|j| self.start + j as f64 * h)
            .collect()
    }

    pub fn period(&self) -> f64 {
        self.end - self.start
    }

    /// Trapezoid weights: `h` everywhere on a periodic grid, `h/2` at the two
    /// ends of a closed grid.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.points];
        if !self.periodic {
            w[0] = 0.5 * h;
            w[self.points - 1] = 0.5 * h;
        }
        w
    }
}

/// Samples of a real function on a [`UniformGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: UniformGrid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: UniformGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points {
            return Err(OvalError::Contract(format!(
                "grid function has {} values for a grid of {} points",
                values.len(),
                grid.points
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: UniformGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination with another function on the same grid.
    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(OvalError::Contract(
                "grid functions live on different grids".into(),
            ));
        }
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Trapezoid-weighted inner product on the common grid.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        if self.grid != other.grid {
            return Err(OvalError::Contract(
                "grid functions live on different grids".into(),
            ));
        }
        let w = self.grid.quadrature_weights();
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(&w)
            .map(|((a, b), w)| a * b * w)
            .sum())
    }

    /// Discrete L² norm with trapezoid weights.
    pub fn l2_norm(&self) -> f64 {
        let w = self.grid.quadrature_weights();
        self.values
            .iter()
            .zip(&w)
            .map(|(v, w)| v * v * w)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index and value of the smallest sample.
    pub fn argmin(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |(im, m), (i, v)| {
                    if v < m {
                        (i, v)
                    } else {
                        (im, m)
                    }
                },
            )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_depends_on_periodicity() {
        let p = UniformGrid::new(0.0, 1.0, 10, true).unwrap();
        let c = UniformGrid::new(0.0, 1.0, 11, false).unwrap();
        assert_eq!(p.spacing(), 0.1);
        assert!((c.spacing() - 0.1).abs() < 1e-15);
        assert!(p.nodes().last().unwrap() < &1.0);
        assert!((c.nodes().last().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(UniformGrid::new(0.0, 1.0, 7, true).is_err());
        assert!(UniformGrid::new(1.0, 1.0, 16, true).is_err());
    }

    #[test]
    fn value_count_must_match() {
        let g = UniformGrid::new(0.0, 1.0, 8, true).unwrap();
        assert!(GridFunction::new(g, vec![0.0; 7]).is_err());
        assert!(GridFunction::new(g, vec![0.0; 8]).is_ok());
    }
}
