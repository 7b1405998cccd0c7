use std::f64::consts::PI;

use num_complex::Complex64;

use super::grid::{GridFunction, UniformGrid};
use crate::{OvalError, Result};

/// Periodic trapezoid rule `h Σ f_j`.
///
/// Exact for trigonometric polynomials of degree below `points / 2`.
pub fn trapezoid_periodic(f: &GridFunction) -> Result<f64> {
    if !f.grid.periodic {
        return Err(OvalError::Contract(
            "periodic trapezoid needs a periodic grid".into(),
        ));
    }
    Ok(f.grid.spacing() * f.values.iter().sum::<f64>())
}

/// Trapezoid rule appropriate to the grid kind.
pub fn integrate(f: &GridFunction) -> f64 {
    let w = f.grid.quadrature_weights();
    f.values.iter().zip(&w).map(|(v, w)| v * w).sum()
}

/// Running trapezoid integral on a closed grid, starting from zero at the
/// left endpoint.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Trapezoid rule on arbitrary (sorted) nodes.
pub fn trapezoid_nodes(nodes: &[f64], values: &[f64]) -> f64 {
    nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(s, v)| 0.5 * (s[1] - s[0]) * (v[0] + v[1]))
        .sum()
}

/// Integral of the cubic Hermite interpolant of `(nodes, values, slopes)`:
/// the trapezoid rule plus the per-interval correction `h²/12 (f′_j − f′_{j+1})`.
pub fn hermite_trapezoid(nodes: &[f64], values: &[f64], slopes: &[f64]) -> f64 {
    (0..nodes.len().saturating_sub(1))
        .map(|j| {
            let h = nodes[j + 1] - nodes[j];
            0.5 * h * (values[j] + values[j + 1]) + h * h / 12.0 * (slopes[j] - slopes[j + 1])
        })
        .sum()
}

/// Normalized Fourier coefficients `c_n = (2π)^{-1/2} ∫ f(s) e^{-ins} ds`,
/// `n = -max_mode..=max_mode`, of a complex function sampled on a periodic
/// grid of period 2π. Index `n + max_mode` holds `c_n`.
pub fn fourier_coefficients_complex(
    grid: &UniformGrid,
    values: &[Complex64],
    max_mode: usize,
) -> Result<Vec<Complex64>> {
    if !grid.periodic {
        return Err(OvalError::Contract(
            "Fourier coefficients need a periodic grid".into(),
        ));
    }
    if values.len() != grid.points {
        return Err(OvalError::Contract(format!(
            "{} samples for a grid of {} points",
            values.len(),
            grid.points
        )));
    }
    if 2 * max_mode + 1 > grid.points {
        return Err(OvalError::Resolution(format!(
            "max_mode {max_mode} needs at least {} grid points, got {}",
            2 * max_mode + 1,
            grid.points
        )));
    }
    if (grid.period() - 2.0 * PI).abs() > 1e-12 {
        return Err(OvalError::Contract(format!(
            "Fourier coefficients assume period 2π, grid has period {}",
            grid.period()
        )));
    }
    let h = grid.spacing();
    let norm = h / (2.0 * PI).sqrt();
    let nodes = grid.nodes();
    let m = max_mode as i64;
    Ok((-m..=m)
        .map(|n| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (&s, &f) in nodes.iter().zip(values) {
                acc += f * Complex64::from_polar(1.0, -(n as f64) * s);
            }
            acc * norm
        })
        .collect())
}

/// Real-valued convenience wrapper around [`fourier_coefficients_complex`].
pub fn fourier_coefficients(f: &GridFunction, max_mode: usize) -> Result<Vec<Complex64>> {
    let values: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fourier_coefficients_complex(&f.grid, &values, max_mode)
}

/// Coefficients for the complex function `re + i im`.
pub fn fourier_coefficients_pair(
    re: &GridFunction,
    im: &GridFunction,
    max_mode: usize,
) -> Result<Vec<Complex64>> {
    if re.grid != im.grid {
        return Err(OvalError::Contract(
            "real and imaginary parts on different grids".into(),
        ));
    }
    let values: Vec<Complex64> = re
        .values
        .iter()
        .zip(&im.values)
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();
    fourier_coefficients_complex(&re.grid, &values, max_mode)
}

/// Second-order centered first derivative. Periodic grids wrap around, adding
/// `jump` when crossing the seam (for functions with `f(s + L) = f(s) + jump`);
/// closed grids use second-order one-sided differences at the ends.
pub fn derivative_centered(f: &GridFunction, jump: f64) -> Vec<f64> {
    let n = f.values.len();
    let h = f.grid.spacing();
    let v = &f.values;
    let mut d = vec![0.0; n];
    if f.grid.periodic {
        for j in 0..n {
            let (prev, next) = if n == 1 {
                (v[0] - jump, v[0] + jump)
            } else if j == 0 {
                (v[n - 1] - jump, v[1])
            } else if j == n - 1 {
                (v[n - 2], v[0] + jump)
            } else {
                (v[j - 1], v[j + 1])
            };
            d[j] = (next - prev) / (2.0 * h);
        }
    } else {
        for j in 1..n - 1 {
            d[j] = (v[j + 1] - v[j - 1]) / (2.0 * h);
        }
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    }
    d
}

/// Fourth-order centered first derivative on a closed grid, treating samples
/// beyond the ends as zero (functions with Dirichlet decay at the walls).
pub fn derivative_fourth_order(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let at = |i: isize| -> f64 {
        if i < 0 || i >= n as isize {
            0.0
        } else {
            values[i as usize]
        }
    };
    (0..n as isize)
        .map(|j| (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * h))
        .collect()
}

/// Fourth-order centered first derivative of periodic samples; crossing the
/// seam adds `jump` (for `f(s + L) = f(s) + jump`).
pub fn derivative_periodic_fourth_order(values: &[f64], h: f64, jump: f64) -> Vec<f64> {
    let n = values.len() as isize;
    let at = |i: isize| -> f64 {
        let wraps = i.div_euclid(n);
        values[i.rem_euclid(n) as usize] + wraps as f64 * jump
    };
    (0..n)
        .map(|j| (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * h))
        .collect()
}

/// Running integral on a closed grid by the trapezoid rule with the
/// endpoint correction `-h²/12 (f′(x) - f′(x₀))`, fourth-order accurate.
pub fn cumulative_trapezoid_corrected(values: &[f64], derivs: &[f64], h: f64) -> Vec<f64> {
    let corr = h * h / 12.0;
    cumulative_trapezoid(values, h)
        .into_iter()
        .zip(derivs)
        .map(|(t, d)| t - corr * (d - derivs[0]))
        .collect()
}

/// Fourth-order first derivative on a closed grid using one-sided
/// five-point stencils at the two nodes nearest each end.
pub fn derivative_closed_fourth_order(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 5, "fourth-order derivative needs five samples");
    let f = values;
    let mut d = vec![0.0; n];
    for j in 2..n - 2 {
        d[j] = (-f[j + 2] + 8.0 * f[j + 1] - 8.0 * f[j - 1] + f[j - 2]) / (12.0 * h);
    }
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    let m = n - 1;
    d[m] = (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4])
        / (12.0 * h);
    d[m - 1] =
        (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]) / (12.0 * h);
    d
}

/// Piecewise-cubic Hermite interpolant on strictly increasing nodes; constant
/// extrapolation outside the node range.
#[derive(Debug, Clone)]
pub struct CubicHermite {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

fn check_nodes(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() < 2 || ys.len() != xs.len() {
        return Err(OvalError::Contract(
            "interpolation needs at least two matching samples".into(),
        ));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(OvalError::Contract(
            "interpolation nodes must be strictly increasing".into(),
        ));
    }
    Ok(())
}

impl CubicHermite {
    /// Interpolant with prescribed node slopes.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        check_nodes(&xs, &ys)?;
        if slopes.len() != xs.len() || slopes.iter().any(|m| !m.is_finite()) {
            return Err(OvalError::Contract(
                "one finite slope per node is required".into(),
            ));
        }
        Ok(Self { xs, ys, slopes })
    }

    /// Monotone interpolant (Fritsch–Carlson slopes): preserves monotonicity
    /// of the data and never overshoots between nodes.
    pub fn monotone(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_nodes(&xs, &ys)?;
        let n = xs.len();
        let secants: Vec<f64> = xs
            .windows(2)
            .zip(ys.windows(2))
            .map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            let (a, b) = (secants[i - 1], secants[i]);
            if a * b <= 0.0 {
                slopes[i] = 0.0;
            } else {
                // weighted harmonic mean
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                slopes[i] = (w1 + w2) / (w1 / a + w2 / b);
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = match self
            .xs
            .binary_search_by(|p| p.partial_cmp(&x).expect("finite nodes"))
        {
            Ok(i) => return self.ys[i],
            Err(i) => i - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i]
            + h10 * h * self.slopes[i]
            + h01 * self.ys[i + 1]
            + h11 * h * self.slopes[i + 1]
    }
}
