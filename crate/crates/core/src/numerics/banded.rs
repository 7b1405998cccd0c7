//! Lowest eigenpairs of a symmetric banded matrix by inertia bisection and
//! inverse iteration.
//!
//! The inertia of `A − σI` comes from an unpivoted banded `LDLᵀ`
//! factorization (Sylvester's law), so the cost per count is `O(n p²)` for
//! bandwidth `p`. Used by the line solver, whose finite-difference matrices
//! are too large for the dense path but have bandwidth at most two.

use super::eigen::Eigenpairs;
use crate::{OvalError, Result};

#[derive(Debug, Clone)]
pub struct BandedSymmetric {
    n: usize,
    /// `bands[d][i] = A[i][i − d]` for `i ≥ d`; entries with `i < d` are unused.
    bands: Vec<Vec<f64>>,
}

impl BandedSymmetric {
    /// `bands[0]` is the diagonal, `bands[d]` the `d`-th subdiagonal indexed
    /// by row.
    pub fn new(bands: Vec<Vec<f64>>) -> Result<Self> {
        let n = bands.first().map_or(0, Vec::len);
        if n == 0 || bands.iter().any(|b| b.len() != n) {
            return Err(OvalError::Contract(
                "banded matrix needs equal-length, non-empty bands".into(),
            ));
        }
        Ok(Self { n, bands })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let d = r - c;
        if d > self.bandwidth() {
            0.0
        } else {
            self.bands[d][r]
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let p = self.bandwidth();
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(p);
            let hi = (i + p).min(self.n - 1);
            out[i] = (lo..=hi).map(|j| self.entry(i, j) * v[j]).sum();
        }
        out
    }

    pub fn norm_inf(&self) -> f64 {
        let p = self.bandwidth();
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(p);
                let hi = (i + p).min(self.n - 1);
                (lo..=hi).map(|j| self.entry(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let p = self.bandwidth();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let l = i.saturating_sub(p);
            let h = (i + p).min(self.n - 1);
            let radius: f64 = (l..=h)
                .filter(|&j| j != i)
                .map(|j| self.entry(i, j).abs())
                .sum();
            lo = lo.min(self.bands[0][i] - radius);
            hi = hi.max(self.bands[0][i] + radius);
        }
        (lo, hi)
    }

    /// Unpivoted `LDLᵀ` of `A − σI`. Returns the unit-lower factor's
    /// subdiagonal bands and the pivots; exact-zero pivots are nudged.
    fn factor(&self, sigma: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = self.n;
        let p = self.bandwidth();
        let tiny = f64::EPSILON * self.norm_inf().max(1.0);
        let mut l = vec![vec![0.0; n]; p + 1];
        let mut dpiv = vec![0.0; n];
        for i in 0..n {
            let lo = i.saturating_sub(p);
            for j in lo..i {
                // L[i][j] = (A[i][j] − Σ_{k<j} L[i][k] L[j][k] D[k]) / D[j]
                let mut acc = self.bands[i - j][i];
                for k in lo..j {
                    if j - k <= p {
                        acc -= l[i - k][i] * l[j - k][j] * dpiv[k];
                    }
                }
                l[i - j][i] = acc / dpiv[j];
            }
            let mut di = self.bands[0][i] - sigma;
            for k in lo..i {
                di -= l[i - k][i] * l[i - k][i] * dpiv[k];
            }
            if di == 0.0 {
                di = -tiny;
            }
            dpiv[i] = di;
        }
        (l, dpiv)
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        let (_, dpiv) = self.factor(sigma);
        dpiv.iter().filter(|&&d| d < 0.0).count()
    }

    fn solve_shifted(&self, sigma: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let p = self.bandwidth();
        let (l, dpiv) = self.factor(sigma);
        let mut y = rhs.to_vec();
        for i in 0..n {
            for k in i.saturating_sub(p)..i {
                y[i] -= l[i - k][i] * y[k];
            }
        }
        for i in 0..n {
            y[i] /= dpiv[i];
        }
        for i in (0..n).rev() {
            for k in i + 1..=(i + p).min(n - 1) {
                y[i] -= l[k - i][k] * y[k];
            }
        }
        y
    }

    /// The `k` smallest eigenvalues with orthonormal eigenvectors.
    ///
    /// Eigenvalues are bisected to `tol` relative to the spectral scale;
    /// eigenvectors come from shifted inverse iteration, re-orthogonalized
    /// against the previously found ones. Signs follow the dense solver's
    /// convention (first significant component positive).
    pub fn lowest_eigs(&self, k: usize) -> Result<Eigenpairs> {
        if k == 0 || k > self.n {
            return Err(OvalError::Contract(format!(
                "requested {k} eigenpairs of a {0}×{0} banded matrix",
                self.n
            )));
        }
        let (glo, ghi) = self.gershgorin();
        let scale = glo.abs().max(ghi.abs()).max(1.0);
        let tol = 4.0 * f64::EPSILON * scale;

        let mut values = Vec::with_capacity(k);
        for idx in 0..k {
            // smallest σ with count_below(σ) > idx
            let (mut lo, mut hi) = (glo - tol, ghi + tol);
            let mut iterations = 0;
            while hi - lo > tol {
                iterations += 1;
                if iterations > 200 {
                    return Err(OvalError::NoConvergence {
                        iterations,
                        residual: (hi - lo) / scale,
                    });
                }
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid) > idx {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            values.push(0.5 * (lo + hi));
        }

        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        for (idx, &lam) in values.iter().enumerate() {
            let shift = lam - 64.0 * tol;
            let mut x: Vec<f64> = (0..self.n)
                .map(|i| 1.0 + 0.1 * ((i * 7 + idx * 13) % 11) as f64)
                .collect();
            for _ in 0..4 {
                x = self.solve_shifted(shift, &x);
                for prev in &vectors {
                    let dot: f64 = x.iter().zip(prev).map(|(a, b)| a * b).sum();
                    x.iter_mut().zip(prev).for_each(|(a, b)| *a -= dot * b);
                }
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if !norm.is_finite() || norm == 0.0 {
                    return Err(OvalError::NoConvergence {
                        iterations: 0,
                        residual: f64::NAN,
                    });
                }
                x.iter_mut().for_each(|v| *v /= norm);
            }
            if let Some(first) = x.iter().find(|v| v.abs() > 1e-12) {
                if *first < 0.0 {
                    x.iter_mut().for_each(|v| *v = -*v);
                }
            }
            vectors.push(x);
        }
        Ok(Eigenpairs { values, vectors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eigen::{symmetric_eigs, SymmetricMatrix};

    fn sample(n: usize) -> BandedSymmetric {
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + (i as f64 * 0.7).sin()).collect();
        let sub1: Vec<f64> = (0..n).map(|i| -1.0 + 0.1 * (i as f64).cos()).collect();
        let sub2: Vec<f64> = (0..n).map(|i| 0.05 * (i as f64 * 1.3).sin()).collect();
        BandedSymmetric::new(vec![diag, sub1, sub2]).unwrap()
    }

    #[test]
    fn matches_dense_solver() {
        let b = sample(60);
        let dense = SymmetricMatrix::from_fn(60, |i, j| b.entry(i, j)).unwrap();
        let want = symmetric_eigs(&dense, 4).unwrap();
        let got = b.lowest_eigs(4).unwrap();
        for i in 0..4 {
            assert!((want.values[i] - got.values[i]).abs() < 1e-12);
            let dot: f64 = want.vectors[i]
                .iter()
                .zip(&got.vectors[i])
                .map(|(a, b)| a * b)
                .sum();
            assert!((dot.abs() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn residuals_and_orthogonality() {
        let b = sample(500);
        let e = b.lowest_eigs(3).unwrap();
        for (lam, v) in e.values.iter().zip(&e.vectors) {
            let r = b
                .mul_vec(v)
                .iter()
                .zip(v)
                .map(|(a, x)| (a - lam * x).abs())
                .fold(0.0, f64::max);
            assert!(r <= 1e-9 * b.norm_inf());
        }
        let d01: f64 = e.vectors[0]
            .iter()
            .zip(&e.vectors[1])
            .map(|(a, b)| a * b)
            .sum();
        assert!(d01.abs() < 1e-10);
    }

    #[test]
    fn counts_are_monotone() {
        let b = sample(40);
        let mut last = 0;
        for i in 0..50 {
            let c = b.count_below(-1.0 + 0.1 * i as f64);
            assert!(c >= last);
            last = c;
        }
        assert_eq!(b.count_below(100.0), 40);
    }
}
