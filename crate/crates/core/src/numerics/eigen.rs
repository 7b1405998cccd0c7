//! Dense real symmetric eigensolver: Householder reduction to tridiagonal
//! form followed by the implicit QL algorithm with Wilkinson-style shifts
//! (the classical `tred2` / `tql2` pair).

use crate::{OvalError, Result};

/// Dense symmetric matrix, stored row-major.
///
/// Construction symmetrizes the input as `(A + Aᵀ)/2`, so `entry(i, j) ==
/// entry(j, i)` holds bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn from_row_major(dim: usize, mut entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(OvalError::Contract(format!(
                "matrix of dimension {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for i in 0..dim {
            for j in i + 1..dim {
                let avg = 0.5 * (entries[i * dim + j] + entries[j * dim + i]);
                entries[i * dim + j] = avg;
                entries[j * dim + i] = avg;
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self::from_row_major(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Lowest eigenpairs of a [`SymmetricMatrix`], ascending, with orthonormal
/// eigenvectors in the Euclidean inner product.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl Eigenpairs {
    /// Largest `‖M v − λ v‖_∞` over the stored pairs.
    pub fn max_residual(&self, m: &SymmetricMatrix) -> f64 {
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(&lam, v)| {
                m.mul_vec(v)
                    .iter()
                    .zip(v)
                    .map(|(mv, vi)| (mv - lam * vi).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

const MAX_QL_SWEEPS: usize = 60;

/// The `k` smallest eigenvalues of `m` with orthonormal eigenvectors.
///
/// Eigenvector signs are fixed so that the first component of magnitude above
/// `1e-12` is positive.
pub fn symmetric_eigs(m: &SymmetricMatrix, k: usize) -> Result<Eigenpairs> {
    check_count(m, k)?;
    let n = m.dim;
    let mut v = m.entries.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e, n, true);
    // columns of `v` become rows of `vt` so that the QL rotations stream
    // through contiguous memory
    let mut vt = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            vt[c * n + r] = v[r * n + c];
        }
    }
    ql_implicit(&mut d, &mut e, Some(&mut vt), n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values: Vec<f64> = order.iter().take(k).map(|&i| d[i]).collect();
    let vectors = order
        .iter()
        .take(k)
        .map(|&i| {
            let mut col = vt[i * n..(i + 1) * n].to_vec();
            if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    col.iter_mut().for_each(|x| *x = -*x);
                }
            }
            col
        })
        .collect();
    Ok(Eigenpairs { values, vectors })
}

/// The `k` smallest eigenvalues only; skips eigenvector accumulation.
pub fn symmetric_eigenvalues(m: &SymmetricMatrix, k: usize) -> Result<Vec<f64>> {
    check_count(m, k)?;
    let n = m.dim;
    let mut v = m.entries.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e, n, false);
    ql_implicit(&mut d, &mut e, None, n)?;
    d.sort_by(f64::total_cmp);
    d.truncate(k);
    Ok(d)
}

fn check_count(m: &SymmetricMatrix, k: usize) -> Result<()> {
    if k == 0 || k > m.dim {
        return Err(OvalError::Contract(format!(
            "requested {k} eigenpairs of a {0}×{0} matrix",
            m.dim
        )));
    }
    Ok(())
}

/// Householder reduction. On exit `d` holds the diagonal and `e[1..]` the
/// subdiagonal of the tridiagonal matrix; when `accumulate` is set, `v` holds
/// the orthogonal transformation (row-major).
fn tridiagonalize(v: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize, accumulate: bool) {
    let at = |r: usize, c: usize| r * n + c;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for j in 0..i {
                e[j] = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for j in 0..n {
            d[j] = v[at(j, j)];
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)`; `vt` (eigenvectors stored as
/// rows) is rotated alongside when present.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut vt: Option<&mut [f64]>, n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(OvalError::NoConvergence {
                        iterations: sweeps - 1,
                        residual: e[l].abs() / tst1.max(f64::MIN_POSITIVE),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(vt) = vt.as_deref_mut() {
                        let (lo, hi) = vt.split_at_mut((i + 1) * n);
                        let row_i = &mut lo[i * n..];
                        let row_next = &mut hi[..n];
                        for k in 0..n {
                            let h = row_next[k];
                            row_next[k] = s * row_i[k] + c * h;
                            row_i[k] = c * row_i[k] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn diagonal_matrix() {
        let m = SymmetricMatrix::from_row_major(2, vec![3.0, 0.0, 0.0, 2.0]).unwrap();
        let e = symmetric_eigs(&m, 2).unwrap();
        assert_eq!(e.values, vec![2.0, 3.0]);
        assert!((e.vectors[0][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity() {
        let m = SymmetricMatrix::from_fn(5, |i, j| if i == j { 1.0 } else { 0.0 }).unwrap();
        let e = symmetric_eigs(&m, 1).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_laplacian() {
        let n = 200;
        let h = 1.0 / (n + 1) as f64;
        let m = SymmetricMatrix::from_fn(n, |i, j| {
            if i == j {
                2.0 / (h * h)
            } else if i.abs_diff(j) == 1 {
                -1.0 / (h * h)
            } else {
                0.0
            }
        })
        .unwrap();
        let e = symmetric_eigs(&m, 1).unwrap();
        let exact_fd = 4.0 * (PI * h / 2.0).sin().powi(2) / (h * h);
        assert!((e.values[0] - exact_fd).abs() < 1e-9 * exact_fd);
        assert!((e.values[0] - PI * PI).abs() < 1e-3 * PI * PI);
        assert!(e.max_residual(&m) <= 1e-9 * m.norm_inf());
        let vals = symmetric_eigenvalues(&m, 3).unwrap();
        assert!((vals[0] - e.values[0]).abs() < 1e-9);
    }

    #[test]
    fn symmetrizes_on_construction() {
        let m = SymmetricMatrix::from_row_major(2, vec![1.0, 2.0, 4.0, 1.0]).unwrap();
        assert_eq!(m.entry(0, 1), 3.0);
        assert_eq!(m.entry(1, 0), 3.0);
    }

    #[test]
    fn rejects_bad_counts() {
        let m = SymmetricMatrix::from_fn(3, |_, _| 1.0).unwrap();
        assert!(symmetric_eigs(&m, 0).is_err());
        assert!(symmetric_eigs(&m, 4).is_err());
    }

    #[test]
    fn one_by_one() {
        let m = SymmetricMatrix::from_row_major(1, vec![-2.5]).unwrap();
        let e = symmetric_eigs(&m, 1).unwrap();
        assert_eq!(e.values, vec![-2.5]);
        assert_eq!(e.vectors[0], vec![1.0]);
    }
}
