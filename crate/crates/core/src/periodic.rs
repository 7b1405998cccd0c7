//! The curve operator `H_g(C) = -d²/ds² + g κ²` on `[0, 2π)` with periodic
//! boundary conditions, and the Fourier certificate for `λ₁ ≥ 1/2` at `g = 1`.
//!
//! Two discretizations: Fourier–Galerkin in the real orthonormal basis
//! `{1/√(2π), cos ns/√π, sin ns/√π}` (default, spectrally accurate for
//! band-limited κ), and a three-point periodic finite-difference scheme kept
//! as an independent cross-check.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{curvature_unchecked, CurveSpec};
use crate::numerics::quadrature::fourier_coefficients_complex;
use crate::numerics::{
    symmetric_eigenvalues, symmetric_eigs, GridFunction, Method, Spectrum, SymmetricMatrix,
    UniformGrid,
};
use crate::{OvalError, Result};

pub const DEFAULT_RESOLUTION: usize = 64;
pub const MIN_RESOLUTION: usize = 8;
/// `|Δλ₁|` allowed between resolution `N` and `⌈1.5 N⌉`.
pub const REFINEMENT_THRESHOLD: f64 = 1e-8;
const SIGN_CHANGE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveOperatorSpec {
    pub curve: CurveSpec,
    pub coupling: f64,
    /// Fourier modes per side (Galerkin) or grid points (finite differences).
    pub resolution: usize,
    pub method: Method,
    /// Reject curves with `κ ≤ 0` somewhere; switch off to study
    /// sign-changing `φ̇`.
    #[serde(default = "default_true")]
    pub require_positive_curvature: bool,
}

fn default_true() -> bool {
    true
}

impl CurveOperatorSpec {
    pub fn new(curve: CurveSpec, coupling: f64) -> Self {
        Self {
            curve,
            coupling,
            resolution: DEFAULT_RESOLUTION,
            method: Method::FourierGalerkin,
            require_positive_curvature: true,
        }
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn dimension(&self) -> usize {
        match self.method {
            Method::FourierGalerkin => 2 * self.resolution + 1,
            Method::FiniteDifference => self.resolution,
        }
    }

    fn check(&self) -> Result<()> {
        if self.resolution < MIN_RESOLUTION {
            return Err(OvalError::Contract(format!(
                "resolution {} is below the minimum {MIN_RESOLUTION}",
                self.resolution
            )));
        }
        if !self.coupling.is_finite() {
            return Err(OvalError::Domain("coupling must be finite".into()));
        }
        if self.require_positive_curvature {
            self.curve.validate()?;
        }
        Ok(())
    }

    fn refined(&self) -> Self {
        let mut s = self.clone();
        s.resolution = (3 * self.resolution).div_ceil(2);
        s
    }
}

/// Quadrature grid for the potential moments: at least 4× oversampled and
/// fine enough that `W cos ms` is integrated exactly for `m ≤ 2N`.
fn potential_grid(curve: &CurveSpec, modes: usize) -> UniformGrid {
    let band = 2 * curve.max_harmonic() as usize;
    let points = (4 * (2 * modes + 1)).max(2 * (2 * modes + band) + 2);
    UniformGrid::periodic_circle(points).expect("potential grid is valid")
}

/// `(I_c(m), I_s(m))` for `m = 0..=max_m`, `I_c(m) = ∫W cos ms`,
/// `I_s(m) = ∫W sin ms`.
fn potential_moments(w: &GridFunction, max_m: usize) -> (Vec<f64>, Vec<f64>) {
    let h = w.grid.spacing();
    let nodes = w.grid.nodes();
    let mut ic = vec![0.0; max_m + 1];
    let mut is = vec![0.0; max_m + 1];
    for (&s, &wv) in nodes.iter().zip(&w.values) {
        // rotate e^{is} by repeated multiplication, renormalizing every step
        let step = Complex64::from_polar(1.0, s);
        let mut z = Complex64::new(1.0, 0.0);
        for m in 0..=max_m {
            ic[m] += wv * z.re;
            is[m] += wv * z.im;
            z *= step;
            if m % 16 == 15 {
                z = Complex64::from_polar(1.0, ((m + 1) as f64) * s);
            }
        }
    }
    for v in ic.iter_mut().chain(is.iter_mut()) {
        *v *= h;
    }
    (ic, is)
}

fn galerkin_matrix(spec: &CurveOperatorSpec) -> Result<SymmetricMatrix> {
    let n = spec.resolution;
    let g = potential_grid(&spec.curve, n);
    let kappa = curvature_unchecked(&spec.curve, &g);
    let w = kappa.map(|k| spec.coupling * k * k);
    let (ic, is) = potential_moments(&w, 2 * n);
    let c_at = |m: i64| ic[m.unsigned_abs() as usize];
    let s_at = |m: i64| m.signum() as f64 * is[m.unsigned_abs() as usize];
    let two_pi = 2.0 * PI;
    let dim = 2 * n + 1;
    // index 0: constant; 2p-1: cos ps; 2p: sin ps
    let kind = |i: usize| -> (u8, i64) {
        if i == 0 {
            (0, 0)
        } else if i % 2 == 1 {
            (1, i.div_ceil(2) as i64)
        } else {
            (2, (i / 2) as i64)
        }
    };
    SymmetricMatrix::from_fn(dim, |i, j| {
        let (ki, p) = kind(i);
        let (kj, q) = kind(j);
        let pot = match (ki, kj) {
            (0, 0) => c_at(0) / two_pi,
            (0, 1) => c_at(q) / (PI * 2f64.sqrt()),
            (1, 0) => c_at(p) / (PI * 2f64.sqrt()),
            (0, 2) => s_at(q) / (PI * 2f64.sqrt()),
            (2, 0) => s_at(p) / (PI * 2f64.sqrt()),
            (1, 1) => (c_at(p - q) + c_at(p + q)) / two_pi,
            (2, 2) => (c_at(p - q) - c_at(p + q)) / two_pi,
            (1, 2) => (s_at(p + q) - s_at(p - q)) / two_pi,
            (2, 1) => (s_at(p + q) - s_at(q - p)) / two_pi,
            _ => unreachable!(),
        };
        let kinetic = if i == j { (p * p) as f64 } else { 0.0 };
        kinetic + pot
    })
}

fn fd_matrix(spec: &CurveOperatorSpec) -> Result<SymmetricMatrix> {
    let n = spec.resolution;
    let g = UniformGrid::periodic_circle(n)?;
    let h2 = g.spacing().powi(2);
    let kappa = curvature_unchecked(&spec.curve, &g);
    SymmetricMatrix::from_fn(n, |i, j| {
        let d = (i + n - j) % n;
        if i == j {
            2.0 / h2 + spec.coupling * kappa.values[i].powi(2)
        } else if d == 1 || d == n - 1 {
            -1.0 / h2
        } else {
            0.0
        }
    })
}

/// Matrix of `H_g(C)` in the chosen discretization.
pub fn build_operator(spec: &CurveOperatorSpec) -> Result<SymmetricMatrix> {
    spec.check()?;
    match spec.method {
        Method::FourierGalerkin => galerkin_matrix(spec),
        Method::FiniteDifference => fd_matrix(spec),
    }
}

/// Grid on which Galerkin eigenfunctions are sampled.
pub fn galerkin_sample_grid(modes: usize) -> UniformGrid {
    UniformGrid::periodic_circle((4 * (2 * modes + 1)).max(256)).expect("sample grid is valid")
}

/// `f(s)` and `f′(s)` of the Galerkin expansion with coefficients `v`.
fn galerkin_eval(v: &[f64], s: f64) -> (f64, f64) {
    let modes = (v.len() - 1) / 2;
    let r2pi = (2.0 * PI).sqrt();
    let rpi = PI.sqrt();
    let mut f = v[0] / r2pi;
    let mut df = 0.0;
    for p in 1..=modes {
        let (sn, cn) = (p as f64 * s).sin_cos();
        let (a, b) = (v[2 * p - 1] / rpi, v[2 * p] / rpi);
        f += a * cn + b * sn;
        df += p as f64 * (-a * sn + b * cn);
    }
    (f, df)
}

fn orient_ground_state(vectors: &mut [GridFunction], coeffs: Option<&mut [Vec<f64>]>) {
    if let Some(first) = vectors.first_mut() {
        if first.values.iter().sum::<f64>() < 0.0 {
            first.values.iter_mut().for_each(|v| *v = -*v);
            if let Some(c) = coeffs {
                c[0].iter_mut().for_each(|v| *v = -*v);
            }
        }
    }
}

/// Eigenpairs at the spec's resolution, without the refinement check.
/// Galerkin coefficient vectors are returned alongside the samples.
fn solve(spec: &CurveOperatorSpec, k: usize) -> Result<(Spectrum, Vec<Vec<f64>>)> {
    let m = build_operator(spec)?;
    if k == 0 || k > m.dim() {
        return Err(OvalError::Contract(format!(
            "requested {k} eigenvalues of a {}-dimensional operator",
            m.dim()
        )));
    }
    let pairs = symmetric_eigs(&m, k)?;
    let mut coeffs = pairs.vectors;
    let mut vectors: Vec<GridFunction> = match spec.method {
        Method::FourierGalerkin => {
            let g = galerkin_sample_grid(spec.resolution);
            coeffs
                .iter()
                .map(|v| GridFunction::from_fn(g, |s| galerkin_eval(v, s).0))
                .collect()
        }
        Method::FiniteDifference => {
            let g = UniformGrid::periodic_circle(spec.resolution)?;
            let scale = 1.0 / g.spacing().sqrt();
            coeffs
                .iter()
                .map(|v| GridFunction {
                    grid: g,
                    values: v.iter().map(|x| x * scale).collect(),
                })
                .collect()
        }
    };
    orient_ground_state(&mut vectors, Some(&mut coeffs));
    let mut spectrum = Spectrum::new(pairs.values, spec.resolution, spec.method);
    spectrum.eigenvectors = Some(vectors);
    Ok((spectrum, coeffs))
}

/// The `k` lowest eigenvalues only, at the spec's resolution. Used in inner
/// loops where eigenvectors and the refinement check are not needed.
pub fn eigenvalues(spec: &CurveOperatorSpec, k: usize) -> Result<Vec<f64>> {
    let m = build_operator(spec)?;
    symmetric_eigenvalues(&m, k)
}

/// The `k` lowest eigenpairs, with a refinement check at 1.5× resolution
/// recorded in the spectrum metadata.
pub fn lowest_eigs(spec: &CurveOperatorSpec, k: usize) -> Result<Spectrum> {
    let (mut spectrum, _) = solve(spec, k)?;
    let fine = eigenvalues(&spec.refined(), 1)?;
    let delta = (fine[0] - spectrum.eigenvalues[0]).abs();
    spectrum.refinement_delta = Some(delta);
    spectrum.resolution_warning = delta > REFINEMENT_THRESHOLD;
    Ok(spectrum)
}

/// Lowest eigenvalue with the normalized, nonnegative-mean ground state
/// sampled on `grid`, and `f′` on the same grid (Galerkin only).
pub fn galerkin_ground_state(
    spec: &CurveOperatorSpec,
    grid: &UniformGrid,
) -> Result<(f64, f64, GridFunction, GridFunction)> {
    let spec = spec.clone().with_method(Method::FourierGalerkin);
    let (spectrum, coeffs) = solve(&spec, 2)?;
    let v = &coeffs[0];
    let nodes = grid.nodes();
    let (f, df): (Vec<f64>, Vec<f64>) = nodes.iter().map(|&s| galerkin_eval(v, s)).unzip();
    Ok((
        spectrum.eigenvalues[0],
        spectrum.eigenvalues[1],
        GridFunction::new(*grid, f)?,
        GridFunction::new(*grid, df)?,
    ))
}

/// The Fourier argument for `λ₁ ≥ 1/2`, evaluated on the computed ground
/// state `f ≥ 0`: `c_n` are the coefficients of `e^{iφ} f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfBoundCertificate {
    pub c0_sq: f64,
    /// `|Σ|c_n|² - ‖f‖²|`.
    pub parseval_residual: f64,
    /// `(f, H f) = ∫ f′² + κ² f²`.
    pub quadratic_form: f64,
    /// `Σ n² |c_n|²`.
    pub fourier_sum: f64,
    /// `Σ_{n≠0} |c_n|²`.
    pub certified_lower_bound: f64,
    pub lambda1: f64,
    /// Set when the ground state dips below zero by more than 1e-8 relative.
    pub sign_change_warning: bool,
}

impl HalfBoundCertificate {
    /// Relative mismatch between the Fourier sum and the quadratic form.
    pub fn form_mismatch(&self) -> f64 {
        (self.fourier_sum - self.quadratic_form).abs() / self.quadratic_form.abs().max(1e-300)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.c0_sq <= 0.5 + tol && self.certified_lower_bound >= 0.5 - tol
    }
}

/// Certificate for `g = 1`. Always computed from the Galerkin ground state,
/// whose samples and derivative are exact trigonometric polynomials.
pub fn halfbound_certificate(spec: &CurveOperatorSpec) -> Result<HalfBoundCertificate> {
    if spec.coupling != 1.0 {
        return Err(OvalError::UnsupportedCoupling(spec.coupling));
    }
    let n = spec.resolution;
    // e^{iφ} is not band-limited; leave generous room for its tail
    let (amp, band): (f64, usize) = (
        spec.curve.harmonics.iter().map(|h| h.a.hypot(h.b)).sum(),
        spec.curve.max_harmonic() as usize,
    );
    let max_mode = 2 * n + band * (8 + (4.0 * amp).ceil() as usize) + 32;
    let grid = UniformGrid::periodic_circle(2 * max_mode + 1)?;
    let (lambda1, _, f, df) = galerkin_ground_state(spec, &grid)?;
    let kappa = curvature_unchecked(&spec.curve, &grid);
    let h = grid.spacing();
    let nodes = grid.nodes();

    let fmax = f.max_abs();
    let fmin = f.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let sign_change_warning = fmin < -SIGN_CHANGE_TOLERANCE * fmax;

    let norm_sq = h * f.values.iter().map(|v| v * v).sum::<f64>();
    let quadratic_form = h * f
        .values
        .iter()
        .zip(&df.values)
        .zip(&kappa.values)
        .map(|((fv, dv), k)| dv * dv + k * k * fv * fv)
        .sum::<f64>();

    let field: Vec<Complex64> = nodes
        .iter()
        .zip(&f.values)
        .map(|(&s, &fv)| Complex64::from_polar(fv, spec.curve.phi(s)))
        .collect();
    let c = fourier_coefficients_complex(&grid, &field, max_mode)?;
    let mut total = 0.0;
    let mut fourier_sum = 0.0;
    for (idx, cn) in c.iter().enumerate() {
        let m = idx as f64 - max_mode as f64;
        let p = cn.norm_sqr();
        total += p;
        fourier_sum += m * m * p;
    }
    let c0_sq = c[max_mode].norm_sqr();
    Ok(HalfBoundCertificate {
        c0_sq,
        parseval_residual: (total - norm_sq).abs(),
        quadratic_form,
        fourier_sum,
        certified_lower_bound: total - c0_sq,
        lambda1,
        sign_change_warning,
    })
}

/// Eigenvalue rounding scale `64 ε N²` for a Galerkin operator with `N` modes
/// (`‖H‖ ≈ N²`); variational comparisons across resolutions hold up to this.
pub fn rounding_allowance(modes: f64) -> f64 {
    64.0 * f64::EPSILON * modes * modes
}

/// `{n² + g : n ∈ ℤ}` sorted, first `k`.
pub fn circle_spectrum(g: f64, k: usize) -> Spectrum {
    let mut values = Vec::with_capacity(k);
    let mut n = 0u64;
    while values.len() < k {
        let v = (n * n) as f64 + g;
        values.push(v);
        if n > 0 && values.len() < k {
            values.push(v);
        }
        n += 1;
    }
    let mut s = Spectrum::new(values, 0, Method::FourierGalerkin);
    s.refinement_delta = Some(0.0);
    s
}
