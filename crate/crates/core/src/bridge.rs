//! Changes of variables from eigenfunctions on the line to data on an
//! interval or a circle.
//!
//! Single function: `s = ∫_{-∞}^x u₁²` maps the line onto `[0, 1]` and turns
//! the one-state Lieb–Thirring bound into the Dirichlet inequality
//! `∫ẇ² ≥ π² ∫w²` for `w = u₁²`.
//!
//! Pair: `s = π ∫_{-∞}^x (u₁² + u₂²)` maps onto `[0, 2π]`; with
//! `u₁ + i u₂ = ρ e^{iθ}`, `R = ρ²` and `φ = 2θ`, the two-state functional
//! `∫(u₁′² + u₂′²) / ((π²/4) ∫ρ⁶)` becomes `∫(Ṙ² + R²φ̇²) / ∫R²`, and
//! orthonormality becomes the closure condition `∫cos φ = ∫sin φ = 0`.
//!
//! Resampling onto uniform `s` grids uses cubic Hermite interpolation with the
//! exact chain-rule slopes at the line nodes; `s(x)` itself is a
//! fourth-order corrected cumulative trapezoid.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::ClosureResidual;
use crate::line::kinetic_energy;
use crate::numerics::quadrature::{
    cumulative_trapezoid_corrected, derivative_closed_fourth_order, derivative_fourth_order,
    derivative_periodic_fourth_order, hermite_trapezoid, integrate,
};
use crate::numerics::{CubicHermite, GridFunction, UniformGrid};
use crate::{OvalError, Result};

pub const SINGLE_S_POINTS: usize = 1024;
pub const PAIR_S_POINTS: usize = 2048;
/// `ρ²` below this fraction of its maximum inside the support is a node.
pub const NODE_THRESHOLD: f64 = 1e-7;
/// Tails with density below this fraction of the maximum are dropped before
/// resampling; their share of `s` is negligible and their angle is noise.
const TAIL_THRESHOLD: f64 = 1e-12;
const NORMALIZATION_TOLERANCE: f64 = 1e-6;
const ORTHONORMALITY_TOLERANCE: f64 = 1e-8;
const DECAY_TOLERANCE: f64 = 1e-6;

fn require_line_grid(u: &GridFunction) -> Result<()> {
    if u.grid.periodic {
        return Err(OvalError::Contract(
            "line functions must live on a closed grid".into(),
        ));
    }
    Ok(())
}

fn inner(a: &GridFunction, b: &GridFunction) -> Result<f64> {
    a.inner(b)
}

/// First and last index where `density ≥ frac · max`.
fn span_above(density: &[f64], frac: f64) -> (usize, usize) {
    let max = density.iter().cloned().fold(0.0, f64::max);
    let cut = frac * max;
    let first = density.iter().position(|&d| d >= cut).unwrap_or(0);
    let last = density
        .iter()
        .rposition(|&d| d >= cut)
        .unwrap_or(density.len() - 1);
    (first, last)
}

/// `s(x) = scale · ∫_{x₀}^x density`, normalized so that it ends at `total`.
fn arclength_map(density: &[f64], density_deriv: &[f64], h: f64, total: f64) -> Vec<f64> {
    let raw = cumulative_trapezoid_corrected(density, density_deriv, h);
    let end = raw[raw.len() - 1];
    raw.iter().map(|s| s * total / end).collect()
}

/// Nodes `j ∈ [lo, hi]` with strictly increasing `s`. A stall inside
/// `[support.0, support.1]` means the density vanishes on an interval.
fn increasing_nodes(
    s: &[f64],
    lo: usize,
    hi: usize,
    support: (usize, usize),
    xs: &[f64],
) -> Result<Vec<usize>> {
    let mut keep = vec![lo];
    for j in lo + 1..=hi {
        if s[j] > s[*keep.last().expect("nonempty")] {
            keep.push(j);
        } else if j > support.0 && j <= support.1 {
            return Err(OvalError::FlatMap { x: xs[j] });
        }
    }
    Ok(keep)
}

fn resample(
    s: &[f64],
    values: &[f64],
    slopes: &[f64],
    nodes: &[usize],
    target: &UniformGrid,
) -> Result<GridFunction> {
    let pick = |v: &[f64]| nodes.iter().map(|&j| v[j]).collect::<Vec<f64>>();
    let interp = CubicHermite::new(pick(s), pick(values), pick(slopes))?;
    Ok(GridFunction::from_fn(*target, |t| interp.eval(t)))
}

/// Data of the one-function map `x → s ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleBridgeReport {
    pub s_of_x: GridFunction,
    pub w: GridFunction,
    /// `∫ẇ² ds`
    pub dirichlet_lhs: f64,
    /// `π² ∫w² ds`
    pub dirichlet_rhs: f64,
    /// `∫u₁′² dx`
    pub kinetic_x: f64,
    /// `∫u₁⁶ dx`
    pub sextic_x: f64,
    /// `∫w² ds`
    pub w_sq_integral: f64,
    pub w_boundary: (f64, f64),
}

impl SingleBridgeReport {
    /// Relative gaps in `∫u′² = ¼∫ẇ²` and `∫u⁶ = ∫w²`.
    pub fn identity_residuals(&self) -> (f64, f64) {
        (
            (self.dirichlet_lhs / 4.0 - self.kinetic_x).abs() / self.kinetic_x,
            (self.w_sq_integral - self.sextic_x).abs() / self.sextic_x,
        )
    }

    pub fn inequality_holds(&self, tol: f64) -> bool {
        self.dirichlet_lhs >= self.dirichlet_rhs - tol
    }
}

pub fn single_bridge(u1: &GridFunction) -> Result<SingleBridgeReport> {
    require_line_grid(u1)?;
    let norm = inner(u1, u1)?;
    if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(OvalError::Contract(format!(
            "u₁ is not normalized: ‖u₁‖² = {norm}"
        )));
    }
    let n = u1.len();
    let (first, last) = (u1.values[0], u1.values[n - 1]);
    if first.abs() >= DECAY_TOLERANCE || last.abs() >= DECAY_TOLERANCE {
        return Err(OvalError::Contract(format!(
            "u₁ does not decay at the ends: u(start) = {first:e}, u(end) = {last:e}"
        )));
    }
    let h = u1.grid.spacing();
    let xs = u1.grid.nodes();
    let u = &u1.values;
    let du = derivative_fourth_order(u, h);
    let density: Vec<f64> = u.iter().map(|v| v * v).collect();
    let ddensity: Vec<f64> = u.iter().zip(&du).map(|(v, d)| 2.0 * v * d).collect();
    let s = arclength_map(&density, &ddensity, h, 1.0);
    let scale = 1.0 / cumulative_end(&density, &ddensity, h);

    let support = span_above(&density, NODE_THRESHOLD);
    let (lo, hi) = span_above(&density, TAIL_THRESHOLD);
    let nodes = increasing_nodes(&s, lo, hi, support, &xs)?;
    // dw/ds = (2u u′) / (scale · u²)
    let slopes: Vec<f64> = u
        .iter()
        .zip(&du)
        .map(|(v, d)| {
            let m = 2.0 * d / (v * scale);
            if m.is_finite() {
                m
            } else {
                0.0
            }
        })
        .collect();
    let target = UniformGrid::new(0.0, 1.0, SINGLE_S_POINTS, false)?;
    let w = resample(&s, &density, &slopes, &nodes, &target)?;
    let dw = derivative_closed_fourth_order(&w.values, target.spacing());
    let dirichlet_lhs = integrate(&GridFunction::new(
        target,
        dw.iter().map(|d| d * d).collect(),
    )?);
    let w_sq_integral = integrate(&w.map(|v| v * v));
    let sextic_x = integrate(&u1.map(|v| v.powi(6)));
    Ok(SingleBridgeReport {
        s_of_x: GridFunction::new(u1.grid, s)?,
        w_boundary: (w.values[0], w.values[SINGLE_S_POINTS - 1]),
        w,
        dirichlet_lhs,
        dirichlet_rhs: PI * PI * w_sq_integral,
        kinetic_x: kinetic_energy(u1),
        sextic_x,
        w_sq_integral,
    })
}

fn cumulative_end(density: &[f64], ddensity: &[f64], h: f64) -> f64 {
    let c = cumulative_trapezoid_corrected(density, ddensity, h);
    c[c.len() - 1]
}

/// `(Ṙ, φ̇)` on the grid of `R` and `φ`. Closed grids use fourth-order
/// one-sided ends; periodic grids wrap, with `φ` advancing by its winding.
fn polar_derivatives(r: &GridFunction, phi: &GridFunction) -> (Vec<f64>, Vec<f64>) {
    let h = r.grid.spacing();
    if r.grid.periodic {
        let n = phi.len();
        let v = &phi.values;
        let turns = ((2.0 * v[n - 1] - v[n - 2] - v[0]) / (2.0 * PI)).round();
        (
            derivative_periodic_fourth_order(&r.values, h, 0.0),
            derivative_periodic_fourth_order(v, h, 2.0 * PI * turns),
        )
    } else {
        (
            derivative_closed_fourth_order(&r.values, h),
            derivative_closed_fourth_order(&phi.values, h),
        )
    }
}

/// Everything the pair map produces. JSON field names follow the quantities:
/// `R = ρ²`, `phi = 2θ`, `kappa = φ̇`; `*_34` are line-side, `*_311`
/// circle-side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub s_of_x: GridFunction,
    #[serde(rename = "R")]
    pub r: GridFunction,
    pub phi: GridFunction,
    pub kappa: GridFunction,
    pub lhs_34: f64,
    pub rhs_34: f64,
    pub lhs_311: f64,
    pub rhs_311: f64,
    /// `(∫cos φ ds, ∫sin φ ds)` on the induced mesh.
    pub closure: ClosureResidual,
    /// The same integrals predicted from orthonormality:
    /// `(π(‖u₁‖² − ‖u₂‖²), 2π⟨u₁, u₂⟩)`.
    pub closure_from_orthonormality: ClosureResidual,
    pub ratio_34: f64,
    pub ratio_311: f64,
    #[serde(rename = "R_boundary")]
    pub r_boundary: (f64, f64),
    /// `(φ(2π) − φ(0)) / 2π`.
    pub winding: f64,
    pub winding_number: i64,
}

impl BridgeReport {
    /// Relative gaps `|π/4 · lhs_311 − lhs_34| / lhs_34` and
    /// `|rhs_311/π − ∫ρ⁶| / ∫ρ⁶`.
    pub fn consistency(&self) -> (f64, f64) {
        let sextic = self.rhs_34 * 4.0 / (PI * PI);
        (
            (PI / 4.0 * self.lhs_311 - self.lhs_34).abs() / self.lhs_34,
            (self.rhs_311 / PI - sextic).abs() / sextic,
        )
    }

    /// `|closure − closure_from_orthonormality|`, componentwise max.
    pub fn closure_link_gap(&self) -> f64 {
        (self.closure.cos_residual - self.closure_from_orthonormality.cos_residual)
            .abs()
            .max((self.closure.sin_residual - self.closure_from_orthonormality.sin_residual).abs())
    }

    /// The induced curve as CSV with header `s,R,phi,kappa`.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("s,R,phi,kappa\n");
        for (j, s) in self.r.grid.nodes().iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                s, self.r.values[j], self.phi.values[j], self.kappa.values[j]
            );
        }
        out
    }
}

fn check_pair(u1: &GridFunction, u2: &GridFunction) -> Result<(f64, f64, f64)> {
    require_line_grid(u1)?;
    if u1.grid != u2.grid {
        return Err(OvalError::Contract(
            "u₁ and u₂ live on different grids".into(),
        ));
    }
    let (n1, n2, ip) = (inner(u1, u1)?, inner(u2, u2)?, inner(u1, u2)?);
    if (n1 - 1.0).abs() > ORTHONORMALITY_TOLERANCE
        || (n2 - 1.0).abs() > ORTHONORMALITY_TOLERANCE
        || ip.abs() > ORTHONORMALITY_TOLERANCE
    {
        return Err(OvalError::Contract(format!(
            "pair is not orthonormal: ‖u₁‖² = {n1}, ‖u₂‖² = {n2}, ⟨u₁,u₂⟩ = {ip:e}"
        )));
    }
    Ok((n1, n2, ip))
}

/// `∫(u₁′² + u₂′²) dx / ((π²/4) ∫(u₁² + u₂²)³ dx)` by direct quadrature.
pub fn functional_ratio_pair(u1: &GridFunction, u2: &GridFunction) -> Result<f64> {
    check_pair(u1, u2)?;
    let kinetic = kinetic_energy(u1) + kinetic_energy(u2);
    let sextic = integrate(&u1.zip_with(u2, |a, b| (a * a + b * b).powi(3))?);
    Ok(kinetic / (PI * PI / 4.0 * sextic))
}

pub fn pair_bridge(u1: &GridFunction, u2: &GridFunction) -> Result<BridgeReport> {
    let (n1, n2, ip) = check_pair(u1, u2)?;
    let h = u1.grid.spacing();
    let xs = u1.grid.nodes();
    let (a, b) = (&u1.values, &u2.values);
    let (da, db) = (derivative_fourth_order(a, h), derivative_fourth_order(b, h));
    let rho2: Vec<f64> = a.iter().zip(b).map(|(p, q)| p * p + q * q).collect();
    let drho2: Vec<f64> = (0..a.len())
        .map(|j| 2.0 * (a[j] * da[j] + b[j] * db[j]))
        .collect();

    let support = span_above(&rho2, NODE_THRESHOLD);
    let max = rho2.iter().cloned().fold(0.0, f64::max);
    if let Some(j) = (support.0..=support.1)
        .filter(|&j| rho2[j] < NODE_THRESHOLD * max)
        .min_by(|&i, &j| rho2[i].total_cmp(&rho2[j]))
    {
        return Err(OvalError::Node {
            x: xs[j],
            rho_sq: rho2[j],
        });
    }
    let (lo, hi) = span_above(&rho2, TAIL_THRESHOLD);

    // θ = arg(u₁ + i u₂), unwrapped along x
    let mut theta = vec![0.0; a.len()];
    theta[lo] = b[lo].atan2(a[lo]);
    for j in lo + 1..=hi {
        let raw = b[j].atan2(a[j]);
        let prev = theta[j - 1];
        let turns = ((prev - raw) / (2.0 * PI)).round();
        let next = raw + 2.0 * PI * turns;
        let jump = (next - prev).abs();
        if jump > PI / 2.0 {
            return Err(OvalError::Unwrap { x: xs[j], jump });
        }
        theta[j] = next;
    }
    let phi_x: Vec<f64> = theta.iter().map(|t| 2.0 * t).collect();

    let density: Vec<f64> = rho2.iter().map(|r| PI * r).collect();
    let ddensity: Vec<f64> = drho2.iter().map(|r| PI * r).collect();
    let s = arclength_map(&density, &ddensity, h, 2.0 * PI);
    let scale = 2.0 * PI / cumulative_end(&density, &ddensity, h);
    let nodes = increasing_nodes(&s, lo, hi, support, &xs)?;

    // d/ds = (1 / (scale π ρ²)) d/dx
    let ds_dx: Vec<f64> = density.iter().map(|d| d * scale).collect();
    let r_slopes: Vec<f64> = (0..a.len()).map(|j| drho2[j] / ds_dx[j]).collect();
    let phi_slopes: Vec<f64> = (0..a.len())
        .map(|j| 2.0 * (a[j] * db[j] - b[j] * da[j]) / rho2[j] / ds_dx[j])
        .collect();
    let target = UniformGrid::new(0.0, 2.0 * PI, PAIR_S_POINTS, false)?;
    let r = resample(&s, &rho2, &r_slopes, &nodes, &target)?;
    let phi = resample(&s, &phi_x, &phi_slopes, &nodes, &target)?;
    let (dr, dphi) = polar_derivatives(&r, &phi);
    let lhs_311 = integrate(&GridFunction::new(
        target,
        (0..PAIR_S_POINTS)
            .map(|j| dr[j] * dr[j] + (r.values[j] * dphi[j]).powi(2))
            .collect(),
    )?);
    let rhs_311 = integrate(&r.map(|v| v * v));

    let lhs_34 = kinetic_energy(u1) + kinetic_energy(u2);
    let rhs_34 = PI * PI / 4.0
        * integrate(&GridFunction::new(
            u1.grid,
            rho2.iter().map(|r| r.powi(3)).collect(),
        )?);

    let mesh: Vec<f64> = nodes.iter().map(|&j| s[j]).collect();
    let cos_phi: Vec<f64> = nodes.iter().map(|&j| phi_x[j].cos()).collect();
    let sin_phi: Vec<f64> = nodes.iter().map(|&j| phi_x[j].sin()).collect();
    let d_cos: Vec<f64> = nodes
        .iter()
        .map(|&j| -phi_x[j].sin() * phi_slopes[j])
        .collect();
    let d_sin: Vec<f64> = nodes
        .iter()
        .map(|&j| phi_x[j].cos() * phi_slopes[j])
        .collect();
    let closure = ClosureResidual {
        cos_residual: hermite_trapezoid(&mesh, &cos_phi, &d_cos),
        sin_residual: hermite_trapezoid(&mesh, &sin_phi, &d_sin),
    };
    let winding = (phi_x[hi] - phi_x[lo]) / (2.0 * PI);

    Ok(BridgeReport {
        s_of_x: GridFunction::new(u1.grid, s)?,
        r_boundary: (r.values[0], r.values[PAIR_S_POINTS - 1]),
        kappa: GridFunction::new(target, dphi)?,
        r,
        phi,
        lhs_34,
        rhs_34,
        lhs_311,
        rhs_311,
        closure,
        closure_from_orthonormality: ClosureResidual {
            cos_residual: PI * (n1 - n2),
            sin_residual: 2.0 * PI * ip,
        },
        ratio_34: lhs_34 / rhs_34,
        ratio_311: lhs_311 / rhs_311,
        winding,
        winding_number: winding.round() as i64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XyReport {
    /// `∫(ẋ² + ẏ²) / ∫(x² + y²)` with `ẋ, ẏ` from the chain rule on `(R, φ)`.
    pub ratio_316: f64,
    /// `(∫x/√(x²+y²), ∫y/√(x²+y²))`.
    pub constraint_residuals: (f64, f64),
    /// The same ratio with `x` and `y` differentiated directly.
    pub ratio_direct: f64,
}

/// Reads `(R, φ)` as polar coordinates of a path `x = R cos φ, y = R sin φ`
/// parametrized by `s`.
pub fn xy_interpretation(r: &GridFunction, phi: &GridFunction) -> Result<XyReport> {
    if r.grid != phi.grid {
        return Err(OvalError::Contract(
            "R and φ live on different grids".into(),
        ));
    }
    if let Some(v) = r.values.iter().find(|v| !(**v >= 0.0)) {
        return Err(OvalError::Contract(format!("R must be ≥ 0, found {v}")));
    }
    let g = r.grid;
    let n = g.points;
    let (dr, dphi) = polar_derivatives(r, phi);
    let (mut x, mut y) = (vec![0.0; n], vec![0.0; n]);
    let mut speed = vec![0.0; n];
    let (mut cx, mut cy) = (vec![0.0; n], vec![0.0; n]);
    for j in 0..n {
        let (sp, cp) = phi.values[j].sin_cos();
        let rv = r.values[j];
        x[j] = rv * cp;
        y[j] = rv * sp;
        let xd = dr[j] * cp - rv * dphi[j] * sp;
        let yd = dr[j] * sp + rv * dphi[j] * cp;
        speed[j] = xd * xd + yd * yd;
        let norm = x[j].hypot(y[j]);
        if norm == 0.0 {
            return Err(OvalError::Node {
                x: g.node(j),
                rho_sq: 0.0,
            });
        }
        cx[j] = x[j] / norm;
        cy[j] = y[j] / norm;
    }
    let quad = |v: Vec<f64>| integrate(&GridFunction { grid: g, values: v });
    let mass = quad(x.iter().zip(&y).map(|(a, b)| a * a + b * b).collect());
    let h = g.spacing();
    let (dx, dy) = if g.periodic {
        (
            derivative_periodic_fourth_order(&x, h, 0.0),
            derivative_periodic_fourth_order(&y, h, 0.0),
        )
    } else {
        (
            derivative_closed_fourth_order(&x, h),
            derivative_closed_fourth_order(&y, h),
        )
    };
    Ok(XyReport {
        ratio_316: quad(speed) / mass,
        constraint_residuals: (quad(cx), quad(cy)),
        ratio_direct: quad(dx.iter().zip(&dy).map(|(a, b)| a * a + b * b).collect()) / mass,
    })
}

/// `ψ_0..ψ_{count-1}` (Hermite functions) at `x`.
fn hermite_functions(x: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
    for n in 0..count {
        out.push(cur);
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    out
}

/// A seeded random orthonormal pair of smooth, rapidly decaying functions:
/// each is a random combination of the first six Hermite functions with a
/// random width and center, then Gram–Schmidt in the grid inner product.
pub fn random_pair(seed: u64, grid: &UniformGrid) -> Result<(GridFunction, GridFunction)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> GridFunction {
        let width: f64 = rng.gen_range(0.6..1.8);
        let center: f64 = rng.gen_range(-2.0..2.0);
        let coeffs: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        GridFunction::from_fn(*grid, |x| {
            hermite_functions((x - center) / width, 6)
                .iter()
                .zip(&coeffs)
                .map(|(p, c)| p * c)
                .sum()
        })
    };
    for _ in 0..100 {
        let u1 = draw(&mut rng);
        let u2 = draw(&mut rng);
        let n1 = u1.l2_norm();
        if n1 < 1e-3 {
            continue;
        }
        let u1 = u1.map(|v| v / n1);
        let proj = inner(&u1, &u2)?;
        let u2 = u2.zip_with(&u1, |b, a| b - proj * a)?;
        let n2 = u2.l2_norm();
        if n2 < 1e-3 {
            continue;
        }
        let u2 = u2.map(|v| v / n2);
        // one more pass keeps ⟨u₁, u₂⟩ at rounding level
        let proj = inner(&u1, &u2)?;
        let u2 = u2.zip_with(&u1, |b, a| b - proj * a)?;
        let n2 = u2.l2_norm();
        return Ok((u1, u2.map(|v| v / n2)));
    }
    Err(OvalError::Sampling { rejections: 100 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::line::{eigenfunction_pair, LineDiscretization, PotentialSpec};

    fn line_grid(l: f64, n: usize) -> UniformGrid {
        UniformGrid::new(-l, l, n, false).unwrap()
    }

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    #[test]
    fn single_bridge_sech() {
        let u = GridFunction::from_fn(line_grid(20.0, 4001), |x| sech(x) / 2f64.sqrt());
        let r = single_bridge(&u).unwrap();
        assert!(
            (r.dirichlet_lhs - 4.0 / 3.0).abs() < 1e-4,
            "{}",
            r.dirichlet_lhs
        );
        assert!((r.dirichlet_rhs - 2.0 * PI * PI / 15.0).abs() < 1e-4);
        assert!((r.kinetic_x - 1.0 / 3.0).abs() < 1e-8);
        assert!((r.sextic_x - 2.0 / 15.0).abs() < 1e-8);
        let (k, s) = r.identity_residuals();
        assert!(k < 1e-5 && s < 1e-5, "{k:e} {s:e}");
        assert!(r.inequality_holds(0.0));
        for (s, w) in r.w.grid.nodes().iter().zip(&r.w.values) {
            assert!((w - 2.0 * s * (1.0 - s)).abs() < 1e-6);
        }
        assert!(r.w_boundary.0.abs() < 1e-6 && r.w_boundary.1.abs() < 1e-6);
    }

    #[test]
    fn single_bridge_preconditions() {
        let g = line_grid(20.0, 4001);
        let u = GridFunction::from_fn(g, sech);
        assert!(matches!(single_bridge(&u), Err(OvalError::Contract(_))));
        let g = line_grid(3.0, 601);
        let wide = GridFunction::from_fn(g, |x| sech(x) / 2f64.sqrt());
        assert!(single_bridge(&wide).is_err());
    }

    #[test]
    fn flat_map_detected() {
        // two bumps separated by an exactly zero gap
        let g = line_grid(20.0, 4001);
        let bump = |x: f64| {
            if x.abs() < 1.0 {
                (1.0 - x * x).powi(4)
            } else {
                0.0
            }
        };
        let raw = GridFunction::from_fn(g, |x| bump(x + 3.0) + bump(x - 3.0));
        let n = raw.l2_norm();
        let u = raw.map(|v| v / n);
        assert!(matches!(single_bridge(&u), Err(OvalError::FlatMap { .. })));
    }

    fn pt6_pair() -> (GridFunction, GridFunction) {
        eigenfunction_pair(
            &PotentialSpec::PoschlTeller { a: 6.0 },
            &LineDiscretization::default(),
        )
        .unwrap()
    }

    #[test]
    fn pair_bridge_poschl_teller() {
        let (u1, u2) = pt6_pair();
        let r = pair_bridge(&u1, &u2).unwrap();
        assert!(r.closure.is_closed(1e-6), "{:?}", r.closure);
        assert!(
            (r.ratio_34 - r.ratio_311).abs() < 1e-5,
            "{} {}",
            r.ratio_34,
            r.ratio_311
        );
        assert!(r.ratio_34 >= 1.0 - 1e-6);
        let (k, s) = r.consistency();
        assert!(k < 1e-5 && s < 1e-5, "{k:e} {s:e}");
        assert!(r.closure_link_gap() < 1e-6);
        assert_eq!(r.winding_number.abs(), 1);
        assert!(r.r_boundary.0.abs() < 1e-6 && r.r_boundary.1.abs() < 1e-6);
        let xy = xy_interpretation(&r.r, &r.phi).unwrap();
        assert!((xy.ratio_316 - r.ratio_311).abs() < 1e-8);
        assert!((xy.constraint_residuals.0).abs() < 1e-5);
        assert!((xy.constraint_residuals.1).abs() < 1e-5);
        assert!(r.curve_csv().starts_with("s,R,phi,kappa\n"));
        assert_eq!(r.curve_csv().lines().count(), PAIR_S_POINTS + 1);
        assert!((functional_ratio_pair(&u1, &u2).unwrap() - r.ratio_34).abs() < 1e-10);
    }

    #[test]
    fn pair_with_common_node() {
        let g = line_grid(10.0, 2001);
        let raw1 = GridFunction::from_fn(g, |x| x * x * (-x * x).exp());
        let raw2 = GridFunction::from_fn(g, |x| x * (-x * x).exp());
        let (n1, n2) = (raw1.l2_norm(), raw2.l2_norm());
        let u1 = raw1.map(|v| v / n1);
        let u2 = raw2.map(|v| v / n2);
        match pair_bridge(&u1, &u2) {
            Err(OvalError::Node { x, .. }) => assert!(x.abs() < 0.1),
            other => panic!("expected node error, got {other:?}"),
        }
    }

    #[test]
    fn xy_examples() {
        let g = UniformGrid::periodic_circle(256).unwrap();
        let one = GridFunction::from_fn(g, |_| 1.0);
        let r = xy_interpretation(&one, &GridFunction::from_fn(g, |s| s)).unwrap();
        assert!((r.ratio_316 - 1.0).abs() < 1e-12);
        assert!(r.constraint_residuals.0.abs() < 1e-12 && r.constraint_residuals.1.abs() < 1e-12);
        let r = xy_interpretation(&one, &GridFunction::from_fn(g, |s| 2.0 * s)).unwrap();
        assert!((r.ratio_316 - 4.0).abs() < 1e-12);
        assert!(r.constraint_residuals.0.abs() < 1e-12 && r.constraint_residuals.1.abs() < 1e-12);
        assert!((r.ratio_direct - 4.0).abs() < 1e-5);
    }

    #[test]
    fn random_pairs_are_orthonormal() {
        let g = line_grid(20.0, 4001);
        let (u1, u2) = random_pair(5, &g).unwrap();
        assert!((u1.inner(&u1).unwrap() - 1.0).abs() < 1e-12);
        assert!((u2.inner(&u2).unwrap() - 1.0).abs() < 1e-12);
        assert!(u1.inner(&u2).unwrap().abs() < 1e-12);
        assert_eq!(random_pair(5, &g).unwrap().0, u1);
        assert!(functional_ratio_pair(&u1, &u2).unwrap() >= 1.0 - 1e-6);
    }

    #[test]
    fn separated_bumps() {
        let g = line_grid(30.0, 6001);
        let a = GridFunction::from_fn(g, |x| sech(x - 8.0) / 2f64.sqrt());
        let b = GridFunction::from_fn(g, |x| sech(x + 8.0) / 2f64.sqrt());
        let na = a.l2_norm();
        let a = a.map(|v| v / na);
        let p = a.inner(&b).unwrap();
        let b = b.zip_with(&a, |y, x| y - p * x).unwrap();
        let nb = b.l2_norm();
        let b = b.map(|v| v / nb);
        let ratio = functional_ratio_pair(&a, &b).unwrap();
        assert!(ratio.is_finite() && ratio >= 1.0 - 1e-6);
        assert!((ratio - 10.0 / (PI * PI)).abs() < 1e-3);
    }
}
