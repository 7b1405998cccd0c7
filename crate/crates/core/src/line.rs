//! Bound states of `-d²/dx² - V` on the line, `V ≥ 0`, and Lieb–Thirring
//! ratios built from them.
//!
//! The line is truncated to `[-L, L]` with Dirichlet walls and discretized by
//! finite differences; the resulting band matrix goes to the banded
//! eigensolver. The default stencil is the fourth-order five-point Laplacian,
//! the three-point one is kept for convergence studies.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::keller_constant;
use crate::numerics::quadrature::{derivative_fourth_order, integrate};
use crate::numerics::{BandedSymmetric, GridFunction, Method, Spectrum, UniformGrid};
use crate::{OvalError, Result};

/// A nonnegative well `V`; the operator is `-d²/dx² - V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `a sech²(x)`; binds `⌈ν⌉` states with `a = ν(ν+1)`, energies `-(ν-j)²`.
    PoschlTeller { a: f64 },
    /// `depth · exp(-(x/width)²)`.
    Gaussian { depth: f64, width: f64 },
    /// `depth` on `|x| ≤ half_width`, zero outside.
    SquareWell { depth: f64, half_width: f64 },
    /// Uniform samples, linearly interpolated, zero outside the table.
    Tabulated { samples: GridFunction },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(OvalError::Domain(format!("potential: {what}")));
        match self {
            PotentialSpec::PoschlTeller { a } if !(*a >= 0.0) => bad("a must be ≥ 0"),
            PotentialSpec::Gaussian { depth, width } if !(*depth >= 0.0) || !(*width > 0.0) => {
                bad("gaussian needs depth ≥ 0 and width > 0")
            }
            PotentialSpec::SquareWell { depth, half_width }
                if !(*depth >= 0.0) || !(*half_width > 0.0) =>
            {
                bad("square well needs depth ≥ 0 and half_width > 0")
            }
            PotentialSpec::Tabulated { samples } if samples.values.iter().any(|v| !(*v >= 0.0)) => {
                bad("tabulated values must be ≥ 0")
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::PoschlTeller { a } => {
                let c = x.cosh();
                a / (c * c)
            }
            PotentialSpec::Gaussian { depth, width } => depth * (-(x / width).powi(2)).exp(),
            PotentialSpec::SquareWell { depth, half_width } => {
                if x.abs() <= *half_width {
                    *depth
                } else {
                    0.0
                }
            }
            PotentialSpec::Tabulated { samples } => {
                let g = &samples.grid;
                if x < g.start || x > g.end {
                    return 0.0;
                }
                let t = (x - g.start) / g.spacing();
                let i = (t.floor() as usize).min(g.points - 2);
                let frac = t - i as f64;
                samples.values[i] * (1.0 - frac) + samples.values[i + 1] * frac
            }
        }
    }

    /// Supremum of `V`.
    pub fn max_value(&self) -> f64 {
        match self {
            PotentialSpec::PoschlTeller { a } => *a,
            PotentialSpec::Gaussian { depth, .. } => *depth,
            PotentialSpec::SquareWell { depth, .. } => *depth,
            PotentialSpec::Tabulated { samples } => samples.max_abs(),
        }
    }

    pub fn sample(&self, grid: &UniformGrid) -> GridFunction {
        GridFunction::from_fn(*grid, |x| self.eval(x))
    }

    /// `∫ V^p dx` over `[-L, L]` by trapezoid refinement until successive
    /// estimates agree to `1e-13` relative.
    pub fn power_integral(&self, p: f64, half_width: f64) -> f64 {
        let f = |x: f64| self.eval(x).powf(p);
        match self {
            PotentialSpec::SquareWell {
                depth,
                half_width: w,
            } => {
                // piecewise constant: exact
                depth.powf(p) * 2.0 * w.min(half_width)
            }
            PotentialSpec::Tabulated { samples } => {
                let vals = samples.map(|v| v.powf(p));
                integrate(&vals)
            }
            _ => adaptive_trapezoid(f, -half_width, half_width, 1e-13),
        }
    }
}

fn adaptive_trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, rtol: f64) -> f64 {
    let mut n = 64usize;
    let mut h = (b - a) / n as f64;
    let mut sum = 0.5 * (f(a) + f(b)) + (1..n).map(|i| f(a + i as f64 * h)).sum::<f64>();
    let mut estimate = sum * h;
    for _ in 0..20 {
        let mids: f64 = (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum();
        sum += mids;
        n *= 2;
        h *= 0.5;
        let next = sum * h;
        if (next - estimate).abs() <= rtol * next.abs().max(f64::MIN_POSITIVE) {
            return next;
        }
        estimate = next;
    }
    estimate
}

impl std::fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PotentialSpec::PoschlTeller { a } => write!(f, "poschl_teller:a={a}"),
            PotentialSpec::Gaussian { depth, width } => {
                write!(f, "gaussian:depth={depth},width={width}")
            }
            PotentialSpec::SquareWell { depth, half_width } => {
                write!(f, "square_well:depth={depth},half_width={half_width}")
            }
            PotentialSpec::Tabulated { samples } => write!(
                f,
                "tabulated:[{}, {}]x{}",
                samples.grid.start, samples.grid.end, samples.grid.points
            ),
        }
    }
}

/// Parses `family:key=value,key=value`. `tabulated:path=file.csv` reads a
/// two-column `x,V` CSV with uniformly spaced `x`.
pub fn parse_potential(text: &str) -> Result<PotentialSpec> {
    let (family, rest) = text.split_once(':').unwrap_or((text, ""));
    let mut params = std::collections::BTreeMap::new();
    for kv in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| OvalError::Parse(format!("expected key=value in `{kv}`")))?;
        params.insert(k.trim().to_string(), v.trim().to_string());
    }
    let mut take = |key: &str| -> Result<f64> {
        let raw = params
            .remove(key)
            .ok_or_else(|| OvalError::Parse(format!("{family}: missing `{key}`")))?;
        raw.parse::<f64>()
            .map_err(|_| OvalError::Parse(format!("{family}: `{key}={raw}` is not a number")))
    };
    let spec = match family.trim() {
        "poschl_teller" => PotentialSpec::PoschlTeller { a: take("a")? },
        "gaussian" => PotentialSpec::Gaussian {
            depth: take("depth")?,
            width: take("width")?,
        },
        "square_well" => PotentialSpec::SquareWell {
            depth: take("depth")?,
            half_width: take("half_width")?,
        },
        "tabulated" => {
            let path = params
                .remove("path")
                .ok_or_else(|| OvalError::Parse("tabulated: missing `path`".into()))?;
            PotentialSpec::Tabulated {
                samples: read_tabulated(Path::new(&path))?,
            }
        }
        other => {
            return Err(OvalError::Parse(format!(
                "unknown potential family `{other}`"
            )))
        }
    };
    if let Some(key) = params.keys().next() {
        return Err(OvalError::Parse(format!("{family}: unknown key `{key}`")));
    }
    spec.validate()?;
    Ok(spec)
}

fn read_tabulated(path: &Path) -> Result<GridFunction> {
    let text = std::fs::read_to_string(path)?;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (Some(x), Some(v)) = (cols.next(), cols.next()) else {
            return Err(OvalError::Parse(format!(
                "line {}: expected `x,V`",
                lineno + 1
            )));
        };
        match (x.parse::<f64>(), v.parse::<f64>()) {
            (Ok(x), Ok(v)) => {
                xs.push(x);
                vs.push(v);
            }
            // a header row
            _ if xs.is_empty() => continue,
            _ => {
                return Err(OvalError::Parse(format!(
                    "line {}: not numeric",
                    lineno + 1
                )))
            }
        }
    }
    if xs.len() < 2 {
        return Err(OvalError::Parse(
            "tabulated potential needs at least two rows".into(),
        ));
    }
    let grid = UniformGrid::new(xs[0], xs[xs.len() - 1], xs.len(), false)?;
    let h = grid.spacing();
    for (j, x) in xs.iter().enumerate() {
        if (x - grid.node(j)).abs() > 1e-9 * h.max(1.0) {
            return Err(OvalError::Parse(format!(
                "tabulated x values must be uniformly spaced (row {j})"
            )));
        }
    }
    GridFunction::new(grid, vs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    /// `(-1, 2, -1) / h²`
    SecondOrder,
    /// `(1, -16, 30, -16, 1) / 12h²`
    FourthOrder,
}

/// Truncated-domain discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineDiscretization {
    pub half_width: f64,
    pub points: usize,
    pub stencil: Stencil,
}

impl Default for LineDiscretization {
    fn default() -> Self {
        Self {
            half_width: 20.0,
            points: 4001,
            stencil: Stencil::FourthOrder,
        }
    }
}

impl LineDiscretization {
    pub fn grid(&self) -> Result<UniformGrid> {
        UniformGrid::new(-self.half_width, self.half_width, self.points, false)
    }
}

/// The `k` lowest eigenvalues of `-d²/dx² - V` on `[-L, L]` with Dirichlet
/// walls, with eigenfunctions on the full closed grid (zero at the walls),
/// normalized to unit trapezoid norm. The ground state is nonnegative.
///
/// Returns a partial result when fewer than `k` eigenvalues are negative;
/// `negative_count` tells how many are bound states.
pub fn bound_states(v: &PotentialSpec, k: usize, disc: &LineDiscretization) -> Result<Spectrum> {
    v.validate()?;
    if disc.points < 501 || disc.points % 2 == 0 {
        return Err(OvalError::Contract(format!(
            "line grid needs an odd point count ≥ 501, got {}",
            disc.points
        )));
    }
    if !matches!(v, PotentialSpec::Tabulated { .. }) {
        let max = v.max_value();
        let tail = v.eval(disc.half_width).max(v.eval(-disc.half_width));
        if tail >= 1e-10 * max && max > 0.0 {
            return Err(OvalError::Truncation { tail, max });
        }
    }
    let grid = disc.grid()?;
    let h = grid.spacing();
    let n = disc.points - 2;
    if k == 0 || k > n {
        return Err(OvalError::Contract(format!("cannot return {k} eigenpairs")));
    }
    let xs = grid.nodes();
    let pot: Vec<f64> = xs[1..=n].iter().map(|&x| v.eval(x)).collect();
    let bands = match disc.stencil {
        Stencil::SecondOrder => {
            let c = 1.0 / (h * h);
            vec![pot.iter().map(|p| 2.0 * c - p).collect(), vec![-c; n]]
        }
        Stencil::FourthOrder => {
            let c = 1.0 / (12.0 * h * h);
            vec![
                pot.iter().map(|p| 30.0 * c - p).collect(),
                vec![-16.0 * c; n],
                vec![c; n],
            ]
        }
    };
    let matrix = BandedSymmetric::new(bands)?;
    let pairs = matrix.lowest_eigs(k)?;

    let scale = 1.0 / h.sqrt();
    let mut vectors = Vec::with_capacity(k);
    for (i, vec) in pairs.vectors.iter().enumerate() {
        let mut values = Vec::with_capacity(disc.points);
        values.push(0.0);
        values.extend(vec.iter().map(|x| x * scale));
        values.push(0.0);
        if i == 0 && values.iter().sum::<f64>() < 0.0 {
            values.iter_mut().for_each(|x| *x = -*x);
        }
        vectors.push(GridFunction::new(grid, values)?);
    }
    let negative = pairs.values.iter().filter(|&&e| e < 0.0).count();
    let mut spectrum = Spectrum::new(pairs.values, disc.points, Method::FiniteDifference);
    spectrum.eigenvectors = Some(vectors);
    spectrum.negative_count = Some(negative);
    Ok(spectrum)
}

/// `|λ − (∫V u² − ∫u′²)|` for a normalized eigenfunction `u` of `-d²/dx² - V`
/// with eigenvalue `-λ`. Derivatives use fourth-order centered differences.
pub fn rayleigh_identity_check(u: &GridFunction, v: &PotentialSpec, lambda: f64) -> f64 {
    let (potential, kinetic) = potential_and_kinetic(u, v);
    (lambda - (potential - kinetic)).abs()
}

/// `(∫V u², ∫u′²)` on the grid of `u`.
pub fn potential_and_kinetic(u: &GridFunction, v: &PotentialSpec) -> (f64, f64) {
    let xs = u.grid.nodes();
    let vu2 = GridFunction {
        grid: u.grid,
        values: xs
            .iter()
            .zip(&u.values)
            .map(|(&x, &ui)| v.eval(x) * ui * ui)
            .collect(),
    };
    (integrate(&vu2), kinetic_energy(u))
}

/// `∫u′² dx` with fourth-order centered differences.
pub fn kinetic_energy(u: &GridFunction) -> f64 {
    let du = derivative_fourth_order(&u.values, u.grid.spacing());
    integrate(&GridFunction {
        grid: u.grid,
        values: du.iter().map(|d| d * d).collect(),
    })
}

/// Lieb–Thirring ratio of the `γ`-moment of the lowest bound states to
/// `∫V^{γ+1/2}`, compared with the one-bound-state constant `L¹_{γ,1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LTReport {
    pub gamma: f64,
    /// Magnitudes `λ_j > 0` of the negative eigenvalues used.
    pub eigenvalues: Vec<f64>,
    pub moment_sum: f64,
    pub potential_integral: f64,
    pub ratio: f64,
    pub reference_constant: f64,
    pub margin: f64,
}

pub fn lt_ratio(
    v: &PotentialSpec,
    gamma: f64,
    states: usize,
    disc: &LineDiscretization,
) -> Result<LTReport> {
    if !(gamma > 0.5) {
        return Err(OvalError::Domain(format!("γ = {gamma} must exceed 1/2")));
    }
    if !(1..=2).contains(&states) {
        return Err(OvalError::Domain(format!(
            "states must be 1 or 2, got {states}"
        )));
    }
    let spectrum = bound_states(v, states, disc)?;
    let found = spectrum.negative_count.unwrap_or(0);
    if found < states {
        return Err(OvalError::InsufficientBoundStates {
            requested: states,
            found,
        });
    }
    let eigenvalues: Vec<f64> = spectrum.eigenvalues.iter().map(|e| -e).collect();
    let moment_sum: f64 = eigenvalues.iter().map(|l| l.powf(gamma)).sum();
    let potential_integral = v.power_integral(gamma + 0.5, disc.half_width);
    let ratio = moment_sum / potential_integral;
    let reference_constant = keller_constant(gamma)?;
    Ok(LTReport {
        gamma,
        eigenvalues,
        moment_sum,
        potential_integral,
        ratio,
        reference_constant,
        margin: reference_constant - ratio,
    })
}

/// Normalized eigenfunctions of the two lowest bound states.
pub fn eigenfunction_pair(
    v: &PotentialSpec,
    disc: &LineDiscretization,
) -> Result<(GridFunction, GridFunction)> {
    let spectrum = bound_states(v, 2, disc)?;
    let found = spectrum.negative_count.unwrap_or(0);
    if found < 2 {
        return Err(OvalError::InsufficientBoundStates {
            requested: 2,
            found,
        });
    }
    let mut vecs = spectrum.eigenvectors.expect("bound_states returns vectors");
    let u2 = vecs.pop().expect("two vectors");
    let u1 = vecs.pop().expect("two vectors");
    Ok((u1, u2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pt(a: f64) -> PotentialSpec {
        PotentialSpec::PoschlTeller { a }
    }

    #[test]
    fn poschl_teller_single_state() {
        let s = bound_states(&pt(2.0), 2, &LineDiscretization::default()).unwrap();
        assert!(
            (s.eigenvalues[0] + 1.0).abs() < 1e-6,
            "{}",
            s.eigenvalues[0]
        );
        assert_eq!(s.negative_count, Some(1));
        let u = &s.eigenvectors.as_ref().unwrap()[0];
        assert!((u.l2_norm() - 1.0).abs() < 1e-12);
        assert!(u.values.iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn poschl_teller_two_states() {
        let s = bound_states(&pt(6.0), 2, &LineDiscretization::default()).unwrap();
        assert!((s.eigenvalues[0] + 4.0).abs() < 1e-6);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn free_operator_has_no_bound_states() {
        let v = PotentialSpec::SquareWell {
            depth: 0.0,
            half_width: 1.0,
        };
        let s = bound_states(&v, 1, &LineDiscretization::default()).unwrap();
        assert_eq!(s.negative_count, Some(0));
        assert!(s.eigenvalues[0] > 0.0);
    }

    #[test]
    fn grid_and_truncation_checks() {
        let mut disc = LineDiscretization::default();
        disc.points = 500;
        assert!(matches!(
            bound_states(&pt(2.0), 1, &disc),
            Err(OvalError::Contract(_))
        ));
        let disc = LineDiscretization {
            half_width: 5.0,
            ..Default::default()
        };
        assert!(matches!(
            bound_states(&pt(2.0), 1, &disc),
            Err(OvalError::Truncation { .. })
        ));
    }

    #[test]
    fn rayleigh_identity_holds_for_converged_pairs() {
        let disc = LineDiscretization::default();
        let s = bound_states(&pt(2.0), 1, &disc).unwrap();
        let u = &s.eigenvectors.as_ref().unwrap()[0];
        assert!(rayleigh_identity_check(u, &pt(2.0), 1.0) <= 1e-5);
        let off = rayleigh_identity_check(u, &pt(2.0), 1.1);
        assert!((off - 0.1).abs() < 1e-5);

        let s = bound_states(&pt(6.0), 2, &disc).unwrap();
        for (i, u) in s.eigenvectors.as_ref().unwrap().iter().enumerate() {
            let lam = -s.eigenvalues[i];
            assert!(rayleigh_identity_check(u, &pt(6.0), lam) <= 1e-5);
        }
    }

    #[test]
    fn lt_ratio_examples() {
        let disc = LineDiscretization::default();
        let r = lt_ratio(&pt(2.0), 1.0, 1, &disc).unwrap();
        let expect = 1.0 / (2f64.sqrt() * PI);
        assert!((r.ratio - expect).abs() < 1e-6, "{}", r.ratio);
        assert!(r.margin > 0.0);

        let r = lt_ratio(&pt(6.0), 1.0, 2, &disc).unwrap();
        let expect = 5.0 / (3.0 * 6f64.sqrt() * PI);
        assert!((r.ratio - expect).abs() < 1e-6);
        assert!(r.ratio <= r.reference_constant);

        let r = lt_ratio(&pt(2.0), 1.5, 1, &disc).unwrap();
        assert!((r.ratio - 0.1875).abs() < 1e-4);
    }

    #[test]
    fn lt_ratio_rejects_missing_states() {
        let err = lt_ratio(&pt(2.0), 1.0, 2, &LineDiscretization::default()).unwrap_err();
        assert!(matches!(
            err,
            OvalError::InsufficientBoundStates {
                requested: 2,
                found: 1
            }
        ));
    }

    #[test]
    fn pair_parity_and_orthonormality() {
        let disc = LineDiscretization::default();
        let (u1, u2) = eigenfunction_pair(&pt(6.0), &disc).unwrap();
        let n = u1.len();
        for j in 0..n / 2 {
            assert!((u1.values[j] - u1.values[n - 1 - j]).abs() < 1e-9);
            assert!((u2.values[j] + u2.values[n - 1 - j]).abs() < 1e-9);
        }
        assert!(u1.inner(&u2).unwrap().abs() <= 1e-12);

        let g = PotentialSpec::Gaussian {
            depth: 5.0,
            width: 1.0,
        };
        let (u1, u2) = eigenfunction_pair(&g, &disc).unwrap();
        assert!((u1.l2_norm() - 1.0).abs() < 1e-10);
        assert!((u2.l2_norm() - 1.0).abs() < 1e-10);
        assert!(u1.inner(&u2).unwrap().abs() < 1e-10);

        assert!(matches!(
            eigenfunction_pair(&pt(2.0), &disc),
            Err(OvalError::InsufficientBoundStates { .. })
        ));
    }

    #[test]
    fn second_order_stencil_converges_quadratically() {
        let errs: Vec<f64> = [1001usize, 2001, 4001]
            .iter()
            .map(|&points| {
                let disc = LineDiscretization {
                    points,
                    stencil: Stencil::SecondOrder,
                    ..Default::default()
                };
                (bound_states(&pt(2.0), 1, &disc).unwrap().eigenvalues[0] + 1.0).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn parses_mini_language() {
        assert_eq!(parse_potential("poschl_teller:a=6").unwrap(), pt(6.0));
        assert_eq!(
            parse_potential("gaussian:depth=5,width=1").unwrap(),
            PotentialSpec::Gaussian {
                depth: 5.0,
                width: 1.0
            }
        );
        assert!(parse_potential("gaussian:depth=5").is_err());
        assert!(parse_potential("poschl_teller:a=6,b=1").is_err());
        assert!(parse_potential("morse:a=1").is_err());
        assert!(parse_potential("poschl_teller:a=-1").is_err());
    }

    #[test]
    fn tabulated_potential_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        let mut text = String::from("x,V\n");
        for j in 0..=400 {
            let x = -10.0 + 0.05 * j as f64;
            text.push_str(&format!("{x},{}\n", 2.0 / x.cosh().powi(2)));
        }
        std::fs::write(&path, text).unwrap();
        let v = parse_potential(&format!("tabulated:path={}", path.display())).unwrap();
        assert!((v.eval(0.0) - 2.0).abs() < 1e-12);
        assert_eq!(v.eval(11.0), 0.0);
        let s = bound_states(&v, 1, &LineDiscretization::default()).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-2);
    }
}
