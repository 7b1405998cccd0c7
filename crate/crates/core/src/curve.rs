//! Closed convex curves of length 2π, encoded by the turning angle
//! `φ(s) = s + ψ(s)` with a trigonometric polynomial `ψ`.
//!
//! Curvature is `κ = φ′ = 1 + ψ′`, so `∫κ = 2π` holds for every coefficient
//! choice; the curve closes iff `∫cos φ = ∫sin φ = 0`. When `ψ` has only even
//! harmonics it is π-periodic and closure is automatic.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::numerics::quadrature::trapezoid_periodic;
use crate::numerics::{GridFunction, UniformGrid};
use crate::{OvalError, Result};

pub const CLOSURE_TOLERANCE: f64 = 1e-10;
/// Curvature margin demanded of sampled ovals.
pub const SAMPLING_KAPPA_MIN: f64 = 0.05;
const MAX_REJECTIONS: usize = 1000;
const NEWTON_MAX_ITERATIONS: usize = 50;

/// One term `a cos ns + b sin ns` of `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub n: u32,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CurveSpec {
    pub harmonics: Vec<Harmonic>,
}

impl CurveSpec {
    pub fn circle() -> Self {
        Self::default()
    }

    /// Harmonics must have distinct `n ≥ 1` and finite coefficients. No
    /// curvature check is made here; see [`CurveSpec::validate`].
    pub fn new(harmonics: Vec<Harmonic>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for h in &harmonics {
            if h.n == 0 {
                return Err(OvalError::Domain("harmonic index must be ≥ 1".into()));
            }
            if !h.a.is_finite() || !h.b.is_finite() {
                return Err(OvalError::Domain(format!("harmonic {} is not finite", h.n)));
            }
            if !seen.insert(h.n) {
                return Err(OvalError::Domain(format!("harmonic {} given twice", h.n)));
            }
        }
        Ok(Self { harmonics })
    }

    pub fn max_harmonic(&self) -> u32 {
        self.harmonics.iter().map(|h| h.n).max().unwrap_or(0)
    }

    pub fn is_even(&self) -> bool {
        self.harmonics.iter().all(|h| h.n % 2 == 0)
    }

    /// `‖(a_n, b_n)‖₂` over all harmonics: distance from the circle in
    /// coefficient space.
    pub fn coefficient_norm(&self) -> f64 {
        self.harmonics
            .iter()
            .map(|h| h.a * h.a + h.b * h.b)
            .sum::<f64>()
            .sqrt()
    }

    pub fn psi(&self, s: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| {
                let (sn, cn) = (h.n as f64 * s).sin_cos();
                h.a * cn + h.b * sn
            })
            .sum()
    }

    pub fn phi(&self, s: f64) -> f64 {
        s + self.psi(s)
    }

    pub fn kappa(&self, s: f64) -> f64 {
        1.0 + self
            .harmonics
            .iter()
            .map(|h| {
                let n = h.n as f64;
                let (sn, cn) = (n * s).sin_cos();
                n * (-h.a * sn + h.b * cn)
            })
            .sum::<f64>()
    }

    /// Grid on which admissibility (`κ > 0`) is judged.
    pub fn reference_grid(&self) -> UniformGrid {
        let points = (16 * self.max_harmonic() as usize).max(256);
        UniformGrid::periodic_circle(points).expect("reference grid is valid")
    }

    /// `κ > 0` on the reference grid.
    pub fn validate(&self) -> Result<()> {
        curvature(self, &self.reference_grid()).map(|_| ())
    }

    /// Minimum sampled curvature on the reference grid and where it occurs.
    pub fn min_kappa(&self) -> (f64, f64) {
        let k = curvature_unchecked(self, &self.reference_grid());
        let (j, v) = k.argmin();
        (k.grid.node(j), v)
    }

    /// Coefficients flattened as `(a, b)` per harmonic, in storage order.
    pub fn coefficients(&self) -> Vec<f64> {
        self.harmonics.iter().flat_map(|h| [h.a, h.b]).collect()
    }

    /// Same harmonic indices with new coefficients (`2 × harmonics` values).
    pub fn with_coefficients(&self, coeffs: &[f64]) -> Self {
        assert_eq!(coeffs.len(), 2 * self.harmonics.len());
        Self {
            harmonics: self
                .harmonics
                .iter()
                .zip(coeffs.chunks(2))
                .map(|(h, ab)| Harmonic {
                    n: h.n,
                    a: ab[0],
                    b: ab[1],
                })
                .collect(),
        }
    }

    /// `∂κ/∂p` at `s` for the flattened coefficient `p` (see
    /// [`CurveSpec::coefficients`]).
    pub fn kappa_partials(&self, s: f64) -> Vec<f64> {
        self.harmonics
            .iter()
            .flat_map(|h| {
                let n = h.n as f64;
                let (sn, cn) = (n * s).sin_cos();
                [-n * sn, n * cn]
            })
            .collect()
    }
}

impl fmt::Display for CurveSpec {
    /// Inline form accepted by [`parse_curve`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.harmonics.is_empty() {
            return f.write_str("circle");
        }
        f.write_str("harm:")?;
        for (i, h) in self.harmonics.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "n={},a={},b={}", h.n, h.a, h.b)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureResidual {
    pub cos_residual: f64,
    pub sin_residual: f64,
}

impl ClosureResidual {
    pub fn norm(&self) -> f64 {
        self.cos_residual.hypot(self.sin_residual)
    }

    pub fn is_closed(&self, tol: f64) -> bool {
        self.cos_residual.abs() <= tol && self.sin_residual.abs() <= tol
    }
}

fn require_circle_grid(g: &UniformGrid) {
    debug_assert!(
        g.periodic && (g.period() - 2.0 * PI).abs() < 1e-12,
        "curve quantities live on a periodic grid over [0, 2π)"
    );
}

pub fn turning_angle(c: &CurveSpec, g: &UniformGrid) -> GridFunction {
    require_circle_grid(g);
    GridFunction::from_fn(*g, |s| c.phi(s))
}

/// `κ = 1 + ψ′` evaluated analytically, without a positivity check.
pub fn curvature_unchecked(c: &CurveSpec, g: &UniformGrid) -> GridFunction {
    require_circle_grid(g);
    GridFunction::from_fn(*g, |s| c.kappa(s))
}

/// `κ` sampled on `g`; fails if any sample is `≤ 0`.
pub fn curvature(c: &CurveSpec, g: &UniformGrid) -> Result<GridFunction> {
    let k = curvature_unchecked(c, g);
    let (j, min) = k.argmin();
    if !(min > 0.0) {
        return Err(OvalError::Positivity {
            s: g.node(j),
            kappa: min,
        });
    }
    Ok(k)
}

/// `(∫cos φ, ∫sin φ)` by the periodic trapezoid rule.
pub fn closure_residual(c: &CurveSpec, g: &UniformGrid) -> ClosureResidual {
    let phi = turning_angle(c, g);
    let h = g.spacing();
    let (cs, sn) = phi
        .values
        .iter()
        .fold((0.0, 0.0), |(cs, sn), p| (cs + p.cos(), sn + p.sin()));
    ClosureResidual {
        cos_residual: h * cs,
        sin_residual: h * sn,
    }
}

/// Grid fine enough that the trapezoid rule resolves `e^{iφ}` to rounding.
fn closure_grid(c: &CurveSpec) -> UniformGrid {
    let amp: f64 = c.harmonics.iter().map(|h| h.a.hypot(h.b)).sum();
    let bandwidth = (c.max_harmonic() as f64 * (amp + 8.0) + 16.0).ceil() as usize;
    UniformGrid::periodic_circle((4 * bandwidth).max(512)).expect("closure grid is valid")
}

/// Restores closure by damped Newton on the first harmonic `(a₁, b₁)`; every
/// other harmonic is left untouched.
pub fn project_closure(c: &CurveSpec) -> Result<CurveSpec> {
    let g = closure_grid(c);
    let mut curve = c.clone();
    let mut r = closure_residual(&curve, &g);
    if r.is_closed(CLOSURE_TOLERANCE) {
        return Ok(curve);
    }
    let idx = match curve.harmonics.iter().position(|h| h.n == 1) {
        Some(i) => i,
        None => {
            curve.harmonics.insert(
                0,
                Harmonic {
                    n: 1,
                    a: 0.0,
                    b: 0.0,
                },
            );
            0
        }
    };
    let nodes = g.nodes();
    let h = g.spacing();
    for _ in 0..NEWTON_MAX_ITERATIONS {
        // dφ/da₁ = cos s, dφ/db₁ = sin s
        let (mut j11, mut j12, mut j21, mut j22) = (0.0, 0.0, 0.0, 0.0);
        for &s in &nodes {
            let (sp, cp) = curve.phi(s).sin_cos();
            let (ss, cs) = s.sin_cos();
            j11 -= sp * cs;
            j12 -= sp * ss;
            j21 += cp * cs;
            j22 += cp * ss;
        }
        let (j11, j12, j21, j22) = (h * j11, h * j12, h * j21, h * j22);
        let det = j11 * j22 - j12 * j21;
        if !det.is_finite() || det.abs() < 1e-14 {
            break;
        }
        let da = -(j22 * r.cos_residual - j12 * r.sin_residual) / det;
        let db = -(-j21 * r.cos_residual + j11 * r.sin_residual) / det;
        let base = curve.harmonics[idx];
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-4 {
            let mut trial = curve.clone();
            trial.harmonics[idx].a = base.a + step * da;
            trial.harmonics[idx].b = base.b + step * db;
            let rt = closure_residual(&trial, &g);
            if rt.norm() < r.norm() {
                curve = trial;
                r = rt;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if r.is_closed(CLOSURE_TOLERANCE) {
            curve.validate()?;
            return Ok(curve);
        }
        if !accepted {
            break;
        }
    }
    Err(OvalError::Projection {
        iterations: NEWTON_MAX_ITERATIONS,
        residual: r.norm(),
    })
}

/// Planar points obtained by integrating the unit tangent `(cos φ, sin φ)`
/// from the origin, one per grid node.
///
/// Cumulative trapezoid with the endpoint correction `-h²/12 (T′(s) - T′(0))`,
/// `T′ = κ(-sin φ, cos φ)`; the correction vanishes over a full period, so the
/// closing gap is exactly the trapezoid closure residual.
pub fn reconstruct_xy(c: &CurveSpec, g: &UniformGrid) -> Vec<(f64, f64)> {
    let phi = turning_angle(c, g);
    let kappa = curvature_unchecked(c, g);
    let h = g.spacing();
    let tangent: Vec<(f64, f64)> = phi.values.iter().map(|p| (p.cos(), p.sin())).collect();
    let dtangent: Vec<(f64, f64)> = phi
        .values
        .iter()
        .zip(&kappa.values)
        .map(|(p, k)| (-k * p.sin(), k * p.cos()))
        .collect();
    let corr = h * h / 12.0;
    let mut out = Vec::with_capacity(g.points);
    let (mut x, mut y) = (0.0, 0.0);
    out.push((x, y));
    for (j, w) in tangent.windows(2).enumerate() {
        x += 0.5 * h * (w[0].0 + w[1].0);
        y += 0.5 * h * (w[0].1 + w[1].1);
        out.push((
            x - corr * (dtangent[j + 1].0 - dtangent[0].0),
            y - corr * (dtangent[j + 1].1 - dtangent[0].1),
        ));
    }
    out
}

/// Distance between the reconstructed start point and the last point advanced
/// by one more trapezoid step (closing the loop).
pub fn endpoint_gap(c: &CurveSpec, g: &UniformGrid) -> f64 {
    let pts = reconstruct_xy(c, g);
    let h = g.spacing();
    let corr = h * h / 12.0;
    let last = pts[pts.len() - 1];
    let (s_last, s_end) = (g.node(g.points - 1), g.end);
    let (p_last, p_end) = (c.phi(s_last), c.phi(s_end));
    let (k_last, k_end) = (c.kappa(s_last), c.kappa(s_end));
    // undo the correction at s_last, apply it at s_end (where T′ = T′(0))
    let x = last.0
        + 0.5 * h * (p_last.cos() + p_end.cos())
        + corr * (-k_last * p_last.sin() + k_end * p_end.sin());
    let y = last.1
        + 0.5 * h * (p_last.sin() + p_end.sin())
        + corr * (k_last * p_last.cos() - k_end * p_end.cos());
    x.hypot(y)
}

/// A random even-harmonic oval: coefficients uniform in `±amplitude/n²` for
/// `n = 2, 4, …, 2⌊max_harmonic/2⌋`, redrawn until `min κ > 0.05`.
pub fn random_oval(seed: u64, max_harmonic: u32, amplitude: f64) -> Result<CurveSpec> {
    if !(0.0..1.0).contains(&amplitude) {
        return Err(OvalError::Domain(format!(
            "amplitude {amplitude} must lie in [0, 1)"
        )));
    }
    if amplitude == 0.0 || max_harmonic < 2 {
        return Ok(CurveSpec::circle());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ns: Vec<u32> = (1..=max_harmonic / 2).map(|k| 2 * k).collect();
    for _ in 0..MAX_REJECTIONS {
        let harmonics: Vec<Harmonic> = ns
            .iter()
            .map(|&n| {
                let bound = amplitude / (n * n) as f64;
                Harmonic {
                    n,
                    a: rng.gen_range(-bound..=bound),
                    b: rng.gen_range(-bound..=bound),
                }
            })
            .collect();
        let c = CurveSpec { harmonics };
        if c.min_kappa().1 > SAMPLING_KAPPA_MIN {
            return Ok(c);
        }
    }
    Err(OvalError::Sampling {
        rejections: MAX_REJECTIONS,
    })
}

/// `circle`, `harm:n=2,a=0,b=0.25;n=4,a=0.1,b=0`, or `file:path`; the
/// curvature must be positive.
pub fn parse_curve(text: &str) -> Result<CurveSpec> {
    let c = parse_curve_unchecked(text)?;
    c.validate()?;
    Ok(c)
}

/// As [`parse_curve`] without the curvature check (perturbation directions,
/// non-convex curves).
pub fn parse_curve_unchecked(text: &str) -> Result<CurveSpec> {
    let text = text.trim();
    if text == "circle" {
        return Ok(CurveSpec::circle());
    }
    if let Some(path) = text.strip_prefix("file:") {
        return parse_curve_file_unchecked(&std::fs::read_to_string(path)?);
    }
    let body = text
        .strip_prefix("harm:")
        .ok_or_else(|| OvalError::Parse(format!("unrecognized curve `{text}`")))?;
    let mut harmonics = Vec::new();
    for term in body.split(';').filter(|t| !t.trim().is_empty()) {
        let (mut n, mut a, mut b) = (None, 0.0, 0.0);
        for kv in term.split(',') {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| OvalError::Parse(format!("expected key=value in `{kv}`")))?;
            let v = v.trim();
            match k.trim() {
                "n" => {
                    n = Some(v.parse::<u32>().map_err(|_| {
                        OvalError::Parse(format!("harmonic index `{v}` is not a positive integer"))
                    })?)
                }
                "a" => a = parse_number(v)?,
                "b" => b = parse_number(v)?,
                other => return Err(OvalError::Parse(format!("unknown harmonic key `{other}`"))),
            }
        }
        let n = n.ok_or_else(|| OvalError::Parse(format!("`{term}` has no n")))?;
        harmonics.push(Harmonic { n, a, b });
    }
    CurveSpec::new(harmonics)
}

fn parse_number(v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| OvalError::Parse(format!("`{v}` is not a number")))
}

/// One harmonic per line, `n a_n b_n`, `#` starts a comment; an empty file is
/// the circle.
pub fn parse_curve_file(text: &str) -> Result<CurveSpec> {
    let c = parse_curve_file_unchecked(text)?;
    c.validate()?;
    Ok(c)
}

fn parse_curve_file_unchecked(text: &str) -> Result<CurveSpec> {
    let mut harmonics = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(OvalError::Parse(format!(
                "line {}: expected `n a_n b_n`",
                lineno + 1
            )));
        }
        let n = fields[0]
            .parse::<u32>()
            .map_err(|_| OvalError::Parse(format!("line {}: bad harmonic index", lineno + 1)))?;
        harmonics.push(Harmonic {
            n,
            a: parse_number(fields[1])?,
            b: parse_number(fields[2])?,
        });
    }
    CurveSpec::new(harmonics)
}

pub fn read_curve_file(path: &Path) -> Result<CurveSpec> {
    parse_curve_file(&std::fs::read_to_string(path)?)
}

/// `∫κ ds`, which equals 2π for every spec.
pub fn total_turning(c: &CurveSpec, g: &UniformGrid) -> Result<f64> {
    trapezoid_periodic(&curvature_unchecked(c, g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> UniformGrid {
        UniformGrid::periodic_circle(n).unwrap()
    }

    fn eps_mode(eps: f64) -> CurveSpec {
        CurveSpec::new(vec![Harmonic {
            n: 2,
            a: 0.0,
            b: eps / 2.0,
        }])
        .unwrap()
    }

    #[test]
    fn circle_quantities() {
        let g = grid(64);
        let c = CurveSpec::circle();
        let phi = turning_angle(&c, &g);
        for (s, p) in g.nodes().iter().zip(&phi.values) {
            assert_eq!(s, p);
        }
        assert!(curvature(&c, &g).unwrap().values.iter().all(|&k| k == 1.0));
        assert!(closure_residual(&c, &g).norm() < 1e-13);
    }

    #[test]
    fn cos2_curvature_and_turning() {
        let g = grid(128);
        let c = eps_mode(0.3);
        let k = curvature(&c, &g).unwrap();
        for (s, kv) in g.nodes().iter().zip(&k.values) {
            assert!((kv - (1.0 + 0.3 * (2.0 * s).cos())).abs() < 1e-14);
        }
        assert!((total_turning(&c, &g).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((c.phi(1.3 + 2.0 * PI) - c.phi(1.3) - 2.0 * PI).abs() < 1e-12);
        assert_eq!(c.phi(0.0), 0.0);
    }

    #[test]
    fn positivity_reports_location() {
        let c = eps_mode(1.5);
        match curvature(&c, &grid(64)) {
            Err(OvalError::Positivity { s, kappa }) => {
                assert!(kappa < 0.0);
                assert!((s - PI / 2.0).abs() < 0.1 || (s - 3.0 * PI / 2.0).abs() < 0.1);
            }
            other => panic!("expected positivity error, got {other:?}"),
        }
    }

    #[test]
    fn even_harmonics_close_odd_do_not() {
        let g = grid(256);
        let c = CurveSpec::new(vec![
            Harmonic {
                n: 2,
                a: 0.1,
                b: -0.05,
            },
            Harmonic {
                n: 4,
                a: 0.02,
                b: 0.03,
            },
        ])
        .unwrap();
        assert!(closure_residual(&c, &g).is_closed(1e-12));
        let odd = CurveSpec::new(vec![Harmonic {
            n: 1,
            a: 0.3,
            b: 0.0,
        }])
        .unwrap();
        // ∫e^{i(s + r cos s)} ds = 2πi J₁(r)
        let r = closure_residual(&odd, &g);
        assert!(r.norm() > 0.1);
    }

    #[test]
    fn projection_restores_closure() {
        let g = grid(512);
        let base = CurveSpec::new(vec![
            Harmonic {
                n: 1,
                a: 1e-3,
                b: 0.0,
            },
            Harmonic {
                n: 2,
                a: 0.05,
                b: 0.1,
            },
        ])
        .unwrap();
        let p = project_closure(&base).unwrap();
        assert!(closure_residual(&p, &g).is_closed(1e-10));
        assert!(p.harmonics[0].a.abs() < 1e-3);
        assert_eq!(p.harmonics[1], base.harmonics[1]);
        let again = project_closure(&p).unwrap();
        assert_eq!(again, p);

        let lone = CurveSpec::new(vec![Harmonic {
            n: 1,
            a: 0.2,
            b: 0.1,
        }])
        .unwrap();
        let p = project_closure(&lone).unwrap();
        assert!(closure_residual(&p, &g).is_closed(1e-10));
        assert!(p.coefficient_norm() < 1e-8);
    }

    #[test]
    fn projection_leaves_closed_curves_alone() {
        let c = eps_mode(0.4);
        assert_eq!(project_closure(&c).unwrap(), c);
    }

    #[test]
    fn circle_reconstruction() {
        let g = grid(256);
        let pts = reconstruct_xy(&CurveSpec::circle(), &g);
        for (x, y) in pts {
            assert!((x.hypot(y - 1.0) - 1.0).abs() < 1e-4);
        }
        assert!(endpoint_gap(&CurveSpec::circle(), &g) < 1e-12);
        assert!(endpoint_gap(&eps_mode(0.5), &g) < 1e-8);
    }

    #[test]
    fn random_ovals() {
        assert_eq!(random_oval(7, 6, 0.0).unwrap(), CurveSpec::circle());
        let a = random_oval(1, 6, 0.5).unwrap();
        assert_eq!(a, random_oval(1, 6, 0.5).unwrap());
        assert_ne!(a, random_oval(2, 6, 0.5).unwrap());
        assert!(a.is_even());
        assert_eq!(a.harmonics.len(), 3);
        assert!(a.min_kappa().1 > SAMPLING_KAPPA_MIN);
        assert!(closure_residual(&a, &grid(64)).is_closed(1e-12));
        for h in &a.harmonics {
            let bound = 0.5 / (h.n * h.n) as f64;
            assert!(h.a.abs() <= bound && h.b.abs() <= bound);
        }
        assert!(random_oval(1, 6, 1.0).is_err());
    }

    #[test]
    fn parsing_round_trips() {
        let c = parse_curve("harm:n=2,a=0,b=0.25;n=4,a=0.1,b=0").unwrap();
        assert_eq!(c.harmonics.len(), 2);
        assert_eq!(parse_curve(&c.to_string()).unwrap(), c);
        assert_eq!(parse_curve("circle").unwrap(), CurveSpec::circle());
        assert!(parse_curve("harm:n=2,q=1").is_err());
        assert!(parse_curve("harm:n=2,b=0.9").is_err());
        let f = parse_curve_file("# an oval\n2 0.0 0.1\n\n4 0.01 0 # tail\n").unwrap();
        assert_eq!(
            f.harmonics[1],
            Harmonic {
                n: 4,
                a: 0.01,
                b: 0.0
            }
        );
        assert_eq!(parse_curve_file("").unwrap(), CurveSpec::circle());
        assert!(parse_curve_file("2 0.1").is_err());
    }
}
