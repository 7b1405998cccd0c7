//! Shape optimization of `λ₁(H_g(C))` over ovals, perturbation scans about
//! the circle, the Hellmann–Feynman gradient, and the counterexample dump.

mod nelder_mead;

use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};

use crate::curve::{curvature_unchecked, project_closure, random_oval, CurveSpec, Harmonic};
use crate::numerics::quadrature::trapezoid_periodic;
use crate::numerics::{GridFunction, Method, Spectrum, UniformGrid};
use crate::periodic::{
    eigenvalues, galerkin_ground_state, halfbound_certificate, lowest_eigs, CurveOperatorSpec,
    HalfBoundCertificate,
};
use crate::{OvalError, Result};

/// The barrier switches on below this sampled minimum curvature.
pub const BARRIER_THRESHOLD: f64 = 0.1;
/// Minimal `λ₂ − λ₁` for the gradient to be defined.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// `λ₁ < 1 − this` at `g = 1` is a conjecture-violation candidate.
pub const CONJECTURE_TOLERANCE: f64 = 1e-6;
/// `λ₁ < 1/2 − this` at `g = 1` contradicts the proven bound.
pub const HALF_BOUND_TOLERANCE: f64 = 1e-8;
/// Amplitude passed to [`random_oval`] for restart points.
pub const RESTART_AMPLITUDE: f64 = 0.5;
const MAX_RECORDED_VIOLATIONS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    fn sign(self) -> f64 {
        match self {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }

    /// `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        self.sign() * a < self.sign() * b
    }

    fn worst(self) -> f64 {
        self.sign() * f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Harmonics `2, 4, …`; closure holds identically.
    EvenHarmonic { max_harmonic: u32 },
    /// Harmonics `2..=max`, with `(a₁, b₁)` solved for closure at every
    /// evaluation.
    General { max_harmonic: u32 },
}

impl Family {
    fn template(self) -> CurveSpec {
        let ns: Vec<u32> = match self {
            Family::EvenHarmonic { max_harmonic } => (2..=max_harmonic).step_by(2).collect(),
            Family::General { max_harmonic } => (2..=max_harmonic).collect(),
        };
        CurveSpec {
            harmonics: ns
                .into_iter()
                .map(|n| Harmonic { n, a: 0.0, b: 0.0 })
                .collect(),
        }
    }

    pub fn max_harmonic(self) -> u32 {
        match self {
            Family::EvenHarmonic { max_harmonic } | Family::General { max_harmonic } => {
                max_harmonic
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationProblem {
    pub coupling: f64,
    pub sense: Sense,
    pub family: Family,
    /// Galerkin modes per side.
    pub resolution: usize,
    pub barrier_strength: f64,
    pub seed: u64,
    pub restarts: usize,
    /// Evaluation budget per restart.
    pub max_evals: usize,
}

impl OptimizationProblem {
    pub fn new(coupling: f64, sense: Sense) -> Self {
        Self {
            coupling,
            sense,
            family: Family::EvenHarmonic { max_harmonic: 6 },
            resolution: 32,
            barrier_strength: 1e-2,
            seed: 0,
            restarts: 10,
            max_evals: 5000,
        }
    }

    fn check(&self) -> Result<()> {
        if !self.coupling.is_finite() || !self.barrier_strength.is_finite() {
            return Err(OvalError::Domain(
                "coupling and barrier strength must be finite".into(),
            ));
        }
        if self.barrier_strength < 0.0 {
            return Err(OvalError::Domain(format!(
                "barrier strength {} must be nonnegative",
                self.barrier_strength
            )));
        }
        if self.restarts == 0 || self.max_evals == 0 {
            return Err(OvalError::Contract(
                "restarts and max_evals must be positive".into(),
            ));
        }
        if self.family.max_harmonic() < 2 {
            return Err(OvalError::Domain(
                "the search family needs max_harmonic ≥ 2".into(),
            ));
        }
        if self.resolution < crate::periodic::MIN_RESOLUTION {
            return Err(OvalError::Contract(format!(
                "resolution {} below minimum {}",
                self.resolution,
                crate::periodic::MIN_RESOLUTION
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    EvalBudget,
    BarrierHit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub restart: usize,
    pub seed: u64,
    pub lambda1: f64,
    pub objective: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub best_curve: CurveSpec,
    /// `λ₁` of the best curve (no barrier).
    pub best_value: f64,
    /// Barrier-adjusted objective of the best curve.
    pub best_objective: f64,
    /// `(evaluation count, best objective so far)`, restarts concatenated in
    /// index order.
    pub history: Vec<(usize, f64)>,
    pub termination: Termination,
    pub certificate: Option<HalfBoundCertificate>,
    pub evaluations: usize,
    pub infeasible_evaluations: usize,
    pub restarts: Vec<RestartOutcome>,
    /// Smallest `λ₁` over every feasible evaluation.
    pub min_lambda1_seen: f64,
    /// At `g = 1`: evaluated curves with `λ₁ < 1 − 1e-6` (first few).
    pub violations: Vec<CurveSpec>,
    pub warnings: Vec<String>,
}

impl OptimizationTrace {
    /// The proven `λ₁ ≥ 1/2` held for every curve evaluated at `g = 1`.
    pub fn half_bound_held(&self) -> bool {
        self.min_lambda1_seen >= 0.5 - HALF_BOUND_TOLERANCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    /// Sense-adjusted objective; `±∞` when infeasible.
    pub value: f64,
    pub lambda1: Option<f64>,
    pub barrier: f64,
    pub infeasible: bool,
}

impl ObjectiveValue {
    fn infeasible(sense: Sense) -> Self {
        Self {
            value: sense.worst(),
            lambda1: None,
            barrier: 0.0,
            infeasible: true,
        }
    }
}

/// `strength · mean_j log(κ_j / κ_min)` on the reference grid when
/// `κ_min ≤ 0.1`, else 0. `None` when `κ_min ≤ 0`.
pub fn barrier(c: &CurveSpec, strength: f64) -> Option<f64> {
    let kappa = curvature_unchecked(c, &c.reference_grid());
    let kmin = kappa.values.iter().cloned().fold(f64::INFINITY, f64::min);
    if kmin.is_nan() || kmin <= 0.0 {
        return None;
    }
    if kmin > BARRIER_THRESHOLD {
        return Some(0.0);
    }
    let m = kappa.values.len() as f64;
    Some(strength * kappa.values.iter().map(|k| (k / kmin).ln()).sum::<f64>() / m)
}

/// Barrier-penalized `λ₁` for minimization.
pub fn objective(
    c: &CurveSpec,
    g: f64,
    resolution: usize,
    barrier_strength: f64,
) -> Result<ObjectiveValue> {
    objective_for(c, g, resolution, barrier_strength, Sense::Minimize)
}

/// Barrier-penalized `λ₁`: the barrier is added when minimizing and
/// subtracted when maximizing.
pub fn objective_for(
    c: &CurveSpec,
    g: f64,
    resolution: usize,
    barrier_strength: f64,
    sense: Sense,
) -> Result<ObjectiveValue> {
    let Some(b) = barrier(c, barrier_strength) else {
        return Ok(ObjectiveValue::infeasible(sense));
    };
    let spec = CurveOperatorSpec::new(c.clone(), g).with_resolution(resolution);
    let lambda1 = eigenvalues(&spec, 1)?[0];
    Ok(ObjectiveValue {
        value: lambda1 + sense.sign() * b,
        lambda1: Some(lambda1),
        barrier: b,
        infeasible: false,
    })
}

struct RestartRun {
    outcome: RestartOutcome,
    curve: CurveSpec,
    barrier_active: bool,
    history: Vec<(usize, f64)>,
    infeasible: usize,
    min_lambda1: f64,
    violations: Vec<CurveSpec>,
}

fn materialize(p: &OptimizationProblem, template: &CurveSpec, x: &[f64]) -> Option<CurveSpec> {
    let c = template.with_coefficients(x);
    match p.family {
        Family::EvenHarmonic { .. } => Some(c),
        Family::General { .. } => project_closure(&c).ok(),
    }
}

fn run_restart(p: &OptimizationProblem, restart: usize) -> Result<RestartRun> {
    let template = p.family.template();
    let seed = p.seed.wrapping_add(restart as u64);
    let start = random_oval(seed, p.family.max_harmonic(), RESTART_AMPLITUDE)?;
    let mut x0 = vec![0.0; 2 * template.harmonics.len()];
    for h in &start.harmonics {
        if let Some(i) = template.harmonics.iter().position(|t| t.n == h.n) {
            x0[2 * i] = h.a;
            x0[2 * i + 1] = h.b;
        }
    }
    let step: Vec<f64> = template
        .harmonics
        .iter()
        .flat_map(|h| {
            let s = 0.1 / (h.n * h.n) as f64;
            [s, s]
        })
        .collect();

    let mut infeasible = 0usize;
    let mut min_lambda1 = f64::INFINITY;
    let mut violations = Vec::new();
    let sense = p.sense;
    let f = |x: &[f64]| -> f64 {
        let Some(c) = materialize(p, &template, x) else {
            infeasible += 1;
            return f64::INFINITY;
        };
        match objective_for(&c, p.coupling, p.resolution, p.barrier_strength, sense) {
            Ok(v) => {
                if let Some(l) = v.lambda1 {
                    min_lambda1 = min_lambda1.min(l);
                    if p.coupling == 1.0
                        && l < 1.0 - CONJECTURE_TOLERANCE
                        && violations.len() < MAX_RECORDED_VIOLATIONS
                    {
                        violations.push(c);
                    }
                } else {
                    infeasible += 1;
                }
                sense.sign() * v.value
            }
            Err(_) => {
                infeasible += 1;
                f64::INFINITY
            }
        }
    };
    let opts = NelderMeadOptions {
        max_evals: p.max_evals,
        initial_step: step,
        x_tol: 1e-7,
        f_tol: 1e-10,
    };
    let r = nelder_mead(f, &x0, &opts);
    let curve = materialize(p, &template, &r.x).ok_or(OvalError::Projection {
        iterations: 0,
        residual: f64::NAN,
    })?;
    let best = objective_for(&curve, p.coupling, p.resolution, p.barrier_strength, sense)?;
    let lambda1 = best.lambda1.ok_or_else(|| {
        let (s, kappa) = curve.min_kappa();
        OvalError::Positivity { s, kappa }
    })?;
    Ok(RestartRun {
        outcome: RestartOutcome {
            restart,
            seed,
            lambda1,
            objective: best.value,
            evaluations: r.evals,
            converged: r.converged,
        },
        curve,
        barrier_active: best.barrier > 0.0,
        history: r
            .history
            .into_iter()
            .map(|(e, v)| (e, sense.sign() * v))
            .collect(),
        infeasible,
        min_lambda1,
        violations,
    })
}

fn optimize(p: &OptimizationProblem) -> Result<OptimizationTrace> {
    p.check()?;
    let runs: Vec<RestartRun> = (0..p.restarts)
        .into_par_iter()
        .map(|i| run_restart(p, i))
        .collect::<Result<_>>()?;

    let sense = p.sense;
    let mut best_idx = 0;
    for (i, r) in runs.iter().enumerate() {
        if sense.better(r.outcome.objective, runs[best_idx].outcome.objective) {
            best_idx = i;
        }
    }

    let mut history = Vec::new();
    let mut offset = 0;
    let mut best_so_far = sense.worst();
    for r in &runs {
        for &(e, v) in &r.history {
            if sense.better(v, best_so_far) {
                best_so_far = v;
                history.push((offset + e, v));
            }
        }
        offset += r.outcome.evaluations;
    }

    let best = &runs[best_idx];
    let termination = if best.barrier_active {
        Termination::BarrierHit
    } else if runs.iter().any(|r| r.outcome.converged) {
        Termination::Converged
    } else {
        Termination::EvalBudget
    };
    let certificate = if p.coupling == 1.0 {
        let spec = CurveOperatorSpec::new(best.curve.clone(), 1.0).with_resolution(p.resolution);
        Some(halfbound_certificate(&spec)?)
    } else {
        None
    };
    let mut warnings = Vec::new();
    if sense == Sense::Maximize && p.coupling >= 0.0 {
        warnings.push(format!(
            "maximizing λ₁ at g = {} ≥ 0: the supremum is not attained; growth is capped only by the evaluation budget and the barrier",
            p.coupling
        ));
    }
    Ok(OptimizationTrace {
        best_curve: best.curve.clone(),
        best_value: best.outcome.lambda1,
        best_objective: best.outcome.objective,
        history,
        termination,
        certificate,
        evaluations: offset,
        infeasible_evaluations: runs.iter().map(|r| r.infeasible).sum(),
        min_lambda1_seen: runs
            .iter()
            .map(|r| r.min_lambda1)
            .fold(f64::INFINITY, f64::min),
        violations: runs
            .iter()
            .flat_map(|r| r.violations.iter().cloned())
            .collect(),
        restarts: runs.iter().map(|r| r.outcome.clone()).collect(),
        warnings,
    })
}

/// Nelder–Mead with seeded restarts; the problem's `sense` is overridden.
pub fn minimize_lambda1(p: &OptimizationProblem) -> Result<OptimizationTrace> {
    optimize(&OptimizationProblem {
        sense: Sense::Minimize,
        ..p.clone()
    })
}

pub fn maximize_lambda1(p: &OptimizationProblem) -> Result<OptimizationTrace> {
    optimize(&OptimizationProblem {
        sense: Sense::Maximize,
        ..p.clone()
    })
}

/// The curve whose curvature is `1 + cos ns` (or `1 + sin ns`), i.e. the
/// unit perturbation direction in curvature mode `n`.
pub fn curvature_mode(n: u32, sine: bool) -> Result<CurveSpec> {
    if n == 0 {
        return Err(OvalError::Domain("curvature mode index must be ≥ 1".into()));
    }
    let inv = 1.0 / n as f64;
    let (a, b) = if sine { (-inv, 0.0) } else { (0.0, inv) };
    CurveSpec::new(vec![Harmonic { n, a, b }])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub eps: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationScan {
    pub rows: Vec<ScanRow>,
    /// Set when curvature positivity failed; rows stop before the first
    /// inadmissible ε.
    pub truncated: bool,
    pub truncated_at: Option<f64>,
}

/// `λ₁, λ₂` along `circle + ε · direction` (coefficients scaled by ε).
pub fn perturbation_scan(
    g: f64,
    direction: &CurveSpec,
    eps_grid: &[f64],
    resolution: usize,
) -> Result<PerturbationScan> {
    if !direction.is_even() {
        return Err(OvalError::Domain(format!(
            "scan direction {direction} leaves the even-harmonic family"
        )));
    }
    let base = direction.coefficients();
    let points: Vec<Option<ScanRow>> = eps_grid
        .par_iter()
        .map(|&eps| {
            let coeffs: Vec<f64> = base.iter().map(|c| eps * c).collect();
            let c = direction.with_coefficients(&coeffs);
            if c.min_kappa().1 <= 0.0 {
                return Ok(None);
            }
            let spec = CurveOperatorSpec::new(c, g).with_resolution(resolution);
            let l = eigenvalues(&spec, 2)?;
            Ok(Some(ScanRow {
                eps,
                lambda1: l[0],
                lambda2: l[1],
            }))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(points.len());
    let mut truncated_at = None;
    for (eps, p) in eps_grid.iter().zip(points) {
        match p {
            Some(r) => rows.push(r),
            None => {
                truncated_at = Some(*eps);
                break;
            }
        }
    }
    Ok(PerturbationScan {
        rows,
        truncated: truncated_at.is_some(),
        truncated_at,
    })
}

/// `∂λ₁/∂p = g ∫ 2κ (∂κ/∂p) f² ds` over the flattened coefficients of `c`.
pub fn hf_gradient(c: &CurveSpec, g: f64, resolution: usize) -> Result<Vec<f64>> {
    let spec = CurveOperatorSpec::new(c.clone(), g).with_resolution(resolution);
    let points = (4 * (2 * resolution + 1))
        .max(2 * (2 * resolution + 2 * c.max_harmonic() as usize) + 2)
        .max(256);
    let grid = UniformGrid::periodic_circle(points)?;
    let (l1, l2, f, _) = galerkin_ground_state(&spec, &grid)?;
    let gap = l2 - l1;
    if gap <= DEGENERACY_GAP {
        return Err(OvalError::Degenerate { gap });
    }
    let kappa = curvature_unchecked(c, &grid);
    let nodes = grid.nodes();
    let mut grad = vec![0.0; 2 * c.harmonics.len()];
    let partials: Vec<Vec<f64>> = nodes.iter().map(|&s| c.kappa_partials(s)).collect();
    for (p, out) in grad.iter_mut().enumerate() {
        let integrand: Vec<f64> = (0..nodes.len())
            .map(|j| 2.0 * kappa.values[j] * partials[j][p] * f.values[j] * f.values[j])
            .collect();
        *out = g * trapezoid_periodic(&GridFunction::new(grid, integrand)?)?;
    }
    Ok(grad)
}

/// Everything needed to reproduce a `λ₁ < 1` candidate at `g = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleDump {
    pub curve: CurveSpec,
    pub coupling: f64,
    pub resolution: usize,
    pub galerkin: Spectrum,
    pub finite_difference: Spectrum,
    pub certificate: Option<HalfBoundCertificate>,
    pub created_unix: u64,
}

/// Recomputes the candidate at doubled resolution in both discretizations.
pub fn counterexample_dump(curve: &CurveSpec, resolution: usize) -> Result<CounterexampleDump> {
    let modes = 2 * resolution;
    let spec = CurveOperatorSpec::new(curve.clone(), 1.0).with_resolution(modes);
    let mut galerkin = lowest_eigs(&spec, 3)?;
    galerkin.eigenvectors = None;
    let fd_spec = spec
        .clone()
        .with_method(Method::FiniteDifference)
        .with_resolution((16 * modes).max(512));
    let mut finite_difference = lowest_eigs(&fd_spec, 3)?;
    finite_difference.eigenvectors = None;
    Ok(CounterexampleDump {
        curve: curve.clone(),
        coupling: 1.0,
        resolution: modes,
        galerkin,
        finite_difference,
        certificate: halfbound_certificate(&spec).ok(),
        created_unix: unix_now(),
    })
}

static DUMP_WRITER: Mutex<()> = Mutex::new(());

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Writes `counterexample-<unix>-<k>.json` into `dir`, never overwriting.
pub fn write_dump<T: Serialize>(dir: &Path, dump: &T) -> Result<PathBuf> {
    let _guard = DUMP_WRITER.lock().unwrap_or_else(|e| e.into_inner());
    std::fs::create_dir_all(dir)?;
    let body =
        serde_json::to_string_pretty(dump).map_err(|e| OvalError::Io(std::io::Error::other(e)))?;
    let stamp = unix_now();
    for k in 0.. {
        let path = dir.join(format!("counterexample-{stamp}-{k}.json"));
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut file) => {
                file.write_all(body.as_bytes())?;
                file.write_all(b"\n")?;
                return Ok(path);
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!("unbounded suffix search")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ellipse_like(eps: f64) -> CurveSpec {
        CurveSpec::new(vec![Harmonic {
            n: 2,
            a: 0.0,
            b: eps / 2.0,
        }])
        .unwrap()
    }

    #[test]
    fn objective_on_circle() {
        let v = objective(&CurveSpec::circle(), 1.0, 32, 1e-2).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12 && v.barrier == 0.0);
        let v = objective(&CurveSpec::circle(), -1.0, 32, 1e-2).unwrap();
        assert!((v.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn barrier_activates_at_threshold() {
        let v = objective(&ellipse_like(0.9), 1.0, 48, 1e-2).unwrap();
        assert!(v.barrier > 0.0);
        assert!(v.value > v.lambda1.unwrap());
        let m = objective_for(&ellipse_like(0.9), 1.0, 48, 1e-2, Sense::Maximize).unwrap();
        assert!(m.value < m.lambda1.unwrap());
        assert_eq!(
            objective(&ellipse_like(0.5), 1.0, 32, 1e-2)
                .unwrap()
                .barrier,
            0.0
        );
    }

    #[test]
    fn nonpositive_curvature_is_sentinel() {
        let v = objective(&ellipse_like(1.2), 1.0, 32, 1e-2).unwrap();
        assert!(v.infeasible && v.value == f64::INFINITY);
        let v = objective_for(&ellipse_like(1.2), 1.0, 32, 1e-2, Sense::Maximize).unwrap();
        assert!(v.infeasible && v.value == f64::NEG_INFINITY);
    }

    #[test]
    fn scan_fourth_order_at_unit_coupling() {
        let dir = curvature_mode(2, false).unwrap();
        let eps: Vec<f64> = (0..=8).map(|i| 0.05 * i as f64).collect();
        let scan = perturbation_scan(1.0, &dir, &eps, 48).unwrap();
        assert!(!scan.truncated);
        assert!((scan.rows[0].lambda1 - 1.0).abs() < 1e-10);
        assert!((scan.rows[0].lambda2 - 2.0).abs() < 1e-10);
        assert!(scan.rows.iter().all(|r| r.lambda1 >= 1.0 - 1e-10));
        let (a, b) = (&scan.rows[4], &scan.rows[8]);
        let order = ((b.lambda1 - 1.0).ln() - (a.lambda1 - 1.0).ln()) / (b.eps / a.eps).ln();
        assert!(order >= 3.5, "order {order}");
    }

    #[test]
    fn scan_truncates_when_curvature_vanishes() {
        let dir = curvature_mode(2, false).unwrap();
        let scan = perturbation_scan(1.0, &dir, &[0.0, 0.5, 1.0, 1.5], 32).unwrap();
        assert!(scan.truncated);
        assert_eq!(scan.rows.len(), 2);
        assert_eq!(scan.truncated_at, Some(1.0));
        assert!(perturbation_scan(1.0, &curvature_mode(3, false).unwrap(), &[0.1], 32).is_err());
    }

    #[test]
    fn gradient_vanishes_on_circle() {
        let c = CurveSpec::new(vec![
            Harmonic {
                n: 2,
                a: 0.0,
                b: 0.0,
            },
            Harmonic {
                n: 4,
                a: 0.0,
                b: 0.0,
            },
        ])
        .unwrap();
        for g in [1.0, -1.0] {
            let grad = hf_gradient(&c, g, 32).unwrap();
            assert!(grad.iter().all(|v| v.abs() < 1e-8), "{grad:?}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let c = ellipse_like(0.2);
        let grad = hf_gradient(&c, 1.0, 32).unwrap();
        let x = c.coefficients();
        let h = 1e-5;
        for p in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[p] += h;
            xm[p] -= h;
            let lp = eigenvalues(
                &CurveOperatorSpec::new(c.with_coefficients(&xp), 1.0).with_resolution(32),
                1,
            )
            .unwrap()[0];
            let lm = eigenvalues(
                &CurveOperatorSpec::new(c.with_coefficients(&xm), 1.0).with_resolution(32),
                1,
            )
            .unwrap()[0];
            let fd = (lp - lm) / (2.0 * h);
            let scale = grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(
                (fd - grad[p]).abs() <= 1e-5 * scale,
                "p={p}: {fd} vs {}",
                grad[p]
            );
        }
    }

    fn small_problem(g: f64) -> OptimizationProblem {
        OptimizationProblem {
            restarts: 3,
            max_evals: 600,
            resolution: 16,
            family: Family::EvenHarmonic { max_harmonic: 4 },
            ..OptimizationProblem::new(g, Sense::Minimize)
        }
    }

    #[test]
    fn minimization_history_is_monotone_and_deterministic() {
        let p = small_problem(0.25);
        let a = minimize_lambda1(&p).unwrap();
        let b = minimize_lambda1(&p).unwrap();
        assert_eq!(a, b);
        assert!(a
            .history
            .windows(2)
            .all(|w| w[1].1 < w[0].1 && w[1].0 > w[0].0));
        assert!((a.best_value - 0.25).abs() < 1e-3, "{}", a.best_value);
        assert!(a.certificate.is_none());
    }

    #[test]
    fn maximization_at_positive_coupling_warns() {
        let p = OptimizationProblem {
            max_evals: 100,
            restarts: 2,
            ..small_problem(1.0)
        };
        let t = maximize_lambda1(&p).unwrap();
        assert!(!t.warnings.is_empty());
        assert!(t.history.windows(2).all(|w| w[1].1 > w[0].1));
        assert!(t.certificate.is_some());
        assert!(t.half_bound_held());
    }

    #[test]
    fn general_family_stays_closed() {
        let p = OptimizationProblem {
            family: Family::General { max_harmonic: 3 },
            restarts: 1,
            max_evals: 150,
            ..small_problem(0.25)
        };
        let t = minimize_lambda1(&p).unwrap();
        let g = UniformGrid::periodic_circle(1024).unwrap();
        assert!(crate::curve::closure_residual(&t.best_curve, &g).norm() < 1e-9);
    }

    #[test]
    fn dump_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let d = counterexample_dump(&ellipse_like(0.3), 16).unwrap();
        let p1 = write_dump(dir.path(), &d).unwrap();
        let p2 = write_dump(dir.path(), &d).unwrap();
        assert_ne!(p1, p2);
        let back: CounterexampleDump =
            serde_json::from_str(&std::fs::read_to_string(&p1).unwrap()).unwrap();
        assert_eq!(back.curve, d.curve);
        assert_eq!(back.resolution, 32);
        assert!(back.certificate.is_some());
    }
}
