//! Derivative-free minimization by the Nelder–Mead simplex method
//! (standard coefficients: reflection 1, expansion 2, contraction ½,
//! shrink ½). Non-finite objective values are allowed and rank worst.

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Per-coordinate offset of the initial simplex vertices.
    pub initial_step: Vec<f64>,
    /// Stop when every vertex is within this distance of the best one.
    pub x_tol: f64,
    /// Stop when worst − best objective value falls below this.
    pub f_tol: f64,
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
    /// `(evaluation index, best value so far)` at every improvement.
    pub history: Vec<(usize, f64)>,
}

fn rank(a: f64, b: f64) -> std::cmp::Ordering {
    // NaN sorts after +∞
    match (a.is_nan(), b.is_nan()) {
        (true, true) => std::cmp::Ordering::Equal,
        (true, false) => std::cmp::Ordering::Greater,
        (false, true) => std::cmp::Ordering::Less,
        _ => a.total_cmp(&b),
    }
}

fn lt(a: f64, b: f64) -> bool {
    rank(a, b) == std::cmp::Ordering::Less
}

pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let n = x0.len();
    assert_eq!(
        opts.initial_step.len(),
        n,
        "one initial step per coordinate"
    );
    let mut evals = 0usize;
    let mut best = f64::INFINITY;
    let mut history = Vec::new();
    let mut eval =
        |x: &[f64], evals: &mut usize, best: &mut f64, history: &mut Vec<(usize, f64)>| {
            let v = f(x);
            *evals += 1;
            if lt(v, *best) {
                *best = v;
                history.push((*evals, v));
            }
            v
        };

    if n == 0 {
        let v = eval(x0, &mut evals, &mut best, &mut history);
        return NelderMeadResult {
            x: Vec::new(),
            f: v,
            evals,
            converged: true,
            history,
        };
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evals, &mut best, &mut history);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step[i];
        let v = eval(&x, &mut evals, &mut best, &mut history);
        simplex.push((x, v));
    }

    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| rank(a.1, b.1));
        let (fb, fw) = (simplex[0].1, simplex[n].1);
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        if diameter < opts.x_tol || (fw.is_finite() && fb.is_finite() && fw - fb < opts.f_tol) {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let along = |t: f64, from: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, x)| c + t * (x - c))
                .collect()
        };
        let worst = simplex[n].0.clone();
        let xr = along(-1.0, &worst);
        let fr = eval(&xr, &mut evals, &mut best, &mut history);
        let f_second = simplex[n - 1].1;

        if lt(fr, fb) {
            let xe = along(-2.0, &worst);
            let fe = eval(&xe, &mut evals, &mut best, &mut history);
            simplex[n] = if lt(fe, fr) { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if lt(fr, f_second) {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if lt(fr, fw) {
            let xc = along(-0.5, &worst);
            let fc = eval(&xc, &mut evals, &mut best, &mut history);
            (xc, fc)
        } else {
            let xc = along(0.5, &worst);
            let fc = eval(&xc, &mut evals, &mut best, &mut history);
            (xc, fc)
        };
        if lt(fc, if lt(fr, fw) { fr } else { fw }) {
            simplex[n] = (xc, fc);
            continue;
        }
        // shrink toward the best vertex
        let xb = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = xb
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + 0.5 * (v - b))
                .collect();
            let v = eval(&x, &mut evals, &mut best, &mut history);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| rank(a.1, b.1));
    let (x, fv) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        f: fv,
        evals,
        converged,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(n: usize) -> NelderMeadOptions {
        NelderMeadOptions {
            max_evals: 5000,
            initial_step: vec![0.5; n],
            x_tol: 1e-9,
            f_tol: 1e-14,
        }
    }

    #[test]
    fn quadratic_bowl() {
        let r = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2),
            &[0.0, 0.0],
            &opts(2),
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] + 2.0).abs() < 1e-5);
        assert!(r.history.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn rosenbrock() {
        let r = nelder_mead(
            |x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            &[-1.2, 1.0],
            &opts(2),
        );
        assert!(r.f < 1e-8, "{}", r.f);
    }

    #[test]
    fn infinite_region_is_avoided() {
        let r = nelder_mead(
            |x| {
                if x[0] < 0.5 {
                    f64::INFINITY
                } else {
                    (x[0] - 1.0).powi(2)
                }
            },
            &[2.0],
            &opts(1),
        );
        assert!((r.x[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn budget_stops_early() {
        let mut o = opts(3);
        o.max_evals = 20;
        let r = nelder_mead(|x| x.iter().map(|v| v.cos()).sum(), &[0.1, 0.2, 0.3], &o);
        assert!(!r.converged);
        assert!(r.evals <= 20 + 3 + 2);
    }
}
