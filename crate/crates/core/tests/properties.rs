use std::f64::consts::PI;

use proptest::prelude::*;

use oval_lab::cli::parse_grid;
use oval_lab::constants::{appendix_constants, keller_constant};
use oval_lab::curve::{
    closure_residual, parse_curve, random_oval, total_turning, CurveSpec, Harmonic,
};
use oval_lab::numerics::UniformGrid;
use oval_lab::periodic::{eigenvalues, halfbound_certificate, CurveOperatorSpec};

fn rotated(c: &CurveSpec, shift: f64) -> CurveSpec {
    // ψ(s + shift) in the same harmonic basis
    CurveSpec {
        harmonics: c
            .harmonics
            .iter()
            .map(|h| {
                let (sn, cn) = (h.n as f64 * shift).sin_cos();
                Harmonic {
                    n: h.n,
                    a: h.a * cn + h.b * sn,
                    b: h.b * cn - h.a * sn,
                }
            })
            .collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_ovals_are_closed_convex_with_total_turning_2pi(seed in 0u64..10_000, amp in 0.0f64..0.95) {
        let c = random_oval(seed, 6, amp).unwrap();
        let g = UniformGrid::periodic_circle(512).unwrap();
        prop_assert!(closure_residual(&c, &g).norm() <= 1e-12);
        prop_assert!(c.min_kappa().1 > 0.05 || amp == 0.0);
        prop_assert!((total_turning(&c, &g).unwrap() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn spectrum_is_invariant_under_reparametrization_shift(seed in 0u64..10_000, shift in 0.0f64..(2.0 * PI)) {
        let c = random_oval(seed, 6, 0.6).unwrap();
        let l = |c: CurveSpec| eigenvalues(&CurveOperatorSpec::new(c, 1.0).with_resolution(32), 3).unwrap();
        let (a, b) = (l(c.clone()), l(rotated(&c, shift)));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn half_bound_and_conjecture_hold_on_ovals(seed in 0u64..100_000) {
        let c = random_oval(seed, 8, 0.9).unwrap();
        let spec = CurveOperatorSpec::new(c, 1.0).with_resolution(48);
        let cert = halfbound_certificate(&spec).unwrap();
        prop_assert!(cert.lambda1 >= 1.0 - 1e-6);
        prop_assert!(cert.c0_sq <= 0.5 + 1e-8);
        prop_assert!(cert.form_mismatch() < 1e-8);
    }

    #[test]
    fn negative_coupling_lowers_below_circle(seed in 0u64..10_000, g in -2.0f64..-0.1) {
        let c = random_oval(seed, 6, 0.5).unwrap();
        let l = eigenvalues(&CurveOperatorSpec::new(c, g).with_resolution(32), 1).unwrap()[0];
        prop_assert!(l <= g + 1e-10);
    }

    #[test]
    fn curve_display_round_trips(seed in 0u64..10_000) {
        let c = random_oval(seed, 6, 0.7).unwrap();
        prop_assert_eq!(parse_curve(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn appendix_identity(gamma in 0.51f64..3.0) {
        let (_, ct) = appendix_constants(gamma).unwrap();
        let l = keller_constant(gamma).unwrap();
        prop_assert!((ct.powf(gamma) - l).abs() <= 1e-12 * l.max(1.0));
    }

    #[test]
    fn grid_point_count(start in -5.0f64..5.0, k in 0usize..200, step in 0.01f64..1.0) {
        let end = start + k as f64 * step;
        let g = parse_grid(&format!("{start}:{end}:{step}")).unwrap();
        prop_assert_eq!(g.len(), k + 1);
        prop_assert_eq!(*g.last().unwrap(), end);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
