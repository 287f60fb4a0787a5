use nuspec::math::*;
use nuspec::nu::{self, TauTildeForm};
use nuspec::potentials::*;
use nuspec::spectra::{self, RealityFlag};
use proptest::prelude::*;

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn complex(range: std::ops::Range<f64>) -> impl Strategy<Value = C64> {
    (range.clone(), range).prop_map(|(a, b)| C64::new(a, b))
}

fn jacobi_recurrence_residual(a: f64, b: f64, n: u32, x: f64) -> f64 {
    let p = |k: u32| jacobi_eval(&JacobiIndex::new(re(a), re(b), k), re(x)).re;
    let nf = n as f64;
    let s = 2.0 * nf + a + b;
    let lhs = 2.0 * nf * (nf + a + b) * (s - 2.0) * p(n);
    let t1 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b) * p(n - 1);
    let t2 = 2.0 * (nf + a - 1.0) * (nf + b - 1.0) * s * p(n - 2);
    (lhs - t1 + t2).abs() / lhs.abs().max(t1.abs()).max(t2.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sqrt_principal_squares_back(z in complex(-1e3..1e3)) {
        let r = sqrt_principal(z);
        prop_assert!(rel(r * r, z) <= 1e-14);
        prop_assert!(r.re >= 0.0);
    }

    #[test]
    fn q_hyperbolic_identity(x in -3.0f64..3.0, qi in 0usize..4) {
        let q = [0.5, 1.0, 2.0, 10.0][qi];
        let (c, s) = (cosh_q(re(x), re(q)), sinh_q(re(x), re(q)));
        let lhs = c * c - s * s;
        let scale = (c * c).norm().max(1.0);
        prop_assert!((lhs - re(q)).norm() <= 1e-13 * scale);
    }

    #[test]
    fn jacobi_three_term_recurrence(a in -0.99f64..5.0, b in -0.99f64..5.0, n in 2u32..=20, x in -1.0f64..1.0) {
        prop_assert!(jacobi_recurrence_residual(a, b, n, x) < 1e-12);
    }

    #[test]
    fn jacobi_recurrence_matches_explicit_sum(a in -0.9f64..5.0, b in -0.9f64..5.0, n in 0u32..=12, x in -1.0f64..1.0) {
        let idx = JacobiIndex::new(re(a), re(b), n);
        let (r, e) = (jacobi_eval(&idx, re(x)), jacobi_explicit(&idx, re(x)));
        prop_assert!((r - e).norm() <= 1e-10 * e.norm().max(1.0));
    }

    #[test]
    fn quadratic_roots_reconstruct(c0 in complex(-10.0..10.0), c1 in complex(-10.0..10.0), c2 in complex(0.1..10.0)) {
        let p = LowPoly::new(c0, c1, c2);
        let (r1, r2) = quadratic_roots(&p).unwrap();
        let rebuilt = [c2 * r1 * r2, -c2 * (r1 + r2), c2];
        let scale = p.max_abs();
        for (a, b) in rebuilt.iter().zip(p.c.iter()) {
            prop_assert!((a - b).norm() <= 1e-13 * scale);
        }
    }

    #[test]
    fn base_variant_round_trip(a in -20.0f64..20.0, b in -5.0f64..5.0, q in 0.2f64..5.0, alpha in 0.2f64..3.0) {
        for spec in [
            PotentialSpec::trig_scarf(a, alpha),
            PotentialSpec::hyperbolic_scarf(a, b, 0.5 * b, q, alpha),
            PotentialSpec::manning_rosen(a, b, q, alpha),
        ] {
            prop_assert_eq!(apply_variant(&spec, Variant::Base).unwrap(), spec);
        }
    }

    #[test]
    fn base_evaluate_is_real(a in -20.0f64..20.0, b in -5.0f64..5.0, q in 0.2f64..5.0, x in 0.05f64..3.0) {
        for spec in [
            PotentialSpec::trig_scarf(a, 1.0),
            PotentialSpec::manning_rosen(a, b, -q, 1.0),
        ] {
            if let Ok(v) = evaluate(&spec, x) {
                prop_assert_eq!(v.im, 0.0);
            }
        }
        let h = PotentialSpec::hyperbolic_scarf(a, b, b, q, 1.0);
        let pole = sinh_q_pole(q, 1.0).unwrap();
        if let Ok(v) = evaluate(&h, pole + x) {
            prop_assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn q_limit_equals_undeformed(a in -10.0f64..10.0, b in -5.0f64..5.0, alpha in 0.3f64..2.0, x in 0.05f64..3.0) {
        let y = alpha * x;
        let tol = 1e-13;
        let close = |u: C64, v: C64| (u - v).norm() <= tol * v.norm().max(1.0);

        let pt = apply_variant(&PotentialSpec::trig_scarf(a, alpha), Variant::Pt).unwrap();
        let mut qpt = apply_variant(&PotentialSpec::trig_scarf(a, alpha), Variant::QDeformedPt).unwrap();
        qpt.params.q = Some(1.0);
        prop_assert!(close(evaluate(&qpt, x).unwrap(), evaluate(&pt, x).unwrap()));
        prop_assert!(close(evaluate(&pt, x).unwrap(), re(a / y.sinh().powi(2))));

        let h = PotentialSpec::hyperbolic_scarf(a, b, 0.5 * b, 1.0, alpha);
        let (c, s) = (y.cosh(), y.sinh());
        let undeformed = a + b * (c / s).powi(2) + 0.5 * b * c / (s * s);
        prop_assert!(close(evaluate(&h, x).unwrap(), re(undeformed)));

        let mr = PotentialSpec::manning_rosen(a, b, 1.0, alpha);
        prop_assert!(close(evaluate(&mr, x).unwrap(), re(a * c / s + b / (s * s))));
    }

    #[test]
    fn pt_manning_rosen_general_q_at_one(a in -5.0f64..5.0, b in -5.0f64..5.0, x in 0.05f64..3.0) {
        let spec = apply_variant(&PotentialSpec::manning_rosen(a, b, 1.0, 1.0), Variant::Pt).unwrap();
        let reduced = (I * a * (2.0 * x).sin() + 2.0 * b) / ((2.0 * x).cos() - 1.0);
        let v = evaluate(&spec, x).unwrap();
        prop_assert!((v - reduced).norm() <= 1e-12 * reduced.norm().max(1.0));
    }

    #[test]
    fn pt_hyperbolic_general_q_tends_to_its_own_limit(v0 in -3.0f64..3.0, v1 in -3.0f64..3.0, v2 in -3.0f64..3.0, x in -3.0f64..3.0) {
        // The general-q expression approaches V0 - V1 (1 + cos 2x / 2) - V2 cos x
        // as q -> 1, which differs from the Morse-type form used at q = 1.
        let mut spec = apply_variant(&PotentialSpec::hyperbolic_scarf(v0, v1, v2, 1.0, 1.0), Variant::Pt).unwrap();
        spec.params.q = Some(1.0 + 1e-9);
        let limit = v0 - v1 * (1.0 + 0.5 * (2.0 * x).cos()) - v2 * x.cos();
        let v = evaluate(&spec, x).unwrap();
        prop_assert!((v - re(limit)).norm() <= 1e-7 * (1.0 + v0.abs() + v1.abs() + v2.abs()));
    }

    #[test]
    fn nu_structural_identities(a in -30.0f64..-0.5, alpha in 0.3f64..3.0, n in 0u32..6) {
        let spec = PotentialSpec::trig_scarf(a, alpha);
        let sol = nu::solve_level(&spec, n).unwrap();
        let t = &sol.trace;
        for c in &t.candidates {
            prop_assert!(c.square_residual < 1e-10);
            let rebuilt = t.tau_tilde.add(&c.pi.scale(re(2.0)));
            prop_assert_eq!(rebuilt, c.tau);
            prop_assert_eq!(c.lambda, c.k + c.pi.c[1]);
        }
        let chosen = t.candidates.iter().find(|c| c.accepted).unwrap();
        prop_assert!(chosen.tau_slope.re < 0.0);
        prop_assert_eq!(t.candidates.iter().filter(|c| c.accepted).count(), 1);
        for c in t.candidates.iter().filter(|c| !c.accepted) {
            prop_assert!(c.rejection.is_some());
        }
    }

    #[test]
    fn perfect_square_on_random_forms(
        s in complex(-3.0..3.0), t in complex(-3.0..3.0), u in complex(-3.0..3.0),
        w in complex(-3.0..3.0), e in complex(-3.0..3.0)
    ) {
        let form = nu::HypergeometricForm {
            sigma: LowPoly::new(s, t, re(1.0)),
            tau_tilde: LowPoly::linear(u, re(-1.0)),
            sigma_tilde: LowPoly::new(w, e, re(0.5)),
            s_domain: None,
            contour_pole: None,
        };
        let Ok(ks) = nu::k_candidates(&form) else { return Ok(()) };
        for label in nu::ALL_LABELS {
            let c = nu::branch_candidate(&form, label).unwrap();
            let k = if label.k_root > 0 { ks.0 } else { ks.1 };
            prop_assert_eq!(c.k, k);
            prop_assert!(c.square_residual < 1e-10, "residual {}", c.square_residual);
        }
    }

    #[test]
    fn q_deformed_pt_collapses_at_q_one(a in -10.0f64..10.0, alpha in 0.1f64..5.0, n in 0u32..8) {
        let pt = apply_variant(&PotentialSpec::trig_scarf(a, alpha), Variant::Pt).unwrap();
        let qpt = apply_variant(&PotentialSpec::trig_scarf(a, alpha), Variant::QDeformedPt).unwrap();
        let (x, y) = (spectra::closed_form_energy(&qpt, n).unwrap(), spectra::closed_form_energy(&pt, n).unwrap());
        prop_assert!((x - y).norm() <= 1e-15 * y.norm().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn pt_manning_rosen_is_negated_base(a in -10.0f64..10.0, b in 0.1f64..10.0, q in 0.2f64..3.0, alpha in 0.2f64..3.0, n in 0u32..6) {
        let base = PotentialSpec::manning_rosen(a, b, q, alpha);
        let pt = apply_variant(&base, Variant::Pt).unwrap();
        let (x, y) = (spectra::closed_form_energy(&pt, n).unwrap(), spectra::closed_form_energy(&base, n).unwrap());
        prop_assume!(y.re.is_finite() && y.im.is_finite());
        prop_assert!((x + y).norm() <= 1e-15 * y.norm());
    }

    #[test]
    fn reality_verdict_agrees_with_spectrum(a2 in -10.0f64..10.0, q in 0.2f64..5.0) {
        let mut spec = apply_variant(&PotentialSpec::trig_scarf(1.0, 1.0), Variant::NonPt).unwrap();
        spec.params.a1 = Some(re(0.0));
        spec.params.a2 = Some(re(a2));
        spec.params.q = Some(q);
        let cond = spectra::reality_conditions(&spec).unwrap();
        let flag = spectra::spectral_reality_scan(&spec, 5, 1e-10).unwrap();
        prop_assume!((a2 / q + 0.25).abs() > 1e-9);
        if cond.verdict {
            prop_assert_eq!(flag, RealityFlag::AllReal);
        } else {
            prop_assert_eq!(flag, RealityFlag::Complex);
        }
    }

    #[test]
    fn hyperbolic_spectrum_continuous_in_v2(v1 in 0.5f64..10.0, q in 0.5f64..4.0, n in 0u32..5) {
        let at = |v2: f64| spectra::closed_form_energy(&PotentialSpec::hyperbolic_scarf(0.0, v1, v2, q, 1.0), n).unwrap();
        let (l, m, r) = (at(-1e-12), at(0.0), at(1e-12));
        prop_assert!((l - m).norm() <= 1e-9 * m.norm().max(1.0));
        prop_assert!((r - m).norm() <= 1e-9 * m.norm().max(1.0));
    }

    #[test]
    fn hermitian_oracle_spectrum_is_real(a in -10.0f64..0.0, n in 60usize..200) {
        let spec = PotentialSpec::trig_scarf(a, 1.0);
        let h = nuspec::oracle::discretize(&spec, &natural_domain(&spec, 10.0), n).unwrap();
        for z in nuspec::oracle::eigenvalues(&h).unwrap() {
            prop_assert!(z.im.abs() <= 1e-10 * z.norm().max(1.0));
        }
    }
}

#[test]
fn alternative_tau_form_changes_only_the_first_derivative_coefficient() {
    let spec = PotentialSpec::manning_rosen(-20.0, 0.75, 1.0, 1.0);
    let eps = re(10.0);
    let p = nu::build_form_with(&spec, eps, TauTildeForm::Printed).unwrap();
    let a = nu::build_form_with(&spec, eps, TauTildeForm::Alternative).unwrap();
    assert_eq!(p.sigma, a.sigma);
    assert_eq!(p.sigma_tilde, a.sigma_tilde);
    assert_eq!(p.tau_tilde.c[1] * 2.0, a.tau_tilde.c[1]);
}
