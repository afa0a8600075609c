use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use proptest::prelude::*;
use spinfield::bundle::transition;
use spinfield::fieldsynth::{draw_coefficients, synthesize_field, synthesize_pullback, GaussianModel, Grid, Reality};
use spinfield::harmonics::{wigner_big_d, wigner_entry, QuadratureRule};
use spinfield::inference::{empirical_covariance, empirical_relation, estimate_spectrum, CheckOptions, Projector};
use spinfield::so3::{character, k_factor, k_factor_matrix, section, KElement, Rotation, SpherePoint};
use spinfield::spectral::{
    analyze, check_positive_definite, phi_from_f, sqrt_spectrum, synthesize_fn, CovarianceSpectrum, Parity, SignPolicy,
    SpinSpectrum,
};

fn rotation() -> impl Strategy<Value = Rotation> {
    (0.0..TAU, 0.0..PI, 0.0..TAU).prop_map(|(a, b, g)| Rotation::from_euler(a, b, g))
}

fn point() -> impl Strategy<Value = SpherePoint> {
    (-1.0f64..1.0, 0.0..TAU).prop_map(|(z, phi)| SpherePoint::new(z.acos(), phi))
}

fn k_element() -> impl Strategy<Value = KElement> {
    (0.0..TAU).prop_map(KElement::new)
}

fn spin_spectrum(max_l: usize) -> impl Strategy<Value = SpinSpectrum> {
    (-3i32..=3, 0usize..=max_l).prop_flat_map(move |(s, extra)| {
        let lo = s.unsigned_abs() as usize;
        let band = (lo + extra).min(max_l.max(lo));
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), band + 1 - lo).prop_map(move |v| {
            SpinSpectrum::new(s, band, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap()
        })
    })
}

fn covariance(max_l: usize) -> impl Strategy<Value = CovarianceSpectrum> {
    (-3i32..=3, 0usize..=max_l).prop_flat_map(move |(s, extra)| {
        let lo = s.unsigned_abs() as usize;
        let band = (lo + extra).min(max_l.max(lo));
        prop::collection::vec(0.0f64..1.0, band + 1 - lo)
            .prop_map(move |c| CovarianceSpectrum::new(s, band, c).unwrap())
    })
}

fn same_action(a: &Rotation, b: &Rotation) -> f64 {
    (a.matrix() - b.matrix()).amax()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_associative(r1 in rotation(), r2 in rotation(), r3 in rotation()) {
        let left = r1.compose(&r2).compose(&r3);
        let right = r1.compose(&r2.compose(&r3));
        prop_assert!(same_action(&left, &right) < 1e-10);
    }

    #[test]
    fn character_is_a_homomorphism(s in -4i32..=4, k1 in k_element(), k2 in k_element()) {
        let lhs = character(s, &k1) * character(s, &k2);
        prop_assert!((lhs - character(s, &k1.compose(&k2))).norm() < 1e-12);
    }

    #[test]
    fn k_factor_reduces_to_identity_chart(r1 in rotation(), r2 in rotation(), x in point()) {
        prop_assume!(!x.near_pole(1e-3));
        let a = k_factor(&r2, &r1, &x);
        let b = k_factor(&r1.inverse().compose(&r2), &Rotation::identity(), &r1.inverse().act(&x));
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!(spinfield::so3::wrap_signed(a.gamma() - b.gamma()).abs() < 1e-10);
            let m = k_factor_matrix(&r2, &r1, &x);
            prop_assert!(Rotation::from_matrix(m).beta() < 1e-10);
        }
    }

    #[test]
    fn section_is_a_right_inverse(x in point()) {
        let y = section(&x).act(&SpherePoint::north_pole());
        prop_assert!((y.vector() - x.vector()).amax() < 1e-12);
    }

    #[test]
    fn wigner_blocks_are_unitary_homomorphic_and_conjugation_symmetric(
        ell in 0usize..=16, g in rotation(), h in rotation()
    ) {
        let dg = wigner_big_d(ell, &g);
        let dh = wigner_big_d(ell, &h);
        let m = dg.matrix();
        let n = m.nrows();
        let unit = m.adjoint() * m - nalgebra::DMatrix::<Complex64>::identity(n, n);
        prop_assert!(unit.camax() < 1e-10);
        let prod = wigner_big_d(ell, &g.compose(&h));
        prop_assert!((prod.matrix() - dg.matrix() * dh.matrix()).camax() < 1e-10);
        let l = ell as i32;
        for a in -l..=l {
            for b in -l..=l {
                let sign = if (a - b).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                prop_assert!((dg.get(a, b).conj() - sign * dg.get(-a, -b)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn wigner_bi_associated_law(ell in 0usize..=10, k1 in k_element(), g in rotation(), k2 in k_element()) {
        let l = ell as i32;
        let moved = k1.to_rotation().compose(&g).compose(&k2.to_rotation());
        for m in -l..=l {
            for n in -l..=l {
                let want = character(m, &k1) * wigner_entry(ell, m, n, &g) * character(n, &k2);
                prop_assert!((wigner_entry(ell, m, n, &moved) - want).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn central_column_is_real(ell in 0usize..=30, g in rotation()) {
        prop_assert!(wigner_entry(ell, 0, 0, &g).im.abs() < 1e-12);
    }

    #[test]
    fn analysis_inverts_synthesis(f in spin_spectrum(6)) {
        let rule = QuadratureRule::rotation_group(f.band_limit()).unwrap();
        let samples: Vec<Complex64> = rule.nodes().iter().map(|g| synthesize_fn(&f, g)).collect();
        let back = analyze(&samples, &rule, f.spin(), f.band_limit()).unwrap();
        for (a, b) in back.coefficients().iter().zip(f.coefficients()) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn real_scalar_spectra_give_real_functions(c in prop::collection::vec(-1.0f64..1.0, 1..8), g in rotation()) {
        let f = SpinSpectrum::scalar(&c).unwrap();
        prop_assert!(synthesize_fn(&f, &g).im.abs() < 1e-12);
    }

    #[test]
    fn square_roots_reproduce_phi(phi in covariance(5), g in rotation()) {
        let rule = QuadratureRule::rotation_group(phi.band_limit()).unwrap();
        for policy in [SignPolicy::AllPlus, SignPolicy::Alternating(Parity::Odd), SignPolicy::Alternating(Parity::Even)] {
            let f = sqrt_spectrum(&phi, &policy).unwrap();
            prop_assert!((phi_from_f(&f).coefficients().iter().zip(phi.coefficients()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)) < 1e-12);
            // (f ∗ f̆)(g⁻¹) = ∫ f(h)·conj(f(g·h)) dh
            let conv: Complex64 = rule.iter().map(|(h, w)| f.eval(h) * f.eval(&g.compose(h)).conj() * w).sum();
            prop_assert!((conv - phi.eval(&g)).norm() < 1e-9);
        }
    }

    #[test]
    fn components_of_positive_spectra_are_positive(phi in covariance(6), seed in any::<u64>()) {
        for ell in phi.lowest_degree()..=phi.band_limit() {
            prop_assert!(check_positive_definite(&phi.component(ell), 20, seed).passed());
        }
    }

    #[test]
    fn type_s_law_on_sections(f in spin_spectrum(5), seed in any::<u64>(), g in rotation(), k in k_element()) {
        let draw = draw_coefficients(&f, seed, Reality::ComplexGaussian).unwrap();
        let lhs = synthesize_pullback(&f, &draw, &g.compose(&k.to_rotation())).unwrap();
        let rhs = character(f.spin(), &k.inverse()) * synthesize_pullback(&f, &draw, &g).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn transitions_depend_only_on_charts(s in -3i32..=3, r1 in rotation(), r2 in rotation(), x in point(), turn in 0.0..TAU) {
        // relabelling both charts by a rotation about x's own axis in the
        // identity chart leaves the overlap and the transition unchanged
        let spin_about_z = Rotation::about_z(turn);
        let a = transition(s, &r2, &r1, &x);
        let b = transition(s, &r2.compose(&spin_about_z), &r1.compose(&spin_about_z), &x);
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn relation_vanishes_for_complex_spin_fields(f in spin_spectrum(4), g in rotation(), h in rotation(), seed in any::<u64>()) {
        prop_assume!(f.spin() != 0 && f.norm_sq() > 0.0);
        let model = GaussianModel::new(f, Reality::ComplexGaussian).unwrap();
        // 4σ keeps the false alarm rate negligible over all proptest cases
        let opts = CheckOptions { k_sigma: 4.0, bonferroni: false };
        let rel = empirical_relation(&model, &[(g, h)], 10_000, seed, opts);
        prop_assert!(rel.passed(), "{}", rel.to_text());
    }

    #[test]
    fn sign_policies_share_the_law(phi in covariance(4), g in rotation(), h in rotation(), seed in any::<u64>()) {
        let a = GaussianModel::new(sqrt_spectrum(&phi, &SignPolicy::AllPlus).unwrap(), Reality::ComplexGaussian).unwrap();
        let b = GaussianModel::new(sqrt_spectrum(&phi, &SignPolicy::Alternating(Parity::Odd)).unwrap(), Reality::ComplexGaussian).unwrap();
        let opts = CheckOptions::default();
        let ra = empirical_covariance(&a, &[(g, h)], 5000, seed, opts);
        let rb = empirical_covariance(&b, &[(g, h)], 5000, seed.wrapping_add(1), opts);
        let (ea, eb) = (&ra.entries[0], &rb.entries[0]);
        let se = ea.standard_error.hypot(eb.standard_error);
        prop_assert!((ea.estimate - eb.estimate).norm() <= 4.0 * se + 1e-12);
    }
}

#[test]
fn standard_errors_scale_as_inverse_root_n() {
    let f = SpinSpectrum::new(1, 4, vec![Complex64::new(1.0, 0.2), Complex64::new(0.5, 0.0), Complex64::new(0.3, -0.1), Complex64::new(0.2, 0.0)]).unwrap();
    let model = GaussianModel::new(f, Reality::ComplexGaussian).unwrap();
    let g = Rotation::from_euler(0.3, 1.1, 2.0);
    let h = Rotation::from_euler(2.2, 0.4, 0.7);
    let opts = CheckOptions::default();
    let small = empirical_covariance(&model, &[(g, h)], 4000, 9, opts).entries[0].standard_error;
    let large = empirical_covariance(&model, &[(g, h)], 8000, 10, opts).entries[0].standard_error;
    let ratio = small / large;
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn spectrum_estimate_of_a_deterministic_function_matches_analysis() {
    let f = SpinSpectrum::new(2, 5, (2..=5).map(|l| Complex64::from_polar(1.0 / l as f64, l as f64)).collect()).unwrap();
    let rule = QuadratureRule::rotation_group(5).unwrap();
    let samples: Vec<Complex64> = rule.nodes().iter().map(|g| synthesize_fn(&f, g)).collect();
    let alpha = analyze(&samples, &rule, 2, 5).unwrap();
    // projecting onto D_{m,-s'} with s' = -s picks out the m = s column
    let projector = Projector::new(&rule, -2, 5).unwrap();
    let coeffs = projector.project(&samples).unwrap();
    let labels = projector.labels();
    for (c, &(ell, m)) in coeffs.iter().zip(&labels) {
        let want = if m == 2 { alpha.coefficient(ell) } else { Complex64::new(0.0, 0.0) };
        assert!((c - want).norm() < 1e-10, "l={ell} m={m}");
    }
    let est = estimate_spectrum(&[coeffs], &labels, CheckOptions::default()).unwrap();
    for (ell, p) in est.mean_power {
        assert!((p * (2 * ell + 1) as f64 - alpha.coefficient(ell).norm_sqr()).abs() < 1e-10);
    }
}

#[test]
fn real_constrained_fields_are_real() {
    let f = SpinSpectrum::scalar(&[0.5, 1.0, -0.3, 0.2, 0.1]).unwrap();
    let draw = draw_coefficients(&f, 3, Reality::RealConstrained).unwrap();
    let field = synthesize_field(&f, &draw, Grid::equiangular(8, 16).unwrap()).unwrap();
    assert!(field.max_imag() < 1e-12);
}
