use proptest::prelude::*;
use semidec_core::spectral::{
    legendre_parseval, lgl_rule, project, SpectralFunction, SpectralInterval, NORM_QUADRATURE_NODES,
};

fn monomial_integral(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        2.0 / (k as f64 + 1.0)
    }
}

#[test]
fn lgl_integrates_monomials_up_to_2n_minus_3() {
    for n in 2..12 {
        let rule = lgl_rule(n).unwrap();
        for k in 0..=(2 * n - 3) {
            let q = rule.integrate(|x| x.powi(k as i32));
            assert!(
                (q - monomial_integral(k)).abs() <= 1e-12,
                "n={n} k={k}: {q}"
            );
        }
    }
}

fn interval() -> impl Strategy<Value = SpectralInterval> {
    (-2.0f64..2.0, 0.1f64..3.0).prop_map(|(a, len)| SpectralInterval::new(a, a + len).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent(
        iv in interval(),
        amp in -2.0f64..2.0,
        freq in 0.1f64..3.0,
        degree in 1usize..16,
    ) {
        let f = |x: f64| amp * (freq * x).sin() + (0.3 * x).exp();
        let once = project(f, iv, degree).unwrap();
        let twice = project(|x| once.eval(x), iv, degree).unwrap();
        for (a, b) in once.coeffs[0].iter().zip(&twice.coeffs[0]) {
            prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn parseval_matches_quadrature(
        iv in interval(),
        coeffs in prop::collection::vec(-1.0f64..1.0, 1..20),
    ) {
        let f = SpectralFunction::scalar(iv, coeffs.clone());
        // Squared norms.
        let from_coeffs = legendre_parseval(&coeffs, &iv);
        let rule = lgl_rule(NORM_QUADRATURE_NODES).unwrap();
        let quad = rule.integrate_on(&iv, |x| f.eval(x).powi(2));
        prop_assert!((from_coeffs - quad).abs() <= 1e-10 * quad.max(1.0), "{from_coeffs} vs {quad}");
    }
}
