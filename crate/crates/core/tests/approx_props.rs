use nalgebra::DMatrix;
use proptest::prelude::*;
use semidec_core::approx::{
    fit_rational_ls, fit_rational_ls_with_diagnostics, logspace, RationalEntry, SampleSet,
};
use semidec_core::harness::heat2d_gain_samples;
use semidec_core::spectral::SpectralInterval;
use semidec_core::Complex64;

fn unit() -> SpectralInterval {
    SpectralInterval::new(0.0, 1.0).unwrap()
}

proptest! {
    #[test]
    fn common_scaling_leaves_values_unchanged(
        num in prop::collection::vec(-2.0f64..2.0, 1..6),
        den_tail in prop::collection::vec(-0.3f64..0.3, 0..4),
        alpha in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3],
        re in -3.0f64..3.0,
        im in 0.1f64..3.0,
    ) {
        let mut den = vec![1.0];
        den.extend(den_tail);
        let r = RationalEntry::new(num.clone(), den.clone()).unwrap();
        let s = RationalEntry::new(
            num.iter().map(|c| c * alpha).collect(),
            den.iter().map(|c| c * alpha).collect(),
        )
        .unwrap();
        let xi = Complex64::new(re, im);
        let (a, b) = (r.eval_complex(xi).unwrap(), s.eval_complex(xi).unwrap());
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300), "{a} vs {b}");
    }
}

#[test]
fn residual_does_not_grow_with_more_samples() {
    let degrees = (8, 2);
    let mut ratios = Vec::new();
    for l in [40, 70, 100] {
        let all = heat2d_gain_samples(4, logspace(-2.0, 0.0, l)).unwrap();
        let k1 = SampleSet::new(
            all.lambdas.clone(),
            all.values
                .iter()
                .map(|v| DMatrix::from_element(1, 1, v[(0, 0)]))
                .collect(),
        )
        .unwrap();
        let (_, diag) = fit_rational_ls_with_diagnostics(&k1, degrees, &unit()).unwrap();
        ratios.push(diag[0].sigma_ratio);
    }
    for w in ratios.windows(2) {
        assert!(w[1] <= 1.1 * w[0], "{ratios:?}");
    }
}

#[test]
fn fit_recovers_known_poles() {
    let lambdas: Vec<f64> = (0..40).map(|n| 0.01 + n as f64 * 0.99 / 39.0).collect();
    let ys: Vec<f64> = lambdas
        .iter()
        .map(|l| 1.0 / ((l + 0.2) * (l + 0.3)))
        .collect();
    let r = fit_rational_ls(&SampleSet::scalar(lambdas, &ys).unwrap(), (0, 2), &unit()).unwrap();
    let mut poles = r.entry(0, 0).poles().unwrap();
    poles.sort_by(|a, b| a.re.total_cmp(&b.re));
    assert_eq!(poles.len(), 2);
    assert!(
        (poles[0] - Complex64::new(-0.3, 0.0)).norm() <= 1e-8,
        "{poles:?}"
    );
    assert!(
        (poles[1] - Complex64::new(-0.2, 0.0)).norm() <= 1e-8,
        "{poles:?}"
    );
}
