use core::f64::consts::PI;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use semidec_core::approx::{RationalEntry, RationalMatrixFunction};
use semidec_core::contour::{quadrature_scalar, realize, Contour, QuadratureRule};
use semidec_core::discrete::{laplacian_1d_dirichlet, BandedOperator};
use semidec_core::harness::unit_interval;

const CELLS: usize = 24;

fn operator() -> BandedOperator {
    laplacian_1d_dirichlet(CELLS, PI).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// Pole at −20, outside the contour, and |r| stays O(1) on the circle so the
// quadrature sum carries no cancellation.
fn symbol() -> RationalMatrixFunction {
    RationalMatrixFunction::scalar(
        RationalEntry::new(vec![0.3, 1.0, -0.2], vec![1.0, 0.05]).unwrap(),
    )
}

fn realize_one(r: &RationalMatrixFunction, m: usize, op: &BandedOperator, z: &[f64]) -> Vec<f64> {
    let c = Contour::circle(5.0).unwrap();
    let rule = QuadratureRule::trapezoid(m).unwrap();
    let mut out = realize(r, &c, &rule, op, &unit_interval(), &[z.to_vec()]).unwrap();
    out.outputs.swap_remove(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn realization_is_linear(
        z1 in prop::collection::vec(-1.0f64..1.0, CELLS - 1),
        z2 in prop::collection::vec(-1.0f64..1.0, CELLS - 1),
        alpha in -3.0f64..3.0,
    ) {
        let op = operator();
        let r = symbol();
        let mix: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| alpha * a + b).collect();
        let lhs = realize_one(&r, 11, &op, &mix);
        let y1 = realize_one(&r, 11, &op, &z1);
        let y2 = realize_one(&r, 11, &op, &z2);
        let rhs: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| alpha * a + b).collect();
        let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        let scale = norm(&lhs).max(alpha.abs() * norm(&y1) + norm(&y2));
        prop_assert!(norm(&diff) <= 1e-11 * scale, "{} vs {}", norm(&diff), scale);
    }

    #[test]
    fn polynomial_quadrature_matches_dense_evaluation(
        coeffs in prop::collection::vec(-1.0f64..1.0, 1..6),
        extra in 0usize..8,
        z in prop::collection::vec(-1.0f64..1.0, CELLS - 1),
    ) {
        // Beyond the polynomial part the trapezoid error is (ρ(Λ_h)/R)^M ≤ 5^{-M},
        // so M also has to reach that floor.
        let d = coeffs.len() - 1;
        let m = (d + 2).max(20) + extra;
        let op = operator();
        let r = RationalMatrixFunction::scalar(RationalEntry::polynomial(coeffs.clone()).unwrap());
        let got = realize_one(&r, m, &op, &z);
        let lam = op.lambda_dense();
        let n = lam.nrows();
        let mut acc = DMatrix::<f64>::zeros(n, n);
        for &c in coeffs.iter().rev() {
            acc = &acc * &lam + DMatrix::<f64>::identity(n, n) * c;
        }
        let expect = &acc * DVector::from_column_slice(&z);
        let diff: Vec<f64> = got.iter().zip(expect.iter()).map(|(a, b)| a - b).collect();
        let scale = expect.norm().max(acc.norm() * norm(&z) * 1e-3);
        prop_assert!(norm(&diff) <= 1e-10 * scale, "M={m}: {} vs {}", norm(&diff), scale);
    }
}

#[test]
fn eigenvectors_are_scaled_by_scalar_quadrature() {
    let op = operator();
    let modal = op.eigendecompose().unwrap();
    let r = symbol();
    let c = Contour::circle(5.0).unwrap();
    let rule = QuadratureRule::trapezoid(11).unwrap();
    let entry = r.entry(0, 0).clone();
    for k in [0, 3, 10, CELLS - 2] {
        let phi: Vec<f64> = modal.vectors.column(k).iter().copied().collect();
        let got = realize_one(&r, 11, &op, &phi);
        let s = quadrature_scalar(|xi| entry.eval_complex(xi), &c, &rule, modal.eigenvalues[k])
            .unwrap();
        let diff: Vec<f64> = got.iter().zip(&phi).map(|(g, p)| g - s * p).collect();
        assert!(norm(&diff) <= 1e-11 * s.abs(), "k={k}: {}", norm(&diff));
    }
}

#[test]
fn constant_and_identity_symbols() {
    let op = operator();
    let z: Vec<f64> = (0..op.dim()).map(|i| (0.37 * i as f64).cos()).collect();
    let one = RationalMatrixFunction::scalar(RationalEntry::polynomial(vec![1.0]).unwrap());
    let got = realize_one(&one, 16, &op, &z);
    let err: Vec<f64> = got.iter().zip(&z).map(|(a, b)| a - b).collect();
    assert!(norm(&err) <= 1e-8 * norm(&z));
    let ident = RationalMatrixFunction::scalar(RationalEntry::polynomial(vec![0.0, 1.0]).unwrap());
    let got = realize_one(&ident, 16, &op, &z);
    let direct = op.apply_lambda(&z);
    let err: Vec<f64> = got.iter().zip(&direct).map(|(a, b)| a - b).collect();
    assert!(norm(&err) <= 1e-8 * norm(&direct));
}
