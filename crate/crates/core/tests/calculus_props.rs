use core::f64::consts::PI;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semidec_core::approx::horner;
use semidec_core::band::BandMatrix;
use semidec_core::discrete::{laplacian_1d_dirichlet, BandedOperator, ModalData};

const SIZES: [usize; 3] = [10, 50, 200];
const SEEDS: u64 = 20;
const TOL: f64 = 1e-10;

fn random_tridiagonal(n: usize, rng: &mut ChaCha8Rng) -> BandedOperator {
    let mut m = BandMatrix::zeros(n, 1, 1);
    for i in 0..n {
        m.set(i, i, rng.gen_range(-1.0..1.0));
        if i + 1 < n {
            let off = rng.gen_range(-0.5..0.5);
            m.set(i, i + 1, off);
            m.set(i + 1, i, off);
        }
    }
    BandedOperator::custom(m, 1.0 / n as f64, false).unwrap()
}

fn random_poly(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d = rng.gen_range(1..5);
    (0..=d).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// `f(Λ)` by Horner on the dense matrix, independent of any eigendecomposition.
fn dense_poly(c: &[f64], lam: &DMatrix<f64>) -> DMatrix<f64> {
    let n = lam.nrows();
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for &v in c.iter().rev() {
        acc = &acc * lam + DMatrix::<f64>::identity(n, n) * v;
    }
    acc
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().max()
}

fn max_on_spectrum(f: impl Fn(f64) -> f64, modal: &ModalData) -> f64 {
    modal
        .eigenvalues
        .iter()
        .map(|&l| f(l).abs())
        .fold(0.0, f64::max)
}

fn for_each_case(mut check: impl FnMut(usize, &BandedOperator, &ModalData, &mut ChaCha8Rng)) {
    for &n in &SIZES {
        for seed in 0..SEEDS {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 1000 + n as u64);
            let op = random_tridiagonal(n, &mut rng);
            let modal = op.eigendecompose().unwrap();
            assert!(modal.symmetric);
            check(n, &op, &modal, &mut rng);
        }
    }
}

#[test]
fn product_rule() {
    for_each_case(|n, _, modal, rng| {
        let (f, g) = (random_poly(rng), random_poly(rng));
        let fg = modal
            .function_matrix(|x| horner(&f, x) * horner(&g, x))
            .unwrap();
        let prod = modal.function_matrix(|x| horner(&f, x)).unwrap()
            * modal.function_matrix(|x| horner(&g, x)).unwrap();
        let scale = max_on_spectrum(|x| horner(&f, x) * horner(&g, x), modal).max(1.0);
        let err = spectral_norm(&(fg - prod));
        assert!(err <= TOL * scale, "n={n}: {err:e}");
    });
}

#[test]
fn spectral_norm_is_sup_on_spectrum() {
    for_each_case(|n, op, modal, rng| {
        let f = random_poly(rng);
        let norm = spectral_norm(&dense_poly(&f, &op.lambda_dense()));
        let sup = max_on_spectrum(|x| horner(&f, x), modal);
        assert!(
            (norm - sup).abs() <= TOL * sup.max(1.0),
            "n={n}: {norm} vs {sup}"
        );
    });
}

#[test]
fn nonnegative_symbol_gives_psd_matrix() {
    for_each_case(|n, op, _, rng| {
        // (λ − c)² (λ − d)² + ε ≥ 0 everywhere.
        let c: f64 = rng.gen_range(-1.0..1.0);
        let d: f64 = rng.gen_range(-1.0..1.0);
        let eps: f64 = rng.gen_range(0.0..0.01);
        let lin = [c * d, -(c + d), 1.0];
        let quartic = [
            lin[0] * lin[0] + eps,
            2.0 * lin[0] * lin[1],
            lin[1] * lin[1] + 2.0 * lin[0] * lin[2],
            2.0 * lin[1] * lin[2],
            lin[2] * lin[2],
        ];
        let m = dense_poly(&quartic, &op.lambda_dense());
        let min = SymmetricEigen::new(&m + m.transpose()).eigenvalues.min() * 0.5;
        assert!(min >= -TOL, "n={n}: {min:e}");
    });
}

#[test]
fn operator_error_equals_sup_of_symbol_error() {
    for_each_case(|n, op, modal, rng| {
        let f = random_poly(rng);
        let g: Vec<f64> = f.iter().map(|c| c + rng.gen_range(-1e-3..1e-3)).collect();
        let lam = op.lambda_dense();
        let gap = spectral_norm(&(dense_poly(&f, &lam) - dense_poly(&g, &lam)));
        let sup = max_on_spectrum(|x| horner(&f, x) - horner(&g, x), modal);
        assert!(
            (gap - sup).abs() <= TOL * sup.max(1.0),
            "n={n}: {gap} vs {sup}"
        );
    });
}

#[test]
fn laplacian_ground_state_converges_quadratically() {
    // Λ_h = A_h⁻¹, so the smallest eigenvalue of A_h is 1/max λ.
    let errs: Vec<f64> = [16, 32, 64, 128]
        .iter()
        .map(|&cells| {
            let modal = laplacian_1d_dirichlet(cells, PI)
                .unwrap()
                .eigendecompose()
                .unwrap();
            let top = modal.eigenvalues.iter().copied().fold(0.0, f64::max);
            (1.0 / top - 1.0).abs()
        })
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() <= 0.2, "{errs:?}");
    }
}
