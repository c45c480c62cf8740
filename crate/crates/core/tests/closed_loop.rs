use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semidec_core::contour::{Contour, PreparedRealization, QuadratureRule};
use semidec_core::harness::{
    build_example, closed_loop_energy, galerkin_gain, ExampleId, ExampleParams,
};

#[test]
fn realized_feedback_never_increases_energy() {
    let ex = build_example(ExampleId::Heat1D, ExampleParams { mesh: 64 }).unwrap();
    let gain = galerkin_gain(ExampleId::Heat1D, 10).unwrap();
    let contour = Contour::circle(5.0).unwrap();
    let rule = QuadratureRule::trapezoid(11).unwrap();
    let feedback =
        PreparedRealization::new(&gain, &contour, &rule, &ex.operator, &ex.interval).unwrap();
    let (dt, steps) = (1e-3, 1000);
    for seed in 0..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z0: Vec<f64> = (0..ex.operator.dim())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let energy = closed_loop_energy(&ex.operator, &feedback, &z0, dt, steps).unwrap();
        for (n, w) in energy.windows(2).enumerate() {
            assert!(
                w[1] <= w[0] * (1.0 + 1e-12),
                "seed {seed}, step {n}: {} -> {}",
                w[0],
                w[1]
            );
        }
        assert!(energy[steps] < energy[0]);
    }
}
