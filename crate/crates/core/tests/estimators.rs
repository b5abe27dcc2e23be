use outlier_core::estimators::{mean_estimate, median_estimate};
use outlier_core::harness::generate_batch;
use outlier_core::probability::{empirical_type, in_linf_ball, sample_sequence, stream, Distribution};

#[test]
fn median_survives_heavy_contamination_and_the_mean_does_not() {
    let pi = Distribution::new(vec![0.8, 0.2]).unwrap();
    let mu = Distribution::new(vec![0.2, 0.8]).unwrap();
    // ν(0) = 0.8 − (40/101)·0.6 ≈ 0.562, about 0.24 away from π(0)
    let bias = 40.0 / 101.0 * (pi[0] - mu[0]);
    assert!(bias > 0.2);
    let (mut median_inside, mut mean_outside) = (0, 0);
    for trial in 0..500u64 {
        let batch = generate_batch(&pi, &mu, 101, 40, 500, &mut stream(77, &[trial])).unwrap();
        let types = batch.types();
        median_inside += usize::from(in_linf_ball(&median_estimate(&types).unwrap(), &pi, 0.05).unwrap());
        mean_outside += usize::from(!in_linf_ball(&mean_estimate(&types).unwrap(), &pi, 0.05).unwrap());
    }
    assert!(median_inside >= 495, "{median_inside} of 500");
    assert_eq!(mean_outside, 500);
}

#[test]
fn empirical_types_converge() {
    let d = Distribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    for seed in 0..100u64 {
        let seq = sample_sequence(&d, 100_000, &mut stream(seed, &[5]));
        let ty = empirical_type(&seq, 4).unwrap().to_distribution();
        assert!(ty.linf_distance(&d).unwrap() < 0.01);
    }
}
