use mouldkit::sequence::sample_subject_distance;

#[test]
fn subject_distance_follows_the_placement_distribution() {
    let draws: Vec<f64> = (0..10_000u64).map(sample_subject_distance).collect();
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let sd = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((mean - 8.0).abs() <= 0.05, "mean {mean}");
    assert!((sd - 1.0).abs() <= 0.05, "sd {sd}");
}
