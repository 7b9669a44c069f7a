use std::time::Duration;

use poseattr::bench::{bench_fit, bench_predict};
use poseattr_core::data::{generate, SynthSpec};
use poseattr_core::{Dataset, FeatureLayout, Matrix, Model, SolverConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_model(layout: &FeatureLayout, classes: usize, seed: u64) -> Model {
    let mut rng = StdRng::seed_from_u64(seed);
    let w = Matrix::from_fn(layout.skeleton_dim(), classes, |_, _| rng.random_range(-1.0..1.0));
    let u = Matrix::from_fn(layout.object_dim(), classes, |_, _| rng.random_range(-1.0..1.0));
    let names = (0..classes).map(|c| format!("c{c}")).collect();
    Model::new(layout.clone(), w, u, names, SolverConfig::default()).unwrap()
}

fn random_data(layout: &FeatureLayout, classes: usize, n: usize, seed: u64) -> Dataset {
    let mut rng = StdRng::seed_from_u64(seed);
    let t = Matrix::from_fn(layout.skeleton_dim(), n, |_, _| rng.random_range(-1.0..1.0));
    let o = Matrix::from_fn(layout.object_dim(), n, |_, _| rng.random_range(-1.0..1.0));
    let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let names = (0..classes).map(|c| format!("c{c}")).collect();
    Dataset::from_class_indices(layout.clone(), t, o, &labels, names).unwrap()
}

#[test]
fn doubling_classes_costs_between_one_and_four_times() {
    let layout = FeatureLayout::new(vec![3; 15], 11, vec![27]).unwrap();
    let mut ratios = Vec::new();
    for _ in 0..3 {
        let a = bench_predict(&random_model(&layout, 6, 1), &random_data(&layout, 6, 200, 2), Duration::from_millis(300)).unwrap();
        let b = bench_predict(&random_model(&layout, 12, 1), &random_data(&layout, 12, 200, 2), Duration::from_millis(300)).unwrap();
        ratios.push(b.seconds_per_frame / a.seconds_per_frame);
    }
    ratios.sort_by(f64::total_cmp);
    let median = ratios[1];
    assert!((1.0..=4.0).contains(&median), "{ratios:?}");
}

#[test]
fn benchmarks_leave_inputs_untouched() {
    let layout = FeatureLayout::new(vec![2; 3], 1, vec![2]).unwrap();
    let model = random_model(&layout, 3, 4);
    let data = random_data(&layout, 3, 30, 5);
    let (m0, d0) = (model.clone(), data.clone());
    bench_predict(&model, &data, Duration::from_millis(5)).unwrap();
    bench_fit(&data, &SolverConfig::default(), 2).unwrap();
    assert_eq!(model, m0);
    assert_eq!(data.skeleton(), d0.skeleton());
    assert_eq!(data.class_indices(), d0.class_indices());
}

#[test]
fn single_repetition_times_one_fit() {
    let layout = FeatureLayout::new(vec![2; 3], 1, vec![2]).unwrap();
    let data = random_data(&layout, 2, 40, 6);
    let r = bench_fit(&data, &SolverConfig::default(), 1).unwrap();
    assert_eq!(r.repetitions, 1);
    assert_eq!(r.fit_iterations.len(), 1);
    assert!(r.fit_seconds.unwrap() > 0.0);
}

#[test]
fn fit_time_grows_superlinearly_in_skeleton_dimension() {
    let time = |joints: usize| {
        let layout = FeatureLayout::new(vec![3; joints], 1, vec![2]).unwrap();
        let spec = SynthSpec::shared_support(layout, 3, 600, 0, (0, 0), 0.1, 1);
        let data = generate(&spec).unwrap().dataset;
        let config = SolverConfig { max_iters: 10, tol: 1e-300, ..Default::default() };
        let r = bench_fit(&data, &config, 3).unwrap();
        assert!(r.fit_iterations.iter().all(|&i| i == 10));
        r.fit_seconds.unwrap()
    };
    let small = time(30);
    let large = time(60);
    assert!(large / small > 2.0, "d_T 90 -> 180: {small} s -> {large} s");
}
