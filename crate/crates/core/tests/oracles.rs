mod common;

use common::*;
use poseattr_core::solver::{
    build_d_a, build_d_s, stationarity_residual, update_u_c, update_w_c, AlternatingSolver,
};
use poseattr_core::{
    attribute_norm, fit, loss, objective, skeletal_norm, Dataset, FeatureLayout, Matrix, Model,
    SolverConfig,
};

#[test]
fn skeletal_norm_matches_double_loop() {
    let mut r = rng(1);
    let layout = FeatureLayout::new(vec![2, 1, 3], 1, vec![1]).unwrap();
    let w = random_matrix(&mut r, 6, 3);
    let expected = group_norm_oracle(&w, &[2, 1, 3]);
    assert!((skeletal_norm(&w, &layout).unwrap() - expected).abs() < 1e-14);
}

#[test]
fn attribute_norm_matches_triple_loop() {
    let mut r = rng(2);
    let layout = FeatureLayout::new(vec![1], 3, vec![2, 1, 4]).unwrap();
    let u = random_matrix(&mut r, layout.object_dim(), 4);
    // object -> modality -> entries, written without the layout helpers
    let mut expected = 0.0;
    for c in 0..4 {
        for o in 0..3 {
            let mut start = o * 7;
            for d in [2, 1, 4] {
                expected += (start..start + d).map(|i| u[(i, c)] * u[(i, c)]).sum::<f64>().sqrt();
                start += d;
            }
        }
    }
    assert!((attribute_norm(&u, &layout).unwrap() - expected).abs() < 1e-13);
}

fn brute_force_loss(ds: &Dataset, w: &Matrix, u: &Matrix) -> f64 {
    let (t, o, y) = (ds.skeleton(), ds.objects(), ds.labels());
    let mut total = 0.0;
    for i in 0..ds.len() {
        for c in 0..ds.class_count() {
            let mut s = -y[(i, c)];
            for k in 0..t.rows() {
                s += t[(k, i)] * w[(k, c)];
            }
            for k in 0..o.rows() {
                s += o[(k, i)] * u[(k, c)];
            }
            total += s * s;
        }
    }
    total
}

#[test]
fn loss_and_objective_match_brute_force() {
    let mut r = rng(3);
    let layout = random_layout(&mut r, 4, 2, 2, 3);
    let ds = random_dataset(&mut r, layout.clone(), 15, 3);
    let w = random_matrix(&mut r, layout.skeleton_dim(), 3);
    let u = random_matrix(&mut r, layout.object_dim(), 3);
    let l = brute_force_loss(&ds, &w, &u);
    assert!((loss(&ds, &w, &u).unwrap() - l).abs() < 1e-12 * l.max(1.0));

    let s = group_norm_oracle(&w, layout.joint_dims());
    let a = group_norm_oracle(&u, &attribute_block_dims(&layout));
    let expected = l + 0.1 * s + 0.1 * a;
    assert!((objective(&ds, &w, &u, 0.1, 0.1).unwrap() - expected).abs() < 1e-12 * expected);
    assert_eq!(objective(&ds, &w, &u, 0.0, 0.0).unwrap(), loss(&ds, &w, &u).unwrap());
}

#[test]
fn zero_weights_loss_is_instance_count() {
    let mut r = rng(4);
    let layout = random_layout(&mut r, 3, 1, 2, 2);
    let ds = random_dataset(&mut r, layout.clone(), 23, 4);
    let w = Matrix::zeros(layout.skeleton_dim(), 4);
    let u = Matrix::zeros(layout.object_dim(), 4);
    assert_eq!(loss(&ds, &w, &u).unwrap(), 23.0);
    assert_eq!(objective(&ds, &w, &u, 0.7, 0.3).unwrap(), 23.0);
}

#[test]
fn predict_matches_per_class_dot_products() {
    let mut r = rng(5);
    let layout = random_layout(&mut r, 5, 2, 3, 3);
    let c = 4;
    let w = random_matrix(&mut r, layout.skeleton_dim(), c);
    let u = random_matrix(&mut r, layout.object_dim(), c);
    let model = Model::new(layout.clone(), w.clone(), u.clone(), class_names(c), SolverConfig::default()).unwrap();
    for _ in 0..50 {
        let t = random_vec(&mut r, layout.skeleton_dim());
        let o = random_vec(&mut r, layout.object_dim());
        let scores: Vec<f64> = (0..c)
            .map(|k| {
                (0..t.len()).map(|i| t[i] * w[(i, k)]).sum::<f64>()
                    + (0..o.len()).map(|i| o[i] * u[(i, k)]).sum::<f64>()
            })
            .collect();
        let best = (0..c).fold(0, |b, k| if scores[k] > scores[b] { k } else { b });
        let p = model.predict(&t, &o).unwrap();
        assert_eq!(p.class, best);
        for (got, want) in p.scores.iter().zip(&scores) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}

#[test]
fn predict_batch_matches_loop_of_predict() {
    let mut r = rng(6);
    let layout = random_layout(&mut r, 4, 2, 2, 2);
    let ds = random_dataset(&mut r, layout.clone(), 40, 3);
    let model = Model::new(
        layout.clone(),
        random_matrix(&mut r, layout.skeleton_dim(), 3),
        random_matrix(&mut r, layout.object_dim(), 3),
        class_names(3),
        SolverConfig::default(),
    )
    .unwrap();
    let batch = model.predict_batch(&ds).unwrap();
    let mut hits = 0;
    for i in 0..ds.len() {
        let p = model.predict(&ds.skeleton_instance(i), &ds.object_instance(i)).unwrap();
        assert_eq!(batch.classes[i], p.class);
        hits += usize::from(p.class == ds.class_indices()[i]);
    }
    assert_eq!(batch.accuracy, hits as f64 / 40.0);
}

#[test]
fn reweighting_matches_block_norm_oracle() {
    let mut r = rng(7);
    let layout = random_layout(&mut r, 5, 2, 3, 4);
    let w_c = random_vec(&mut r, layout.skeleton_dim());
    let d = build_d_s(&w_c, &layout, 1e-8).unwrap();
    let mut row = 0;
    for &dim in layout.joint_dims() {
        let n = w_c[row..row + dim].iter().map(|v| v * v).sum::<f64>().sqrt();
        for k in 0..dim {
            assert!((d[row + k] - 1.0 / (2.0 * n)).abs() <= 1e-12 * d[row + k]);
        }
        row += dim;
    }

    let u_c = random_vec(&mut r, layout.object_dim());
    let d = build_d_a(&u_c, &layout, 1e-8).unwrap();
    let mut row = 0;
    for &dim in &attribute_block_dims(&layout) {
        let n = u_c[row..row + dim].iter().map(|v| v * v).sum::<f64>().sqrt();
        for k in 0..dim {
            assert!((d[row + k] - 1.0 / (2.0 * n)).abs() <= 1e-12 * d[row + k]);
        }
        row += dim;
    }
}

fn normal_equation_oracle(a: &Matrix, y: &[f64]) -> Vec<f64> {
    let a = to_na(a);
    let y = nalgebra::DVector::from_column_slice(y);
    let x = (&a * a.transpose()).lu().solve(&(&a * y)).unwrap();
    x.iter().copied().collect()
}

#[test]
fn unregularized_updates_match_dense_least_squares() {
    let mut r = rng(8);
    let layout = random_layout(&mut r, 4, 2, 2, 3);
    let ds = random_dataset(&mut r, layout.clone(), 60, 3);
    let y = ds.label_column(1);

    let w = update_w_c(&ds, &vec![0.0; layout.object_dim()], &y, &vec![1.0; layout.skeleton_dim()], 0.0).unwrap();
    let expected = normal_equation_oracle(ds.skeleton(), &y);
    for (a, b) in w.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{a} vs {b}");
    }

    let u = update_u_c(&ds, &vec![0.0; layout.skeleton_dim()], &y, &vec![1.0; layout.object_dim()], 0.0).unwrap();
    let expected = normal_equation_oracle(ds.objects(), &y);
    for (a, b) in u.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{a} vs {b}");
    }
}

#[test]
fn heavy_regularization_shrinks_update() {
    let mut r = rng(9);
    let layout = random_layout(&mut r, 3, 1, 2, 2);
    let ds = random_dataset(&mut r, layout.clone(), 50, 2);
    let y = ds.label_column(0);
    let zero_u = vec![0.0; layout.object_dim()];
    let w_ls = update_w_c(&ds, &zero_u, &y, &vec![1.0; layout.skeleton_dim()], 0.0).unwrap();
    let w_c = random_vec(&mut r, layout.skeleton_dim());
    let d_s = build_d_s(&w_c, &layout, 1e-8).unwrap();
    let w_big = update_w_c(&ds, &zero_u, &y, &d_s, 1e8).unwrap();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(norm(&w_big) < 1e-4 * norm(&w_ls));
}

#[test]
fn object_update_mirrors_skeleton_update() {
    let mut r = rng(10);
    let layout = FeatureLayout::new(vec![2, 3], 1, vec![4]).unwrap();
    let ds = random_dataset(&mut r, layout.clone(), 30, 3);
    let swapped_layout = FeatureLayout::new(vec![4], 1, vec![2, 3]).unwrap();
    let swapped = Dataset::new(
        swapped_layout.clone(),
        ds.objects().clone(),
        ds.skeleton().clone(),
        ds.labels().clone(),
        class_names(3),
    )
    .unwrap();
    let y = ds.label_column(2);
    let w_c = random_vec(&mut r, 5);
    let d = random_vec(&mut r, 4).iter().map(|v| v.abs() + 0.1).collect::<Vec<_>>();
    let from_u = update_u_c(&ds, &w_c, &y, &d, 0.3).unwrap();
    let from_w = update_w_c(&swapped, &w_c, &y, &d, 0.3).unwrap();
    assert_eq!(from_u, from_w);
}

#[test]
fn zero_lambda_fit_reaches_stacked_least_squares() {
    let mut r = rng(11);
    let layout = random_layout(&mut r, 3, 1, 2, 2);
    let ds = random_dataset(&mut r, layout, 40, 3);
    let cfg = SolverConfig { lambda1: 0.0, lambda2: 0.0, tol: 1e-14, max_iters: 2000, ..Default::default() };
    let (model, _) = fit(&ds, &cfg).unwrap();
    let got = loss(&ds, model.skeleton_weights(), model.object_weights()).unwrap();
    let oracle = stacked_least_squares_loss(&ds);
    assert!(got <= oracle + 1e-6, "{got} vs {oracle}");
    assert!((got - oracle).abs() <= 1e-6 * oracle);
}

#[test]
fn exact_linear_labels_converge_monotonically() {
    // Joint 0 carries the one-hot label itself, so Y = T^T W exactly for a
    // W supported on joint 0.
    let mut r = rng(12);
    let classes = 3;
    let layout = FeatureLayout::new(vec![classes, 2, 2], 1, vec![2]).unwrap();
    let n = 45;
    let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let mut t = random_matrix(&mut r, layout.skeleton_dim(), n);
    for i in 0..n {
        for k in 0..classes {
            t[(k, i)] = if labels[i] == k { 1.0 } else { 0.0 };
        }
    }
    let o = random_matrix(&mut r, layout.object_dim(), n);
    let ds = Dataset::from_class_indices(layout, t, o, &labels, class_names(classes)).unwrap();
    let (_, report) = fit(&ds, &SolverConfig::default()).unwrap();
    assert!(report.is_monotone(1e-9), "{:?}", report.objective_trace);
    assert!(report.converged);
    assert!(report.iterations_run <= 100);
}

#[test]
fn stationarity_at_exact_square_solution() {
    // d_T + d_O = N: the stacked system interpolates Y exactly.
    let mut r = rng(13);
    let layout = FeatureLayout::new(vec![2, 2], 1, vec![3]).unwrap();
    let ds = random_dataset(&mut r, layout.clone(), 7, 2);
    let t = to_na(ds.skeleton());
    let o = to_na(ds.objects());
    let z = nalgebra::DMatrix::from_fn(7, 7, |rr, c| if rr < 4 { t[(rr, c)] } else { o[(rr - 4, c)] });
    let v = z.transpose().lu().solve(&to_na(ds.labels())).unwrap();
    let w = from_na(&v.rows(0, 4).into_owned());
    let u = from_na(&v.rows(4, 3).into_owned());
    let model = Model::new(layout, w, u, class_names(2), SolverConfig::default()).unwrap();
    let res = stationarity_residual(&ds, &model, 0.0, 0.0, 1e-8).unwrap();
    assert!(res < 1e-8, "{res}");
}

#[test]
fn random_weights_are_not_stationary() {
    let mut r = rng(14);
    let layout = random_layout(&mut r, 3, 2, 2, 2);
    let ds = random_dataset(&mut r, layout.clone(), 30, 3);
    let model = Model::new(
        layout.clone(),
        random_matrix(&mut r, layout.skeleton_dim(), 3),
        random_matrix(&mut r, layout.object_dim(), 3),
        class_names(3),
        SolverConfig::default(),
    )
    .unwrap();
    assert!(stationarity_residual(&ds, &model, 0.1, 0.1, 1e-8).unwrap() > 0.0);
}

#[test]
fn tight_fit_is_stationary() {
    let mut r = rng(15);
    let layout = random_layout(&mut r, 4, 2, 2, 3);
    let ds = random_dataset(&mut r, layout, 80, 3);
    let cfg = SolverConfig { tol: 1e-10, max_iters: 5000, ..Default::default() };
    let (model, report) = fit(&ds, &cfg).unwrap();
    assert!(report.converged);
    let res = stationarity_residual(&ds, &model, cfg.lambda1, cfg.lambda2, cfg.epsilon).unwrap();
    assert!(res < 1e-4, "{res}");
}

#[test]
fn half_steps_match_update_functions() {
    // The solver's cached normal equations agree with the standalone updates.
    let mut r = rng(16);
    let layout = random_layout(&mut r, 3, 2, 2, 2);
    let ds = random_dataset(&mut r, layout.clone(), 35, 3);
    let cfg = SolverConfig::default();
    let mut solver = AlternatingSolver::new(&ds, cfg.clone()).unwrap();
    let u0 = solver.object_weights().clone();
    let w0 = solver.skeleton_weights().clone();
    solver.reweight();
    solver.update_skeleton_weights().unwrap();
    for c in 0..3 {
        let d_s = build_d_s(&w0.column(c), &layout, cfg.epsilon).unwrap();
        let expected = update_w_c(&ds, &u0.column(c), &ds.label_column(c), &d_s, cfg.lambda1).unwrap();
        for (a, b) in solver.skeleton_weights().column(c).iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
        }
    }
}
