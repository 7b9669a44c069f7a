#![allow(dead_code)]

use poseattr_core::{Dataset, FeatureLayout, Matrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Uniform entries in [-1, 1).
pub fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_vec(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn class_names(c: usize) -> Vec<String> {
    (0..c).map(|k| format!("class{k}")).collect()
}

/// Random dataset with uniformly drawn features and labels; every class is
/// guaranteed at least one instance when `n >= classes`.
pub fn random_dataset(rng: &mut StdRng, layout: FeatureLayout, n: usize, classes: usize) -> Dataset {
    let t = random_matrix(rng, layout.skeleton_dim(), n);
    let o = random_matrix(rng, layout.object_dim(), n);
    let labels: Vec<usize> = (0..n)
        .map(|i| if i < classes { i } else { rng.random_range(0..classes) })
        .collect();
    Dataset::from_class_indices(layout, t, o, &labels, class_names(classes)).unwrap()
}

/// Random layout with the given block counts and block dims in 1..=max_dim.
pub fn random_layout(rng: &mut StdRng, joints: usize, objects: usize, modalities: usize, max_dim: usize) -> FeatureLayout {
    let joint_dims = (0..joints).map(|_| rng.random_range(1..=max_dim)).collect();
    let modality_dims = (0..modalities).map(|_| rng.random_range(1..=max_dim)).collect();
    FeatureLayout::new(joint_dims, objects, modality_dims).unwrap()
}

pub fn to_na(m: &Matrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

pub fn from_na(m: &nalgebra::DMatrix<f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// Independent joint least squares on the stacked design `[T; O]`:
/// solves `(Z Z^T) V = Z Y` with an LU factorization and returns the loss.
pub fn stacked_least_squares_loss(ds: &Dataset) -> f64 {
    let t = to_na(ds.skeleton());
    let o = to_na(ds.objects());
    let y = to_na(ds.labels());
    let z = nalgebra::DMatrix::from_fn(t.nrows() + o.nrows(), t.ncols(), |r, c| {
        if r < t.nrows() {
            t[(r, c)]
        } else {
            o[(r - t.nrows(), c)]
        }
    });
    let v = (&z * z.transpose()).lu().solve(&(&z * &y)).expect("stacked design is nonsingular");
    (z.transpose() * v - y).norm_squared()
}

/// `sum_c sum_blocks ||block||` by explicit index arithmetic over block sizes.
pub fn group_norm_oracle(m: &Matrix, block_dims: &[usize]) -> f64 {
    let mut total = 0.0;
    for c in 0..m.cols() {
        let mut row = 0;
        for &d in block_dims {
            let mut sq = 0.0;
            for k in 0..d {
                sq += m[(row + k, c)] * m[(row + k, c)];
            }
            total += sq.sqrt();
            row += d;
        }
    }
    total
}

/// Attribute block dims in object-major order.
pub fn attribute_block_dims(layout: &FeatureLayout) -> Vec<usize> {
    (0..layout.object_count())
        .flat_map(|_| layout.modality_dims().iter().copied())
        .collect()
}
