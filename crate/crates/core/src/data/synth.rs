use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Dataset;
use crate::error::{Error, Result};
use crate::layout::FeatureLayout;
use crate::matrix::Matrix;
use crate::model::classify_columns;

/// Synthetic problem with a planted discriminative support.
///
/// Class `c` gets nonzero ground-truth weights only on the joints in
/// `planted_joints[c]` and the `(object, modality)` blocks in
/// `planted_blocks[c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub layout: FeatureLayout,
    pub classes: usize,
    pub instances: usize,
    pub noise_sigma: f64,
    pub planted_joints: Vec<Vec<usize>>,
    pub planted_blocks: Vec<Vec<(usize, usize)>>,
    pub seed: u64,
}

impl SynthSpec {
    /// Same planted joint and object/modality block for every class.
    pub fn shared_support(
        layout: FeatureLayout,
        classes: usize,
        instances: usize,
        joint: usize,
        block: (usize, usize),
        noise_sigma: f64,
        seed: u64,
    ) -> Self {
        SynthSpec {
            layout,
            classes,
            instances,
            noise_sigma,
            planted_joints: alloc::vec![alloc::vec![joint]; classes],
            planted_blocks: alloc::vec![alloc::vec![block]; classes],
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.classes < 2 {
            return bad(format!("need at least 2 classes, got {}", self.classes));
        }
        if self.instances == 0 {
            return bad("need at least one instance".into());
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise_sigma must be >= 0, got {}", self.noise_sigma));
        }
        if self.planted_joints.len() != self.classes || self.planted_blocks.len() != self.classes {
            return bad(format!(
                "planted sets must list one entry per class ({}), got {} joint sets and {} block sets",
                self.classes,
                self.planted_joints.len(),
                self.planted_blocks.len()
            ));
        }
        let joints = self.layout.joint_count();
        let (objects, modalities) = (self.layout.object_count(), self.layout.modality_count());
        for c in 0..self.classes {
            if self.planted_joints[c].is_empty() && self.planted_blocks[c].is_empty() {
                return bad(format!("class {c} has an empty planted support"));
            }
            if let Some(j) = self.planted_joints[c].iter().find(|&&j| j >= joints) {
                return bad(format!("class {c}: planted joint {j} out of range ({joints} joints)"));
            }
            if let Some((o, m)) = self.planted_blocks[c]
                .iter()
                .find(|&&(o, m)| o >= objects || m >= modalities)
            {
                return bad(format!(
                    "class {c}: planted block ({o}, {m}) out of range ({objects} objects x {modalities} modalities)"
                ));
            }
        }
        Ok(())
    }

    /// Whether joint `j` is planted for any class.
    pub fn is_planted_joint(&self, j: usize) -> bool {
        self.planted_joints.iter().any(|s| s.contains(&j))
    }

    /// Whether object/modality block `(o, m)` is planted for any class.
    pub fn is_planted_block(&self, o: usize, m: usize) -> bool {
        self.planted_blocks.iter().any(|s| s.contains(&(o, m)))
    }
}

/// A generated dataset with the weights that produced its labels.
#[derive(Debug, Clone)]
pub struct GeneratedData {
    pub dataset: Dataset,
    /// Ground-truth `d_T x C` weights, zero outside planted joints.
    pub skeleton_weights: Matrix,
    /// Ground-truth `d_O x C` weights, zero outside planted blocks.
    pub object_weights: Matrix,
}

/// Draws a dataset whose labels are the argmax of planted linear scores on
/// the noise-free features; Gaussian noise of scale `noise_sigma` is added to
/// the features afterwards.
pub fn generate(spec: &SynthSpec) -> Result<GeneratedData> {
    spec.validate()?;
    let layout = &spec.layout;
    let (d_t, d_o, c, n) = (layout.skeleton_dim(), layout.object_dim(), spec.classes, spec.instances);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut w = Matrix::zeros(d_t, c);
    let mut u = Matrix::zeros(d_o, c);
    for class in 0..c {
        for &j in &spec.planted_joints[class] {
            for r in layout.joint_range(j) {
                w[(r, class)] = rng.sample(StandardNormal);
            }
        }
        for &(o, m) in &spec.planted_blocks[class] {
            for r in layout.attribute_range(o, m) {
                u[(r, class)] = rng.sample(StandardNormal);
            }
        }
    }

    let mut t = Matrix::zeros(d_t, n);
    let mut obj = Matrix::zeros(d_o, n);
    for i in 0..n {
        for r in 0..d_t {
            t[(r, i)] = rng.sample(StandardNormal);
        }
        for r in 0..d_o {
            obj[(r, i)] = rng.sample(StandardNormal);
        }
    }

    let labels = classify_columns(&w, &u, &t, &obj);

    if spec.noise_sigma > 0.0 {
        for v in t.as_mut_slice().iter_mut().chain(obj.as_mut_slice()) {
            let e: f64 = rng.sample(StandardNormal);
            *v += spec.noise_sigma * e;
        }
    }

    let class_names = (0..c).map(|k| format!("class{k}")).collect();
    let dataset = Dataset::from_class_indices(layout.clone(), t, obj, &labels, class_names)?;
    Ok(GeneratedData {
        dataset,
        skeleton_weights: w,
        object_weights: u,
    })
}
