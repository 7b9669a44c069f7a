//! The seeded planted-support fixture used by the sparsity and ablation
//! checks, and the measurement of how much importance lands on planted
//! blocks.

use poseattr_core::analysis::{ImportanceMetric, ImportanceReport};
use poseattr_core::{FeatureLayout, Model, SynthSpec};
use serde::Serialize;

pub const FIXTURE_SEED: u64 = 20_240_611;

/// Five joints of dimension 3, two objects with a 3-d and a 2-d modality,
/// two classes. Class 0 depends on joint 0 and block `(0, 0)`, class 1 on
/// joint 1 and block `(1, 1)`; the other three joints and two blocks are
/// distractors. Features carry noise of scale 0.1 on top of the clean
/// features that define the labels.
pub fn planted_fixture() -> SynthSpec {
    let layout = FeatureLayout::new(vec![3; 5], 2, vec![3, 2]).expect("fixture layout is valid");
    SynthSpec {
        layout,
        classes: 2,
        instances: 20_000,
        noise_sigma: 0.1,
        planted_joints: vec![vec![0], vec![1]],
        planted_blocks: vec![vec![(0, 0)], vec![(1, 1)]],
        seed: FIXTURE_SEED,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedMass {
    /// Per class: share of joint importance on planted joints.
    pub skeleton: Vec<f64>,
    /// Per class: share of object/modality importance on planted blocks.
    pub attribute: Vec<f64>,
    /// Per class: share of all (joint + block) importance on planted blocks.
    pub combined: Vec<f64>,
}

impl PlantedMass {
    pub fn min_combined(&self) -> f64 {
        self.combined.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Block-norm importance share of the planted support, per class. A block
/// counts as planted when any class plants it: a one-vs-rest score for one
/// class legitimately uses the other classes' evidence.
pub fn planted_mass(model: &Model, spec: &SynthSpec) -> PlantedMass {
    let report = ImportanceReport::from_model(model, ImportanceMetric::BlockNorm);
    let layout = model.layout();
    let modalities = layout.modality_count();
    let mut mass = PlantedMass {
        skeleton: Vec::new(),
        attribute: Vec::new(),
        combined: Vec::new(),
    };
    let share = |planted: f64, total: f64| if total > 0.0 { planted / total } else { 0.0 };
    for c in 0..model.class_count() {
        let (mut jp, mut jt) = (0.0, 0.0);
        for j in 0..layout.joint_count() {
            let v = report.joint_by_class[(j, c)];
            jt += v;
            if spec.is_planted_joint(j) {
                jp += v;
            }
        }
        let (mut bp, mut bt) = (0.0, 0.0);
        for b in 0..layout.attribute_block_count() {
            let v = report.object_modality_by_class[(b, c)];
            bt += v;
            if spec.is_planted_block(b / modalities, b % modalities) {
                bp += v;
            }
        }
        mass.skeleton.push(share(jp, jt));
        mass.attribute.push(share(bp, bt));
        mass.combined.push(share(jp + bp, jt + bt));
    }
    mass
}
