//! Block structure of the skeleton and object feature vectors.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// Declares how the skeleton vector splits into per-joint blocks and how the
/// object vector splits into per-object, per-modality blocks.
///
/// Object features are laid out object-major: all modalities of object 0,
/// then all modalities of object 1, and so on. Every object shares the same
/// modality dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureLayout {
    joint_dims: Vec<usize>,
    object_count: usize,
    modality_dims: Vec<usize>,
}

impl FeatureLayout {
    pub fn new(joint_dims: Vec<usize>, object_count: usize, modality_dims: Vec<usize>) -> Result<Self> {
        if joint_dims.is_empty() {
            return Err(Error::InvalidLayout("at least one joint is required".into()));
        }
        if object_count == 0 {
            return Err(Error::InvalidLayout("at least one object is required".into()));
        }
        if modality_dims.is_empty() {
            return Err(Error::InvalidLayout(
                "at least one attribute modality is required".into(),
            ));
        }
        if let Some(j) = joint_dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidLayout(format!("joint {j} has dimension 0")));
        }
        if let Some(m) = modality_dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidLayout(format!("modality {m} has dimension 0")));
        }
        Ok(FeatureLayout {
            joint_dims,
            object_count,
            modality_dims,
        })
    }

    /// `joints` joints of equal dimension, `objects` objects with the given
    /// modality dims.
    pub fn uniform(joints: usize, joint_dim: usize, objects: usize, modality_dims: Vec<usize>) -> Result<Self> {
        FeatureLayout::new(alloc::vec![joint_dim; joints], objects, modality_dims)
    }

    /// Same layout with an extra constant-feature joint of dimension 1
    /// appended, used as an intercept.
    pub fn with_bias_joint(&self) -> Self {
        let mut joint_dims = self.joint_dims.clone();
        joint_dims.push(1);
        FeatureLayout {
            joint_dims,
            ..self.clone()
        }
    }

    pub fn joint_dims(&self) -> &[usize] {
        &self.joint_dims
    }

    pub fn modality_dims(&self) -> &[usize] {
        &self.modality_dims
    }

    pub fn joint_count(&self) -> usize {
        self.joint_dims.len()
    }

    pub fn object_count(&self) -> usize {
        self.object_count
    }

    pub fn modality_count(&self) -> usize {
        self.modality_dims.len()
    }

    /// Number of object/modality blocks, `O * M`.
    pub fn attribute_block_count(&self) -> usize {
        self.object_count * self.modality_dims.len()
    }

    /// `d_T`.
    pub fn skeleton_dim(&self) -> usize {
        self.joint_dims.iter().sum()
    }

    /// Per-object attribute dimension, `sum_m d_O^m`.
    pub fn object_stride(&self) -> usize {
        self.modality_dims.iter().sum()
    }

    /// `d_O`.
    pub fn object_dim(&self) -> usize {
        self.object_count * self.object_stride()
    }

    /// Row ranges of the joint blocks, in joint order.
    pub fn joint_ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        block_ranges(&self.joint_dims)
    }

    /// Row range of joint `j`.
    pub fn joint_range(&self, j: usize) -> Range<usize> {
        let start: usize = self.joint_dims[..j].iter().sum();
        start..start + self.joint_dims[j]
    }

    /// Row ranges of every object/modality block, object-major.
    pub fn attribute_ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        let stride = self.object_stride();
        (0..self.object_count).flat_map(move |o| {
            block_ranges(&self.modality_dims).map(move |r| o * stride + r.start..o * stride + r.end)
        })
    }

    /// Row range of modality `m` of object `o`.
    pub fn attribute_range(&self, object: usize, modality: usize) -> Range<usize> {
        let start = object * self.object_stride() + self.modality_dims[..modality].iter().sum::<usize>();
        start..start + self.modality_dims[modality]
    }

    /// Flat index of the (object, modality) block in [`Self::attribute_ranges`] order.
    pub fn attribute_block_index(&self, object: usize, modality: usize) -> usize {
        object * self.modality_dims.len() + modality
    }

    /// Layout with joint blocks reordered so that new joint `k` is old joint
    /// `perm[k]`.
    pub fn permute_joints(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.joint_count())?;
        FeatureLayout::new(
            perm.iter().map(|&p| self.joint_dims[p]).collect(),
            self.object_count,
            self.modality_dims.clone(),
        )
    }
}

fn block_ranges(dims: &[usize]) -> impl Iterator<Item = Range<usize>> + '_ {
    dims.iter().scan(0usize, |start, &d| {
        let r = *start..*start + d;
        *start += d;
        Some(r)
    })
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = alloc::vec![false; n];
    if perm.len() != n {
        return Err(Error::Precondition(format!(
            "permutation has length {} but {} blocks exist",
            perm.len(),
            n
        )));
    }
    for &p in perm {
        if p >= n || core::mem::replace(&mut seen[p], true) {
            return Err(Error::Precondition(format!("{perm:?} is not a permutation")));
        }
    }
    Ok(())
}
