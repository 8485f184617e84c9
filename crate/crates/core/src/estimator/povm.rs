//! Covariant POVMs: one set of elements per sector, each element tagged with
//! the estimate it reports.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::states::min_eigenvalue;

/// Tolerance for completeness and positivity of POVM elements.
pub const POVM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PovmElement {
    pub mu: f64,
    pub element: DMatrix<f64>,
}

/// Two rank-one projectors; `projectors[i]` reports `estimates[i]`.
///
/// The optimal pair uses `estimates = [ν, π - ν]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairEstimate {
    pub estimates: [f64; 2],
    pub projectors: [DVector<f64>; 2],
}

impl PairEstimate {
    pub fn nu(&self) -> f64 {
        self.estimates[0]
    }

    /// The same measurement with the two outcomes listed in the other order.
    pub fn swapped(&self) -> Self {
        let [a, b] = self.estimates;
        let [u, v] = self.projectors.clone();
        Self {
            estimates: [b, a],
            projectors: [v, u],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BlockPovm {
    /// A single outcome: the identity on the sector.
    Single {
        mu: f64,
    },
    Pair(PairEstimate),
    /// Arbitrary elements, e.g. randomly generated competitors.
    General(Vec<PovmElement>),
}

impl BlockPovm {
    pub fn elements(&self, dim: usize) -> Vec<PovmElement> {
        match self {
            BlockPovm::Single { mu } => {
                vec![PovmElement {
                    mu: *mu,
                    element: DMatrix::identity(dim, dim),
                }]
            }
            BlockPovm::Pair(p) => p
                .estimates
                .iter()
                .zip(&p.projectors)
                .map(|(&mu, v)| PovmElement {
                    mu,
                    element: v * v.transpose(),
                })
                .collect(),
            BlockPovm::General(els) => els.clone(),
        }
    }
}

/// A measurement that is block diagonal over the signal's sectors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PovmSpec {
    blocks: BTreeMap<HalfInt, BlockPovm>,
}

impl PovmSpec {
    pub fn new() -> Self {
        Self::default()
    }

    /// The same single estimate on every listed sector.
    pub fn uniform(labels: impl IntoIterator<Item = HalfInt>, mu: f64) -> Self {
        Self {
            blocks: labels
                .into_iter()
                .map(|l| (l, BlockPovm::Single { mu }))
                .collect(),
        }
    }

    pub fn insert(&mut self, label: HalfInt, povm: BlockPovm) {
        self.blocks.insert(label, povm);
    }

    pub fn blocks(&self) -> &BTreeMap<HalfInt, BlockPovm> {
        &self.blocks
    }

    pub fn block(&self, label: HalfInt) -> Option<&BlockPovm> {
        self.blocks.get(&label)
    }

    /// Checks that the sectors match `dims`, every element is positive
    /// semidefinite, the elements sum to the identity, and estimates lie in
    /// `[0, π]`.
    pub fn validate(&self, dims: &BTreeMap<HalfInt, usize>) -> Result<()> {
        if !self.blocks.keys().eq(dims.keys()) {
            return Err(Error::Structure(format!(
                "POVM sectors {:?} do not match signal sectors {:?}",
                self.blocks
                    .keys()
                    .map(|l| l.to_string())
                    .collect::<Vec<_>>(),
                dims.keys().map(|l| l.to_string()).collect::<Vec<_>>(),
            )));
        }
        for (label, povm) in &self.blocks {
            let dim = dims[label];
            let elements = povm.elements(dim);
            let mut total = DMatrix::zeros(dim, dim);
            for e in &elements {
                if e.element.shape() != (dim, dim) {
                    return Err(Error::Structure(format!(
                        "element of shape {:?} in {dim}-dimensional sector {label}",
                        e.element.shape()
                    )));
                }
                if !(0.0..=PI).contains(&e.mu) {
                    return Err(Error::Structure(format!(
                        "estimate {} outside [0, π] in sector {label}",
                        e.mu
                    )));
                }
                if min_eigenvalue(&e.element) < -POVM_TOLERANCE {
                    return Err(Error::Structure(format!(
                        "non-positive element in sector {label}"
                    )));
                }
                total += &e.element;
            }
            let defect = (total - DMatrix::identity(dim, dim)).amax();
            if defect > POVM_TOLERANCE {
                return Err(Error::Structure(format!(
                    "elements in sector {label} miss the identity by {defect:e}"
                )));
            }
        }
        Ok(())
    }
}
