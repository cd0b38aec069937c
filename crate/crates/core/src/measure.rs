//! Finite measure spaces and partitions of their atoms.
//!
//! Every atom carries a strictly positive mass, so there are no null sets and
//! a partition of the atoms plays the role of a sub-σ-algebra.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite measure space: atoms `0..n` with strictly positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureSpaceRepr", into = "MeasureSpaceRepr")]
pub struct MeasureSpace {
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MeasureSpaceRepr {
    weights: Vec<f64>,
}

impl TryFrom<MeasureSpaceRepr> for MeasureSpace {
    type Error = Error;
    fn try_from(r: MeasureSpaceRepr) -> Result<Self> {
        MeasureSpace::new(r.weights)
    }
}

impl From<MeasureSpace> for MeasureSpaceRepr {
    fn from(m: MeasureSpace) -> Self {
        MeasureSpaceRepr { weights: m.weights }
    }
}

impl MeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Validation(
                "measure space needs at least one atom".into(),
            ));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::Validation(format!(
                "atom {i} has weight {w}; weights must be finite and strictly positive"
            )));
        }
        Ok(Self { weights })
    }

    /// Counting measure on `n` atoms.
    pub fn counting(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    /// Uniform probability measure on `n` atoms.
    pub fn uniform_probability(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mass_of(&self, atoms: &[usize]) -> f64 {
        atoms.iter().map(|&a| self.weights[a]).sum()
    }
}

/// A partition of the atoms into disjoint nonempty blocks covering everything.
///
/// Stored canonically: each block sorted ascending, blocks ordered by their
/// least element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    #[serde(skip)]
    block_of: Vec<usize>,
}

impl Partition {
    pub fn new(blocks: Vec<Vec<usize>>, space: &MeasureSpace) -> Result<Self> {
        Self::with_atoms(blocks, space.len())
    }

    pub fn with_atoms(mut blocks: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut block_of = vec![usize::MAX; n];
        for (bi, block) in blocks.iter_mut().enumerate() {
            if block.is_empty() {
                return Err(Error::Validation(format!("block {bi} is empty")));
            }
            block.sort_unstable();
            for &a in block.iter() {
                if a >= n {
                    return Err(Error::Validation(format!(
                        "atom index {a} out of range for {n} atoms"
                    )));
                }
                if block_of[a] != usize::MAX {
                    return Err(Error::Validation(format!(
                        "atom {a} appears in more than one block"
                    )));
                }
                block_of[a] = bi;
            }
        }
        if let Some(a) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::Validation(format!(
                "atom {a} is not covered by any block"
            )));
        }
        blocks.sort_by_key(|b| b[0]);
        let mut block_of = vec![0; n];
        for (bi, block) in blocks.iter().enumerate() {
            for &a in block {
                block_of[a] = bi;
            }
        }
        Ok(Self { blocks, block_of })
    }

    /// The partition into singletons.
    pub fn discrete(n: usize) -> Self {
        Self::with_atoms((0..n).map(|a| vec![a]).collect(), n).expect("singletons partition")
    }

    /// The single-block partition.
    pub fn trivial(n: usize) -> Self {
        Self::with_atoms(vec![(0..n).collect()], n).expect("one-block partition")
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_atoms(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom]
    }

    /// True iff every block of `finer` lies inside a block of `self`.
    pub fn is_coarser(&self, finer: &Partition) -> bool {
        self.num_atoms() == finer.num_atoms()
            && finer.blocks.iter().all(|b| {
                let target = self.block_of[b[0]];
                b.iter().all(|&a| self.block_of[a] == target)
            })
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            blocks: Vec<Vec<usize>>,
        }
        let r = Repr::deserialize(d)?;
        let n = r.blocks.iter().map(Vec::len).sum();
        Partition::with_atoms(r.blocks, n).map_err(serde::de::Error::custom)
    }
}
