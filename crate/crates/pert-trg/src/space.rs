//! Index bookkeeping for the perturbative tensors.
//!
//! Every coefficient tensor lives over an ordered index space whose blocks
//! are labelled by a role and the coarse-graining level that created them.

use crate::error::PertTrgError;

/// What a coordinate of a perturbative tensor refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexRole {
    /// A lattice leg field of the even (free-mirroring) network.
    EvenLattice,
    /// A derivative leg on the current split's bond gaussian, created by the
    /// mixed-term substitution; becomes next level's odd carrier.
    SplitDerivative,
    /// A one-generation-old derivative insertion riding on an existing bond;
    /// consumed by the next loop integration.
    OddCarrier,
    /// An inner loop field in the middle of being integrated out.
    DeltaOdd,
}

/// Contiguous run of indices sharing a role and a birth level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceBlock {
    pub role: IndexRole,
    pub level: usize,
    pub len: usize,
}

/// Ordered block layout of one tensor's index range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldIndexSpace {
    blocks: Vec<SpaceBlock>,
}

impl FieldIndexSpace {
    pub fn new(blocks: Vec<SpaceBlock>) -> Self {
        FieldIndexSpace { blocks }
    }

    /// Level-n four-leg weight space: 4chi lattice legs followed by 4chi
    /// carrier coordinates (one insertion slot per leg field).
    pub fn payload(chi: usize, level: usize) -> Self {
        FieldIndexSpace::new(vec![
            SpaceBlock { role: IndexRole::EvenLattice, level, len: 4 * chi },
            SpaceBlock { role: IndexRole::OddCarrier, level, len: 4 * chi },
        ])
    }

    /// Three-leg half-weight space produced by a split at level `level`:
    /// 2chi home legs, 2chi inherited carrier coordinates, then chi_next
    /// fresh derivative legs on the new bond.
    pub fn cubic(chi: usize, chi_next: usize, level: usize) -> Self {
        FieldIndexSpace::new(vec![
            SpaceBlock { role: IndexRole::EvenLattice, level, len: 2 * chi },
            SpaceBlock { role: IndexRole::OddCarrier, level, len: 2 * chi },
            SpaceBlock { role: IndexRole::SplitDerivative, level, len: chi_next },
        ])
    }

    /// Inner-loop integration space: 4chi loop fields, their 4chi carrier
    /// partners, and the 4chi_next pass-through derivative legs.
    pub fn plaquette(chi: usize, chi_next: usize, level: usize) -> Self {
        FieldIndexSpace::new(vec![
            SpaceBlock { role: IndexRole::DeltaOdd, level, len: 4 * chi },
            SpaceBlock { role: IndexRole::OddCarrier, level, len: 4 * chi },
            SpaceBlock { role: IndexRole::SplitDerivative, level, len: 4 * chi_next },
        ])
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.len).sum()
    }

    pub fn blocks(&self) -> &[SpaceBlock] {
        &self.blocks
    }

    /// (role, level) label of each coordinate, in index order.
    pub fn labels(&self) -> impl Iterator<Item = (IndexRole, usize)> + '_ {
        self.blocks
            .iter()
            .flat_map(|b| std::iter::repeat((b.role, b.level)).take(b.len))
    }

    /// Index range of the first block with the given role, if present.
    pub fn block_range(&self, role: IndexRole) -> Option<std::ops::Range<usize>> {
        let mut start = 0;
        for b in &self.blocks {
            if b.role == role {
                return Some(start..start + b.len);
            }
            start += b.len;
        }
        None
    }

    pub fn require_block(
        &self,
        role: IndexRole,
    ) -> Result<std::ops::Range<usize>, PertTrgError> {
        self.block_range(role).ok_or_else(|| {
            PertTrgError::InvalidSpace(format!(
                "no {role:?} block in space {:?}",
                self.blocks
            ))
        })
    }
}
