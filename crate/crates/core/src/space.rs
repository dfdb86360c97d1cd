//! Composite Hilbert spaces built from labeled subsystems.
//!
//! Flat indices are row-major over the subsystem list: the first subsystem is
//! the most significant digit, the last one varies fastest. The protocol
//! layout is always ordered `A1, A2, B1, B2, a1, a2`, so state dumps from
//! different runs can be compared index by index.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of the first ancilla qubit (five levels).
pub const A1: &str = "A1";
/// Label of the second ancilla qubit (five levels).
pub const A2: &str = "A2";
/// Label of the first information carrier (three levels).
pub const B1: &str = "B1";
/// Label of the second information carrier (three levels).
pub const B2: &str = "B2";
/// Label of the cavity mode coupling `|2>-|3>` of the ancillas and `|0>-|2>` of B1.
pub const MODE1: &str = "a1";
/// Label of the cavity mode coupling `|2>-|4>` of the ancillas and `|0>-|2>` of B2.
pub const MODE2: &str = "a2";

pub const ANCILLA_LEVELS: usize = 5;
pub const CARRIER_LEVELS: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceLayout {
    pub subsystems: Vec<Subsystem>,
}

impl SpaceLayout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, label: impl Into<String>, dim: usize) -> Self {
        self.subsystems.push(Subsystem { label: label.into(), dim });
        self
    }

    /// The six-factor protocol layout with `photon_levels` Fock states per
    /// cavity mode (photon truncation + 1).
    pub fn protocol(photon_levels: usize) -> Self {
        Self::new()
            .with(A1, ANCILLA_LEVELS)
            .with(A2, ANCILLA_LEVELS)
            .with(B1, CARRIER_LEVELS)
            .with(B2, CARRIER_LEVELS)
            .with(MODE1, photon_levels)
            .with(MODE2, photon_levels)
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Self {
        Self::new().with(label, dim)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertSpace {
    layout: SpaceLayout,
    strides: Vec<usize>,
    dim: usize,
}

/// Validates a layout and computes its stride table.
pub fn build_space(layout: SpaceLayout) -> Result<Arc<HilbertSpace>> {
    HilbertSpace::new(layout).map(Arc::new)
}

impl HilbertSpace {
    pub fn new(layout: SpaceLayout) -> Result<Self> {
        if layout.subsystems.is_empty() {
            return Err(Error::InvalidParameter("layout has no subsystems".into()));
        }
        for (i, s) in layout.subsystems.iter().enumerate() {
            if s.dim < 2 {
                return Err(Error::InvalidDimension { label: s.label.clone(), dim: s.dim });
            }
            if layout.subsystems[..i].iter().any(|o| o.label == s.label) {
                return Err(Error::DuplicateLabel(s.label.clone()));
            }
        }
        let mut strides = vec![1; layout.subsystems.len()];
        for i in (0..layout.subsystems.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * layout.subsystems[i + 1].dim;
        }
        let dim = strides[0] * layout.subsystems[0].dim;
        Ok(Self { layout, strides, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.layout.subsystems
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.layout
            .subsystems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn subsystem_dim(&self, label: &str) -> Result<usize> {
        Ok(self.layout.subsystems[self.position(label)?].dim)
    }

    /// Flat index of a multi-index given in layout order.
    pub fn index(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.strides.len() {
            return Err(Error::DimensionMismatch { expected: self.strides.len(), found: levels.len() });
        }
        let mut flat = 0;
        for ((&level, &stride), s) in levels.iter().zip(&self.strides).zip(&self.layout.subsystems) {
            if level >= s.dim {
                return Err(Error::IndexOutOfRange { row: level, col: 0, dim: s.dim });
            }
            flat += level * stride;
        }
        Ok(flat)
    }

    /// Flat index of the product state with the listed subsystems at the given
    /// levels and every other subsystem in level 0.
    pub fn index_of(&self, assignment: &[(&str, usize)]) -> Result<usize> {
        let mut levels = vec![0; self.strides.len()];
        for &(label, level) in assignment {
            levels[self.position(label)?] = level;
        }
        self.index(&levels)
    }

    pub fn levels(&self, flat: usize) -> Vec<usize> {
        self.strides
            .iter()
            .zip(&self.layout.subsystems)
            .map(|(&stride, s)| (flat / stride) % s.dim)
            .collect()
    }

    /// Level of one subsystem in a flat basis index.
    pub fn level_of(&self, flat: usize, position: usize) -> usize {
        (flat / self.strides[position]) % self.layout.subsystems[position].dim
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_dimensions() {
        assert_eq!(build_space(SpaceLayout::protocol(2)).unwrap().dim(), 900);
        assert_eq!(build_space(SpaceLayout::protocol(3)).unwrap().dim(), 2025);
        assert_eq!(build_space(SpaceLayout::single("q", 3)).unwrap().dim(), 3);
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(matches!(
            build_space(SpaceLayout::single("q", 1)),
            Err(Error::InvalidDimension { .. })
        ));
        assert!(matches!(
            build_space(SpaceLayout::new().with("q", 2).with("q", 3)),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(build_space(SpaceLayout::new()).is_err());
    }

    #[test]
    fn index_round_trip() {
        let space = build_space(SpaceLayout::protocol(2)).unwrap();
        for flat in [0, 1, 17, 451, 899] {
            assert_eq!(space.index(&space.levels(flat)).unwrap(), flat);
        }
        // a2 varies fastest
        assert_eq!(space.index_of(&[(MODE2, 1)]).unwrap(), 1);
        assert_eq!(space.index_of(&[(A1, 1)]).unwrap(), 180);
        assert!(space.index_of(&[("x", 0)]).is_err());
    }
}
