//! Dyadic lattice geometry on `[0,1)^d`.

mod family;
mod params;

pub use family::{CubeIndex, SparseFamily};
pub use params::{conjugate, ExponentParams};
pub(crate) use params::same;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported level. Keeps `2^(level*d)` inside a `u64` for d = 2.
pub const MAX_LEVEL: u32 = 30;

/// Dyadic cube `prod_i [j_i 2^-k, (j_i+1) 2^-k)` inside `[0,1)^d`.
///
/// Ordering is by dimension, then level, then index, so sorting a family
/// puts coarse cubes first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "CubeRecord", into = "CubeRecord")]
pub struct DyadicCube {
    dim: u8,
    level: u32,
    index: [u64; 2],
}

/// JSON form `{"level": k, "index": [j1, ..., jd]}`.
#[derive(Serialize, Deserialize)]
struct CubeRecord {
    level: u32,
    index: Vec<u64>,
}

impl TryFrom<CubeRecord> for DyadicCube {
    type Error = Error;

    fn try_from(r: CubeRecord) -> Result<Self> {
        DyadicCube::new(r.level, &r.index)
    }
}

impl From<DyadicCube> for CubeRecord {
    fn from(c: DyadicCube) -> Self {
        CubeRecord {
            level: c.level,
            index: c.index().to_vec(),
        }
    }
}

pub(crate) fn check_dim(dim: u8) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::param(format!("dimension d={dim} is not supported (d must be 1 or 2)")))
    }
}

impl DyadicCube {
    pub fn new(level: u32, index: &[u64]) -> Result<Self> {
        let dim = index.len();
        let fail = |reason: String| Error::InvalidCube {
            cube: format!("level {level} index {index:?}"),
            reason,
        };
        if dim != 1 && dim != 2 {
            return Err(fail(format!("dimension {dim} is not 1 or 2")));
        }
        if level > MAX_LEVEL {
            return Err(fail(format!("level exceeds {MAX_LEVEL}")));
        }
        let side = 1u64 << level;
        if index.iter().any(|&j| j >= side) {
            return Err(fail(format!("index component outside [0, 2^{level})")));
        }
        let mut idx = [0u64; 2];
        idx[..dim].copy_from_slice(index);
        Ok(DyadicCube {
            dim: dim as u8,
            level,
            index: idx,
        })
    }

    /// The base cube `[0,1)^d`.
    pub fn unit(dim: u8) -> Self {
        DyadicCube {
            dim,
            level: 0,
            index: [0, 0],
        }
    }

    /// One-dimensional interval `[j 2^-k, (j+1) 2^-k)`.
    pub fn interval(level: u32, j: u64) -> Result<Self> {
        DyadicCube::new(level, &[j])
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> &[u64] {
        &self.index[..self.dim as usize]
    }

    /// Lebesgue measure `2^(-k d)`.
    pub fn measure(&self) -> f64 {
        0.5f64.powi((self.level * self.dim as u32) as i32)
    }

    pub fn side(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    /// Endpoints of a one-dimensional cube.
    pub fn bounds(&self) -> (f64, f64) {
        let h = self.side();
        (self.index[0] as f64 * h, (self.index[0] + 1) as f64 * h)
    }

    /// The `2^d` cubes of the next level partitioning `self`.
    pub fn children(&self) -> Vec<DyadicCube> {
        let level = self.level + 1;
        match self.dim {
            1 => (0..2)
                .map(|e| DyadicCube {
                    dim: 1,
                    level,
                    index: [2 * self.index[0] + e, 0],
                })
                .collect(),
            _ => (0..4)
                .map(|e| DyadicCube {
                    dim: 2,
                    level,
                    index: [2 * self.index[0] + (e >> 1), 2 * self.index[1] + (e & 1)],
                })
                .collect(),
        }
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.level > 0).then(|| self.ancestor_at(self.level - 1))
    }

    /// Ancestor at a coarser (or equal) level.
    pub fn ancestor_at(&self, level: u32) -> DyadicCube {
        debug_assert!(level <= self.level);
        let shift = self.level - level;
        DyadicCube {
            dim: self.dim,
            level,
            index: [self.index[0] >> shift, self.index[1] >> shift],
        }
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        self.dim == other.dim
            && other.level >= self.level
            && other.ancestor_at(self.level).index == self.index
    }

    /// `other ⊊ self`.
    pub fn strictly_contains(&self, other: &DyadicCube) -> bool {
        other.level > self.level && self.contains(other)
    }

    pub fn intersects(&self, other: &DyadicCube) -> bool {
        self.contains(other) || other.contains(self)
    }

    /// Row-major position among the cubes of the same level.
    pub fn linear_index(&self) -> u64 {
        match self.dim {
            1 => self.index[0],
            _ => (self.index[0] << self.level) | self.index[1],
        }
    }

    pub fn from_linear(dim: u8, level: u32, lin: u64) -> DyadicCube {
        let index = match dim {
            1 => [lin, 0],
            _ => [lin >> level, lin & ((1u64 << level) - 1)],
        };
        DyadicCube { dim, level, index }
    }

    /// Linear indices of the level-`depth` cells inside `self`.
    pub fn cells_at(&self, depth: u32) -> Vec<u64> {
        assert!(depth >= self.level, "cells_at: depth below cube level");
        let shift = depth - self.level;
        let span = 1u64 << shift;
        match self.dim {
            1 => (self.index[0] * span..(self.index[0] + 1) * span).collect(),
            _ => {
                let mut out = Vec::with_capacity((span * span) as usize);
                for a in self.index[0] * span..(self.index[0] + 1) * span {
                    for b in self.index[1] * span..(self.index[1] + 1) * span {
                        out.push((a << depth) | b);
                    }
                }
                out
            }
        }
    }

    /// All cubes of level `0..=depth`, coarse first.
    pub fn lattice(dim: u8, depth: u32) -> impl Iterator<Item = DyadicCube> {
        (0..=depth).flat_map(move |k| {
            (0..cells_per_level(dim, k)).map(move |i| DyadicCube::from_linear(dim, k, i))
        })
    }
}

/// Number of cubes at level `k`, i.e. `2^(k d)`.
pub fn cells_per_level(dim: u8, k: u32) -> u64 {
    1u64 << (k * dim as u32)
}

/// Linear index of the parent of the level-`level` cube with index `lin`.
pub(crate) fn parent_linear(dim: u8, level: u32, lin: u64) -> u64 {
    match dim {
        1 => lin >> 1,
        _ => {
            let a = lin >> level;
            let b = lin & ((1u64 << level) - 1);
            ((a >> 1) << (level - 1)) | (b >> 1)
        }
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = 1u64 << self.level;
        let parts: Vec<String> = self
            .index()
            .iter()
            .map(|&j| format!("[{}/{h},{}/{h})", j, j + 1))
            .collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl fmt::Debug for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(k={}, j={:?})", self.level, self.index())
    }
}
