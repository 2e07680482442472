use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::DyadicCube;
use crate::error::{Error, Result};

/// Lookup structure for a finite set of cubes: membership plus the set of
/// strict ancestors of members, which answers "does anything from the set
/// live strictly inside C" in O(1).
#[derive(Debug, Clone, Default)]
pub struct CubeIndex {
    members: HashSet<DyadicCube>,
    strict_ancestors: HashSet<DyadicCube>,
}

impl CubeIndex {
    pub fn new<'a>(cubes: impl IntoIterator<Item = &'a DyadicCube>) -> Self {
        let mut idx = CubeIndex::default();
        for q in cubes {
            idx.members.insert(*q);
            let mut cur = *q;
            while let Some(p) = cur.parent() {
                if !idx.strict_ancestors.insert(p) {
                    break;
                }
                cur = p;
            }
        }
        idx
    }

    pub fn contains(&self, q: &DyadicCube) -> bool {
        self.members.contains(q)
    }

    pub fn has_member_strictly_inside(&self, q: &DyadicCube) -> bool {
        self.strict_ancestors.contains(q)
    }

    /// Maximal members strictly contained in `q`.
    pub fn maximal_proper_subcubes(&self, q: &DyadicCube) -> Vec<DyadicCube> {
        let mut out = Vec::new();
        let mut stack = vec![*q];
        while let Some(c) = stack.pop() {
            if c != *q && self.members.contains(&c) {
                out.push(c);
            } else if self.strict_ancestors.contains(&c) {
                stack.extend(c.children());
            }
        }
        out.sort();
        out
    }

    /// `q` minus the union of its maximal proper subcubes from the set,
    /// written as a list of disjoint dyadic cubes.
    pub fn remainder(&self, q: &DyadicCube) -> Vec<DyadicCube> {
        let mut out = Vec::new();
        let mut stack = vec![*q];
        while let Some(c) = stack.pop() {
            if c != *q && self.members.contains(&c) {
                continue;
            }
            if self.strict_ancestors.contains(&c) {
                stack.extend(c.children());
            } else {
                out.push(c);
            }
        }
        out.sort();
        out
    }
}

/// Total Lebesgue measure of a list of disjoint cubes.
pub fn union_measure(cubes: &[DyadicCube]) -> f64 {
    cubes.iter().map(DyadicCube::measure).sum()
}

/// A verified sparse family: each cube owns `E_Q = Q \ (maximal proper
/// subcubes in the family)`, the `E_Q` are pairwise disjoint and
/// `|E_Q| >= gamma |Q|`.
#[derive(Debug, Clone, Serialize)]
pub struct SparseFamily {
    dim: u8,
    gamma: f64,
    cubes: Vec<DyadicCube>,
    #[serde(skip)]
    e_sets: Vec<Vec<DyadicCube>>,
    #[serde(skip)]
    position: HashMap<DyadicCube, usize>,
}

impl SparseFamily {
    /// Builds the `E_Q` sets and checks sparseness. Cubes are deduplicated
    /// and sorted; the first violating cube in that order is reported.
    pub fn verify(cubes: impl IntoIterator<Item = DyadicCube>, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::param(format!("gamma = {gamma} must lie in (0,1)")));
        }
        let mut cubes: Vec<DyadicCube> = cubes.into_iter().collect();
        cubes.sort();
        cubes.dedup();
        let dim = match cubes.first() {
            Some(q) => q.dim(),
            None => return Err(Error::param("a sparse family needs at least one cube")),
        };
        if let Some(bad) = cubes.iter().find(|q| q.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }

        let index = CubeIndex::new(&cubes);
        let mut e_sets = Vec::with_capacity(cubes.len());
        for q in &cubes {
            let e = index.remainder(q);
            let ratio = union_measure(&e) / q.measure();
            if ratio < gamma {
                return Err(Error::SparsenessViolation {
                    cube: *q,
                    ratio,
                    gamma,
                });
            }
            e_sets.push(e);
        }
        check_disjoint(&cubes, &e_sets)?;

        let position = cubes.iter().enumerate().map(|(i, q)| (*q, i)).collect();
        Ok(SparseFamily {
            dim,
            gamma,
            cubes,
            e_sets,
            position,
        })
    }

    /// The tower `{[0, 2^-k) : k = 0..=depth}` in d = 1. Each `E_Q` is the
    /// right half of its cube, so the family is sparse with gamma = 1/2.
    pub fn tower(depth: u32) -> Result<Self> {
        let cubes = (0..=depth).map(|k| DyadicCube::interval(k, 0)).collect::<Result<Vec<_>>>()?;
        SparseFamily::verify(cubes, 0.5)
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn contains(&self, q: &DyadicCube) -> bool {
        self.position.contains_key(q)
    }

    pub fn e_set(&self, q: &DyadicCube) -> Option<&[DyadicCube]> {
        self.position.get(q).map(|&i| self.e_sets[i].as_slice())
    }

    pub fn max_level(&self) -> u32 {
        self.cubes.iter().map(DyadicCube::level).max().unwrap_or(0)
    }

    /// `|union of proper subcubes of Q in the family| / |Q|`.
    pub fn covered_fraction(&self, q: &DyadicCube) -> Option<f64> {
        self.e_set(q).map(|e| 1.0 - union_measure(e) / q.measure())
    }

    /// The strengthened condition
    /// `|union_{Q' ⊊ Q} Q'| <= 4^-(1 - alpha/d) |Q|` for every member.
    pub fn check_extra_sparsification(&self, alpha: f64) -> bool {
        let bound = 4f64.powf(-(1.0 - alpha / self.dim as f64));
        self.cubes.iter().all(|q| {
            let e = &self.e_sets[self.position[q]];
            q.measure() - union_measure(e) <= bound * q.measure()
        })
    }
}

fn check_disjoint(cubes: &[DyadicCube], e_sets: &[Vec<DyadicCube>]) -> Result<()> {
    let mut owner: HashMap<DyadicCube, usize> = HashMap::new();
    for (i, e) in e_sets.iter().enumerate() {
        for piece in e {
            if let Some(&j) = owner.get(piece) {
                return Err(Error::OverlappingEsets {
                    first: cubes[j],
                    second: cubes[i],
                });
            }
            owner.insert(*piece, i);
        }
    }
    // A piece may also sit inside a strictly larger piece owned by another cube.
    for (piece, &i) in &owner {
        let mut cur = *piece;
        while let Some(p) = cur.parent() {
            if let Some(&j) = owner.get(&p) {
                if j != i {
                    return Err(Error::OverlappingEsets {
                        first: cubes[j],
                        second: cubes[i],
                    });
                }
            }
            cur = p;
        }
    }
    Ok(())
}
