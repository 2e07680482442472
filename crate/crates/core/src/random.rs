//! Seeded random instances: sparse families, grid functions and weights.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::{DyadicCube, SparseFamily};
use crate::grid::GridFunction;
use crate::weights::Weight;

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Descendants of `q` at most `span` levels down and not below `depth`.
fn candidates(q: &DyadicCube, depth: u32, span: u32) -> Vec<DyadicCube> {
    let mut out = Vec::new();
    let mut layer = vec![*q];
    for _ in 0..span {
        layer = layer.iter().flat_map(DyadicCube::children).collect();
        if layer.first().is_none_or(|c| c.level() > depth) {
            break;
        }
        out.extend(&layer);
    }
    out
}

/// Picks disjoint proper subcubes of `q` covering at most `budget * |q|`.
fn pick_children(rng: &mut InstanceRng, q: &DyadicCube, depth: u32, budget: f64) -> Vec<DyadicCube> {
    let mut pool = candidates(q, depth, 3);
    pool.shuffle(rng);
    let tries = rng.random_range(0..=4usize);
    let mut taken: Vec<DyadicCube> = Vec::new();
    let mut used = 0.0;
    for c in pool.into_iter().take(3 * tries + 1) {
        if taken.len() >= tries {
            break;
        }
        if used + c.measure() <= budget * q.measure() + 1e-15 && taken.iter().all(|t| !t.intersects(&c)) {
            used += c.measure();
            taken.push(c);
        }
    }
    taken
}

fn grow(rng: &mut InstanceRng, roots: Vec<DyadicCube>, depth: u32, budget: f64) -> Vec<DyadicCube> {
    let mut out = Vec::new();
    let mut stack = roots;
    while let Some(q) = stack.pop() {
        out.push(q);
        if q.level() < depth {
            stack.extend(pick_children(rng, &q, depth, budget));
        }
    }
    out
}

fn build(rng: &mut InstanceRng, dim: u8, depth: u32, gamma: f64, budget: f64, root: bool) -> SparseFamily {
    let roots = if root || depth == 0 || rng.random_bool(0.5) {
        vec![DyadicCube::unit(dim)]
    } else {
        let level = rng.random_range(1..=depth.min(2));
        let mut all: Vec<DyadicCube> = DyadicCube::lattice(dim, level)
            .filter(|c| c.level() == level)
            .collect();
        all.shuffle(rng);
        let n = rng.random_range(1..=all.len());
        all.truncate(n);
        all
    };
    let cubes = grow(rng, roots, depth, budget);
    SparseFamily::verify(cubes, gamma).expect("generated family is sparse by construction")
}

/// Random sparse family with cubes of level `<= depth`.
pub fn sparse_family(rng: &mut InstanceRng, dim: u8, depth: u32, gamma: f64) -> SparseFamily {
    build(rng, dim, depth, gamma, 1.0 - gamma, false)
}

/// Random sparse family that always contains `[0,1)^d`.
pub fn sparse_family_with_root(rng: &mut InstanceRng, dim: u8, depth: u32, gamma: f64) -> SparseFamily {
    build(rng, dim, depth, gamma, 1.0 - gamma, true)
}

/// Random family in which every cube's proper subcubes cover at most
/// `4^-(1 - alpha/d)` of it.
pub fn extra_sparse_family(rng: &mut InstanceRng, dim: u8, depth: u32, alpha: f64) -> SparseFamily {
    let bound = 4f64.powf(-(1.0 - alpha / dim as f64));
    let gamma = (1.0 - bound).clamp(1e-9, 1.0 - 1e-9);
    build(rng, dim, depth, gamma, bound, false)
}

/// Cell values drawn uniformly from `[0.05, 2)`.
pub fn positive_grid(rng: &mut InstanceRng, dim: u8, depth: u32) -> GridFunction {
    let n = 1usize << (depth * dim as u32);
    let values = (0..n).map(|_| rng.random_range(0.05..2.0)).collect();
    GridFunction::new(dim, depth, values).expect("valid grid")
}

/// Random `{0,1}`-valued grid with at least one nonzero cell.
pub fn mask_grid(rng: &mut InstanceRng, dim: u8, depth: u32) -> GridFunction {
    let n = 1usize << (depth * dim as u32);
    let mut values: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
    let i = rng.random_range(0..n);
    values[i] = 1.0;
    GridFunction::new(dim, depth, values).expect("valid grid")
}

/// `f` plus a random nonnegative grid.
pub fn dominating(rng: &mut InstanceRng, f: &GridFunction) -> GridFunction {
    let values = f.values().iter().map(|v| v + rng.random_range(0.0..1.0)).collect();
    GridFunction::new(f.dim(), f.depth(), values).expect("valid grid")
}

/// Grid weight with log-uniform cell values in `[e^-3, e^3]`.
pub fn grid_weight(rng: &mut InstanceRng, dim: u8, depth: u32) -> Weight {
    let n = 1usize << (depth * dim as u32);
    let values = (0..n).map(|_| rng.random_range(-3.0f64..3.0).exp()).collect();
    Weight::grid(GridFunction::new(dim, depth, values).expect("valid grid")).expect("positive grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_are_reproducible() {
        let a = sparse_family(&mut rng(7), 1, 8, 0.5);
        let b = sparse_family(&mut rng(7), 1, 8, 0.5);
        assert_eq!(a.cubes(), b.cubes());
    }

    #[test]
    fn generated_families_verify() {
        let mut r = rng(1);
        for _ in 0..50 {
            let s = sparse_family(&mut r, 1, 8, 0.5);
            assert!(s.max_level() <= 8);
            let s = sparse_family(&mut r, 2, 4, 0.5);
            assert!(s.max_level() <= 4);
            for alpha in [0.0, 0.25, 0.5] {
                let s = extra_sparse_family(&mut r, 1, 8, alpha);
                assert!(s.check_extra_sparsification(alpha));
            }
        }
    }
}
